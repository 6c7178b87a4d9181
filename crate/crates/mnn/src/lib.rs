//! Multiscale neural networks built from the structure of hierarchical
//! matrices.
//!
//! The crate has three layers of machinery:
//!
//! * a numerical core — dyadic grid [`hierarchy`], dense-operator
//!   compression and factored matvec in [`hmatrix`], small in-repo
//!   [`linalg`] kernels and periodic [`spectral`] utilities;
//! * the network stack — locally connected and convolutional layer
//!   primitives in [`layers`], multiscale model assembly in [`model`] and
//!   loss/optimizer/training loop in [`train`];
//! * problem tooling — PDE-based data generators in [`datagen`] and binary
//!   array / model persistence in [`io`].
//!
//! The `mnn` command-line harness (its own crate) wires these together for
//! dataset generation, training, evaluation and verification sweeps.

pub mod error;
pub mod hierarchy;
pub mod hmatrix;
pub mod linalg;
pub mod spectral;

pub use error::{Error, Result};
