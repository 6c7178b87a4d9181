//! Dyadic decomposition of a periodic grid with neighbor and interaction
//! lists.
//!
//! A grid of `N = 2^L * m` points (per dimension) is split into `2^l`
//! segments per dimension at level `l`, for `l = 0..=L`. For every segment
//! at level `l >= 2` the *neighbor list* holds the periodically adjacent
//! segments (including the segment itself) and the *interaction list* holds
//! the children of the parent's neighbors that are not themselves neighbors.
//! At level 2 the interaction list is everything outside the neighbor list.
//!
//! In two dimensions segments become boxes, built as tensor products of the
//! one-dimensional segments, and all adjacency is per-dimension periodic.

use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// Spatial dimensionality of the grid (the library supports 1 and 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Dim {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

/// Level-indexed segment/box hierarchy of a periodic grid.
///
/// Segments are uniform, so they are stored implicitly as `(start, length)`
/// ranges derived from the level rather than as explicit index sets.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    n: usize,
    levels: usize,
    leaf: usize,
    dim: Dim,
}

impl DyadicPartition {
    /// Builds the hierarchy for a grid of `n` points per dimension with
    /// `levels` refinement levels and leaf segments of `leaf` points.
    ///
    /// Requires `n = 2^levels * leaf` and `levels >= 2` (interaction lists
    /// are only defined from level 2 on).
    pub fn new(n: usize, levels: usize, leaf: usize, dim: Dim) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 levels, got {levels}"
            )));
        }
        if leaf == 0 || n != (1usize << levels) * leaf {
            return Err(Error::InvalidConfig(format!(
                "grid size {n} != 2^{levels} * {leaf}"
            )));
        }
        Ok(DyadicPartition { n, levels, leaf, dim })
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Total number of grid points (`n` in 1D, `n^2` in 2D).
    pub fn point_count(&self) -> usize {
        match self.dim {
            Dim::One => self.n,
            Dim::Two => self.n * self.n,
        }
    }

    /// Number of segments per dimension at `level`.
    pub fn segments_per_dim(&self, level: usize) -> usize {
        1usize << level
    }

    /// Number of segments (1D) or boxes (2D) at `level`.
    pub fn segment_count(&self, level: usize) -> usize {
        match self.dim {
            Dim::One => 1usize << level,
            Dim::Two => 1usize << (2 * level),
        }
    }

    /// Points per segment side at `level`.
    pub fn segment_len(&self, level: usize) -> usize {
        self.n >> level
    }

    /// Index range covered by 1D segment `i` at `level`.
    pub fn segment_range(&self, level: usize, i: usize) -> std::ops::Range<usize> {
        let len = self.segment_len(level);
        i * len..(i + 1) * len
    }

    /// Splits a 2D box index into `(i1, i2)` coordinates at `level`.
    pub fn box_coords(&self, level: usize, i: usize) -> (usize, usize) {
        let per = self.segments_per_dim(level);
        (i / per, i % per)
    }

    /// Inverse of [`box_coords`](Self::box_coords).
    pub fn box_index(&self, level: usize, i1: usize, i2: usize) -> usize {
        i1 * self.segments_per_dim(level) + i2
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level < 2 || level > self.levels {
            return Err(Error::InvalidConfig(format!(
                "level {level} outside 2..={}",
                self.levels
            )));
        }
        Ok(())
    }

    /// Neighbor list of segment/box `i` at `level`: the periodically
    /// adjacent segments, including `i` itself. Sorted.
    pub fn neighbor_list(&self, level: usize, i: usize) -> Result<Vec<usize>> {
        self.check_level(level)?;
        let per = self.segments_per_dim(level);
        let set: BTreeSet<usize> = match self.dim {
            Dim::One => {
                debug_assert!(i < per);
                [-1isize, 0, 1]
                    .iter()
                    .map(|&o| wrap(i as isize + o, per))
                    .collect()
            }
            Dim::Two => {
                let (i1, i2) = self.box_coords(level, i);
                let mut s = BTreeSet::new();
                for o1 in -1isize..=1 {
                    for o2 in -1isize..=1 {
                        s.insert(self.box_index(
                            level,
                            wrap(i1 as isize + o1, per),
                            wrap(i2 as isize + o2, per),
                        ));
                    }
                }
                s
            }
        };
        Ok(set.into_iter().collect())
    }

    /// Interaction list of segment/box `i` at `level`. At level 2 this is
    /// every segment not in the neighbor list; at finer levels it is the
    /// children of the parent's neighbors minus the neighbor list. Sorted.
    pub fn interaction_list(&self, level: usize, i: usize) -> Result<Vec<usize>> {
        self.check_level(level)?;
        let nl: BTreeSet<usize> = self.neighbor_list(level, i)?.into_iter().collect();
        let candidates: BTreeSet<usize> = if level == 2 {
            (0..self.segment_count(level)).collect()
        } else {
            let per_parent = self.segments_per_dim(level - 1);
            match self.dim {
                Dim::One => {
                    let parent = i / 2;
                    let mut s = BTreeSet::new();
                    for o in -1isize..=1 {
                        let p = wrap(parent as isize + o, per_parent);
                        s.insert(2 * p);
                        s.insert(2 * p + 1);
                    }
                    s
                }
                Dim::Two => {
                    let (i1, i2) = self.box_coords(level, i);
                    let (p1, p2) = (i1 / 2, i2 / 2);
                    let mut s = BTreeSet::new();
                    for o1 in -1isize..=1 {
                        for o2 in -1isize..=1 {
                            let q1 = wrap(p1 as isize + o1, per_parent);
                            let q2 = wrap(p2 as isize + o2, per_parent);
                            for c1 in 0..2 {
                                for c2 in 0..2 {
                                    s.insert(self.box_index(level, 2 * q1 + c1, 2 * q2 + c2));
                                }
                            }
                        }
                    }
                    s
                }
            }
        };
        Ok(candidates.difference(&nl).copied().collect())
    }

    /// Cyclic band of the interaction pattern at `level`: 2 at level 2 and
    /// 3 at finer levels (per-dimension offset bound of interaction
    /// partners).
    pub fn interaction_band(&self, level: usize) -> usize {
        if level == 2 {
            2
        } else {
            3
        }
    }
}

#[inline]
pub(crate) fn wrap(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Signed per-dimension offsets `o` with `lo <= |o| <= hi`, deduplicated by
/// the segment they reach on a cyclic axis of `n_seg` segments. When two
/// offsets alias the same segment (only possible on very coarse axes) the
/// positive one is kept. Sorted by offset value.
pub fn dedup_offsets(n_seg: usize, lo: usize, hi: usize) -> Vec<isize> {
    let mut seen = BTreeSet::new();
    let mut kept = Vec::new();
    let mut candidates: Vec<isize> = Vec::new();
    for a in lo..=hi {
        candidates.push(a as isize);
        if a != 0 {
            candidates.push(-(a as isize));
        }
    }
    // prefer small magnitude, then positive sign
    candidates.sort_by_key(|o| (o.abs(), o.is_negative()));
    for o in candidates {
        let target = wrap(o, n_seg);
        if seen.insert(target) {
            kept.push(o);
        }
    }
    kept.sort_unstable();
    kept
}

/// The canonical offset that reaches segment `j` from segment `i` within a
/// cyclic band of half-width `band`, if one exists. Mirrors the
/// deduplication rule of [`dedup_offsets`].
pub fn canonical_offset(n_seg: usize, band: usize, i: usize, j: usize) -> Option<isize> {
    let mut best: Option<isize> = None;
    for a in 0..=band as isize {
        for o in [a, -a] {
            if wrap(i as isize + o, n_seg) == j {
                let better = match best {
                    None => true,
                    Some(b) => (o.abs(), o.is_negative()) < (b.abs(), b.is_negative()),
                };
                if better {
                    best = Some(o);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        assert!(DyadicPartition::new(320, 6, 5, Dim::One).is_ok());
        assert!(DyadicPartition::new(321, 6, 5, Dim::One).is_err());
        assert!(DyadicPartition::new(20, 1, 10, Dim::One).is_err());
        assert!(DyadicPartition::new(320, 6, 4, Dim::One).is_err());
    }

    #[test]
    fn paper_scale_partition() {
        // N=320, L=6, m=5: level 6 has 64 segments of 5 points each
        let p = DyadicPartition::new(320, 6, 5, Dim::One).unwrap();
        assert_eq!(p.segment_count(6), 64);
        assert_eq!(p.segment_len(6), 5);
        assert_eq!(p.segment_range(6, 63), 315..320);
    }

    #[test]
    fn tiny_partition_segments() {
        // N=16, L=2, m=4: level 2 has 4 segments {0..3},...,{12..15}
        let p = DyadicPartition::new(16, 2, 4, Dim::One).unwrap();
        assert_eq!(p.segment_count(2), 4);
        let ranges: Vec<_> = (0..4).map(|i| p.segment_range(2, i)).collect();
        assert_eq!(ranges, vec![0..4, 4..8, 8..12, 12..16]);
    }

    #[test]
    fn two_dim_partition() {
        // N=80 per dim, L=4, m=5: level 4 has 256 boxes of 5x5 points
        let p = DyadicPartition::new(80, 4, 5, Dim::Two).unwrap();
        assert_eq!(p.segment_count(4), 256);
        assert_eq!(p.segment_len(4), 5);
    }

    #[test]
    fn neighbor_interior_and_wrap() {
        let p = DyadicPartition::new(320, 6, 5, Dim::One).unwrap();
        assert_eq!(p.neighbor_list(3, 4).unwrap(), vec![3, 4, 5]);
        // boundary segment wraps around (0-based: segment 0 at level 2)
        assert_eq!(p.neighbor_list(2, 0).unwrap(), vec![0, 1, 3]);
        // 2D: always 9 boxes
        let p2 = DyadicPartition::new(32, 3, 4, Dim::Two).unwrap();
        for i in [0usize, 5, 63] {
            assert_eq!(p2.neighbor_list(2, i % 16).unwrap().len(), 9);
            assert_eq!(p2.neighbor_list(3, i).unwrap().len(), 9);
        }
    }

    #[test]
    fn interaction_counts() {
        let p = DyadicPartition::new(320, 6, 5, Dim::One).unwrap();
        // level 2: 4 segments minus 3 neighbors = 1
        for i in 0..4 {
            assert_eq!(p.interaction_list(2, i).unwrap().len(), 1);
        }
        // level >= 3: 6 children of 3 parents minus 3 neighbors = 3
        for l in 3..=6 {
            for i in 0..p.segment_count(l) {
                assert_eq!(p.interaction_list(l, i).unwrap().len(), 3, "l={l} i={i}");
            }
        }
    }

    #[test]
    fn interaction_band_is_three_at_fine_levels() {
        let p = DyadicPartition::new(320, 6, 5, Dim::One).unwrap();
        for l in 3..=6 {
            let per = p.segments_per_dim(l) as isize;
            let mut max_off = 0;
            for i in 0..p.segment_count(l) {
                for j in p.interaction_list(l, i).unwrap() {
                    let d = (j as isize - i as isize).rem_euclid(per);
                    let off = d.min(per - d);
                    max_off = max_off.max(off);
                }
            }
            assert_eq!(max_off, 3);
            assert_eq!(p.interaction_band(l), 3);
        }
        assert_eq!(p.interaction_band(2), 2);
    }

    #[test]
    fn lists_are_symmetric_and_complete() {
        for (dim, n, l, m) in [(Dim::One, 64, 4, 4), (Dim::Two, 32, 3, 4)] {
            let p = DyadicPartition::new(n, l, m, dim).unwrap();
            for level in 2..=l {
                let count = p.segment_count(level);
                let nls: Vec<Vec<usize>> =
                    (0..count).map(|i| p.neighbor_list(level, i).unwrap()).collect();
                let ils: Vec<Vec<usize>> =
                    (0..count).map(|i| p.interaction_list(level, i).unwrap()).collect();
                for i in 0..count {
                    for &j in &nls[i] {
                        assert!(nls[j].contains(&i), "NL not symmetric at {level}:{i},{j}");
                    }
                    for &j in &ils[i] {
                        assert!(ils[j].contains(&i), "IL not symmetric at {level}:{i},{j}");
                    }
                    // NL and IL are disjoint
                    for &j in &ils[i] {
                        assert!(!nls[i].contains(&j));
                    }
                }
            }
        }
    }

    #[test]
    fn nl_union_il_covers_parent_neighborhood() {
        let p = DyadicPartition::new(64, 4, 4, Dim::One).unwrap();
        for level in 3..=4 {
            for i in 0..p.segment_count(level) {
                let mut both: Vec<usize> = p.neighbor_list(level, i).unwrap();
                both.extend(p.interaction_list(level, i).unwrap());
                both.sort_unstable();
                let parent = i / 2;
                let mut expected = Vec::new();
                for pp in p.neighbor_list(level - 1, parent).unwrap() {
                    expected.push(2 * pp);
                    expected.push(2 * pp + 1);
                }
                expected.sort_unstable();
                assert_eq!(both, expected);
            }
        }
    }

    #[test]
    fn two_dim_level2_lists() {
        let p = DyadicPartition::new(32, 3, 4, Dim::Two).unwrap();
        // 16 boxes at level 2: IL = 16 - 9 neighbors
        for i in 0..16 {
            assert_eq!(p.interaction_list(2, i).unwrap().len(), 7);
        }
    }

    #[test]
    fn dedup_offsets_basics() {
        // fine axis: all offsets distinct
        assert_eq!(dedup_offsets(8, 2, 3), vec![-3, -2, 2, 3]);
        // coarse axis with 4 segments: -2 and 2 alias; positive kept
        assert_eq!(dedup_offsets(4, 2, 2), vec![2]);
        assert_eq!(dedup_offsets(4, 0, 1), vec![-1, 0, 1]);
    }

    #[test]
    fn canonical_offset_rules() {
        assert_eq!(canonical_offset(8, 3, 1, 4), Some(3));
        assert_eq!(canonical_offset(8, 3, 4, 1), Some(-3));
        assert_eq!(canonical_offset(8, 3, 0, 4), None); // outside band
        assert_eq!(canonical_offset(4, 2, 1, 3), Some(2)); // tie -> positive
    }
}
