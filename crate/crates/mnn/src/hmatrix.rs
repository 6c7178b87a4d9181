//! Hierarchical-matrix compression of dense operators and the factored
//! matrix-vector product.
//!
//! A dense operator on the dyadic hierarchy splits into per-level far-field
//! parts plus an adjacent part,
//!
//! ```text
//! A = sum_{l=2..L} A^(l) + A^(ad),
//! ```
//!
//! where `A^(l)` keeps exactly the blocks coupling interaction-list pairs at
//! level `l` and `A^(ad)` keeps the neighbor blocks at the finest level.
//! Each far-field part is compressed with shared per-segment bases,
//! `A^(l)_{I,J} ~ U_I M_{I,J} V_J^T` with every block of rank at most `r`,
//! and the compressed operator is applied level by level without ever
//! materializing a dense matrix.

use crate::error::{Error, Result};
use crate::hierarchy::{canonical_offset, dedup_offsets, wrap, Dim, DyadicPartition};
use crate::linalg::{svd_thin, Mat};

/// Per-level band configuration of the compressed operator. The defaults
/// match the structure of the interaction lists: band 2 at level 2, band 3
/// at finer levels, band 1 for the adjacent part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BandConfig {
    pub level2: usize,
    pub fine: usize,
    pub adjacent: usize,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig { level2: 2, fine: 3, adjacent: 1 }
    }
}

impl BandConfig {
    pub fn level_band(&self, level: usize) -> usize {
        if level == 2 {
            self.level2
        } else {
            self.fine
        }
    }

    pub fn level_window(&self, level: usize) -> usize {
        2 * self.level_band(level) + 1
    }

    pub fn adjacent_window(&self) -> usize {
        2 * self.adjacent + 1
    }
}

/// Uniform low-rank factors of one level: per-segment column bases `U_I`,
/// `V_J` and the coupling blocks `M_{I,J}` for `J` in the interaction list
/// of `I`.
#[derive(Debug, Clone)]
pub struct LevelFactors {
    pub level: usize,
    /// `U_I`, one `(points per segment) x r` matrix per segment.
    pub us: Vec<Mat>,
    /// `V_J`, same shape as `us`.
    pub vs: Vec<Mat>,
    /// Per segment `I`: `(J, M_{I,J})` sorted by `J`.
    pub couplings: Vec<Vec<(usize, Mat)>>,
}

/// Dense neighbor blocks at the finest level: per segment `I`, the pairs
/// `(J, A_{I,J})` for `J` in the neighbor list of `I`, sorted by `J`.
#[derive(Debug, Clone)]
pub struct AdjacentPart {
    pub blocks: Vec<Vec<(usize, Mat)>>,
}

/// Truncation diagnostics of a compression run. `level_bounds[i]` bounds
/// the Frobenius error of level `2 + i`; `total` bounds the error of the
/// whole factored operator and therefore the relative matvec error.
#[derive(Debug, Clone)]
pub struct CompressionDiag {
    pub level_bounds: Vec<f64>,
    pub total: f64,
}

/// A compressed operator: partition, rank, per-level factors and the dense
/// adjacent part. Immutable after construction.
#[derive(Debug, Clone)]
pub struct HMatrixFactors {
    partition: DyadicPartition,
    rank: usize,
    levels: Vec<LevelFactors>,
    adjacent: AdjacentPart,
    diag: CompressionDiag,
}

/// Discretizes an integral kernel `g(x, y)` on the periodic unit interval
/// with `n` points; entry `(i, j)` is `g(x_i, x_j) * h` with `h = 1/n`, so
/// applying the matrix is the quadrature of the integral operator.
pub fn dense_from_kernel_1d(g: impl Fn(f64, f64) -> f64, n: usize) -> Result<Mat> {
    let h = 1.0 / n as f64;
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        let x = i as f64 * h;
        for j in 0..n {
            let y = j as f64 * h;
            let v = g(x, y) * h;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("kernel value at ({i}, {j})")));
            }
            a.set(i, j, v);
        }
    }
    Ok(a)
}

/// Two-dimensional analogue on the periodic unit square with `n` points per
/// dimension; grid point `(i1, i2)` maps to row `i1 * n + i2` and the
/// quadrature weight is `h^2`.
pub fn dense_from_kernel_2d(g: impl Fn([f64; 2], [f64; 2]) -> f64, n: usize) -> Result<Mat> {
    let h = 1.0 / n as f64;
    let total = n * n;
    let mut a = Mat::zeros(total, total);
    for p in 0..total {
        let x = [(p / n) as f64 * h, (p % n) as f64 * h];
        for q in 0..total {
            let y = [(q / n) as f64 * h, (q % n) as f64 * h];
            let v = g(x, y) * h * h;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("kernel value at ({p}, {q})")));
            }
            a.set(p, q, v);
        }
    }
    Ok(a)
}

/// Global point indices of segment/box `i` at `level`, in local order.
fn segment_points(p: &DyadicPartition, level: usize, i: usize) -> Vec<usize> {
    match p.dim() {
        Dim::One => p.segment_range(level, i).collect(),
        Dim::Two => {
            let (i1, i2) = p.box_coords(level, i);
            let n = p.grid_size();
            let r1 = p.segment_range(level, i1);
            let r2 = p.segment_range(level, i2);
            let mut pts = Vec::with_capacity(r1.len() * r2.len());
            for a in r1 {
                for b in r2.clone() {
                    pts.push(a * n + b);
                }
            }
            pts
        }
    }
}

fn extract_block(a: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a.at(rows[i], cols[j]))
}

/// The multilevel split of a dense matrix: one matrix per level holding the
/// interaction blocks, plus the adjacent part. The parts sum back to the
/// input exactly.
#[derive(Debug, Clone)]
pub struct LevelSplit {
    /// `(level, matrix)` for `level = 2..=L`.
    pub levels: Vec<(usize, Mat)>,
    pub adjacent: Mat,
}

impl LevelSplit {
    /// Entry-wise sum of all parts.
    pub fn reassemble(&self) -> Mat {
        let mut out = self.adjacent.clone();
        for (_, m) in &self.levels {
            out.add_assign(m);
        }
        out
    }
}

/// Splits `a` into per-level interaction parts and the adjacent part.
pub fn decompose_levels(a: &Mat, p: &DyadicPartition) -> Result<LevelSplit> {
    let n_total = p.point_count();
    if a.rows() != n_total || a.cols() != n_total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, partition covers {} points",
            a.rows(),
            a.cols(),
            n_total
        )));
    }
    let mut levels = Vec::new();
    for level in 2..=p.levels() {
        let mut part = Mat::zeros(n_total, n_total);
        for i in 0..p.segment_count(level) {
            let rows = segment_points(p, level, i);
            for j in p.interaction_list(level, i)? {
                let cols = segment_points(p, level, j);
                for (li, &gi) in rows.iter().enumerate() {
                    for (lj, &gj) in cols.iter().enumerate() {
                        let _ = (li, lj);
                        part.set(gi, gj, a.at(gi, gj));
                    }
                }
            }
        }
        levels.push((level, part));
    }
    let mut adjacent = Mat::zeros(n_total, n_total);
    let l = p.levels();
    for i in 0..p.segment_count(l) {
        let rows = segment_points(p, l, i);
        for j in p.neighbor_list(l, i)? {
            let cols = segment_points(p, l, j);
            for &gi in &rows {
                for &gj in &cols {
                    adjacent.set(gi, gj, a.at(gi, gj));
                }
            }
        }
    }
    Ok(LevelSplit { levels, adjacent })
}

/// Far-field offset keys of one level: per-dimension offsets of magnitude
/// in `[2, band]`, deduplicated on the cyclic axis. In 2D these are all
/// offset pairs inside the band with at least one component of magnitude 2
/// or more (the union of the interaction offsets over segment parities).
fn far_offsets(p: &DyadicPartition, level: usize, band: usize) -> Vec<Vec<isize>> {
    let n_seg = p.segments_per_dim(level);
    match p.dim() {
        Dim::One => dedup_offsets(n_seg, 2, band).into_iter().map(|o| vec![o]).collect(),
        Dim::Two => {
            let per = dedup_offsets(n_seg, 0, band);
            let mut out = Vec::new();
            for &o1 in &per {
                for &o2 in &per {
                    if o1.abs().max(o2.abs()) >= 2 {
                        out.push(vec![o1, o2]);
                    }
                }
            }
            out
        }
    }
}

fn shifted_segment(p: &DyadicPartition, level: usize, i: usize, off: &[isize]) -> usize {
    let n_seg = p.segments_per_dim(level);
    match p.dim() {
        Dim::One => wrap(i as isize + off[0], n_seg),
        Dim::Two => {
            let (i1, i2) = p.box_coords(level, i);
            p.box_index(
                level,
                wrap(i1 as isize + off[0], n_seg),
                wrap(i2 as isize + off[1], n_seg),
            )
        }
    }
}

/// Compresses one level of `a` into shared-basis factors.
///
/// `U_I` spans the dominant left space of the horizontal concatenation of
/// the far-field band blocks in row `I` (the union of the interaction
/// blocks over segment parities, so translation-invariant kernels get
/// segment-independent bases); `V_J` is the analogous right basis of the
/// vertical concatenation, and `M_{I,J} = U_I^T A_{I,J} V_J` on interaction
/// pairs. Returns the factors and a Frobenius bound on the truncation
/// error.
pub fn compress_level(
    a: &Mat,
    p: &DyadicPartition,
    level: usize,
    rank: usize,
) -> Result<(LevelFactors, f64)> {
    let seg_pts = match p.dim() {
        Dim::One => p.segment_len(level),
        Dim::Two => p.segment_len(level) * p.segment_len(level),
    };
    if rank > seg_pts {
        return Err(Error::InvalidConfig(format!(
            "rank {rank} exceeds block dimension {seg_pts} at level {level}"
        )));
    }
    let band = p.interaction_band(level);
    let offs = far_offsets(p, level, band);
    let count = p.segment_count(level);
    let points: Vec<Vec<usize>> = (0..count).map(|i| segment_points(p, level, i)).collect();

    let mut us = Vec::with_capacity(count);
    let mut vs = Vec::with_capacity(count);
    let mut row_tail_sq = 0.0;
    let mut col_tail_sq = 0.0;

    for i in 0..count {
        // horizontal concatenation of row-band blocks
        let mut h = Mat::zeros(seg_pts, seg_pts * offs.len());
        for (k, off) in offs.iter().enumerate() {
            let j = shifted_segment(p, level, i, off);
            let block = extract_block(a, &points[i], &points[j]);
            h.set_block(0, k * seg_pts, &block);
        }
        let svd = svd_thin(&h);
        us.push(Mat::from_fn(seg_pts, rank, |r, c| svd.u.at(r, c)));
        row_tail_sq += svd.s.iter().skip(rank).map(|s| s * s).sum::<f64>();

        // vertical concatenation of column-band blocks
        let mut g = Mat::zeros(seg_pts * offs.len(), seg_pts);
        for (k, off) in offs.iter().enumerate() {
            let src = shifted_segment(p, level, i, off);
            let block = extract_block(a, &points[src], &points[i]);
            g.set_block(k * seg_pts, 0, &block);
        }
        let svd = svd_thin(&g);
        vs.push(Mat::from_fn(seg_pts, rank, |r, c| svd.v.at(r, c)));
        col_tail_sq += svd.s.iter().skip(rank).map(|s| s * s).sum::<f64>();
    }

    let mut couplings = Vec::with_capacity(count);
    for i in 0..count {
        let mut row = Vec::new();
        for j in p.interaction_list(level, i)? {
            let block = extract_block(a, &points[i], &points[j]);
            let m = us[i].transpose().matmul(&block)?.matmul(&vs[j])?;
            row.push((j, m));
        }
        couplings.push(row);
    }

    let bound = row_tail_sq.sqrt() + col_tail_sq.sqrt();
    Ok((LevelFactors { level, us, vs, couplings }, bound))
}

/// Compresses a dense operator into uniform per-level factors plus the
/// dense adjacent part.
pub fn compress(a: &Mat, p: &DyadicPartition, rank: usize) -> Result<HMatrixFactors> {
    let n_total = p.point_count();
    if a.rows() != n_total || a.cols() != n_total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, partition covers {} points",
            a.rows(),
            a.cols(),
            n_total
        )));
    }
    let mut levels = Vec::new();
    let mut level_bounds = Vec::new();
    for level in 2..=p.levels() {
        let (factors, bound) = compress_level(a, p, level, rank)?;
        levels.push(factors);
        level_bounds.push(bound);
    }
    let l = p.levels();
    let mut blocks = Vec::with_capacity(p.segment_count(l));
    for i in 0..p.segment_count(l) {
        let rows = segment_points(p, l, i);
        let mut per = Vec::new();
        for j in p.neighbor_list(l, i)? {
            let cols = segment_points(p, l, j);
            per.push((j, extract_block(a, &rows, &cols)));
        }
        blocks.push(per);
    }
    let total = level_bounds.iter().sum();
    Ok(HMatrixFactors {
        partition: p.clone(),
        rank,
        levels,
        adjacent: AdjacentPart { blocks },
        diag: CompressionDiag { level_bounds, total },
    })
}

impl HMatrixFactors {
    pub fn partition(&self) -> &DyadicPartition {
        &self.partition
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn diagnostics(&self) -> &CompressionDiag {
        &self.diag
    }

    pub fn level_factors(&self, level: usize) -> &LevelFactors {
        &self.levels[level - 2]
    }

    pub fn adjacent_part(&self) -> &AdjacentPart {
        &self.adjacent
    }

    /// Applies the factored operator to `v`, level by level, adjacent part
    /// last. Works for 1D (`|v| = N`) and 2D (`|v| = N^2`) factor sets.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let p = &self.partition;
        let n_total = p.point_count();
        if v.len() != n_total {
            return Err(Error::DimensionMismatch(format!(
                "apply: vector length {} != {}",
                v.len(),
                n_total
            )));
        }
        let mut u = vec![0.0; n_total];
        for factors in &self.levels {
            let level = factors.level;
            let count = p.segment_count(level);
            let points: Vec<Vec<usize>> =
                (0..count).map(|i| segment_points(p, level, i)).collect();
            // restrict: xi_J = V_J^T v_J
            let mut xi = Vec::with_capacity(count);
            for j in 0..count {
                let local: Vec<f64> = points[j].iter().map(|&g| v[g]).collect();
                xi.push(factors.vs[j].transpose().matvec(&local)?);
            }
            // couple and interpolate
            for i in 0..count {
                let mut zeta = vec![0.0; self.rank];
                for (j, m) in &factors.couplings[i] {
                    let contrib = m.matvec(&xi[*j])?;
                    for (z, c) in zeta.iter_mut().zip(contrib.iter()) {
                        *z += c;
                    }
                }
                let local = factors.us[i].matvec(&zeta)?;
                for (l, &g) in points[i].iter().enumerate() {
                    u[g] += local[l];
                }
            }
        }
        // adjacent part
        let l = p.levels();
        for i in 0..p.segment_count(l) {
            let rows = segment_points(p, l, i);
            let mut acc = vec![0.0; rows.len()];
            for (j, block) in &self.adjacent.blocks[i] {
                let cols = segment_points(p, l, *j);
                let local: Vec<f64> = cols.iter().map(|&g| v[g]).collect();
                let contrib = block.matvec(&local)?;
                for (a, c) in acc.iter_mut().zip(contrib.iter()) {
                    *a += c;
                }
            }
            for (l_idx, &g) in rows.iter().enumerate() {
                u[g] += acc[l_idx];
            }
        }
        Ok(u)
    }

    /// Reassembles the dense matrix represented by the factors (test and
    /// diagnostic helper; the apply path never does this).
    pub fn reassemble_dense(&self) -> Result<Mat> {
        let p = &self.partition;
        let n_total = p.point_count();
        let mut out = Mat::zeros(n_total, n_total);
        for factors in &self.levels {
            let level = factors.level;
            let count = p.segment_count(level);
            let points: Vec<Vec<usize>> =
                (0..count).map(|i| segment_points(p, level, i)).collect();
            for i in 0..count {
                for (j, m) in &factors.couplings[i] {
                    let block =
                        factors.us[i].matmul(m)?.matmul(&factors.vs[*j].transpose())?;
                    for (li, &gi) in points[i].iter().enumerate() {
                        for (lj, &gj) in points[*j].iter().enumerate() {
                            out.set(gi, gj, out.at(gi, gj) + block.at(li, lj));
                        }
                    }
                }
            }
        }
        let l = p.levels();
        for i in 0..p.segment_count(l) {
            let rows = segment_points(p, l, i);
            for (j, block) in &self.adjacent.blocks[i] {
                let cols = segment_points(p, l, *j);
                for (li, &gi) in rows.iter().enumerate() {
                    for (lj, &gj) in cols.iter().enumerate() {
                        out.set(gi, gj, out.at(gi, gj) + block.at(li, lj));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Weight count of the factored representation (biases excluded):
/// `sum_l [N r + 2^l r^2 (2 n_b(l) + 1) + N r] + 2^L m^2 (2 n_b_ad + 1)`
/// for a 1D hierarchy.
pub fn param_count_h(n: usize, levels: usize, leaf: usize, rank: usize, bands: &BandConfig) -> usize {
    let mut total = 0;
    for level in 2..=levels {
        let segs = 1usize << level;
        total += n * rank // restriction
            + segs * rank * rank * bands.level_window(level) // coupling band
            + n * rank; // interpolation
    }
    total + (1usize << levels) * leaf * leaf * bands.adjacent_window()
}

/// The quick upper bound `2 N log2(N) r + 3 N m (2 n_b + 1)` on
/// [`param_count_h`], with `n_b` the largest band in play.
pub fn param_count_h_bound(n: usize, leaf: usize, rank: usize, bands: &BandConfig) -> f64 {
    let nb = bands.level2.max(bands.fine).max(bands.adjacent) as f64;
    2.0 * (n as f64) * (n as f64).log2() * rank as f64
        + 3.0 * (n as f64) * leaf as f64 * (2.0 * nb + 1.0)
}

/// Canonical band offset of coupling `(i, j)` at one level, shared by the
/// compression, the factored apply and the network loader.
pub fn coupling_offset(p: &DyadicPartition, level: usize, i: usize, j: usize) -> Option<Vec<isize>> {
    let n_seg = p.segments_per_dim(level);
    let band = p.interaction_band(level);
    match p.dim() {
        Dim::One => canonical_offset(n_seg, band, i, j).map(|o| vec![o]),
        Dim::Two => {
            let (i1, i2) = p.box_coords(level, i);
            let (j1, j2) = p.box_coords(level, j);
            let o1 = canonical_offset(n_seg, band, i1, j1)?;
            let o2 = canonical_offset(n_seg, band, i2, j2)?;
            Some(vec![o1, o2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rng_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state as f64 / u64::MAX as f64) * 2.0 - 1.0
            })
            .collect()
    }

    fn expcos(x: f64, y: f64) -> f64 {
        (2.0 * PI * (x - y)).cos().exp()
    }

    #[test]
    fn dense_kernel_constant() {
        let a = dense_from_kernel_1d(|_, _| 1.0, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.at(i, j), 0.25);
            }
        }
    }

    #[test]
    fn dense_kernel_translation_invariant_is_circulant() {
        let a = dense_from_kernel_1d(expcos, 16).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let want = a.at(0, (j + 16 - i) % 16);
                assert!((a.at(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dense_kernel_separable_is_rank_one() {
        let a = dense_from_kernel_1d(|x, y| (2.0 * PI * x).cos() * (2.0 * PI * y).cos(), 16)
            .unwrap();
        let svd = svd_thin(&a);
        assert!(svd.s[1] < 1e-14 * svd.s[0].max(1.0));
    }

    #[test]
    fn dense_kernel_rejects_non_finite() {
        let err = dense_from_kernel_1d(|x, y| 1.0 / (x - y), 4);
        assert!(err.is_err());
    }

    #[test]
    fn decomposition_reconstructs_exactly() {
        let p = DyadicPartition::new(32, 3, 4, Dim::One).unwrap();
        let data = rng_vec(32 * 32, 5);
        let a = Mat::from_rows(32, 32, data);
        let split = decompose_levels(&a, &p).unwrap();
        let back = split.reassemble();
        for i in 0..32 {
            for j in 0..32 {
                assert_eq!(back.at(i, j), a.at(i, j), "entry ({i},{j})");
            }
        }
    }

    fn nonzero_blocks(m: &Mat, p: &DyadicPartition, level: usize) -> usize {
        let mut count = 0;
        for i in 0..p.segment_count(level) {
            for j in 0..p.segment_count(level) {
                let rows = segment_points(p, level, i);
                let cols = segment_points(p, level, j);
                let any = rows
                    .iter()
                    .any(|&gi| cols.iter().any(|&gj| m.at(gi, gj) != 0.0));
                if any {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn block_counts_small_hierarchy() {
        // N=16, L=2: one interaction partner per segment, 12 adjacent blocks
        let p = DyadicPartition::new(16, 2, 4, Dim::One).unwrap();
        let a = Mat::from_rows(16, 16, rng_vec(16 * 16, 9));
        let split = decompose_levels(&a, &p).unwrap();
        assert_eq!(nonzero_blocks(&split.levels[0].1, &p, 2), 4);
        assert_eq!(nonzero_blocks(&split.adjacent, &p, 2), 12);
    }

    #[test]
    fn block_pattern_l4() {
        // level pattern for L=4: 4 blocks at level 2, then 2^l * 3
        let p = DyadicPartition::new(64, 4, 4, Dim::One).unwrap();
        let a = dense_from_kernel_1d(expcos, 64).unwrap();
        let split = decompose_levels(&a, &p).unwrap();
        assert_eq!(nonzero_blocks(&split.levels[0].1, &p, 2), 4);
        assert_eq!(nonzero_blocks(&split.levels[1].1, &p, 3), 24);
        assert_eq!(nonzero_blocks(&split.levels[2].1, &p, 4), 48);
        assert_eq!(nonzero_blocks(&split.adjacent, &p, 4), 48);
    }

    #[test]
    fn compress_rank_one_kernel_is_exact() {
        let p = DyadicPartition::new(32, 3, 4, Dim::One).unwrap();
        let a = dense_from_kernel_1d(|_, _| 1.0, 32).unwrap();
        let f = compress(&a, &p, 1).unwrap();
        assert!(f.diagnostics().total < 1e-12);
        let split = decompose_levels(&a, &p).unwrap();
        let recon = f.reassemble_dense().unwrap();
        let want = split.reassemble();
        for i in 0..32 {
            for j in 0..32 {
                assert!((recon.at(i, j) - want.at(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn factor_shapes() {
        let p = DyadicPartition::new(64, 4, 4, Dim::One).unwrap();
        let a = dense_from_kernel_1d(expcos, 64).unwrap();
        let f = compress(&a, &p, 3).unwrap();
        for level in 2..=4 {
            let lf = f.level_factors(level);
            let seg = 64 >> level;
            for u in &lf.us {
                assert_eq!((u.rows(), u.cols()), (seg, 3));
            }
            for v in &lf.vs {
                assert_eq!((v.rows(), v.cols()), (seg, 3));
            }
            for row in &lf.couplings {
                for (_, m) in row {
                    assert_eq!((m.rows(), m.cols()), (3, 3));
                }
            }
        }
    }

    #[test]
    fn compression_error_below_diagnostic() {
        let p = DyadicPartition::new(64, 3, 8, Dim::One).unwrap();
        let a = dense_from_kernel_1d(expcos, 64).unwrap();
        let split = decompose_levels(&a, &p).unwrap();
        for rank in [1usize, 2, 4, 8] {
            for (idx, level) in (2..=3).enumerate() {
                let (factors, bound) = compress_level(&a, &p, level, rank).unwrap();
                // reassemble just this level
                let mut recon = Mat::zeros(64, 64);
                let count = p.segment_count(level);
                for i in 0..count {
                    let rows = segment_points(&p, level, i);
                    for (j, m) in &factors.couplings[i] {
                        let cols = segment_points(&p, level, *j);
                        let block = factors.us[i]
                            .matmul(m)
                            .unwrap()
                            .matmul(&factors.vs[*j].transpose())
                            .unwrap();
                        for (li, &gi) in rows.iter().enumerate() {
                            for (lj, &gj) in cols.iter().enumerate() {
                                recon.set(gi, gj, recon.at(gi, gj) + block.at(li, lj));
                            }
                        }
                    }
                }
                let mut err = 0.0;
                let want = &split.levels[idx].1;
                for i in 0..64 {
                    for j in 0..64 {
                        let d = recon.at(i, j) - want.at(i, j);
                        err += d * d;
                    }
                }
                assert!(
                    err.sqrt() <= bound + 1e-12,
                    "level {level} rank {rank}: err {} > bound {}",
                    err.sqrt(),
                    bound
                );
            }
        }
    }

    #[test]
    fn compression_error_monotone_in_rank() {
        let p = DyadicPartition::new(64, 3, 8, Dim::One).unwrap();
        let a = dense_from_kernel_1d(expcos, 64).unwrap();
        let v = rng_vec(64, 3);
        let dense = a.matvec(&v).unwrap();
        let mut last = f64::INFINITY;
        for rank in [1usize, 2, 4, 8] {
            let f = compress(&a, &p, rank).unwrap();
            let got = f.apply(&v).unwrap();
            let err: f64 = got
                .iter()
                .zip(dense.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err <= last + 1e-13, "rank {rank}: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn apply_matches_dense_within_diagnostic() {
        let p = DyadicPartition::new(64, 4, 4, Dim::One).unwrap();
        let a = dense_from_kernel_1d(expcos, 64).unwrap();
        let f = compress(&a, &p, 4).unwrap();
        for seed in 0..10 {
            let v = rng_vec(64, seed);
            let dense = a.matvec(&v).unwrap();
            let got = f.apply(&v).unwrap();
            let err: f64 = got
                .iter()
                .zip(dense.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(err <= (f.diagnostics().total + 1e-12) * vnorm);
        }
    }

    #[test]
    fn apply_zero_and_linearity() {
        let p = DyadicPartition::new(32, 3, 4, Dim::One).unwrap();
        let a = dense_from_kernel_1d(expcos, 32).unwrap();
        let f = compress(&a, &p, 4).unwrap();
        let zero = f.apply(&vec![0.0; 32]).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
        let v1 = rng_vec(32, 1);
        let v2 = rng_vec(32, 2);
        let combo: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| 2.5 * a - 1.5 * b).collect();
        let f1 = f.apply(&v1).unwrap();
        let f2 = f.apply(&v2).unwrap();
        let fc = f.apply(&combo).unwrap();
        for i in 0..32 {
            assert!((fc[i] - (2.5 * f1[i] - 1.5 * f2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn circulant_kernel_gives_shared_couplings() {
        let p = DyadicPartition::new(64, 4, 4, Dim::One).unwrap();
        let a = dense_from_kernel_1d(expcos, 64).unwrap();
        let f = compress(&a, &p, 4).unwrap();
        for level in 2..=4 {
            let lf = f.level_factors(level);
            let n_seg = p.segments_per_dim(level);
            // bases shared across segments
            for i in 1..n_seg {
                for r in 0..lf.us[0].rows() {
                    for c in 0..lf.us[0].cols() {
                        assert!(
                            (lf.us[i].at(r, c) - lf.us[0].at(r, c)).abs() < 1e-10,
                            "U differs at level {level}, segment {i}"
                        );
                        assert!((lf.vs[i].at(r, c) - lf.vs[0].at(r, c)).abs() < 1e-10);
                    }
                }
            }
            // couplings constant along block diagonals: every segment that
            // carries a given offset holds the same coupling matrix
            let mut reference: std::collections::BTreeMap<isize, Mat> = Default::default();
            for i in 0..n_seg {
                for (j, m) in &lf.couplings[i] {
                    let off = coupling_offset(&p, level, i, *j).unwrap()[0];
                    let m0 = reference.entry(off).or_insert_with(|| m.clone());
                    for r in 0..m.rows() {
                        for c in 0..m.cols() {
                            assert!(
                                (m.at(r, c) - m0.at(r, c)).abs() < 1e-10,
                                "coupling differs at level {level}, segment {i}, offset {off}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn two_dim_apply_matches_dense() {
        let p = DyadicPartition::new(32, 3, 4, Dim::Two).unwrap();
        let g = |x: [f64; 2], y: [f64; 2]| {
            ((2.0 * PI * (x[0] - y[0])).cos() + (2.0 * PI * (x[1] - y[1])).cos()).exp()
        };
        let a = dense_from_kernel_2d(g, 32).unwrap();
        let f = compress(&a, &p, 6).unwrap();
        for seed in 0..3 {
            let v = rng_vec(32 * 32, seed + 100);
            let dense = a.matvec(&v).unwrap();
            let got = f.apply(&v).unwrap();
            let err: f64 = got
                .iter()
                .zip(dense.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(err <= (f.diagnostics().total + 1e-12) * vnorm);
        }
    }

    #[test]
    fn two_dim_rank_one_exact() {
        let p = DyadicPartition::new(16, 2, 4, Dim::Two).unwrap();
        let a = dense_from_kernel_2d(|_, _| 1.0, 16).unwrap();
        let f = compress(&a, &p, 1).unwrap();
        let v = rng_vec(256, 8);
        let dense = a.matvec(&v).unwrap();
        let got = f.apply(&v).unwrap();
        for i in 0..256 {
            assert!((got[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn param_count_formula() {
        let bands = BandConfig::default();
        // degenerate L=2 case: levels = {2}, N = 4m
        let m = 4;
        let n = 16;
        let want = n * 1 * 2 + 4 * 1 * 5 + 4 * m * m * 3;
        assert_eq!(param_count_h(n, 2, m, 1, &bands), want);
        // bound check at the experiment scale
        let val = param_count_h(320, 6, 5, 1, &bands) as f64;
        assert!(val <= param_count_h_bound(320, 5, 1, &bands));
    }
}
