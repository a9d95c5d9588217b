//! The unnormalized Haar basis `H_n` of `R^{2ⁿ}`.
//!
//! Columns follow the recursive construction
//! `H_0 = (1)`, `H_n = [H_{n-1} ⊗ (1,1)ᵀ, I_{2^{n-1}} ⊗ (1,-1)ᵀ]`,
//! so column 0 is the all-ones vector, column 1 the coarsest ±1 split, and
//! the last `T/2` columns are the finest pairwise differences. Every row has
//! exactly `1 + n` nonzero entries.
//!
//! All transforms here are `O(T)` and allocation-light. Dense matrices are
//! only built on request for oracles.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, ComparatorSequence, DenseMatrix, EmbeddedVector, Preconditioner};

/// Largest order for which [`haar_matrix`] will materialize `H_n`.
pub const MAX_DENSE_ORDER: u32 = 12;

/// `log2(len)` if `len` is a power of two.
pub fn log2_exact(len: usize) -> Result<u32> {
    if len.is_power_of_two() {
        Ok(len.trailing_zeros())
    } else {
        Err(Error::NotPowerOfTwo(len))
    }
}

/// Dense `H_n`, built by the recursion.
pub fn haar_matrix(n: u32) -> Result<DenseMatrix> {
    if n > MAX_DENSE_ORDER {
        return Err(Error::TooLarge {
            what: "dense Haar order",
            value: n as usize,
            limit: MAX_DENSE_ORDER as usize,
        });
    }
    let mut h = DenseMatrix::identity(1);
    for level in 1..=n {
        let len = 1usize << level;
        let half = len / 2;
        let prev = h;
        h = DenseMatrix::from_fn(len, len, |r, c| {
            if c < half {
                prev.get(r / 2, c)
            } else if r / 2 == c - half {
                if r % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        });
    }
    Ok(h)
}

/// `H_nᵀ v` via the pairwise sum/difference recursion.
pub fn haar_transpose_apply(v: &[f64]) -> Result<Vec<f64>> {
    log2_exact(v.len())?;
    let mut out = vec![0.0; v.len()];
    transpose_apply_into(v, &mut out);
    Ok(out)
}

fn transpose_apply_into(v: &[f64], out: &mut [f64]) {
    let mut cur = v.to_vec();
    let mut len = v.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (cur[2 * i], cur[2 * i + 1]);
            out[half + i] = a - b;
            cur[i] = a + b;
        }
        len = half;
    }
    out[0] = cur[0];
}

/// `H_n c`, the inverse direction of [`haar_transpose_apply`] up to scaling.
pub fn haar_apply(c: &[f64]) -> Result<Vec<f64>> {
    log2_exact(c.len())?;
    let mut out = vec![0.0; c.len()];
    apply_into(c, &mut out);
    Ok(out)
}

fn apply_into(c: &[f64], out: &mut [f64]) {
    let total = c.len();
    out[0] = c[0];
    let mut len = 1;
    let mut scratch = vec![0.0; total];
    while len < total {
        scratch[..len].copy_from_slice(&out[..len]);
        for i in 0..len {
            let detail = c[len + i];
            out[2 * i] = scratch[i] + detail;
            out[2 * i + 1] = scratch[i] - detail;
        }
        len *= 2;
    }
}

/// Squared norm of column `k` (0-based) of `H_n`, i.e. the diagonal of `D_n²`
/// in `H_nᵀ H_n = D_n²`.
pub fn column_norm_sq(k: usize, len: usize) -> f64 {
    if k == 0 {
        len as f64
    } else {
        let level = usize::BITS - 1 - k.leading_zeros();
        (len >> level) as f64
    }
}

/// `H_n⁻¹ v = D_n⁻² H_nᵀ v`.
pub fn haar_inverse_apply(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = haar_transpose_apply(v)?;
    let len = v.len();
    for (k, x) in out.iter_mut().enumerate() {
        *x /= column_norm_sq(k, len);
    }
    Ok(out)
}

/// Nonzero entries of row `t` (1-based) of `H_n` as `(column, value)` pairs,
/// columns 1-based and ascending. Always `1 + n` entries with values ±1.
pub fn haar_row(t: usize, n: u32) -> Result<Vec<(usize, f64)>> {
    let len = 1usize << n;
    if t == 0 || t > len {
        return Err(Error::IndexOutOfRange {
            index: t,
            bound: len,
            context: "haar row",
        });
    }
    let mut entries = Vec::with_capacity(n as usize + 1);
    haar_row_into(t - 1, len, &mut entries);
    entries.iter_mut().for_each(|(c, _)| *c += 1);
    entries.reverse();
    Ok(entries)
}

/// Row `r` (0-based) of `H` for horizon `len`, as 0-based `(column, sign)`
/// pairs from finest to coarsest.
pub(crate) fn haar_row_into(mut r: usize, mut len: usize, entries: &mut Vec<(usize, f64)>) {
    entries.clear();
    while len > 1 {
        let half = len / 2;
        let sign = if r.is_multiple_of(2) { 1.0 } else { -1.0 };
        entries.push((half + r / 2, sign));
        r /= 2;
        len = half;
    }
    entries.push((0, 1.0));
}

/// Diagonal entry of `H_n H_nᵀ`, equal to `1 + n` everywhere.
pub fn hht_diag(n: u32) -> f64 {
    f64::from(n + 1)
}

/// The Haar basis of order `n`, with `T = 2ⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HaarBasis {
    order: u32,
}

impl HaarBasis {
    pub fn new(order: u32) -> Self {
        Self { order }
    }

    pub fn for_horizon(rounds: usize) -> Result<Self> {
        Ok(Self::new(log2_exact(rounds)?))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rounds(&self) -> usize {
        1 << self.order
    }

    pub fn matrix(&self) -> Result<DenseMatrix> {
        haar_matrix(self.order)
    }

    pub fn row(&self, t: usize) -> Result<Vec<(usize, f64)>> {
        haar_row(t, self.order)
    }
}

/// `S = (H_n H_nᵀ)⁻¹`, so that `S⁻¹ = H_n H_nᵀ` has constant diagonal `1 + n`.
#[derive(Clone, Debug)]
pub struct HaarPreconditioner {
    basis: HaarBasis,
}

impl HaarPreconditioner {
    pub fn new(rounds: usize) -> Result<Self> {
        Ok(Self {
            basis: HaarBasis::for_horizon(rounds)?,
        })
    }

    pub fn basis(&self) -> HaarBasis {
        self.basis
    }
}

impl Preconditioner for HaarPreconditioner {
    fn order(&self) -> usize {
        self.basis.rounds()
    }

    fn label(&self) -> &str {
        "haar"
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        // S = H D⁻⁴ Hᵀ.
        let len = x.len();
        let mut c = vec![0.0; len];
        transpose_apply_into(x, &mut c);
        for (k, v) in c.iter_mut().enumerate() {
            *v /= column_norm_sq(k, len).powi(2);
        }
        apply_into(&c, y);
    }

    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
        let mut c = vec![0.0; x.len()];
        transpose_apply_into(x, &mut c);
        apply_into(&c, y);
    }

    fn inverse_diag(&self, _t: usize) -> f64 {
        hht_diag(self.basis.order())
    }

    fn max_abs_inverse_entry(&self) -> f64 {
        hht_diag(self.basis.order())
    }

    fn dense(&self) -> DenseMatrix {
        dense_from_operator(self.order(), |x, y| self.apply(x, y))
    }

    fn dense_inverse(&self) -> DenseMatrix {
        dense_from_operator(self.order(), |x, y| self.apply_inverse(x, y))
    }
}

fn dense_from_operator(n: usize, mut op: impl FnMut(&[f64], &mut [f64])) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op(&e, &mut col);
        for (i, v) in col.iter().enumerate() {
            out.set(i, j, *v);
        }
        e[j] = 0.0;
    }
    out
}

/// A partition of `1..=T` into `T/τ` consecutive intervals of length `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimescalePartition {
    tau: usize,
    rounds: usize,
}

impl TimescalePartition {
    /// `tau` must be a power of two dividing `rounds`.
    pub fn new(tau: usize, rounds: usize) -> Result<Self> {
        log2_exact(tau)?;
        if tau > rounds || !rounds.is_multiple_of(tau) {
            return Err(Error::Precondition(format!(
                "timescale {tau} does not divide horizon {rounds}"
            )));
        }
        Ok(Self { tau, rounds })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.rounds / self.tau
    }

    pub fn is_empty(&self) -> bool {
        self.rounds == 0
    }

    /// 1-based inclusive round ranges.
    pub fn intervals(&self) -> impl Iterator<Item = RangeInclusive<usize>> + '_ {
        (0..self.len()).map(move |i| (i * self.tau + 1)..=((i + 1) * self.tau))
    }

    /// `ū_i^{(τ)}`, the comparator average over each interval.
    pub fn averages(&self, seq: &ComparatorSequence) -> Result<Vec<Vec<f64>>> {
        if seq.len() != self.rounds {
            return Err(Error::DimensionMismatch {
                expected: self.rounds,
                actual: seq.len(),
                context: "comparator length vs partition horizon",
            });
        }
        let d = seq.dim();
        Ok(self
            .intervals()
            .map(|range| {
                let mut avg = vec![0.0; d];
                for t in range {
                    avg.iter_mut().zip(seq.point(t)).for_each(|(a, u)| *a += u);
                }
                avg.iter_mut().for_each(|a| *a /= self.tau as f64);
                avg
            })
            .collect())
    }
}

/// `P̄(ũ, τ)`: squared differences of paired adjacent interval averages, or
/// `‖ū‖²` when `τ = T`.
pub fn timescale_path_length(seq: &ComparatorSequence, tau: usize) -> Result<f64> {
    let partition = TimescalePartition::new(tau, seq.len())?;
    let avgs = partition.averages(seq)?;
    if tau == seq.len() {
        return Ok(avgs[0].iter().map(|v| v * v).sum());
    }
    if avgs.len() % 2 != 0 {
        return Err(Error::Precondition(format!(
            "timescale {tau} leaves an odd number of intervals over {} rounds",
            seq.len()
        )));
    }
    Ok(avgs.chunks_exact(2).map(|p| dist_sq(&p[0], &p[1])).sum())
}

/// `P̄(ũ, 2^i)` for `i = 0..log2(T)-1`, paired with their timescales.
pub fn timescale_path_lengths(seq: &ComparatorSequence) -> Result<Vec<(usize, f64)>> {
    let n = log2_exact(seq.len())?;
    (0..n)
        .map(|i| {
            let tau = 1usize << i;
            Ok((tau, timescale_path_length(seq, tau)?))
        })
        .collect()
}

/// `D̄`: the largest gap between consecutive interval averages over every timescale `τ < T`.
pub fn max_interval_gap(seq: &ComparatorSequence) -> Result<f64> {
    let n = log2_exact(seq.len())?;
    let mut worst = 0.0_f64;
    for i in 0..n {
        let avgs = TimescalePartition::new(1 << i, seq.len())?.averages(seq)?;
        for w in avgs.windows(2) {
            worst = worst.max(dist_sq(&w[0], &w[1]).sqrt());
        }
    }
    Ok(worst)
}

/// `‖ũ‖²_M` for `M = (H_n H_nᵀ)⁻¹ ⊗ I_d`, computed as `‖(H_n⁻¹ ⊗ I_d) ũ‖²`
/// with the `O(T)` transform applied to each coordinate.
pub fn haar_comparator_norm_sq(seq: &ComparatorSequence) -> Result<f64> {
    log2_exact(seq.len())?;
    let embedded = crate::linalg::embed_comparator(seq);
    haar_embedded_norm_sq(&embedded)
}

pub(crate) fn haar_embedded_norm_sq(x: &EmbeddedVector) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..x.dim() {
        let coeffs = haar_inverse_apply(&x.coordinate(j))?;
        total += coeffs.iter().map(|c| c * c).sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
        (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
    }

    #[test]
    fn displayed_matrices() {
        assert_eq!(dense_rows(&haar_matrix(0).unwrap()), vec![vec![1.0]]);
        assert_eq!(
            dense_rows(&haar_matrix(1).unwrap()),
            vec![vec![1.0, 1.0], vec![1.0, -1.0]]
        );
        assert_eq!(
            dense_rows(&haar_matrix(2).unwrap()),
            vec![
                vec![1.0, 1.0, 1.0, 0.0],
                vec![1.0, 1.0, -1.0, 0.0],
                vec![1.0, -1.0, 0.0, 1.0],
                vec![1.0, -1.0, 0.0, -1.0],
            ]
        );
        assert!(matches!(haar_matrix(13), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn transpose_apply_examples() {
        assert_eq!(haar_transpose_apply(&[1.0, 1.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(
            haar_transpose_apply(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![10.0, -4.0, -1.0, -1.0]
        );
        assert_eq!(haar_transpose_apply(&[0.0; 8]).unwrap(), vec![0.0; 8]);
        assert!(matches!(haar_transpose_apply(&[1.0; 3]), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn transpose_apply_matches_dense() {
        for n in 0..=6 {
            let h = haar_matrix(n).unwrap();
            let len = 1 << n;
            let v: Vec<f64> = (0..len).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let dense = h.transpose().matvec(&v).unwrap();
            assert_eq!(haar_transpose_apply(&v).unwrap(), dense);
            let dense = h.matvec(&v).unwrap();
            assert_eq!(haar_apply(&v).unwrap(), dense);
        }
    }

    #[test]
    fn rows() {
        assert_eq!(haar_row(1, 2).unwrap(), vec![(1, 1.0), (2, 1.0), (3, 1.0)]);
        assert_eq!(haar_row(4, 2).unwrap(), vec![(1, 1.0), (2, -1.0), (4, -1.0)]);
        assert_eq!(haar_row(1, 0).unwrap(), vec![(1, 1.0)]);
        assert!(haar_row(5, 2).is_err());
        let h = haar_matrix(5).unwrap();
        for t in 1..=32 {
            let row = haar_row(t, 5).unwrap();
            assert_eq!(row.len(), 6);
            let mut dense = vec![0.0; 32];
            for (c, v) in row {
                dense[c - 1] = v;
            }
            assert_eq!(dense, h.row(t - 1));
        }
    }

    #[test]
    fn hht_diagonal() {
        assert_eq!(hht_diag(2), 3.0);
        assert_eq!(hht_diag(0), 1.0);
        let h = haar_matrix(8).unwrap();
        for i in 0..256 {
            let sq: f64 = h.row(i).iter().map(|v| v * v).sum();
            assert_eq!(sq, 9.0);
        }
        assert_eq!(hht_diag(8), 9.0);
    }

    #[test]
    fn column_norms_match_dense() {
        let h = haar_matrix(4).unwrap();
        let hth = h.transpose().matmul(&h).unwrap();
        for k in 0..16 {
            assert_eq!(hth.get(k, k), column_norm_sq(k, 16));
            for j in 0..16 {
                if j != k {
                    assert_eq!(hth.get(k, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn comparator_norm_examples() {
        let s = ComparatorSequence::from_scalars(&[1.0; 4]).unwrap();
        assert!((haar_comparator_norm_sq(&s).unwrap() - 1.0).abs() < 1e-15);
        let s = ComparatorSequence::from_scalars(&[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert!((haar_comparator_norm_sq(&s).unwrap() - 1.0).abs() < 1e-15);

        let u = [0.3, -1.2, 2.5, 0.7];
        let s = ComparatorSequence::from_scalars(&u).unwrap();
        let want = ((u[0] + u[1] + u[2] + u[3]) / 4.0).powi(2)
            + ((u[0] + u[1] - u[2] - u[3]) / 4.0).powi(2)
            + ((u[0] - u[1]) / 2.0).powi(2)
            + ((u[2] - u[3]) / 2.0).powi(2);
        assert!((haar_comparator_norm_sq(&s).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn comparator_norm_matches_dense_quadratic_form() {
        let h = haar_matrix(3).unwrap();
        let hht_inv = h.matmul(&h.transpose()).unwrap().inverse().unwrap();
        let u: Vec<f64> = (0..8).map(|i| (i as f64 * 0.9).cos() * 2.0).collect();
        let dense = hht_inv.quadratic_form(&u).unwrap();
        let fast = haar_comparator_norm_sq(&ComparatorSequence::from_scalars(&u).unwrap()).unwrap();
        assert!((dense - fast).abs() < 1e-12 * dense);
    }

    #[test]
    fn timescale_examples() {
        let constant = ComparatorSequence::from_scalars(&[2.0; 8]).unwrap();
        for tau in [1, 2, 4] {
            assert_eq!(timescale_path_length(&constant, tau).unwrap(), 0.0);
        }
        assert_eq!(timescale_path_length(&constant, 8).unwrap(), 4.0);
        let s = ComparatorSequence::from_scalars(&[0.0, 0.0, 2.0, 2.0]).unwrap();
        assert_eq!(timescale_path_length(&s, 2).unwrap(), 4.0);
        let s = ComparatorSequence::from_scalars(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(timescale_path_length(&s, 1).unwrap(), 8.0);
        assert!(timescale_path_length(&s, 3).is_err());
        assert!(timescale_path_length(&s, 8).is_err());
    }

    #[test]
    fn partition_covers_horizon() {
        let p = TimescalePartition::new(4, 16).unwrap();
        let covered: Vec<usize> = p.intervals().flatten().collect();
        assert_eq!(covered, (1..=16).collect::<Vec<_>>());
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn preconditioner_dense_forms() {
        let p = HaarPreconditioner::new(8).unwrap();
        let h = haar_matrix(3).unwrap();
        let hht = h.matmul(&h.transpose()).unwrap();
        assert_eq!(p.dense_inverse(), hht);
        let prod = p.dense().matmul(&hht).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - want).abs() < 1e-12);
            }
        }
        assert!(HaarPreconditioner::new(6).is_err());
    }
}
