//! Numeric checks of the matrix inequalities behind the difference and Haar
//! geometries, and the sign-pattern adversary used in the lower bound.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    difference_offdiag_frobenius_sq, difference_trace_inverse, power_iteration, symmetric_eigenvalues, DenseMatrix,
    DifferencePreconditioner, Preconditioner,
};

const SYMMETRY_TOL: f64 = 1e-12;

fn require_symmetric(a: &DenseMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: a.cols(),
            context: "matrix must be square",
        });
    }
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric(a.max_asymmetry()));
    }
    Ok(())
}

/// `Tr(A)/n + √((n-1)·max(0, Tr(AᵀA)/n - (Tr(A)/n)²))`, an upper bound on
/// `λ_max` of a symmetric matrix from its first two spectral moments.
pub fn wolkowicz_upper_bound(a: &DenseMatrix) -> Result<f64> {
    require_symmetric(a)?;
    Ok(wolkowicz_from_moments(a.rows(), a.trace(), a.frobenius_sq()))
}

fn wolkowicz_from_moments(n: usize, trace: f64, trace_sq: f64) -> f64 {
    let n_f = n as f64;
    let m = trace / n_f;
    m + ((n_f - 1.0) * (trace_sq / n_f - m * m).max(0.0)).sqrt()
}

/// Spectral facts about `(ΣᵀΣ)⁻¹` at one horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub label: String,
    pub order: usize,
    pub trace_inverse: f64,
    pub lambda_max_inverse: f64,
    pub wolkowicz_bound: f64,
    /// `‖A - Diag A‖_F`.
    pub frobenius_offdiag: f64,
    /// `Σ_{t,k} A_{kt}²`, the full second moment used by the moment bound.
    pub frobenius_full_sq: f64,
    /// `T(T+1)²(T+2)/12`, which sums only `k ≤ t`; kept for comparison with
    /// `frobenius_full_sq`, which it undercounts for `T ≥ 2`.
    pub triangular_sum_formula: f64,
    pub condition_ok: BTreeMap<String, bool>,
}

impl SpectralReport {
    pub fn all_ok(&self) -> bool {
        self.condition_ok.values().all(|&b| b)
    }
}

/// Power iteration on the structured `(ΣᵀΣ)⁻¹` and the checks
/// `λ_max ≤ (9/10)·Tr` and `λ_max ≤` the moment bound.
pub fn verify_difference_eigen_bound(order: usize) -> Result<SpectralReport> {
    if order < 2 {
        return Err(Error::Precondition(format!("horizon must be at least 2, got {order}")));
    }
    let p = DifferencePreconditioner::new(order);
    let lambda = power_iteration(order, |x, y| p.apply_inverse(x, y), 1e-10, 100_000)?;
    let trace = difference_trace_inverse(order);
    // Entry T - max(i, j) + 1 = k appears 2(T - k) + 1 times.
    let full_sq: f64 = (1..=order)
        .map(|k| {
            let k = k as u128;
            k * k * (2 * (order as u128 - k) + 1)
        })
        .sum::<u128>() as f64;
    let t = order as f64;
    let bound = wolkowicz_from_moments(order, trace, full_sq);
    let mut flags = BTreeMap::new();
    flags.insert("lambda_max <= 0.9 trace".to_string(), lambda <= 0.9 * trace);
    flags.insert("lambda_max <= moment bound".to_string(), lambda <= bound * (1.0 + 1e-8));
    Ok(SpectralReport {
        label: "difference".into(),
        order,
        trace_inverse: trace,
        lambda_max_inverse: lambda,
        wolkowicz_bound: bound,
        frobenius_offdiag: difference_offdiag_frobenius_sq(order).sqrt(),
        frobenius_full_sq: full_sq,
        triangular_sum_formula: t * (t + 1.0).powi(2) * (t + 2.0) / 12.0,
        condition_ok: flags,
    })
}

/// Both sides of `Tr((B + vvᵀ)⁻¹) ≥ ‖v‖² + Σ_{t≥2} 1/λ_t(B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates the rank-one perturbation inequality for `B` PSD with exactly
/// one eigenvalue below `1e-10`.
pub fn verify_perturbation_bound(b: &DenseMatrix, v: &[f64]) -> Result<PerturbationReport> {
    require_symmetric(b)?;
    if v.len() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: b.rows(),
            actual: v.len(),
            context: "perturbation vector length",
        });
    }
    let ev = symmetric_eigenvalues(b)?;
    let zeros = ev.iter().filter(|&&l| l < 1e-10).count();
    if zeros != 1 {
        return Err(Error::Precondition(format!(
            "B must have exactly one eigenvalue below 1e-10, found {zeros}"
        )));
    }
    let perturbed = b.rank_one_update(v)?;
    let pev = symmetric_eigenvalues(&perturbed)?;
    let scale = pev.last().copied().unwrap_or(0.0).abs().max(1.0);
    if pev[0] <= 1e-12 * scale {
        return Err(Error::Singular);
    }
    let lhs: f64 = pev.iter().map(|l| 1.0 / l).sum();
    let rhs = v.iter().map(|x| x * x).sum::<f64>() + ev[1..].iter().map(|l| 1.0 / l).sum::<f64>();
    Ok(PerturbationReport {
        lhs,
        rhs,
        holds: lhs >= rhs * (1.0 - 1e-8),
    })
}

/// `‖B̃‖²_F` and `(T/2)·max_i Σ_j B̃²_ij` for `B̃ = A - Diag A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrobeniusStats {
    pub offdiag_frobenius_sq: f64,
    pub max_row_sq: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn frobenius_stats(a_inv: &DenseMatrix) -> Result<FrobeniusStats> {
    require_symmetric(a_inv)?;
    let b = a_inv.off_diagonal();
    let max_row_sq = (0..b.rows())
        .map(|i| b.row(i).iter().map(|x| x * x).sum::<f64>())
        .fold(0.0, f64::max);
    let lhs = b.frobenius_sq();
    let rhs = b.rows() as f64 / 2.0 * max_row_sq;
    Ok(FrobeniusStats {
        offdiag_frobenius_sq: lhs,
        max_row_sq,
        rhs,
        holds: lhs >= rhs,
    })
}

/// `‖B̃‖²_F ≥ (T/2)·max_i Σ_j B̃²_ij`, the spread condition on `M⁻¹` for the
/// lower bound.
pub fn frobenius_condition(a_inv: &DenseMatrix) -> Result<bool> {
    Ok(frobenius_stats(a_inv)?.holds)
}

/// `λ_t(B) ≤ λ_t(B + vvᵀ)` for every `t`, up to `tol` relative to `‖B‖_F`.
pub fn interlacing_holds(b: &DenseMatrix, v: &[f64], tol: f64) -> Result<bool> {
    let before = symmetric_eigenvalues(b)?;
    let after = symmetric_eigenvalues(&b.rank_one_update(v)?)?;
    let slack = tol * b.frobenius().max(1.0);
    Ok(before.iter().zip(&after).all(|(a, c)| *a <= c + slack))
}

/// `ΔᵀΔ` where `Δ` holds the `T-1` difference rows of `Σ`: the path Laplacian.
pub fn difference_laplacian(order: usize) -> DenseMatrix {
    DenseMatrix::from_fn(order, order, |i, j| {
        if i == j {
            let ends = usize::from(i == 0) + usize::from(i + 1 == order);
            if order == 1 {
                0.0
            } else {
                2.0 - ends as f64
            }
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `Tr((ΔᵀΔ + vvᵀ)⁻¹)`.
pub fn biased_difference_trace_inverse(v: &[f64]) -> Result<f64> {
    let m = difference_laplacian(v.len()).rank_one_update(v)?;
    Ok(m.inverse()?.trace())
}

/// How sign patterns are searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SearchMode {
    /// All `2^T` patterns; `T ≤ 20`.
    Exhaustive,
    Sampled { trials: u64, seed: u64 },
}

pub const MAX_EXHAUSTIVE_ORDER: usize = 20;

/// Result of searching for losses `g_t = G·Y_t` with a large `‖Σ g̃_t‖²_A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryOutcome {
    pub signs: Vec<i8>,
    /// `ũ = -√P·A·G̃/‖G̃‖_A`.
    pub comparator: Vec<f64>,
    /// `‖ũ‖_{A⁻¹}`, equal to `√P`.
    pub comparator_norm: f64,
    /// `‖G̃‖²_A` for the returned pattern.
    pub achieved_quadratic: f64,
    /// `G²(Tr A + q‖A - Diag A‖_F)`.
    pub threshold: f64,
    pub success: bool,
    /// Regret of the all-zero play against `ũ`: `√P·‖G̃‖_A`.
    pub regret_lower_value: f64,
    pub patterns_checked: u64,
    /// Fraction of checked patterns reaching the threshold.
    pub success_fraction: f64,
}

struct SearchState {
    best: Vec<i8>,
    best_q: f64,
    hits: u64,
    checked: u64,
}

impl SearchState {
    fn new(len: usize) -> Self {
        Self {
            best: vec![1; len],
            best_q: f64::NEG_INFINITY,
            hits: 0,
            checked: 0,
        }
    }

    fn see(&mut self, signs: &[i8], q: f64, threshold: f64) {
        self.checked += 1;
        if q >= threshold {
            self.hits += 1;
        }
        if q > self.best_q {
            self.best_q = q;
            self.best.copy_from_slice(signs);
        }
    }

    fn merge(mut self, other: SearchState) -> SearchState {
        self.hits += other.hits;
        self.checked += other.checked;
        if other.best_q > self.best_q {
            self.best_q = other.best_q;
            self.best = other.best;
        }
        self
    }
}

/// Searches `Y ∈ {±1}^T` for `‖G·Y‖²_A ≥ G²(Tr A + q‖A - Diag A‖_F)` and
/// builds the matching comparator of `M`-norm `√P` with `A = M⁻¹`.
pub fn adversary_search(a: &DenseMatrix, grad_bound: f64, budget: f64, q: f64, mode: SearchMode) -> Result<AdversaryOutcome> {
    require_symmetric(a)?;
    if !(q >= 1.0) {
        return Err(Error::Precondition(format!("q must be at least 1, got {q}")));
    }
    if !(grad_bound > 0.0) || !(budget > 0.0) {
        return Err(Error::Precondition("G and P must be positive".into()));
    }
    let n = a.rows();
    let g2 = grad_bound * grad_bound;
    // Searched on the unit-G quadratic; scaled by G² afterwards.
    let unit_threshold = a.trace() + q * a.off_diagonal().frobenius();
    let state = match mode {
        SearchMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_ORDER {
                return Err(Error::TooLarge {
                    what: "exhaustive search horizon",
                    value: n,
                    limit: MAX_EXHAUSTIVE_ORDER,
                });
            }
            exhaustive(a, unit_threshold)
        }
        SearchMode::Sampled { trials, seed } => sampled(a, unit_threshold, trials, seed),
    };
    let gvec: Vec<f64> = state.best.iter().map(|&s| grad_bound * f64::from(s)).collect();
    let ag = a.matvec(&gvec)?;
    let quad: f64 = gvec.iter().zip(&ag).map(|(x, y)| x * y).sum();
    let norm_a = quad.max(0.0).sqrt();
    let comparator: Vec<f64> = if norm_a > 0.0 {
        ag.iter().map(|x| -budget.sqrt() * x / norm_a).collect()
    } else {
        vec![0.0; n]
    };
    let comparator_norm = match a.inverse() {
        Ok(m) => m.quadratic_form(&comparator)?.max(0.0).sqrt(),
        Err(_) => f64::NAN,
    };
    let regret_lower_value = -gvec.iter().zip(&comparator).map(|(g, u)| g * u).sum::<f64>();
    Ok(AdversaryOutcome {
        signs: state.best,
        comparator,
        comparator_norm,
        achieved_quadratic: quad,
        threshold: g2 * unit_threshold,
        success: quad >= g2 * unit_threshold,
        regret_lower_value,
        patterns_checked: state.checked,
        success_fraction: state.hits as f64 / state.checked.max(1) as f64,
    })
}

/// Gray-code enumeration keeping `r = A·Y`, so each flip costs `O(T)`.
fn exhaustive(a: &DenseMatrix, threshold: f64) -> SearchState {
    let n = a.rows();
    let mut st = SearchState::new(n);
    let mut y = vec![1i8; n];
    let mut r: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    let mut quad: f64 = r.iter().sum();
    st.see(&y, quad, threshold);
    for k in 1u64..(1u64 << n) {
        let i = k.trailing_zeros() as usize;
        let yi = f64::from(y[i]);
        quad += -4.0 * yi * r[i] + 4.0 * a.get(i, i);
        for (j, rj) in r.iter_mut().enumerate() {
            *rj -= 2.0 * yi * a.get(j, i);
        }
        y[i] = -y[i];
        st.see(&y, quad, threshold);
    }
    st
}

const CHUNK: u64 = 4096;

fn sign_vector(rng: &mut ChaCha8Rng, out: &mut [i8]) {
    out.iter_mut().for_each(|s| *s = if rng.random::<bool>() { 1 } else { -1 });
}

fn quad_signs(a: &DenseMatrix, y: &[i8]) -> f64 {
    (0..a.rows())
        .map(|i| {
            let ri: f64 = a.row(i).iter().zip(y).map(|(x, &s)| x * f64::from(s)).sum();
            f64::from(y[i]) * ri
        })
        .sum()
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunk_ranges(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(trials - c * CHUNK)))
        .collect()
}

fn sampled(a: &DenseMatrix, threshold: f64, trials: u64, seed: u64) -> SearchState {
    let n = a.rows();
    chunk_ranges(trials)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            let mut st = SearchState::new(n);
            let mut y = vec![0i8; n];
            for _ in 0..len {
                sign_vector(&mut rng, &mut y);
                st.see(&y, quad_signs(a, &y), threshold);
            }
            st
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(SearchState::new(n), SearchState::merge)
}

/// Summary of `‖G·Y‖²_A` over i.i.d. Rademacher `Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub trials: u64,
    pub mean: f64,
    pub std_error: f64,
    /// `G² Tr(A)`, the exact expectation.
    pub expected: f64,
    pub min: f64,
    pub max: f64,
    /// `(p, value)` pairs.
    pub quantiles: Vec<(f64, f64)>,
    /// Fraction exceeding `G²(Tr A + q‖A - Diag A‖_F)` for `q = 1, 2, 3`.
    pub exceed_fraction: [f64; 3],
    pub mean_within_3se: bool,
}

pub fn empirical_quadratic_tail(a: &DenseMatrix, grad_bound: f64, trials: u64, seed: u64) -> Result<TailSummary> {
    require_symmetric(a)?;
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let n = a.rows();
    let g2 = grad_bound * grad_bound;
    let mut samples: Vec<f64> = chunk_ranges(trials)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            let mut y = vec![0i8; n];
            (0..len)
                .map(|_| {
                    sign_vector(&mut rng, &mut y);
                    g2 * quad_signs(a, &y)
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    let std_error = (var / count).sqrt();
    let off = a.off_diagonal().frobenius();
    let trace = a.trace();
    let mut exceed = [0.0; 3];
    for (k, e) in exceed.iter_mut().enumerate() {
        let thr = g2 * (trace + (k + 1) as f64 * off);
        *e = samples.iter().filter(|&&x| x >= thr).count() as f64 / count;
    }
    samples.sort_by(f64::total_cmp);
    let quantile = |p: f64| samples[((p * (count - 1.0)).round() as usize).min(samples.len() - 1)];
    let expected = g2 * trace;
    Ok(TailSummary {
        trials,
        mean,
        std_error,
        expected,
        min: samples[0],
        max: samples[samples.len() - 1],
        quantiles: [0.01, 0.1, 0.5, 0.9, 0.99].iter().map(|&p| (p, quantile(p))).collect(),
        exceed_fraction: exceed,
        mean_within_3se: (mean - expected).abs() <= 3.0 * std_error + 1e-12 * expected.abs(),
    })
}
