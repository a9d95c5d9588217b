use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{PreconditionerKind, ScenarioConfig};
use super::scenario::Scenario;
use crate::error::Result;
use crate::haar::{max_interval_gap, timescale_path_lengths, HaarPreconditioner};
use crate::learners::{DenseOracleReducer, FastHaarReducer, LearnerConfig, OnlineLearner, Reducer};
use crate::linalg::{
    dot, embed_comparator, lipschitz_bound, norm_sq, weighted_norm_sq, ComparatorSequence, DifferencePreconditioner,
    IdentityPreconditioner, Preconditioner,
};
use crate::reduction::{duality_gap, dynamic_regret, records, run_online, run_reduction, RegretRecord, Trajectory};

/// `log(max(x, 1))`.
pub fn log_plus(x: f64) -> f64 {
    x.max(1.0).ln()
}

/// `𝔊ε + ‖ũ‖_M·(√(V·(1 + log₊(‖ũ‖_M√V/𝔊ε))) + 𝔊·log₊(‖ũ‖_M√V/𝔊ε))`.
pub fn bound_form(lipschitz: f64, epsilon: f64, norm: f64, scale: f64) -> f64 {
    let ge = lipschitz * epsilon;
    let l = log_plus(norm * scale.sqrt() / ge);
    ge + norm * ((scale * (1.0 + l)).sqrt() + lipschitz * l)
}

/// Comparator-side quantities entering the regret bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparatorDiagnostics {
    pub label: String,
    /// `‖ũ‖_M` under the run's preconditioner.
    pub m_norm: f64,
    /// `√(‖ũ‖²_M·V_T)`.
    pub sqrt_norm_scale: f64,
    pub bound_form: f64,
    pub path_length: f64,
    pub squared_path_length: f64,
    /// `‖ū‖²` over the power-of-two padded sequence.
    pub mean_sq_norm: f64,
    /// `(τ, P̄(ũ, τ))` over the padded sequence.
    pub timescale_path_lengths: Vec<(usize, f64)>,
    pub max_interval_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: usize,
    pub horizon: usize,
    /// Horizon the learner actually ran, after padding.
    pub padded_horizon: usize,
    /// `R_T` per registered comparator.
    pub regret: Vec<f64>,
    /// Regret of the all-zero play per comparator.
    pub baseline_regret: Option<Vec<f64>>,
    pub wealth: f64,
    /// `V_T`.
    pub scale: f64,
    /// `Σ ‖g_t‖²`.
    pub grad_sq_sum: f64,
    /// `𝔊 = G·max|S⁻¹|`.
    pub lipschitz: f64,
    pub max_duality_gap: f64,
    /// `max_t ‖w_t - w_t^oracle‖ / max_t ‖w_t^oracle‖`, if the oracle ran.
    pub oracle_max_rel_diff: Option<f64>,
    pub scale_identity_rel_err: f64,
    pub diagnostics: Vec<ComparatorDiagnostics>,
    pub nanos_per_round: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungReport {
    pub horizon: usize,
    pub padded_horizon: usize,
    pub mean_regret: Vec<f64>,
    pub mean_baseline_regret: Option<Vec<f64>>,
    pub mean_bound_form: Vec<f64>,
    /// `mean R_T / mean bound_form` per comparator.
    pub fitted_c: Vec<f64>,
    pub nanos_per_round: f64,
    pub trials: Vec<TrialReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ScenarioConfig,
    pub comparator_labels: Vec<String>,
    pub rungs: Vec<RungReport>,
    /// Least-squares slope of `log mean R_T` on `log T` per comparator;
    /// `None` with fewer than two rungs or a nonpositive mean.
    pub growth_exponent: Vec<Option<f64>>,
    /// `max c / min c` across rungs per comparator.
    pub c_spread: Vec<Option<f64>>,
    pub checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Per-round records of one trial, kept when `per_round` is set.
#[derive(Clone, Debug)]
pub struct TrialRecords {
    pub horizon: usize,
    pub trial: usize,
    pub records: Vec<RegretRecord>,
}

pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub records: Vec<TrialRecords>,
}

fn padded_horizon(kind: PreconditionerKind, horizon: usize) -> usize {
    match kind {
        PreconditionerKind::Haar => horizon.next_power_of_two(),
        _ => horizon,
    }
}

fn make_preconditioner(kind: PreconditionerKind, rounds: usize) -> Result<Box<dyn Preconditioner>> {
    Ok(match kind {
        PreconditionerKind::Identity => Box::new(IdentityPreconditioner::new(rounds)),
        PreconditionerKind::Difference => Box::new(DifferencePreconditioner::new(rounds)),
        PreconditionerKind::Haar => Box::new(HaarPreconditioner::new(rounds)?),
    })
}

fn make_learner(kind: PreconditionerKind, rounds: usize, dim: usize, lc: LearnerConfig) -> Result<Box<dyn OnlineLearner>> {
    Ok(match kind {
        PreconditionerKind::Haar => Box::new(FastHaarReducer::new(rounds, dim, lc)?),
        other => Box::new(Reducer::new(make_preconditioner(other, rounds)?, dim, lc)?),
    })
}

/// Runs one trial at one horizon.
pub fn run_trial(cfg: &ScenarioConfig, horizon: usize, trial: usize) -> Result<(TrialReport, Option<Vec<RegretRecord>>)> {
    let sc = Scenario::build(cfg, horizon, trial)?;
    let padded = padded_horizon(cfg.preconditioner, horizon);
    let lc = LearnerConfig {
        grad_bound: sc.grad_bound,
        epsilon: cfg.epsilon,
    };
    let precond = make_preconditioner(cfg.preconditioner, padded)?;
    let mut learner = make_learner(cfg.preconditioner, padded, cfg.dim, lc)?;
    let zeros = vec![0.0; cfg.dim];
    let start = Instant::now();
    let mut full = run_online(learner.as_mut(), padded, |t, w| if t <= horizon { sc.loss(t, w) } else { zeros.clone() })?;
    let nanos_per_round = start.elapsed().as_nanos() as f64 / padded as f64;

    let oracle_max_rel_diff = if padded <= 64 && (cfg.preconditioner == PreconditionerKind::Haar || cfg.oracle_check) {
        let mut oracle = DenseOracleReducer::new(precond.as_ref(), cfg.dim, lc)?;
        let losses: Vec<Vec<f64>> = full.losses().map(<[f64]>::to_vec).collect();
        let replay = run_reduction(&mut oracle, &losses)?;
        // Relative to the trajectory's largest play: where a direction cancels
        // exactly, one side may carry rounding residue and the other a zero.
        let scale = replay.plays().map(|w| norm_sq(w).sqrt()).fold(0.0, f64::max);
        let diff = full
            .plays()
            .zip(replay.plays())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        Some(if scale > 0.0 { diff / scale } else { diff })
    } else {
        None
    };

    let scale = full.steps.last().map_or(0.0, |s| s.scale);
    let expected_scale: f64 = full
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| precond.inverse_diag(i + 1) * norm_sq(&s.loss))
        .sum();
    let scale_identity_rel_err = (scale - expected_scale).abs() / expected_scale.max(f64::MIN_POSITIVE);

    full.steps.truncate(horizon);
    let traj: Trajectory = full;
    let realized: Vec<Vec<f64>> = traj.losses().map(<[f64]>::to_vec).collect();
    let comparators = sc.comparators(&realized)?;
    let lipschitz = lipschitz_bound(precond.as_ref(), sc.grad_bound)?;
    let grad_sq_sum: f64 = realized.iter().map(|g| norm_sq(g)).sum();

    let mut regret = Vec::with_capacity(comparators.len());
    let mut baseline = Vec::with_capacity(comparators.len());
    let mut diagnostics = Vec::with_capacity(comparators.len());
    let mut max_gap = 0.0_f64;
    for (seq, label) in comparators.iter().zip(sc.comparator_labels()) {
        let r = dynamic_regret(&traj, seq)?;
        regret.push(r);
        max_gap = max_gap.max(duality_gap(&traj, seq)?.abs() / (1.0 + r.abs()));
        baseline.push(-realized.iter().zip(seq.points()).map(|(g, u)| dot(g, u)).sum::<f64>());
        diagnostics.push(comparator_diagnostics(label, seq, precond.as_ref(), padded, scale, lipschitz, cfg.epsilon)?);
    }

    let recs = if cfg.per_round {
        Some(records(&traj, &comparators)?)
    } else {
        None
    };
    Ok((
        TrialReport {
            trial,
            horizon,
            padded_horizon: padded,
            regret,
            baseline_regret: cfg.baseline.then_some(baseline),
            wealth: crate::reduction::wealth(&traj),
            scale,
            grad_sq_sum,
            lipschitz,
            max_duality_gap: max_gap,
            oracle_max_rel_diff,
            scale_identity_rel_err,
            diagnostics,
            nanos_per_round,
        },
        recs,
    ))
}

fn comparator_diagnostics(
    label: String,
    seq: &ComparatorSequence,
    precond: &dyn Preconditioner,
    padded: usize,
    scale: f64,
    lipschitz: f64,
    epsilon: f64,
) -> Result<ComparatorDiagnostics> {
    let for_norm = seq.padded_to(padded);
    let m_norm = weighted_norm_sq(&embed_comparator(&for_norm), precond)?.max(0.0).sqrt();
    let pow2 = seq.padded_to(seq.len().next_power_of_two());
    let mean = pow2.mean();
    Ok(ComparatorDiagnostics {
        label,
        m_norm,
        sqrt_norm_scale: m_norm * scale.sqrt(),
        bound_form: bound_form(lipschitz, epsilon, m_norm, scale),
        path_length: seq.path_length(),
        squared_path_length: seq.squared_path_length(),
        mean_sq_norm: norm_sq(&mean),
        timescale_path_lengths: timescale_path_lengths(&pow2)?,
        max_interval_gap: max_interval_gap(&pow2)?,
    })
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Runs every trial at every horizon of the ladder, in parallel, and
/// aggregates in `(horizon, trial)` order.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let horizons = cfg.horizons();
    let jobs: Vec<(usize, usize)> = horizons
        .iter()
        .flat_map(|&t| (0..cfg.trials).map(move |k| (t, k)))
        .collect();
    let mut results = jobs
        .par_iter()
        .map(|&(t, k)| run_trial(cfg, t, k))
        .collect::<Result<Vec<_>>>()?;
    results.sort_by_key(|(r, _)| (r.horizon, r.trial));

    let ncmp = cfg.comparators.len();
    let labels: Vec<String> = cfg.comparators.iter().map(|c| c.label()).collect();
    let mut rungs = Vec::with_capacity(horizons.len());
    let mut all_records = Vec::new();
    let mut iter = results.into_iter().peekable();
    for &t in &horizons {
        let mut trials = Vec::with_capacity(cfg.trials);
        while let Some((r, _)) = iter.peek() {
            if r.horizon != t {
                break;
            }
            let (r, recs) = iter.next().expect("peeked");
            if let Some(records) = recs {
                all_records.push(TrialRecords {
                    horizon: t,
                    trial: r.trial,
                    records,
                });
            }
            trials.push(r);
        }
        let mean_regret: Vec<f64> = (0..ncmp).map(|j| mean(trials.iter().map(|r| r.regret[j]))).collect();
        let mean_bound: Vec<f64> = (0..ncmp)
            .map(|j| mean(trials.iter().map(|r| r.diagnostics[j].bound_form)))
            .collect();
        let mean_baseline = cfg.baseline.then(|| {
            (0..ncmp)
                .map(|j| mean(trials.iter().filter_map(|r| r.baseline_regret.as_ref().map(|b| b[j]))))
                .collect()
        });
        rungs.push(RungReport {
            horizon: t,
            padded_horizon: padded_horizon(cfg.preconditioner, t),
            fitted_c: mean_regret.iter().zip(&mean_bound).map(|(r, b)| r / b).collect(),
            mean_regret,
            mean_baseline_regret: mean_baseline,
            mean_bound_form: mean_bound,
            nanos_per_round: mean(trials.iter().map(|r| r.nanos_per_round)),
            trials,
        });
    }

    let growth_exponent = (0..ncmp)
        .map(|j| {
            let pts: Vec<(f64, f64)> = rungs.iter().map(|r| (r.horizon as f64, r.mean_regret[j])).collect();
            loglog_slope(&pts)
        })
        .collect();
    let c_spread = (0..ncmp)
        .map(|j| {
            let cs: Vec<f64> = rungs.iter().map(|r| r.fitted_c[j]).collect();
            if cs.len() < 2 || cs.iter().any(|&c| !(c > 0.0)) {
                return None;
            }
            let hi = cs.iter().cloned().fold(f64::MIN, f64::max);
            let lo = cs.iter().cloned().fold(f64::MAX, f64::min);
            Some(hi / lo)
        })
        .collect();

    let checks = build_checks(&rungs);
    Ok(ExperimentOutput {
        report: ExperimentReport {
            config: cfg.clone(),
            comparator_labels: labels,
            rungs,
            growth_exponent,
            c_spread,
            checks,
        },
        records: all_records,
    })
}

fn build_checks(rungs: &[RungReport]) -> Vec<Check> {
    let trials = || rungs.iter().flat_map(|r| r.trials.iter());
    let gap = trials().map(|t| t.max_duality_gap).fold(0.0, f64::max);
    let scale_err = trials().map(|t| t.scale_identity_rel_err).fold(0.0, f64::max);
    let mut checks = vec![
        Check {
            name: "duality_gap".into(),
            passed: gap <= 1e-10,
            detail: format!("max |gap|/(1+|R|) = {gap:e}"),
        },
        Check {
            name: "scale_identity".into(),
            passed: scale_err <= 1e-12,
            detail: format!("max relative error of V_T against Σ S⁻¹_tt‖g_t‖² = {scale_err:e}"),
        },
    ];
    let oracle: Vec<f64> = trials().filter_map(|t| t.oracle_max_rel_diff).collect();
    if !oracle.is_empty() {
        let worst = oracle.iter().cloned().fold(0.0, f64::max);
        checks.push(Check {
            name: "oracle_equivalence".into(),
            passed: worst <= 1e-9,
            detail: format!("{} trials, max relative play difference {worst:e}", oracle.len()),
        });
    }
    let zero_loss_nonzero = trials().any(|t| t.grad_sq_sum == 0.0 && t.regret.iter().any(|&r| r != 0.0));
    checks.push(Check {
        name: "zero_losses_zero_regret".into(),
        passed: !zero_loss_nonzero,
        detail: "trials with all-zero losses report zero regret".into(),
    });
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ComparatorModel, LossModel};

    #[test]
    fn bound_form_small_scale() {
        // Logs clip at zero: 𝔊ε + ‖ũ‖√V.
        assert!((bound_form(1.0, 1.0, 0.5, 1.0) - 1.5).abs() < 1e-15);
        assert_eq!(log_plus(0.3), 0.0);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [64.0, 128.0, 256.0].iter().map(|&t: &f64| (t, 3.0 * t.powf(0.5))).collect();
        assert!((loglog_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert!(loglog_slope(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn small_haar_experiment_checks_pass() {
        let mut cfg = ScenarioConfig::new(20, 2, PreconditionerKind::Haar);
        cfg.trials = 3;
        cfg.per_round = true;
        cfg.comparators = vec![
            ComparatorModel::Zero,
            ComparatorModel::PiecewiseConstant {
                segments: 2,
                magnitude: 1.0,
            },
        ];
        let out = run_experiment(&cfg).unwrap();
        let rep = &out.report;
        assert!(rep.all_pass(), "{:?}", rep.checks);
        assert_eq!(rep.rungs[0].padded_horizon, 32);
        assert!(rep.checks.iter().any(|c| c.name == "oracle_equivalence"));
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.records[0].records.len(), 20);
    }

    #[test]
    fn zero_losses_zero_regret() {
        let mut cfg = ScenarioConfig::new(16, 1, PreconditionerKind::Difference);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.csv");
        std::fs::write(&path, "0\n".repeat(16)).unwrap();
        cfg.loss = LossModel::File { path, grad_bound: None };
        cfg.comparators = vec![ComparatorModel::Zero, ComparatorModel::Static { u: vec![2.0] }];
        let rep = run_experiment(&cfg).unwrap().report;
        assert!(rep.all_pass());
        assert!(rep.rungs[0].trials[0].regret.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn experiment_is_deterministic() {
        let mut cfg = ScenarioConfig::new(48, 1, PreconditionerKind::Difference);
        cfg.trials = 4;
        cfg.comparators = vec![ComparatorModel::Drift { step: 0.1 }];
        let a = run_experiment(&cfg).unwrap().report;
        let b = run_experiment(&cfg).unwrap().report;
        let strip = |r: &ExperimentReport| r.rungs.iter().flat_map(|g| g.trials.iter().map(|t| t.regret.clone())).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }
}
