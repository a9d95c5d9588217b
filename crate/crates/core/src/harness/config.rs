//! Scenario files: TOML with dotted keys.
//!
//! ```toml
//! horizon = 1024
//! dim = 2
//! preconditioner = "haar"
//! seed = 7
//! trials = 20
//! ladder = [64, 256, 1024]
//!
//! loss.model = "rademacher"
//! loss.grad_bound = 1.0
//!
//! [[comparators]]
//! model = "piecewise-constant"
//! segments = 4
//! magnitude = 1.0
//! ```
//!
//! Relative file paths inside the config resolve against the config's
//! directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreconditionerKind {
    Identity,
    Difference,
    Haar,
}

impl PreconditionerKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Difference => "difference",
            Self::Haar => "haar",
        }
    }
}

/// How the loss vectors are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossModel {
    /// `g_t = G·Y_t/√d` with independent signs per coordinate, so `‖g_t‖ = G`.
    Rademacher { grad_bound: f64 },
    /// `g_t = G·sign(w_t - target_t)/√d` coordinatewise, generated online.
    Tracking { grad_bound: f64, target: ComparatorModel },
    /// One row of `d` floats per round; rows are rescaled to norm at most
    /// `grad_bound` when given.
    File {
        path: PathBuf,
        #[serde(default)]
        grad_bound: Option<f64>,
    },
}

/// A comparator sequence family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ComparatorModel {
    Zero,
    Static { u: Vec<f64> },
    /// `K` equal segments; segment `k` (0-based) sits at
    /// `(k mod 2)·magnitude·(1, …, 1)/√d`.
    PiecewiseConstant { segments: usize, magnitude: f64 },
    /// The best constant-per-segment comparator in hindsight with per-segment
    /// norm `magnitude`: `u = -magnitude·S_k/‖S_k‖` with `S_k` the loss sum of
    /// segment `k`.
    PiecewiseBest { segments: usize, magnitude: f64 },
    /// Seeded random walk from the origin with steps of norm `step`.
    Drift { step: f64 },
    /// `amplitude·sin(2πt/period)·(1, …, 1)/√d`.
    Sinusoid { period: f64, amplitude: f64 },
    File { path: PathBuf },
}

impl ComparatorModel {
    pub fn label(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::Static { .. } => "static".into(),
            Self::PiecewiseConstant { segments, magnitude } => format!("piecewise-constant(K={segments},m={magnitude})"),
            Self::PiecewiseBest { segments, magnitude } => format!("piecewise-best(K={segments},m={magnitude})"),
            Self::Drift { step } => format!("drift(step={step})"),
            Self::Sinusoid { period, amplitude } => format!("sinusoid(period={period},amp={amplitude})"),
            Self::File { path } => format!("file({})", path.display()),
        }
    }
}

fn default_dim() -> usize {
    1
}
fn default_precond() -> PreconditionerKind {
    PreconditionerKind::Haar
}
fn default_epsilon() -> f64 {
    1.0
}
fn default_trials() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_loss() -> LossModel {
    LossModel::Rademacher { grad_bound: 1.0 }
}
fn default_comparators() -> Vec<ComparatorModel> {
    vec![ComparatorModel::Zero]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// `T`.
    pub horizon: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_precond")]
    pub preconditioner: PreconditionerKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Horizons for a growth study; empty means just `horizon`.
    #[serde(default)]
    pub ladder: Vec<usize>,
    /// Emit one CSV of records per trial.
    #[serde(default)]
    pub per_round: bool,
    /// Run the dense oracle alongside the Haar learner whenever `T ≤ 64`.
    #[serde(default)]
    pub oracle_check: bool,
    /// Also score the all-zero play.
    #[serde(default = "default_true")]
    pub baseline: bool,
    #[serde(default = "default_loss")]
    pub loss: LossModel,
    #[serde(default = "default_comparators")]
    pub comparators: Vec<ComparatorModel>,
}

impl ScenarioConfig {
    /// A Rademacher scenario with the zero comparator.
    pub fn new(horizon: usize, dim: usize, preconditioner: PreconditionerKind) -> Self {
        Self {
            horizon,
            dim,
            preconditioner,
            seed: 0,
            epsilon: 1.0,
            trials: 1,
            ladder: Vec::new(),
            per_round: false,
            oracle_check: false,
            baseline: true,
            loss: LossModel::Rademacher { grad_bound: 1.0 },
            comparators: default_comparators(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let syntax = |e: toml::de::Error| {
            let at = e.span().map(|s| format!("bytes {}..{}", s.start, s.end)).unwrap_or_else(|| "<root>".into());
            Error::config(at, e.message().to_string())
        };
        let de = toml::Deserializer::parse(text).map_err(syntax)?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "<root>".to_string() } else { path };
            Error::config(path, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        match &mut self.loss {
            LossModel::File { path, .. } => fix(path),
            LossModel::Tracking {
                target: ComparatorModel::File { path },
                ..
            } => fix(path),
            _ => {}
        }
        for c in &mut self.comparators {
            if let ComparatorModel::File { path } = c {
                fix(path);
            }
        }
    }

    /// Horizons to run, ascending.
    pub fn horizons(&self) -> Vec<usize> {
        if self.ladder.is_empty() {
            vec![self.horizon]
        } else {
            let mut l = self.ladder.clone();
            l.sort_unstable();
            l.dedup();
            l
        }
    }

    /// `G` as configured, or `None` for unscaled file losses.
    pub fn grad_bound(&self) -> Option<f64> {
        match &self.loss {
            LossModel::Rademacher { grad_bound } | LossModel::Tracking { grad_bound, .. } => Some(*grad_bound),
            LossModel::File { grad_bound, .. } => *grad_bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive_usize("horizon", self.horizon)?;
        positive_usize("dim", self.dim)?;
        positive_usize("trials", self.trials)?;
        positive_f64("epsilon", self.epsilon)?;
        for (i, &t) in self.ladder.iter().enumerate() {
            positive_usize(&format!("ladder[{i}]"), t)?;
        }
        match &self.loss {
            LossModel::Rademacher { grad_bound } => positive_f64("loss.grad_bound", *grad_bound)?,
            LossModel::Tracking { grad_bound, target } => {
                positive_f64("loss.grad_bound", *grad_bound)?;
                if matches!(target, ComparatorModel::PiecewiseBest { .. }) {
                    return Err(Error::config("loss.target.model", "piecewise-best depends on the losses it would generate"));
                }
                validate_comparator("loss.target", target, self.dim)?;
            }
            LossModel::File { grad_bound, .. } => {
                if let Some(g) = grad_bound {
                    positive_f64("loss.grad_bound", *g)?;
                }
                if !self.ladder.is_empty() {
                    return Err(Error::config("ladder", "a ladder needs generated losses, not a loss file"));
                }
            }
        }
        if self.comparators.is_empty() {
            return Err(Error::config("comparators", "at least one comparator is required"));
        }
        for (i, c) in self.comparators.iter().enumerate() {
            validate_comparator(&format!("comparators[{i}]"), c, self.dim)?;
        }
        Ok(())
    }
}

fn positive_usize(path: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::config(path, "must be positive"));
    }
    Ok(())
}

fn positive_f64(path: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::config(path, format!("must be a positive finite number, got {v}")));
    }
    Ok(())
}

fn nonneg_f64(path: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::config(path, format!("must be a nonnegative finite number, got {v}")));
    }
    Ok(())
}

fn validate_comparator(path: &str, c: &ComparatorModel, dim: usize) -> Result<()> {
    match c {
        ComparatorModel::Zero | ComparatorModel::File { .. } => Ok(()),
        ComparatorModel::Static { u } => {
            if u.len() != dim {
                return Err(Error::config(format!("{path}.u"), format!("expected {dim} entries, got {}", u.len())));
            }
            Ok(())
        }
        ComparatorModel::PiecewiseConstant { segments, magnitude } | ComparatorModel::PiecewiseBest { segments, magnitude } => {
            positive_usize(&format!("{path}.segments"), *segments)?;
            nonneg_f64(&format!("{path}.magnitude"), *magnitude)
        }
        ComparatorModel::Drift { step } => nonneg_f64(&format!("{path}.step"), *step),
        ComparatorModel::Sinusoid { period, amplitude } => {
            positive_f64(&format!("{path}.period"), *period)?;
            nonneg_f64(&format!("{path}.amplitude"), *amplitude)
        }
    }
}
