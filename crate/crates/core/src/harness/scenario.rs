use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ComparatorModel, LossModel, ScenarioConfig};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, ComparatorSequence};

/// The seeded stream for one `(horizon, trial, purpose)` triple. Purpose 0 is
/// the loss sequence; purpose `1 + j` is comparator `j`.
pub fn scenario_rng(seed: u64, horizon: usize, trial: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (horizon as u64).rotate_left(32));
    rng.set_stream(((trial as u64) << 16) | purpose);
    rng
}

fn random_signs(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| if rng.random::<bool>() { scale } else { -scale }).collect()
}

/// Where the losses of one trial come from.
#[derive(Clone, Debug)]
pub enum LossSource {
    Fixed(Vec<Vec<f64>>),
    /// Generated from the play: `G·sign(w_t - target_t)/√d`.
    Tracking { target: ComparatorSequence, grad_bound: f64 },
}

/// One trial of a scenario at one horizon.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub horizon: usize,
    pub dim: usize,
    pub trial: usize,
    pub losses: LossSource,
    /// The `G` handed to the learner.
    pub grad_bound: f64,
    seed: u64,
    comparators: Vec<ComparatorModel>,
}

impl Scenario {
    pub fn build(cfg: &ScenarioConfig, horizon: usize, trial: usize) -> Result<Self> {
        let d = cfg.dim;
        let (losses, grad_bound) = match &cfg.loss {
            LossModel::Rademacher { grad_bound } => {
                let mut rng = scenario_rng(cfg.seed, horizon, trial, 0);
                let scale = grad_bound / (d as f64).sqrt();
                let losses = (0..horizon).map(|_| random_signs(&mut rng, d, scale)).collect();
                (LossSource::Fixed(losses), *grad_bound)
            }
            LossModel::Tracking { grad_bound, target } => {
                let target = resolve_comparator(target, horizon, d, &[], cfg.seed, trial, u64::from(u16::MAX))?;
                (
                    LossSource::Tracking {
                        target,
                        grad_bound: *grad_bound,
                    },
                    *grad_bound,
                )
            }
            LossModel::File { path, grad_bound } => {
                let mut rows = read_rows(path, horizon, d)?;
                let g = match grad_bound {
                    Some(g) => {
                        for r in &mut rows {
                            let n = norm_sq(r).sqrt();
                            if n > *g {
                                r.iter_mut().for_each(|x| *x *= g / n);
                            }
                        }
                        *g
                    }
                    None => rows.iter().map(|r| norm_sq(r).sqrt()).fold(0.0, f64::max),
                };
                (LossSource::Fixed(rows), if g > 0.0 { g } else { 1.0 })
            }
        };
        Ok(Self {
            horizon,
            dim: d,
            trial,
            losses,
            grad_bound,
            seed: cfg.seed,
            comparators: cfg.comparators.clone(),
        })
    }

    /// The loss at round `t` (1-based) given the play `w_t`.
    pub fn loss(&self, t: usize, play: &[f64]) -> Vec<f64> {
        match &self.losses {
            LossSource::Fixed(rows) => rows[t - 1].clone(),
            LossSource::Tracking { target, grad_bound } => tracking_loss(play, target.point(t), *grad_bound),
        }
    }

    pub fn comparator_labels(&self) -> Vec<String> {
        self.comparators.iter().map(ComparatorModel::label).collect()
    }

    /// Comparator sequences, given the losses actually played.
    pub fn comparators(&self, realized: &[Vec<f64>]) -> Result<Vec<ComparatorSequence>> {
        self.comparators
            .iter()
            .enumerate()
            .map(|(j, m)| resolve_comparator(m, self.horizon, self.dim, realized, self.seed, self.trial, 1 + j as u64))
            .collect()
    }
}

/// `G·sign(w - target)/√d` per coordinate, zero where they agree.
pub fn tracking_loss(play: &[f64], target: &[f64], grad_bound: f64) -> Vec<f64> {
    let scale = grad_bound / (play.len() as f64).sqrt();
    play.iter()
        .zip(target)
        .map(|(w, u)| {
            let diff = w - u;
            if diff > 0.0 {
                scale
            } else if diff < 0.0 {
                -scale
            } else {
                0.0
            }
        })
        .collect()
}

fn segment_of(t0: usize, segments: usize, horizon: usize) -> usize {
    t0 * segments / horizon
}

fn resolve_comparator(
    model: &ComparatorModel,
    horizon: usize,
    dim: usize,
    losses: &[Vec<f64>],
    seed: u64,
    trial: usize,
    purpose: u64,
) -> Result<ComparatorSequence> {
    let inv_sqrt_d = 1.0 / (dim as f64).sqrt();
    let points: Vec<Vec<f64>> = match model {
        ComparatorModel::Zero => vec![vec![0.0; dim]; horizon],
        ComparatorModel::Static { u } => vec![u.clone(); horizon],
        ComparatorModel::PiecewiseConstant { segments, magnitude } => (0..horizon)
            .map(|t| {
                let k = segment_of(t, *segments, horizon);
                vec![(k % 2) as f64 * magnitude * inv_sqrt_d; dim]
            })
            .collect(),
        ComparatorModel::PiecewiseBest { segments, magnitude } => {
            if losses.len() < horizon {
                return Err(Error::Precondition("piecewise-best needs the realized losses".into()));
            }
            let mut sums = vec![vec![0.0; dim]; *segments];
            for (t, g) in losses.iter().take(horizon).enumerate() {
                let s = &mut sums[segment_of(t, *segments, horizon)];
                s.iter_mut().zip(g).for_each(|(a, b)| *a += b);
            }
            let values: Vec<Vec<f64>> = sums
                .into_iter()
                .map(|s| {
                    let n = norm_sq(&s).sqrt();
                    if n > 0.0 {
                        s.iter().map(|x| -magnitude * x / n).collect()
                    } else {
                        vec![0.0; dim]
                    }
                })
                .collect();
            (0..horizon).map(|t| values[segment_of(t, *segments, horizon)].clone()).collect()
        }
        ComparatorModel::Drift { step } => {
            let mut rng = scenario_rng(seed, horizon, trial, purpose);
            let mut u = vec![0.0; dim];
            let mut out = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                out.push(u.clone());
                let xi = random_signs(&mut rng, dim, step * inv_sqrt_d);
                u.iter_mut().zip(xi).for_each(|(a, b)| *a += b);
            }
            out
        }
        ComparatorModel::Sinusoid { period, amplitude } => (1..=horizon)
            .map(|t| {
                let v = amplitude * (std::f64::consts::TAU * t as f64 / period).sin() * inv_sqrt_d;
                vec![v; dim]
            })
            .collect(),
        ComparatorModel::File { path } => read_rows(path, horizon, dim)?,
    };
    ComparatorSequence::new(points)
}

/// The first `horizon` rows of a headerless CSV of `dim` floats per row.
pub fn read_rows(path: &Path, horizon: usize, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::with_capacity(horizon);
    for (i, rec) in rdr.records().take(horizon).enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        if row.len() != dim {
            return Err(Error::Parse(format!(
                "{}: row {} has {} values, expected {dim}",
                path.display(),
                i + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() < horizon {
        return Err(Error::Parse(format!(
            "{}: {} rows, horizon needs {horizon}",
            path.display(),
            rows.len()
        )));
    }
    Ok(rows)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

/// Losses and comparators of trial 0 at the configured horizon. Tracking
/// losses depend on the learner and are rejected here.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<(Vec<Vec<f64>>, Vec<ComparatorSequence>)> {
    cfg.validate()?;
    let sc = Scenario::build(cfg, cfg.horizon, 0)?;
    match &sc.losses {
        LossSource::Fixed(rows) => {
            let comps = sc.comparators(rows)?;
            Ok((rows.clone(), comps))
        }
        LossSource::Tracking { .. } => Err(Error::config(
            "loss.model",
            "tracking losses are generated online; use run_experiment",
        )),
    }
}
