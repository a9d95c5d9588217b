//! Running a learner against a loss sequence, and the regret and wealth
//! bookkeeping around it.
//!
//! The learner plays block `t` of its `dT`-dimensional iterate `W̃_t` and is
//! fed `g̃_t = e_t ⊗ g_t`. Dynamic regret against `u_1, …, u_T` equals static
//! regret against the concatenation `ũ` in `R^{dT}`, and
//! `R_T(ũ) + Wealth_T + ⟨G̃_T, ũ⟩ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{OnlineLearner, StepReport};
use crate::linalg::{dot, embed_comparator, embed_loss, weighted_norm_sq, ComparatorSequence, EmbeddedVector, Preconditioner};

/// Plays, losses and per-round learner diagnostics of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<StepReport>,
    /// `ṽ_t ∈ R^{dT}` per round, recorded only by [`run_reduction_debug`].
    #[serde(skip)]
    pub full_directions: Option<Vec<EmbeddedVector>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn plays(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.iter().map(|s| s.play.as_slice())
    }

    pub fn losses(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.iter().map(|s| s.loss.as_slice())
    }

    pub fn dim(&self) -> Option<usize> {
        self.steps.first().map(|s| s.play.len())
    }

    /// `W̃_t = β_t ṽ_t` for every round, if the run recorded directions.
    pub fn full_plays(&self) -> Option<Vec<EmbeddedVector>> {
        let dirs = self.full_directions.as_ref()?;
        Some(dirs.iter().zip(&self.steps).map(|(v, s)| v.scaled(s.beta)).collect())
    }
}

/// Plays the learner against a precomputed loss sequence.
pub fn run_reduction<L: OnlineLearner + ?Sized>(learner: &mut L, losses: &[Vec<f64>]) -> Result<Trajectory> {
    run(learner, losses, false)
}

/// As [`run_reduction`], also recording the full direction `ṽ_t` each round.
pub fn run_reduction_debug<L: OnlineLearner + ?Sized>(learner: &mut L, losses: &[Vec<f64>]) -> Result<Trajectory> {
    run(learner, losses, true)
}

fn run<L: OnlineLearner + ?Sized>(learner: &mut L, losses: &[Vec<f64>], debug: bool) -> Result<Trajectory> {
    let remaining = learner.horizon() - learner.rounds_played();
    if losses.len() != remaining {
        return Err(Error::DimensionMismatch {
            expected: remaining,
            actual: losses.len(),
            context: "loss sequence length vs learner horizon",
        });
    }
    let mut traj = Trajectory {
        steps: Vec::with_capacity(losses.len()),
        full_directions: debug.then(Vec::new),
    };
    for g in losses {
        learner.predict()?;
        if let Some(dirs) = traj.full_directions.as_mut() {
            let v = learner
                .full_direction()
                .ok_or_else(|| Error::Precondition("learner cannot reconstruct its full direction".into()))?;
            dirs.push(v);
        }
        traj.steps.push(learner.update(g)?);
    }
    Ok(traj)
}

/// Runs `rounds` rounds where the loss may depend on the current play:
/// `loss_fn(t, w_t)` returns `g_t`.
pub fn run_online<L, F>(learner: &mut L, rounds: usize, mut loss_fn: F) -> Result<Trajectory>
where
    L: OnlineLearner + ?Sized,
    F: FnMut(usize, &[f64]) -> Vec<f64>,
{
    let mut traj = Trajectory::default();
    for _ in 0..rounds {
        let t = learner.rounds_played() + 1;
        let w = learner.predict()?;
        let g = loss_fn(t, &w);
        traj.steps.push(learner.update(&g)?);
    }
    Ok(traj)
}

fn check_lengths(traj: &Trajectory, seq: &ComparatorSequence) -> Result<()> {
    if traj.len() != seq.len() {
        return Err(Error::DimensionMismatch {
            expected: traj.len(),
            actual: seq.len(),
            context: "comparator length vs trajectory length",
        });
    }
    if let Some(d) = traj.dim() {
        if d != seq.dim() {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: seq.dim(),
                context: "comparator dimension vs play dimension",
            });
        }
    }
    Ok(())
}

/// `Σ_t ⟨g_t, w_t - u_t⟩`.
pub fn dynamic_regret(traj: &Trajectory, seq: &ComparatorSequence) -> Result<f64> {
    check_lengths(traj, seq)?;
    Ok(traj
        .steps
        .iter()
        .zip(seq.points())
        .map(|(s, u)| dot(&s.loss, &s.play) - dot(&s.loss, u))
        .sum())
}

/// `Wealth_T = -Σ_t ⟨g_t, w_t⟩`.
pub fn wealth(traj: &Trajectory) -> f64 {
    -traj.steps.iter().map(|s| dot(&s.loss, &s.play)).sum::<f64>()
}

/// `R_T(ũ) + Wealth_T + ⟨G̃_T, ũ⟩`, identically zero.
pub fn duality_gap(traj: &Trajectory, seq: &ComparatorSequence) -> Result<f64> {
    let regret = dynamic_regret(traj, seq)?;
    let g_dot_u: f64 = traj.steps.iter().zip(seq.points()).map(|(s, u)| dot(&s.loss, u)).sum();
    Ok(regret + wealth(traj) + g_dot_u)
}

/// `Σ_t ⟨g̃_t, W̃_t - ũ⟩` evaluated in `R^{dT}` from the full plays.
pub fn embedded_regret(full_plays: &[EmbeddedVector], traj: &Trajectory, seq: &ComparatorSequence) -> Result<f64> {
    check_lengths(traj, seq)?;
    if full_plays.len() != traj.len() {
        return Err(Error::DimensionMismatch {
            expected: traj.len(),
            actual: full_plays.len(),
            context: "full plays vs trajectory length",
        });
    }
    let u = embed_comparator(seq);
    let mut total = 0.0;
    for (t, (w, s)) in full_plays.iter().zip(&traj.steps).enumerate() {
        let g = embed_loss(t + 1, &s.loss, traj.len())?;
        total += g.dot(&w.sub(&u)?)?;
    }
    Ok(total)
}

/// The two terms of the regret decomposition of the reduction against `ũ`:
/// `Σ⟨g̃_t, W̃_t - ũ⟩ = Σ c_t(β_t - ‖ũ‖_M) + ‖ũ‖_M · Σ⟨g̃_t, ṽ_t - ũ/‖ũ‖_M⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub total: f64,
    /// Regret of the scalar bettor against `‖ũ‖_M`.
    pub bettor_regret: f64,
    /// Regret of the direction learner against `ũ/‖ũ‖_M`.
    pub direction_regret: f64,
    pub comparator_norm: f64,
}

impl Decomposition {
    pub fn recombined(&self) -> f64 {
        self.bettor_regret + self.comparator_norm * self.direction_regret
    }
}

pub fn decompose_regret<P: Preconditioner + ?Sized>(
    traj: &Trajectory,
    seq: &ComparatorSequence,
    precond: &P,
) -> Result<Decomposition> {
    check_lengths(traj, seq)?;
    let dirs = traj
        .full_directions
        .as_ref()
        .ok_or_else(|| Error::Precondition("trajectory has no recorded directions".into()))?;
    let u = embed_comparator(seq);
    let norm = weighted_norm_sq(&u, precond)?.sqrt();
    if norm == 0.0 {
        return Err(Error::Precondition("comparator has zero M-norm".into()));
    }
    let unit = u.scaled(1.0 / norm);
    let (mut total, mut bettor, mut direction) = (0.0, 0.0, 0.0);
    for (t, (v, s)) in dirs.iter().zip(&traj.steps).enumerate() {
        let g = embed_loss(t + 1, &s.loss, traj.len())?;
        total += g.dot(&v.scaled(s.beta).sub(&u)?)?;
        bettor += s.scalar_loss * (s.beta - norm);
        direction += g.dot(&v.sub(&unit)?)?;
    }
    Ok(Decomposition {
        total,
        bettor_regret: bettor,
        direction_regret: direction,
        comparator_norm: norm,
    })
}

/// One round of a run, with regret against every registered comparator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub t: usize,
    pub play: Vec<f64>,
    pub loss: Vec<f64>,
    /// `⟨g_t, w_t - u_t⟩` per comparator.
    pub regret: Vec<f64>,
    /// Prefix sums of `regret`.
    pub regret_cum: Vec<f64>,
    /// `-Σ_{s≤t} ⟨g_s, w_s⟩`.
    pub wealth: f64,
    pub scale: f64,
    pub beta: f64,
    pub dual_norm: f64,
}

pub fn records(traj: &Trajectory, comparators: &[ComparatorSequence]) -> Result<Vec<RegretRecord>> {
    for c in comparators {
        check_lengths(traj, c)?;
    }
    let mut cum = vec![0.0; comparators.len()];
    let mut wealth = 0.0;
    let mut out = Vec::with_capacity(traj.len());
    for (i, s) in traj.steps.iter().enumerate() {
        let gw = dot(&s.loss, &s.play);
        let regret: Vec<f64> = comparators.iter().map(|c| gw - dot(&s.loss, c.point(i + 1))).collect();
        cum.iter_mut().zip(&regret).for_each(|(a, r)| *a += r);
        wealth -= gw;
        out.push(RegretRecord {
            t: s.round,
            play: s.play.clone(),
            loss: s.loss.clone(),
            regret,
            regret_cum: cum.clone(),
            wealth,
            scale: s.scale,
            beta: s.beta,
            dual_norm: s.dual_norm,
        });
    }
    Ok(out)
}
