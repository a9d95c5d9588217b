//! The one-dimensional reduction: a scalar parameter-free bettor chooses the
//! magnitude, a scale-free FTRL direction learner chooses a point in the unit
//! `‖·‖_M` ball, and the play is their product.
//!
//! Three implementations of the combined learner share the same contract:
//!
//! * [`Reducer`] works with any [`Preconditioner`](crate::linalg::Preconditioner)
//!   and keeps `O(dT)` state.
//! * [`FastHaarReducer`] specializes to `S = (H_n H_nᵀ)⁻¹` and touches
//!   `O(d log T)` memory per round.
//! * [`DenseOracleReducer`] materializes everything densely; it exists to
//!   check the other two.

mod direction;
mod fast_haar;
mod kt;
mod oracle;
mod reducer;

pub use direction::DirectionState;
pub use fast_haar::FastHaarReducer;
pub use kt::{KtBettor, ScalarBettor};
pub use oracle::DenseOracleReducer;
pub use reducer::Reducer;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::EmbeddedVector;

/// Hyperparameters shared by the reducers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// `G`, the bound on `‖g_t‖₂`.
    pub grad_bound: f64,
    /// `ε`, the initial-wealth scale of the bettor.
    pub epsilon: f64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            grad_bound: 1.0,
            epsilon: 1.0,
        }
    }
}

/// Everything observable about one round of a learner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub round: usize,
    pub play: Vec<f64>,
    pub loss: Vec<f64>,
    /// `β_t` from the scalar bettor.
    pub beta: f64,
    /// `c_t = ⟨ṽ_t, g̃_t⟩`, the loss sent to the bettor.
    pub scalar_loss: f64,
    /// Block `t` of the direction `ṽ_t`.
    pub direction: Vec<f64>,
    /// `V_{t+1}`.
    pub scale: f64,
    /// `‖G̃_t‖_{M⁻¹}` after this round.
    pub dual_norm: f64,
    /// Bettor wealth after this round.
    pub bettor_wealth: f64,
}

/// An online linear learner over a fixed horizon. Each round is
/// [`predict`](OnlineLearner::predict) followed by
/// [`update`](OnlineLearner::update) with the observed loss vector.
pub trait OnlineLearner: Send {
    fn dim(&self) -> usize;

    fn horizon(&self) -> usize;

    fn rounds_played(&self) -> usize;

    /// The play `w_t` for the next round. Idempotent until `update`.
    fn predict(&mut self) -> Result<Vec<f64>>;

    fn update(&mut self, loss: &[f64]) -> Result<StepReport>;

    /// The full direction `ṽ_t ∈ R^{dT}` for the upcoming round, when the
    /// learner can reconstruct it. `W̃_t = β_t ṽ_t`.
    fn full_direction(&self) -> Option<EmbeddedVector> {
        None
    }

    /// `predict` then `update`.
    fn step(&mut self, loss: &[f64]) -> Result<StepReport> {
        self.predict()?;
        self.update(loss)
    }
}

/// The baseline that always plays the origin.
#[derive(Clone, Debug)]
pub struct ZeroLearner {
    dim: usize,
    horizon: usize,
    round: usize,
}

impl ZeroLearner {
    pub fn new(dim: usize, horizon: usize) -> Self {
        Self { dim, horizon, round: 0 }
    }
}

impl OnlineLearner for ZeroLearner {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn rounds_played(&self) -> usize {
        self.round
    }

    fn predict(&mut self) -> Result<Vec<f64>> {
        check_horizon(self.round, self.horizon)?;
        Ok(vec![0.0; self.dim])
    }

    fn update(&mut self, loss: &[f64]) -> Result<StepReport> {
        check_horizon(self.round, self.horizon)?;
        check_loss_dim(loss, self.dim)?;
        self.round += 1;
        Ok(StepReport {
            round: self.round,
            play: vec![0.0; self.dim],
            loss: loss.to_vec(),
            beta: 0.0,
            scalar_loss: 0.0,
            direction: vec![0.0; self.dim],
            scale: 0.0,
            dual_norm: 0.0,
            bettor_wealth: 0.0,
        })
    }
}

pub(crate) fn check_horizon(round: usize, horizon: usize) -> Result<()> {
    if round >= horizon {
        Err(Error::HorizonExceeded { horizon })
    } else {
        Ok(())
    }
}

pub(crate) fn check_loss_dim(loss: &[f64], dim: usize) -> Result<()> {
    if loss.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: loss.len(),
            context: "loss vector dimension",
        });
    }
    Ok(())
}

/// Bound on `|c_t|` handed to the bettor.
///
/// `|c_t| ≤ ‖g̃_t‖_{M⁻¹} = ‖g_t‖·√(S⁻¹_tt) ≤ G·√(max|S⁻¹|)`, which the
/// `G·max|S⁻¹|` form only dominates when the largest entry is at least one.
pub(crate) fn scalar_loss_bound(max_abs_inverse: f64, grad_bound: f64) -> f64 {
    grad_bound * max_abs_inverse.max(max_abs_inverse.sqrt())
}
