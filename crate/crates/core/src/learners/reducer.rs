use super::{check_horizon, check_loss_dim, scalar_loss_bound, DirectionState, KtBettor, LearnerConfig, OnlineLearner, ScalarBettor, StepReport};
use crate::error::{Error, Result};
use crate::linalg::{dot, EmbeddedVector, Preconditioner};

#[derive(Clone, Debug)]
struct Pending {
    beta: f64,
    direction: Vec<f64>,
    cross: Vec<f64>,
    play: Vec<f64>,
}

/// The reduction for an arbitrary preconditioner: `w_t = β_t · block_t(ṽ_t)`.
///
/// Only block `t` of `(S⁻¹ ⊗ I) G̃` is computed each round, through
/// [`Preconditioner::inverse_block`].
#[derive(Debug)]
pub struct Reducer<P: Preconditioner, B: ScalarBettor = KtBettor> {
    precond: P,
    bettor: B,
    direction: DirectionState,
    dim: usize,
    round: usize,
    pending: Option<Pending>,
}

impl<P: Preconditioner> Reducer<P, KtBettor> {
    /// Uses a KT bettor with `𝔊 = G · max(max|S⁻¹|, √max|S⁻¹|)`.
    pub fn new(precond: P, dim: usize, config: LearnerConfig) -> Result<Self> {
        let bound = scalar_loss_bound(precond.max_abs_inverse_entry(), config.grad_bound);
        let bettor = KtBettor::new(config.epsilon, bound)?;
        Self::with_bettor(precond, dim, bettor)
    }
}

impl<P: Preconditioner, B: ScalarBettor> Reducer<P, B> {
    pub fn with_bettor(precond: P, dim: usize, bettor: B) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        let rounds = precond.order();
        Ok(Self {
            precond,
            bettor,
            direction: DirectionState::new(rounds, dim),
            dim,
            round: 0,
            pending: None,
        })
    }

    pub fn preconditioner(&self) -> &P {
        &self.precond
    }

    pub fn bettor(&self) -> &B {
        &self.bettor
    }

    pub fn direction_state(&self) -> &DirectionState {
        &self.direction
    }
}

impl<P: Preconditioner, B: ScalarBettor> OnlineLearner for Reducer<P, B> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> usize {
        self.precond.order()
    }

    fn rounds_played(&self) -> usize {
        self.round
    }

    fn full_direction(&self) -> Option<EmbeddedVector> {
        Some(self.direction.predict(&self.precond))
    }

    fn predict(&mut self) -> Result<Vec<f64>> {
        check_horizon(self.round, self.horizon())?;
        if let Some(p) = &self.pending {
            return Ok(p.play.clone());
        }
        let t = self.round + 1;
        let beta = self.bettor.bet();
        let (direction, cross) = self.direction.predict_block(t, &self.precond);
        let play: Vec<f64> = direction.iter().map(|v| beta * v).collect();
        self.pending = Some(Pending {
            beta,
            direction,
            cross,
            play: play.clone(),
        });
        Ok(play)
    }

    fn update(&mut self, loss: &[f64]) -> Result<StepReport> {
        check_horizon(self.round, self.horizon())?;
        check_loss_dim(loss, self.dim)?;
        let pending = self
            .pending
            .take()
            .ok_or_else(|| Error::Precondition("update called before predict".into()))?;
        let t = self.round + 1;
        let c = dot(&pending.direction, loss);
        self.bettor.observe(c);
        self.direction.update(t, loss, &pending.cross, &self.precond)?;
        self.round = t;
        Ok(StepReport {
            round: t,
            play: pending.play,
            loss: loss.to_vec(),
            beta: pending.beta,
            scalar_loss: c,
            direction: pending.direction,
            scale: self.direction.scale(),
            dual_norm: self.direction.dual_norm_sq().sqrt(),
            bettor_wealth: self.bettor.wealth(),
        })
    }
}
