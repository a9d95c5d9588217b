use super::{check_horizon, check_loss_dim, scalar_loss_bound, KtBettor, LearnerConfig, OnlineLearner, ScalarBettor, StepReport};
use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix, EmbeddedVector, Preconditioner};

/// The reduction evaluated directly from its definition with dense `S` and
/// `S⁻¹`: every round recomputes `θ = -(S⁻¹ ⊗ I) G̃` in full and normalizes by
/// `max(√V, ‖θ‖_M)`. Quadratic in `T` per round; meant for cross-checking.
#[derive(Debug)]
pub struct DenseOracleReducer {
    s: DenseMatrix,
    s_inv: DenseMatrix,
    dim: usize,
    bettor: KtBettor,
    grad_accum: EmbeddedVector,
    scale: f64,
    round: usize,
    pending: Option<(f64, EmbeddedVector)>,
}

impl DenseOracleReducer {
    pub fn new(precond: &dyn Preconditioner, dim: usize, config: LearnerConfig) -> Result<Self> {
        Self::from_inverse_matrix(precond.dense_inverse(), dim, config)
    }

    /// Builds from `S⁻¹` alone; `S` is recovered by Gauss-Jordan inversion.
    pub fn from_inverse_matrix(s_inv: DenseMatrix, dim: usize, config: LearnerConfig) -> Result<Self> {
        if s_inv.rows() != s_inv.cols() {
            return Err(Error::DimensionMismatch {
                expected: s_inv.rows(),
                actual: s_inv.cols(),
                context: "inverse preconditioner must be square",
            });
        }
        if dim == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        let s = s_inv.inverse()?;
        let bettor = KtBettor::new(config.epsilon, scalar_loss_bound(s_inv.max_abs(), config.grad_bound))?;
        let rounds = s_inv.rows();
        Ok(Self {
            s,
            s_inv,
            dim,
            bettor,
            grad_accum: EmbeddedVector::zeros(rounds, dim),
            scale: 0.0,
            round: 0,
            pending: None,
        })
    }

    fn blockwise(m: &DenseMatrix, x: &EmbeddedVector) -> EmbeddedVector {
        let mut out = EmbeddedVector::zeros(x.rounds(), x.dim());
        for j in 0..x.dim() {
            out.set_coordinate(j, &m.matvec(&x.coordinate(j)).expect("square matrix of matching order"));
        }
        out
    }

    /// `ṽ_t ∈ R^{dT}` for the upcoming round.
    pub fn dense_direction(&self) -> EmbeddedVector {
        let theta = Self::blockwise(&self.s_inv, &self.grad_accum).scaled(-1.0);
        if self.scale <= 0.0 {
            return EmbeddedVector::zeros(theta.rounds(), theta.dim());
        }
        let theta_m = theta
            .dot(&Self::blockwise(&self.s, &theta))
            .expect("shapes agree")
            .max(0.0)
            .sqrt();
        theta.scaled(1.0 / self.scale.sqrt().max(theta_m))
    }

    /// `W̃_t = β_t ṽ_t`, the full embedded play for the upcoming round.
    pub fn full_play(&self) -> EmbeddedVector {
        self.dense_direction().scaled(self.bettor.bet())
    }

    pub fn bettor(&self) -> &KtBettor {
        &self.bettor
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl OnlineLearner for DenseOracleReducer {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> usize {
        self.s.rows()
    }

    fn rounds_played(&self) -> usize {
        self.round
    }

    fn full_direction(&self) -> Option<EmbeddedVector> {
        Some(self.dense_direction())
    }

    fn predict(&mut self) -> Result<Vec<f64>> {
        check_horizon(self.round, self.horizon())?;
        let t = self.round + 1;
        if self.pending.is_none() {
            self.pending = Some((self.bettor.bet(), self.dense_direction()));
        }
        let (beta, dir) = self.pending.as_ref().expect("just set");
        Ok(dir.block(t).iter().map(|v| beta * v).collect())
    }

    fn update(&mut self, loss: &[f64]) -> Result<StepReport> {
        check_horizon(self.round, self.horizon())?;
        check_loss_dim(loss, self.dim)?;
        let (beta, dir) = self
            .pending
            .take()
            .ok_or_else(|| Error::Precondition("update called before predict".into()))?;
        let t = self.round + 1;
        let block = dir.block(t).to_vec();
        let c = dot(&block, loss);
        self.bettor.observe(c);
        self.scale += self.s_inv.get(t - 1, t - 1) * dot(loss, loss);
        self.grad_accum
            .block_mut(t)
            .iter_mut()
            .zip(loss)
            .for_each(|(a, b)| *a += b);
        self.round = t;
        let dual = self
            .grad_accum
            .dot(&Self::blockwise(&self.s_inv, &self.grad_accum))
            .expect("shapes agree")
            .max(0.0)
            .sqrt();
        Ok(StepReport {
            round: t,
            play: block.iter().map(|v| beta * v).collect(),
            loss: loss.to_vec(),
            beta,
            scalar_loss: c,
            direction: block,
            scale: self.scale,
            dual_norm: dual,
            bettor_wealth: self.bettor.wealth(),
        })
    }
}
