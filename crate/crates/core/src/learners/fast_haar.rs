use super::{check_horizon, check_loss_dim, scalar_loss_bound, KtBettor, LearnerConfig, OnlineLearner, ScalarBettor, StepReport};
use crate::error::{Error, Result};
use crate::haar::{haar_apply, haar_row_into, hht_diag, log2_exact};
use crate::linalg::{dot, norm_sq, EmbeddedVector};

#[derive(Clone, Debug)]
struct Pending {
    beta: f64,
    direction: Vec<f64>,
    cross: Vec<f64>,
}

/// The reduction specialized to `S = (H_n H_nᵀ)⁻¹`.
///
/// Keeps the Haar coefficients `Λ = (H_nᵀ ⊗ I) G̃` as `T` columns of length
/// `d`. Row `t` of `H_n` has `1 + n` nonzeros, so block `t` of
/// `(H_n H_nᵀ ⊗ I) G̃` and the rank-one update of `Λ` both cost `O(d log T)`.
/// The diagonal of `H_n H_nᵀ` is the constant `1 + n`, so `V` and the running
/// dual norm need no other state.
#[derive(Debug)]
pub struct FastHaarReducer {
    order: u32,
    rounds: usize,
    dim: usize,
    lambda: Vec<f64>,
    scale: f64,
    dual_norm_sq: f64,
    bettor: KtBettor,
    round: usize,
    row: Vec<(usize, f64)>,
    pending: Option<Pending>,
}

impl FastHaarReducer {
    pub fn new(rounds: usize, dim: usize, config: LearnerConfig) -> Result<Self> {
        let order = log2_exact(rounds)?;
        if dim == 0 {
            return Err(Error::Precondition("dimension must be positive".into()));
        }
        let bettor = KtBettor::new(config.epsilon, scalar_loss_bound(hht_diag(order), config.grad_bound))?;
        Ok(Self {
            order,
            rounds,
            dim,
            lambda: vec![0.0; rounds * dim],
            scale: 0.0,
            dual_norm_sq: 0.0,
            bettor,
            round: 0,
            row: Vec::with_capacity(order as usize + 1),
            pending: None,
        })
    }

    /// Column `k` (0-based) of `Λ`.
    pub fn lambda(&self, k: usize) -> &[f64] {
        &self.lambda[k * self.dim..(k + 1) * self.dim]
    }

    /// `θ̂ = -Λ`, the Haar coefficients of the unnormalized FTRL iterate.
    pub fn theta_hat(&self) -> Vec<Vec<f64>> {
        (0..self.rounds)
            .map(|k| self.lambda(k).iter().map(|v| -v).collect())
            .collect()
    }

    /// Columns of `Λ` read and written in the most recent round.
    pub fn touched_columns(&self) -> usize {
        self.row.len()
    }

    pub fn bettor(&self) -> &KtBettor {
        &self.bettor
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dual_norm_sq(&self) -> f64 {
        self.dual_norm_sq
    }
}

impl OnlineLearner for FastHaarReducer {
    fn dim(&self) -> usize {
        self.dim
    }

    fn horizon(&self) -> usize {
        self.rounds
    }

    fn rounds_played(&self) -> usize {
        self.round
    }

    fn full_direction(&self) -> Option<EmbeddedVector> {
        let mut out = EmbeddedVector::zeros(self.rounds, self.dim);
        if self.scale <= 0.0 {
            return Some(out);
        }
        let den = self.scale.sqrt().max(self.dual_norm_sq.sqrt());
        for j in 0..self.dim {
            let coeffs: Vec<f64> = (0..self.rounds).map(|k| -self.lambda[k * self.dim + j] / den).collect();
            out.set_coordinate(j, &haar_apply(&coeffs).expect("power-of-two length"));
        }
        Some(out)
    }

    fn predict(&mut self) -> Result<Vec<f64>> {
        check_horizon(self.round, self.rounds)?;
        if self.pending.is_none() {
            haar_row_into(self.round, self.rounds, &mut self.row);
            let d = self.dim;
            let mut cross = vec![0.0; d];
            for &(k, s) in &self.row {
                let col = &self.lambda[k * d..(k + 1) * d];
                cross.iter_mut().zip(col).for_each(|(q, l)| *q += s * l);
            }
            let direction = if self.scale > 0.0 {
                let den = self.scale.sqrt().max(self.dual_norm_sq.sqrt());
                cross.iter().map(|q| -q / den).collect()
            } else {
                vec![0.0; d]
            };
            self.pending = Some(Pending {
                beta: self.bettor.bet(),
                direction,
                cross,
            });
        }
        let p = self.pending.as_ref().expect("just set");
        Ok(p.direction.iter().map(|v| p.beta * v).collect())
    }

    fn update(&mut self, loss: &[f64]) -> Result<StepReport> {
        check_horizon(self.round, self.rounds)?;
        check_loss_dim(loss, self.dim)?;
        let p = self
            .pending
            .take()
            .ok_or_else(|| Error::Precondition("update called before predict".into()))?;
        let c = dot(&p.direction, loss);
        self.bettor.observe(c);
        let inc = hht_diag(self.order) * norm_sq(loss);
        self.scale += inc;
        self.dual_norm_sq = (self.dual_norm_sq + inc + 2.0 * dot(loss, &p.cross)).max(0.0);
        // `self.row` still holds row t from `predict`.
        let d = self.dim;
        for &(k, s) in &self.row {
            let col = &mut self.lambda[k * d..(k + 1) * d];
            col.iter_mut().zip(loss).for_each(|(l, g)| *l += s * g);
        }
        self.round += 1;
        Ok(StepReport {
            round: self.round,
            play: p.direction.iter().map(|v| p.beta * v).collect(),
            loss: loss.to_vec(),
            beta: p.beta,
            scalar_loss: c,
            direction: p.direction,
            scale: self.scale,
            dual_norm: self.dual_norm_sq.sqrt(),
            bettor_wealth: self.bettor.wealth(),
        })
    }
}
