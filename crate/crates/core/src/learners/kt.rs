use crate::error::{Error, Result};

/// A one-dimensional parameter-free learner: it emits a signed bet `β_t` and
/// is charged the scalar loss `c_t β_t`.
pub trait ScalarBettor: std::fmt::Debug + Send {
    fn bet(&self) -> f64;

    fn observe(&mut self, loss: f64);

    fn wealth(&self) -> f64;

    /// The magnitude bound `𝔊` on scalar losses.
    fn loss_bound(&self) -> f64;
}

/// Krichevsky–Trofimov coin betting with initial wealth `ε·𝔊`.
///
/// `β_t = grad_sum / (𝔊² (count + 1)) · wealth`, where `grad_sum` is the sum of
/// the negated past losses. Since `|grad_sum| ≤ 𝔊·count`, the betting fraction
/// stays below one in magnitude and wealth never goes negative.
#[derive(Clone, Debug, PartialEq)]
pub struct KtBettor {
    wealth: f64,
    grad_sum: f64,
    count: u64,
    epsilon: f64,
    loss_bound: f64,
    clipped: u64,
}

impl KtBettor {
    pub fn new(epsilon: f64, loss_bound: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Precondition(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(loss_bound > 0.0) || !loss_bound.is_finite() {
            return Err(Error::Precondition(format!("loss bound must be positive, got {loss_bound}")));
        }
        Ok(Self {
            wealth: epsilon * loss_bound,
            grad_sum: 0.0,
            count: 0,
            epsilon,
            loss_bound,
            clipped: 0,
        })
    }

    pub fn grad_sum(&self) -> f64 {
        self.grad_sum
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of losses clipped to `±𝔊`.
    pub fn clipped(&self) -> u64 {
        self.clipped
    }
}

impl ScalarBettor for KtBettor {
    fn bet(&self) -> f64 {
        let g = self.loss_bound;
        self.grad_sum / (g * g * (self.count as f64 + 1.0)) * self.wealth
    }

    fn observe(&mut self, loss: f64) {
        let mut c = loss;
        if c.abs() > self.loss_bound * (1.0 + 1e-9) {
            log::warn!(
                "scalar loss {c} exceeds bound {}; clipping (round {})",
                self.loss_bound,
                self.count + 1
            );
            c = c.signum() * self.loss_bound;
            self.clipped += 1;
        }
        let beta = self.bet();
        self.wealth -= c * beta;
        self.grad_sum -= c;
        self.count += 1;
    }

    fn wealth(&self) -> f64 {
        self.wealth
    }

    fn loss_bound(&self) -> f64 {
        self.loss_bound
    }
}
