use crate::error::Result;
use crate::linalg::{apply_inverse_blockwise, dot, norm_sq, EmbeddedVector, Preconditioner};

/// Scale-free FTRL on the unit `‖·‖_M` ball.
///
/// Keeps `G̃ = Σ_s g̃_s`, `V = Σ_s ‖g̃_s‖²_{M⁻¹}` and `‖G̃‖²_{M⁻¹}`, and emits
/// `ṽ = -(S⁻¹ ⊗ I) G̃ / max(√V, ‖G̃‖_{M⁻¹})`, so that `‖ṽ‖_M ≤ 1`.
#[derive(Clone, Debug)]
pub struct DirectionState {
    grad_accum: EmbeddedVector,
    scale: f64,
    dual_norm_sq: f64,
}

impl DirectionState {
    pub fn new(rounds: usize, dim: usize) -> Self {
        Self {
            grad_accum: EmbeddedVector::zeros(rounds, dim),
            scale: 0.0,
            dual_norm_sq: 0.0,
        }
    }

    pub fn grad_accum(&self) -> &EmbeddedVector {
        &self.grad_accum
    }

    /// `V`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dual_norm_sq(&self) -> f64 {
        self.dual_norm_sq
    }

    fn denominator(&self) -> Option<f64> {
        (self.scale > 0.0).then(|| self.scale.sqrt().max(self.dual_norm_sq.sqrt()))
    }

    /// The full direction `ṽ ∈ R^{dT}`; zero while `V = 0`.
    pub fn predict<P: Preconditioner + ?Sized>(&self, precond: &P) -> EmbeddedVector {
        match self.denominator() {
            None => EmbeddedVector::zeros(self.grad_accum.rounds(), self.grad_accum.dim()),
            Some(den) => apply_inverse_blockwise(precond, &self.grad_accum).scaled(-1.0 / den),
        }
    }

    /// Block `t` of `ṽ` together with block `t` of `(S⁻¹ ⊗ I) G̃`, which the
    /// following [`DirectionState::update`] needs.
    pub fn predict_block<P: Preconditioner + ?Sized>(&self, t: usize, precond: &P) -> (Vec<f64>, Vec<f64>) {
        let cross = precond.inverse_block(t, &self.grad_accum);
        let dir = match self.denominator() {
            None => vec![0.0; cross.len()],
            Some(den) => cross.iter().map(|q| -q / den).collect(),
        };
        (dir, cross)
    }

    /// Absorbs `g̃_t = e_t ⊗ g_t`. `cross` is block `t` of `(S⁻¹ ⊗ I) G̃`
    /// before this round.
    pub fn update<P: Preconditioner + ?Sized>(&mut self, t: usize, g: &[f64], cross: &[f64], precond: &P) -> Result<()> {
        let inc = precond.inverse_diag(t) * norm_sq(g);
        self.scale += inc;
        // ‖G̃ + g̃‖² = ‖G̃‖² + ‖g̃‖² + 2⟨G̃, M⁻¹ g̃⟩ and ⟨G̃, M⁻¹ g̃⟩ = ⟨block_t(M⁻¹ G̃), g⟩.
        self.dual_norm_sq = (self.dual_norm_sq + inc + 2.0 * dot(g, cross)).max(0.0);
        self.grad_accum
            .block_mut(t)
            .iter_mut()
            .zip(g)
            .for_each(|(a, b)| *a += b);
        Ok(())
    }
}
