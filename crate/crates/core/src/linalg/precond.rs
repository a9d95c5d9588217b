//! Symmetric positive definite pairings `S` defining `M = S ⊗ I_d`.

use std::fmt::Debug;

use super::dense::{symmetric_eigenvalues, DenseMatrix};
use super::embedded::EmbeddedVector;
use crate::error::{Error, Result};

/// A `T x T` symmetric positive definite matrix `S`, used through the
/// Kronecker extension `M = S ⊗ I_d` to define the norm pair
/// `(‖·‖_M, ‖·‖_{M⁻¹})` on `R^{dT}`.
///
/// Structured implementations apply `S` and `S⁻¹` without forming them;
/// [`Preconditioner::dense`] and [`Preconditioner::dense_inverse`] are for
/// oracles only.
pub trait Preconditioner: Debug + Send + Sync {
    fn order(&self) -> usize;

    fn label(&self) -> &str;

    /// `y = S x` for a scalar sequence of length `T`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `y = S⁻¹ x`.
    fn apply_inverse(&self, x: &[f64], y: &mut [f64]);

    /// `(S⁻¹)_{tt}`, `t` 1-based.
    fn inverse_diag(&self, t: usize) -> f64;

    /// `max_{ij} |(S⁻¹)_{ij}|`.
    fn max_abs_inverse_entry(&self) -> f64;

    fn dense(&self) -> DenseMatrix;

    fn dense_inverse(&self) -> DenseMatrix;

    /// Block `t` of `(S⁻¹ ⊗ I_d) x`.
    fn inverse_block(&self, t: usize, x: &EmbeddedVector) -> Vec<f64> {
        let full = apply_inverse_blockwise(self, x);
        full.block(t).to_vec()
    }
}

macro_rules! forward_preconditioner {
    ($ptr:ty) => {
        impl<P: Preconditioner + ?Sized> Preconditioner for $ptr {
            fn order(&self) -> usize {
                (**self).order()
            }
            fn label(&self) -> &str {
                (**self).label()
            }
            fn apply(&self, x: &[f64], y: &mut [f64]) {
                (**self).apply(x, y)
            }
            fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
                (**self).apply_inverse(x, y)
            }
            fn inverse_diag(&self, t: usize) -> f64 {
                (**self).inverse_diag(t)
            }
            fn max_abs_inverse_entry(&self) -> f64 {
                (**self).max_abs_inverse_entry()
            }
            fn dense(&self) -> DenseMatrix {
                (**self).dense()
            }
            fn dense_inverse(&self) -> DenseMatrix {
                (**self).dense_inverse()
            }
            fn inverse_block(&self, t: usize, x: &EmbeddedVector) -> Vec<f64> {
                (**self).inverse_block(t, x)
            }
        }
    };
}

forward_preconditioner!(Box<P>);
forward_preconditioner!(std::sync::Arc<P>);
forward_preconditioner!(&P);

fn check_order<P: Preconditioner + ?Sized>(p: &P, x: &EmbeddedVector) -> Result<()> {
    if x.rounds() != p.order() {
        return Err(Error::DimensionMismatch {
            expected: p.order(),
            actual: x.rounds(),
            context: "embedded vector rounds vs preconditioner order",
        });
    }
    Ok(())
}

fn blockwise<P: Preconditioner + ?Sized>(
    p: &P,
    x: &EmbeddedVector,
    op: impl Fn(&P, &[f64], &mut [f64]),
) -> EmbeddedVector {
    let t = x.rounds();
    let mut out = EmbeddedVector::zeros(t, x.dim());
    let mut buf = vec![0.0; t];
    for j in 0..x.dim() {
        let col = x.coordinate(j);
        op(p, &col, &mut buf);
        out.set_coordinate(j, &buf);
    }
    out
}

/// `(S ⊗ I_d) x`, computed one coordinate sequence at a time.
pub fn apply_blockwise<P: Preconditioner + ?Sized>(p: &P, x: &EmbeddedVector) -> EmbeddedVector {
    blockwise(p, x, |p, a, b| p.apply(a, b))
}

/// `(S⁻¹ ⊗ I_d) x`.
pub fn apply_inverse_blockwise<P: Preconditioner + ?Sized>(p: &P, x: &EmbeddedVector) -> EmbeddedVector {
    blockwise(p, x, |p, a, b| p.apply_inverse(a, b))
}

/// `‖x‖²_M = ⟨x, (S ⊗ I_d) x⟩` without materializing the `dT x dT` matrix.
pub fn weighted_norm_sq<P: Preconditioner + ?Sized>(x: &EmbeddedVector, p: &P) -> Result<f64> {
    check_order(p, x)?;
    x.dot(&apply_blockwise(p, x))
}

/// `‖x‖²_{M⁻¹} = ⟨x, (S⁻¹ ⊗ I_d) x⟩`.
pub fn dual_norm_sq<P: Preconditioner + ?Sized>(x: &EmbeddedVector, p: &P) -> Result<f64> {
    check_order(p, x)?;
    x.dot(&apply_inverse_blockwise(p, x))
}

/// `G · max_{ij} |(S⁻¹)_{ij}|`, the bound on embedded losses in the dual norm.
pub fn lipschitz_bound<P: Preconditioner + ?Sized>(p: &P, grad_bound: f64) -> Result<f64> {
    if !(grad_bound > 0.0) {
        return Err(Error::Precondition(format!("gradient bound must be positive, got {grad_bound}")));
    }
    Ok(grad_bound * p.max_abs_inverse_entry())
}

/// [`lipschitz_bound`] for an arbitrary dense `S`, inverting it first.
pub fn lipschitz_bound_dense(s: &DenseMatrix, grad_bound: f64) -> Result<f64> {
    if !(grad_bound > 0.0) {
        return Err(Error::Precondition(format!("gradient bound must be positive, got {grad_bound}")));
    }
    Ok(grad_bound * s.inverse()?.max_abs())
}

/// `S = I_T`: the static-regret geometry.
#[derive(Clone, Debug)]
pub struct IdentityPreconditioner {
    order: usize,
}

impl IdentityPreconditioner {
    pub fn new(order: usize) -> Self {
        Self { order }
    }
}

impl Preconditioner for IdentityPreconditioner {
    fn order(&self) -> usize {
        self.order
    }

    fn label(&self) -> &str {
        "identity"
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }

    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }

    fn inverse_diag(&self, _t: usize) -> f64 {
        1.0
    }

    fn max_abs_inverse_entry(&self) -> f64 {
        1.0
    }

    fn dense(&self) -> DenseMatrix {
        DenseMatrix::identity(self.order)
    }

    fn dense_inverse(&self) -> DenseMatrix {
        DenseMatrix::identity(self.order)
    }

    fn inverse_block(&self, t: usize, x: &EmbeddedVector) -> Vec<f64> {
        x.block(t).to_vec()
    }
}

/// A user-supplied dense symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct DenseSpd {
    matrix: DenseMatrix,
}

impl DenseSpd {
    /// Validates symmetry (1e-12 relative) and positive definiteness (smallest
    /// eigenvalue of the symmetrized matrix above `1e-10 · ‖S‖_F`).
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                actual: matrix.cols(),
                context: "SPD matrix must be square and nonempty",
            });
        }
        if !matrix.is_symmetric(1e-12) {
            return Err(Error::NotSymmetric(matrix.max_asymmetry()));
        }
        let sym = matrix.symmetrized();
        let min_ev = symmetric_eigenvalues(&sym)?[0];
        if min_ev <= 1e-10 * sym.frobenius() {
            return Err(Error::NotPositiveDefinite(min_ev));
        }
        Ok(Self { matrix: sym })
    }

    pub fn order(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

/// Preconditioner backed by a [`DenseSpd`] and its precomputed inverse.
#[derive(Clone, Debug)]
pub struct DensePreconditioner {
    s: DenseMatrix,
    s_inv: DenseMatrix,
    label: String,
}

impl DensePreconditioner {
    pub fn new(spd: DenseSpd) -> Result<Self> {
        Self::with_label(spd, "dense")
    }

    pub fn with_label(spd: DenseSpd, label: impl Into<String>) -> Result<Self> {
        let s_inv = spd.matrix.inverse()?.symmetrized();
        Ok(Self {
            s: spd.matrix,
            s_inv,
            label: label.into(),
        })
    }
}

impl Preconditioner for DensePreconditioner {
    fn order(&self) -> usize {
        self.s.rows()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.s.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.s_inv.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn inverse_diag(&self, t: usize) -> f64 {
        self.s_inv.get(t - 1, t - 1)
    }

    fn max_abs_inverse_entry(&self) -> f64 {
        self.s_inv.max_abs()
    }

    fn dense(&self) -> DenseMatrix {
        self.s.clone()
    }

    fn dense_inverse(&self) -> DenseMatrix {
        self.s_inv.clone()
    }

    fn inverse_block(&self, t: usize, x: &EmbeddedVector) -> Vec<f64> {
        let row = self.s_inv.row(t - 1);
        let mut out = vec![0.0; x.dim()];
        for (s, coeff) in row.iter().enumerate() {
            if *coeff == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(x.block(s + 1)) {
                *o += coeff * v;
            }
        }
        out
    }
}
