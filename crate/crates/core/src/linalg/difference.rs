//! The finite-difference operator `Σ` (1 on the diagonal, -1 on the first
//! superdiagonal) and the squared-path-length pairing `S = ΣᵀΣ`.
//!
//! With this convention `‖Σ ũ‖² = ‖u_T‖² + Σ_{t<T} ‖u_t - u_{t+1}‖²`.

use super::dense::DenseMatrix;
use super::embedded::EmbeddedVector;
use super::precond::Preconditioner;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DifferenceOperator {
    order: usize,
}

impl DifferenceOperator {
    pub fn new(order: usize) -> Self {
        Self { order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `y = Σ x`, i.e. `y_i = x_i - x_{i+1}` and `y_T = x_T`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.order;
        for i in 0..n {
            y[i] = if i + 1 < n { x[i] - x[i + 1] } else { x[i] };
        }
    }

    /// `y = Σ⁻¹ x`: suffix sums, since `Σ⁻¹` is the upper-triangular all-ones matrix.
    pub fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
        let mut acc = 0.0;
        for i in (0..self.order).rev() {
            acc += x[i];
            y[i] = acc;
        }
    }

    pub fn dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.order, self.order, |i, j| {
            if i == j {
                1.0
            } else if j == i + 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    pub fn inverse_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.order, self.order, |i, j| if j >= i { 1.0 } else { 0.0 })
    }

    pub fn gram(&self) -> DifferencePreconditioner {
        DifferencePreconditioner::new(self.order)
    }
}

/// `S = ΣᵀΣ`, tridiagonal with diagonal `(1, 2, ..., 2)` and off-diagonal `-1`.
/// `S⁻¹` has entries `T - max(i, j) + 1`.
#[derive(Clone, Debug)]
pub struct DifferencePreconditioner {
    order: usize,
}

impl DifferencePreconditioner {
    pub fn new(order: usize) -> Self {
        Self { order }
    }
}

impl Preconditioner for DifferencePreconditioner {
    fn order(&self) -> usize {
        self.order
    }

    fn label(&self) -> &str {
        "difference"
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.order;
        for i in 0..n {
            let diag = if i == 0 { 1.0 } else { 2.0 };
            let mut v = diag * x[i];
            if i > 0 {
                v -= x[i - 1];
            }
            if i + 1 < n {
                v -= x[i + 1];
            }
            y[i] = v;
        }
    }

    fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
        // S⁻¹ = Σ⁻¹ Σ⁻ᵀ: prefix sums, then suffix sums.
        let mut acc = 0.0;
        for i in 0..self.order {
            acc += x[i];
            y[i] = acc;
        }
        let mut acc = 0.0;
        for i in (0..self.order).rev() {
            acc += y[i];
            y[i] = acc;
        }
    }

    fn inverse_diag(&self, t: usize) -> f64 {
        difference_m_inverse_entry(t, t, self.order)
    }

    fn max_abs_inverse_entry(&self) -> f64 {
        self.order as f64
    }

    fn dense(&self) -> DenseMatrix {
        let op = DifferenceOperator::new(self.order).dense();
        op.transpose().matmul(&op).expect("square")
    }

    fn dense_inverse(&self) -> DenseMatrix {
        let t = self.order;
        DenseMatrix::from_fn(t, t, |i, j| difference_m_inverse_entry(i + 1, j + 1, t))
    }

    fn inverse_block(&self, t: usize, x: &EmbeddedVector) -> Vec<f64> {
        let n = self.order;
        let mut out = vec![0.0; x.dim()];
        for s in 1..=n {
            let coeff = (n - s.max(t) + 1) as f64;
            for (o, v) in out.iter_mut().zip(x.block(s)) {
                *o += coeff * v;
            }
        }
        out
    }
}

/// `(ΣᵀΣ)⁻¹_{ij} = T - max(i, j) + 1` (1-based indices).
pub fn difference_m_inverse_entry(i: usize, j: usize, order: usize) -> f64 {
    (order + 1 - i.max(j)) as f64
}

/// `Tr((ΣᵀΣ)⁻¹) = T(T+1)/2`.
pub fn difference_trace_inverse(order: usize) -> f64 {
    (order * (order + 1) / 2) as f64
}

/// `‖B‖²_F` for `B = (ΣᵀΣ)⁻¹ - Diag`, closed form `T²(T²-1)/6`.
pub fn difference_offdiag_frobenius_sq(order: usize) -> f64 {
    let t = order as u128;
    (t * t * (t * t - 1) / 6) as f64
}

/// `max_i Σ_j B_{ij}²` for the same `B`, closed form `T(2T²-3T+1)/6`.
pub fn difference_offdiag_max_row_sq(order: usize) -> f64 {
    let t = order as u128;
    (t * (2 * t * t + 1 - 3 * t) / 6) as f64
}
