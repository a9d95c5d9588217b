//! Kronecker-structured vectors, weighted norms, the finite-difference family
//! and dense utilities.

mod dense;
mod difference;
mod embedded;
mod precond;

pub use dense::{format_f64, power_iteration, symmetric_eigenvalues, DenseMatrix};
pub use difference::{
    difference_m_inverse_entry, difference_offdiag_frobenius_sq, difference_offdiag_max_row_sq,
    difference_trace_inverse, DifferenceOperator, DifferencePreconditioner,
};
pub use embedded::{embed_comparator, embed_loss, ComparatorSequence, EmbeddedVector};
pub(crate) use embedded::{dist_sq, dot, norm_sq};
pub use precond::{
    apply_blockwise, apply_inverse_blockwise, dual_norm_sq, lipschitz_bound, lipschitz_bound_dense,
    weighted_norm_sq, DensePreconditioner, DenseSpd, IdentityPreconditioner, Preconditioner,
};
