//! Dynamic regret for unconstrained online linear optimization.
//!
//! A comparator sequence `u_1, …, u_T` is embedded as one vector
//! `ũ ∈ R^{dT}` and the round-`t` loss as `g̃_t = e_t ⊗ g_t`. Dynamic regret
//! then becomes static regret against `ũ`, and a static learner whose norm
//! is `‖·‖_M` with `M = S ⊗ I_d` pays `‖ũ‖_M` on the comparator side and
//! `Tr(S⁻¹)`-type terms on the loss side. Three choices of `S` ship here:
//!
//! - identity: no coupling between rounds;
//! - difference (`ΣᵀΣ`): `‖ũ‖²_M = ‖u_T‖² + Σ‖u_t - u_{t+1}‖²`;
//! - Haar (`(HHᵀ)⁻¹`): the norm splits into interval-average variation at
//!   every dyadic timescale, and a round costs `O(d log T)`.
//!
//! [`learners`] holds the reducers (a KT coin bettor for scale times a
//! scale-free direction), [`reduction`] the regret accounting, [`verify`] the
//! matrix inequalities and lower-bound adversaries, and [`harness`] the
//! scenario files, experiments and CSV/JSON artifacts used by the `dynreg`
//! binary.
//!
//! ```
//! use dynreg::learners::{FastHaarReducer, LearnerConfig, OnlineLearner};
//!
//! let mut learner = FastHaarReducer::new(8, 2, LearnerConfig::default()).unwrap();
//! for t in 0..8 {
//!     let w = learner.predict().unwrap();
//!     assert_eq!(w.len(), 2);
//!     learner.update(&[if t < 4 { -1.0 } else { 1.0 }, 0.0]).unwrap();
//! }
//! ```

// `!(x > 0.0)` is how NaN gets rejected alongside nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod haar;
pub mod harness;
pub mod learners;
pub mod linalg;
pub mod reduction;
pub mod verify;

pub use error::{Error, Result};
