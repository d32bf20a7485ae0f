//! Truncated ℓ¹ laboratory for one-parameter operator semigroups.
//!
//! The crate realizes, at any truncation `N`, the diagonal semigroup
//! `M(t) = Σ_h e^{-t/h} Q_h`, its perturbation `T(t) = M(t) + N_t` on ℓ¹
//! with the coordinate-sum functional, and the exponential semigroup
//! `S(t) = e^{-t}e^{tT}` of a power-bounded matrix. On top of those it
//! computes Cesàro means and turns the numbers into ergodicity evidence.

pub mod cesaro;
pub mod coeffs;
pub mod diagnostics;
pub mod error;
pub mod exp_semigroup;
pub mod linalg;
pub mod semigroups;
pub mod space;
pub mod sum;

pub use error::{LabError, Result};
pub use space::{DualFunctional, TruncatedVector};
