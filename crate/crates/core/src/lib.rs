//! Zeros of orthogonal polynomials from recursion data.
//!
//! Given Jacobi coefficients (a_n, b_n) — or Verblunsky coefficients on the
//! unit circle — this crate computes the zeros of the associated orthogonal
//! polynomials and checks the a priori estimates that govern them: spacing
//! lower bounds from transfer-matrix growth, spacing upper bounds from
//! Chebyshev-style trial polynomials, clock-spacing diagnostics against the
//! density of states, Christoffel weights and reproducing-kernel bounds, and
//! the analogous rotation-number picture for paraorthogonal polynomials.
//!
//! Everything is generic over the scalar type through [`scalar::Real`]
//! (`f64` and `f32` both work); the crate root re-exports `f64` aliases for
//! the common types. Quantities that overflow fixed-width exponents —
//! polynomial values deep in the exponential-growth regime, transfer-matrix
//! norms — are carried in mantissa/exponent form by [`scaled::Scaled`].

pub mod bounds;
pub mod chebtools;
pub mod clock;
pub mod error;
pub mod integrate;
pub mod models;
pub mod popuc;
pub mod recurrence;
pub mod scalar;
pub mod scaled;
pub mod spectra;

pub use error::{Error, Result};
pub use models::{build_model, JacobiParams, ModelSpec, VerblunskyParams};
pub use scalar::Real;
pub use scaled::Scaled;

/// `f64` parameter set.
pub type JacobiParams64 = models::JacobiParams<f64>;
/// `f64` reflection-coefficient set.
pub type VerblunskyParams64 = models::VerblunskyParams<f64>;
/// `f64` scaled value.
pub type Scaled64 = scaled::Scaled<f64>;
/// `f64` zero set.
pub type ZeroSet64 = spectra::ZeroSet<f64>;
/// `f64` transfer matrix.
pub type TransferMatrix64 = recurrence::TransferMatrix<f64>;
/// Inequality-check report specialized to `f64`.
pub type BoundReport64 = bounds::BoundReport<f64>;
/// `f64` unit-circle zero set.
pub type CircleZeroSet64 = popuc::CircleZeroSet<f64>;
