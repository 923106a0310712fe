//! Hermite spectral toolkit for the Gross–Pitaevskii equation with a
//! Wick-renormalized white noise potential on ℝ².
//!
//! The pieces, bottom-up:
//! - [`hermite`]: the basis h_k = ψ_{k1} ⊗ ψ_{k2}, quadrature grid, transforms
//!   and spectral operators.
//! - [`spaces`]: Hermite–Sobolev norms, the smooth truncation S_N and the
//!   norm inequalities attached to it.
//! - [`noise`]: white noise realizations, Y = (−H)^{-1} ξ, the counterterm
//!   C_N² and the renormalized product :|∇Y_N|²:.
//! - [`dynamics`]: Strang splitting of the transformed equation.
//! - [`observables`]: transformed mass and energy, inequality checkers and
//!   the focusing smallness event.

pub mod dynamics;
pub mod error;
pub mod hermite;
pub mod noise;
pub mod observables;
pub mod spaces;

pub use error::{Error, Result};
