//! Hermite eigenbasis of H = Δ − |x|² on ℝ², its Gauss–Hermite grid, the
//! coefficient ↔ grid transforms and the diagonal/ladder operators.

mod field;
mod functions;
mod grid;
mod ops;

pub use field::{level_eigenvalue, CoefField, GridField, MultiIndex};
pub use functions::{hermite_1d, hermite_derivative_row, hermite_row};
pub use grid::{gauss_hermite, SpectralGrid};
pub use ops::{Axis, Ladder, SpatialOp};
