//! The built-in studies.

pub mod common;
mod converge;
mod diverging;
mod focusing;
mod inequalities;
mod levels;
mod noise_rates;
mod simulate;
mod wick_rates;

pub use converge::ConvergeN;
pub use diverging::DivergingBound;
pub use focusing::FocusingGate;
pub use inequalities::{audit_field, bg_field, Inequalities, BG_CORPUS};
pub use noise_rates::NoiseRates;
pub use simulate::Simulate;
pub use wick_rates::{admissible_rate, negative_norm, WickRates};
