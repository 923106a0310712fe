//! White noise ξ = Σ ξ_k h_k, the fields Y = (−H)^{-1}ξ and Y_N = S_N Y, and
//! the Wick renormalization :|∇Y_N|²: = |∇Y_N|² − C_N².

mod renorm;
mod sample;

pub use renorm::{
    check_level, compute_counterterm, compute_wick, compute_y, compute_yn, counterterm_values,
    exp_weight, exp_weight_values, truncated_noise, wick_from_yn, CountertermCache, ExpWeight,
    WickField,
};
pub(crate) use renorm::cached_counterterm;
pub use sample::{sample_noise, NoiseRealization};
