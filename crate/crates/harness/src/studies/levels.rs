//! Coupled-noise trajectories across truncation levels, shared by the
//! Cauchy-in-N and diverging-bound studies.

use std::sync::Arc;

use wickgp_core::dynamics::{run_on_level, NoiseLevel};
use wickgp_core::hermite::{CoefField, SpectralGrid};

use super::common::{integrator, noise, Realized};
use crate::config::ExperimentConfig;
use crate::error::HarnessError;

pub struct LevelTrajectory {
    pub n: usize,
    pub times: Vec<f64>,
    /// v at each sampled time.
    pub snapshots: Vec<CoefField>,
}

/// All levels of `cfg.n_list` for realization `r`, driven by one ξ.
/// A blow-up at any level fails the whole realization.
pub fn coupled_levels(
    cfg: &ExperimentConfig,
    grid: &Arc<SpectralGrid>,
    v0: &CoefField,
    r: usize,
) -> Result<Realized<Vec<LevelTrajectory>>, HarnessError> {
    let xi = noise(cfg, r, grid.k())?;
    let mut icfg = integrator(cfg);
    icfg.keep_snapshots = true;
    let mut out = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let level = Arc::new(NoiseLevel::build(&xi, grid, n, cfg.renormalize)?);
        let run = run_on_level(level, v0, &icfg, cfg.lambda)?;
        if let Some(msg) = run.blowup {
            return Ok(Err(format!("N = {n}: {msg}")));
        }
        out.push(LevelTrajectory {
            n,
            times: run.series.times,
            snapshots: run.snapshots,
        });
    }
    Ok(Ok(out))
}
