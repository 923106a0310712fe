use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use wickgp_core::dynamics::{IntegratorConfig, Scheme};
use wickgp_core::hermite::{level_eigenvalue, CoefField, SpectralGrid};
use wickgp_core::noise::{sample_noise, NoiseRealization};

use crate::config::{ExperimentConfig, NoiseKind};
use crate::error::HarnessError;
use crate::output::FitEntry;
use crate::rate::fit_rate;

/// Gaps below this are treated as exactly zero when deciding degeneracy.
pub const DEGENERATE_LEVEL: f64 = 1e-9;

/// Fraction of failed realizations above which a fit is invalid.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

pub fn grid(cfg: &ExperimentConfig) -> Result<Arc<SpectralGrid>, HarnessError> {
    Ok(SpectralGrid::shared(cfg.k, cfg.mq())?)
}

/// Realization `r` draws stream `r` of the configured seed.
pub fn noise(cfg: &ExperimentConfig, r: usize, k: usize) -> Result<NoiseRealization, HarnessError> {
    Ok(match cfg.noise {
        NoiseKind::White => sample_noise(cfg.seed, r as u64, k)?,
        NoiseKind::Zero => {
            let mut z = NoiseRealization::zero(k);
            z.seed = cfg.seed;
            z.stream_index = r as u64;
            z
        }
    })
}

pub fn lambda_n(n: usize) -> f64 {
    level_eigenvalue(n).sqrt()
}

/// (h₀ + 0.3 h₍₁,₁₎) / ‖·‖.
pub fn default_v0(grid: &Arc<SpectralGrid>) -> CoefField {
    let raw = CoefField::from_fn(grid, |k| match (k.k1, k.k2) {
        (0, 0) => Complex64::new(1.0, 0.0),
        (1, 1) => Complex64::new(0.3, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let n = raw.l2_norm();
    raw.scale(Complex64::new(1.0 / n, 0.0))
}

/// Reads `k1,k2,re,im` lines; `#` comments and a header line are allowed.
pub fn read_v0(path: &Path, grid: &Arc<SpectralGrid>) -> Result<CoefField, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut c = CoefField::zeros(grid);
    let k = grid.k();
    let mut coef = c.coef().clone();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("k1") {
            continue;
        }
        let bad = |msg: String| HarnessError::Config { line: i + 1, msg };
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 4 {
            return Err(bad(format!("{}: expected k1,k2,re,im", path.display())));
        }
        let k1: usize = cells[0].parse().map_err(|e| bad(format!("k1: {e}")))?;
        let k2: usize = cells[1].parse().map_err(|e| bad(format!("k2: {e}")))?;
        let re: f64 = cells[2].parse().map_err(|e| bad(format!("re: {e}")))?;
        let im: f64 = cells[3].parse().map_err(|e| bad(format!("im: {e}")))?;
        if k1 >= k || k2 >= k {
            return Err(bad(format!("mode ({k1},{k2}) outside K = {k}")));
        }
        coef[[k1, k2]] = Complex64::new(re, im);
    }
    c = CoefField::from_coef(grid, coef)?;
    Ok(c)
}

pub fn initial_data(cfg: &ExperimentConfig, grid: &Arc<SpectralGrid>) -> Result<CoefField, HarnessError> {
    match &cfg.v0_path {
        Some(p) => read_v0(p, grid),
        None => Ok(default_v0(grid)),
    }
}

pub fn integrator(cfg: &ExperimentConfig) -> IntegratorConfig {
    IntegratorConfig {
        dt: cfg.dt,
        t_final: cfg.t_final,
        scheme: Scheme::Strang,
        record_every: cfg.record_every,
        w_sigma: cfg.sigma_list.clone(),
        renormalize: cfg.renormalize,
        keep_snapshots: false,
        ..IntegratorConfig::default()
    }
}

/// (mean |x|^p)^{1/p}.
pub fn moment(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / values.len() as f64;
    m.powf(1.0 / p)
}

/// Standard error of the sample mean.
pub fn standard_error(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return f64::NAN;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Fits level values, or explains why no fit exists.
pub fn fit_levels(points: &[(f64, f64)], failures: usize, total: usize) -> FitEntry {
    if failures as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return FitEntry::Invalid {
            reason: format!("{failures} of {total} realizations failed"),
        };
    }
    if points.iter().all(|(_, v)| v.abs() < DEGENERATE_LEVEL) {
        return FitEntry::Degenerate {
            reason: format!("all values below {DEGENERATE_LEVEL:e}"),
        };
    }
    match fit_rate(points) {
        Ok(f) => FitEntry::Fitted(f),
        Err(e) => FitEntry::Invalid { reason: e.to_string() },
    }
}

/// Runs `f` over realizations on the current rayon pool; output order is
/// the realization order regardless of scheduling.
pub fn per_realization<T, F>(r: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..r).into_par_iter().map(f).collect()
}

/// Outcome of one realization: a value or a recorded failure.
pub type Realized<T> = Result<T, String>;

pub fn split_failures<T>(results: Vec<(usize, Realized<T>)>) -> (Vec<(usize, T)>, Vec<String>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (r, res) in results {
        match res {
            Ok(v) => ok.push((r, v)),
            Err(msg) => failed.push(format!("realization {r}: {msg}")),
        }
    }
    (ok, failed)
}
