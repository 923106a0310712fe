use std::sync::Arc;

use num_complex::Complex64;
use wickgp_core::dynamics::run_simulation;
use wickgp_core::hermite::{CoefField, MultiIndex, SpectralGrid};
use wickgp_core::noise::sample_noise;
use wickgp_core::observables::{check_brezis_gallouet, check_gagliardo_nirenberg};

use super::common::{grid, initial_data, integrator, noise, per_realization};
use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::{num, StudyOutput, Summary, Table};
use crate::registry::{RunContext, Study};

/// Gagliardo–Nirenberg audit over random fields and a trajectory, and the
/// Brezis–Gallouet corpus constant at K and 2K.
pub struct Inequalities;

/// Number of base fields in the Brezis–Gallouet corpus.
pub const BG_CORPUS: usize = 24;
const BG_SCALES: [f64; 3] = [0.1, 1.0, 10.0];

/// Complex Gaussian coefficients from two noise streams of `seed`.
fn gaussian_coefficients(seed: u64, index: usize, grid: &Arc<SpectralGrid>) -> Result<CoefField, HarnessError> {
    let k = grid.k();
    let re = sample_noise(seed, 2 * index as u64, k)?;
    let im = sample_noise(seed, 2 * index as u64 + 1, k)?;
    let coef = ndarray::Zip::from(&re.xi)
        .and(&im.xi)
        .map_collect(|&a, &b| Complex64::new(a, b));
    Ok(CoefField::from_coef(grid, coef)?)
}

/// Field `i` of the G–N audit: random decay and bandwidth, every fourth one
/// a small perturbation of the Gaussian (the equality case).
pub fn audit_field(seed: u64, i: usize, grid: &Arc<SpectralGrid>) -> Result<CoefField, HarnessError> {
    let g = gaussian_coefficients(seed, i, grid)?;
    let k = grid.k();
    if i % 4 == 3 {
        let eps = 10f64.powi(-(((i / 4) % 6) as i32) - 1);
        return Ok(g.map_coef(|m, c| {
            let base = if m == MultiIndex::new(0, 0) { 1.0 } else { 0.0 };
            Complex64::new(base, 0.0) + c * eps / m.eigenvalue().powi(2)
        }));
    }
    let decay = 0.5 + 0.25 * (i % 11) as f64;
    let band = 2 + (i * 7) % (2 * k - 2);
    Ok(g.map_coef(|m, c| {
        if m.order() > band {
            Complex64::new(0.0, 0.0)
        } else {
            c * m.eigenvalue().powf(-decay)
        }
    }))
}

/// Corpus field `i`: coefficients decaying like λ_k^{−4}, so its W^{σ,2}
/// norm converges for σ < 2 and the field is resolved at both K and 2K.
pub fn bg_field(seed: u64, i: usize, grid: &Arc<SpectralGrid>) -> Result<CoefField, HarnessError> {
    let g = gaussian_coefficients(seed ^ 0x6267, i, grid)?;
    Ok(g.map_coef(|m, c| c / m.eigenvalue().powi(2)))
}

fn bg_constant(seed: u64, grid: &Arc<SpectralGrid>, sigma: f64) -> Result<f64, HarnessError> {
    let mut best: f64 = 0.0;
    for i in 0..BG_CORPUS {
        let base = bg_field(seed, i, grid)?;
        for s in BG_SCALES {
            let r = check_brezis_gallouet(&base.scale(Complex64::new(s, 0.0)), sigma)?;
            best = best.max(r.constant);
        }
    }
    Ok(best)
}

impl Study for Inequalities {
    fn kind(&self) -> StudyKind {
        StudyKind::Inequalities
    }

    fn about(&self) -> &'static str {
        "Gagliardo-Nirenberg and Brezis-Gallouet audits"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        let g = grid(cfg)?;
        let reports = per_realization(cfg.realizations, |i| {
            Ok::<_, HarnessError>(check_gagliardo_nirenberg(&audit_field(cfg.seed, i, &g)?))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        let mut table = Table::new("gagliardo_nirenberg", &["source", "index", "lhs", "rhs", "ratio", "pass"]);
        for (i, r) in reports.iter().enumerate() {
            table.push(vec!["random".into(), i.to_string(), num(r.lhs), num(r.rhs), num(r.ratio), r.pass.to_string()]);
        }

        // one trajectory at the lowest level, audited at every sample
        let mut icfg = integrator(cfg);
        icfg.keep_snapshots = true;
        let n = cfg.n_list[0];
        ctx.log(|| format!("trajectory audit at N = {n}"));
        let run = run_simulation(&noise(cfg, 0, cfg.k)?, &g, n, &initial_data(cfg, &g)?, &icfg, cfg.lambda)?;
        let mut snaps = Vec::new();
        for (i, v) in run.snapshots.iter().enumerate() {
            let r = check_gagliardo_nirenberg(v);
            table.push(vec!["trajectory".into(), i.to_string(), num(r.lhs), num(r.rhs), num(r.ratio), r.pass.to_string()]);
            snaps.push(r);
        }

        let all = reports.iter().chain(&snaps);
        let violations = all.clone().filter(|r| !r.pass).count();
        let max_ratio = all.map(|r| r.ratio).fold(0.0, f64::max);

        let sigma = cfg.sigma_list.first().copied().unwrap_or(1.6);
        ctx.log(|| "Brezis-Gallouet corpus".to_string());
        let fine = SpectralGrid::shared(2 * cfg.k, 2 * cfg.mq())?;
        let c_k = bg_constant(cfg.seed, &g, sigma)?;
        let c_2k = bg_constant(cfg.seed, &fine, sigma)?;
        let drift = (c_2k / c_k - 1.0).abs();
        let mut bg = Table::new("brezis_gallouet", &["K", "constant"]);
        bg.push(vec![cfg.k.to_string(), num(c_k)]);
        bg.push(vec![(2 * cfg.k).to_string(), num(c_2k)]);

        let mut summary = Summary::new(cfg);
        summary.metric("gn_max_ratio", max_ratio);
        summary.metric("gn_fields", (reports.len() + snaps.len()) as f64);
        summary.metric("bg_constant_K", c_k);
        summary.metric("bg_constant_2K", c_2k);
        if let Some(msg) = run.blowup {
            summary.failures = 1;
            summary.failure_diagnostics.push(format!("trajectory: {msg}"));
        }
        summary.check("gn_violations", violations as f64, "== 0", violations == 0);
        summary.check(
            "bg_relative_change",
            drift,
            &format!("<= {}", cfg.max_bg_drift),
            drift <= cfg.max_bg_drift,
        );
        Ok(StudyOutput {
            tables: vec![table, bg],
            summary,
            files: Vec::new(),
        })
    }
}
