use ndarray::Zip;
use wickgp_core::hermite::{Axis, CoefField};
use wickgp_core::noise::{compute_y, compute_yn, exp_weight_values};
use wickgp_core::spaces::{sobolev_norm, SobolevIndex};

use super::common::{fit_levels, grid, lambda_n, moment, noise, per_realization};
use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::{num, FitEntry, StudyOutput, Summary, Table};
use crate::registry::{RunContext, Study};

/// Monte Carlo rates of Y − Y_N in several norms, plus the exp-weight gaps.
pub struct NoiseRates;

/// Pointwise Euclidean sup of (−H)^{−κ/2} applied to both components.
fn vector_neg_sup(components: [CoefField; 2], kappa: f64) -> f64 {
    let [a, b] = components.map(|c| c.hermite_power(-kappa / 2.0).synthesize().re());
    let mut m: f64 = 0.0;
    Zip::from(&a).and(&b).for_each(|x, y| m = m.max(x.hypot(*y)));
    m
}

/// Quantity names in table order; the exp gaps follow, one per `a`.
const BASE: [&str; 3] = ["y_gap", "grad_gap", "xy_gap"];

fn quantity_names(cfg: &ExperimentConfig) -> Vec<String> {
    let mut names: Vec<String> = BASE.iter().map(|s| s.to_string()).collect();
    names.extend(cfg.a_list.iter().map(|a| format!("exp_gap_a{a}")));
    names
}

impl Study for NoiseRates {
    fn kind(&self) -> StudyKind {
        StudyKind::NoiseRates
    }

    fn about(&self) -> &'static str {
        "decay rates of Y - Y_N and of the exponential weights"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        if cfg.n_list.len() < 3 {
            return Err(HarnessError::Invalid("noise_rates needs at least 3 levels".into()));
        }
        let g = grid(cfg)?;
        let idx = SobolevIndex::new(1.0 - cfg.s, cfg.q)?;
        // values[r][level][quantity]
        let values = per_realization(cfg.realizations, |r| {
            ctx.log(|| format!("realization {r}"));
            let y = compute_y(&noise(cfg, r, cfg.k)?, &g)?;
            let y_grid = y.synthesize().re();
            let mut rows = Vec::with_capacity(cfg.n_list.len());
            for &n in &cfg.n_list {
                let yn = compute_yn(&y, n)?;
                let d = y.sub(&yn)?;
                let mut q = vec![
                    sobolev_norm(&d, idx).value,
                    vector_neg_sup(Axis::BOTH.map(|ax| d.derivative(ax)), cfg.kappa),
                    vector_neg_sup(Axis::BOTH.map(|ax| d.position(ax)), cfg.kappa),
                ];
                let yn_grid = yn.synthesize().re();
                for &a in &cfg.a_list {
                    let e = exp_weight_values(&y_grid, a)?.values;
                    let en = exp_weight_values(&yn_grid, a)?.values;
                    let mut m: f64 = 0.0;
                    Zip::from(&e).and(&en).for_each(|x, z| m = m.max((x - z).abs()));
                    q.push(m);
                }
                rows.push(q);
            }
            Ok::<_, HarnessError>(rows)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

        let names = quantity_names(cfg);
        let mut table = Table::new("noise_gaps", &["realization", "N", "quantity", "value"]);
        for (r, rows) in values.iter().enumerate() {
            for (&n, row) in cfg.n_list.iter().zip(rows) {
                for (name, v) in names.iter().zip(row) {
                    table.push(vec![r.to_string(), n.to_string(), name.clone(), num(*v)]);
                }
            }
        }

        let mut summary = Summary::new(cfg);
        for (qi, name) in names.iter().enumerate() {
            let points: Vec<(f64, f64)> = cfg
                .n_list
                .iter()
                .enumerate()
                .map(|(li, &n)| {
                    let col: Vec<f64> = values.iter().map(|rows| rows[li][qi]).collect();
                    (lambda_n(n), moment(&col, cfg.p))
                })
                .collect();
            for (&n, (_, m)) in cfg.n_list.iter().zip(&points) {
                summary.metric(&format!("moment_{name}_N{n}"), *m);
            }
            let fit = fit_levels(&points, 0, cfg.realizations);
            if let FitEntry::Fitted(f) = &fit {
                summary.check(
                    &format!("{name}_decays"),
                    f.slope,
                    "finite and < 0",
                    f.slope.is_finite() && f.slope < 0.0,
                );
            }
            summary.fits.insert(name.clone(), fit);
        }
        let limit = -(cfg.s - cfg.s_prime) + cfg.slope_tolerance;
        match summary.fits["y_gap"].slope() {
            Some(slope) => summary.check("y_gap_slope", slope, &format!("<= {limit}"), slope <= limit),
            None => summary.check("y_gap_slope", f64::NAN, &format!("<= {limit}"), false),
        }
        Ok(StudyOutput {
            tables: vec![table],
            summary,
            files: Vec::new(),
        })
    }
}
