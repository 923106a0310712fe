use ndarray::Array2;
use wickgp_core::hermite::{GridField, SpectralGrid};
use wickgp_core::noise::{compute_counterterm, compute_y, compute_yn, wick_from_yn};
use std::sync::Arc;

use super::common::{fit_levels, grid, lambda_n, moment, noise, per_realization};
use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::{num, FitEntry, StudyOutput, Summary, Table};
use crate::registry::{RunContext, Study};

/// Cauchy gaps of :|∇Y_N|²: between consecutive levels in W^{−s,q}, with the
/// raw squares |∇Y_N|² as the ablation.
pub struct WickRates;

/// |f|_{W^{−s,q}} of a nodal field, through its projection onto the basis.
pub fn negative_norm(grid: &Arc<SpectralGrid>, values: Array2<f64>, s: f64, q: f64) -> Result<f64, HarnessError> {
    let c = GridField::from_real(grid, values)?.analyze();
    Ok(c.hermite_power(-s / 2.0).synthesize().lq_norm(q))
}

/// Upper end of the admissible rate interval (0, 2s/3 − 4/(3q)).
pub fn admissible_rate(s: f64, q: f64) -> f64 {
    2.0 * s / 3.0 - 4.0 / (3.0 * q)
}

impl Study for WickRates {
    fn kind(&self) -> StudyKind {
        StudyKind::WickRates
    }

    fn about(&self) -> &'static str {
        "Cauchy rate of the renormalized squared gradient, with raw-square ablation"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        if cfg.n_list.len() < 4 {
            return Err(HarnessError::Invalid(
                "wick_rates needs at least 4 levels (3 consecutive gaps)".into(),
            ));
        }
        if !(cfg.s > 2.0 / cfg.q) {
            return Err(HarnessError::Invalid(format!(
                "wick_rates needs s > 2/q, got s = {}, q = {}",
                cfg.s, cfg.q
            )));
        }
        let g = grid(cfg)?;
        // gaps[r][pair] = (renormalized, raw)
        let gaps = per_realization(cfg.realizations, |r| {
            ctx.log(|| format!("realization {r}"));
            let y = compute_y(&noise(cfg, r, cfg.k)?, &g)?;
            let mut fields = Vec::with_capacity(cfg.n_list.len());
            for &n in &cfg.n_list {
                let w = wick_from_yn(&compute_yn(&y, n)?, n)?;
                let raw = w.raw_square();
                fields.push((w.wick, raw));
            }
            fields
                .windows(2)
                .map(|w| {
                    let renorm = negative_norm(&g, &w[1].0 - &w[0].0, cfg.s, cfg.q)?;
                    let raw = negative_norm(&g, &w[1].1 - &w[0].1, cfg.s, cfg.q)?;
                    Ok((renorm, raw))
                })
                .collect::<Result<Vec<_>, HarnessError>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

        let mut table = Table::new("wick_gaps", &["realization", "M", "N", "gap", "raw_gap"]);
        for (r, row) in gaps.iter().enumerate() {
            for (w, (a, b)) in cfg.n_list.windows(2).zip(row) {
                table.push(vec![r.to_string(), w[0].to_string(), w[1].to_string(), num(*a), num(*b)]);
            }
        }

        let mut summary = Summary::new(cfg);
        let mut pts = (Vec::new(), Vec::new());
        for (i, w) in cfg.n_list.windows(2).enumerate() {
            let m = w[0];
            let renorm = moment(&gaps.iter().map(|row| row[i].0).collect::<Vec<_>>(), cfg.q);
            let raw = moment(&gaps.iter().map(|row| row[i].1).collect::<Vec<_>>(), cfg.q);
            summary.metric(&format!("moment_M{m}"), renorm);
            summary.metric(&format!("raw_moment_M{m}"), raw);
            pts.0.push((lambda_n(m), renorm));
            pts.1.push((lambda_n(m), raw));
        }

        // Counterterm growth is measured, never asserted.
        let mut ct = Table::new("counterterm", &["N", "sup"]);
        let mut ct_pts = Vec::new();
        for &n in &cfg.n_list {
            let sup = compute_counterterm(n, &g)?.max_abs();
            ct.push(vec![n.to_string(), num(sup)]);
            summary.metric(&format!("counterterm_sup_N{n}"), sup);
            ct_pts.push((lambda_n(n), sup));
        }
        summary.fits.insert("counterterm_sup".into(), fit_levels(&ct_pts, 0, 1));

        let upper = admissible_rate(cfg.s, cfg.q);
        summary.metric("admissible_upper", upper);
        summary.check(
            "delta0_admissible",
            cfg.delta0,
            &format!("in (0, {upper})"),
            cfg.delta0 > 0.0 && cfg.delta0 < upper,
        );
        let fit = fit_levels(&pts.0, 0, cfg.realizations);
        let raw_fit = fit_levels(&pts.1, 0, cfg.realizations);
        match (&fit, &raw_fit) {
            (FitEntry::Fitted(f), FitEntry::Fitted(raw)) => {
                summary.check(
                    "slope",
                    f.slope,
                    &format!("<= {}", -cfg.delta0),
                    f.slope <= -cfg.delta0,
                );
                summary.check(
                    "ablation_slope",
                    raw.slope,
                    &format!("> {}", f.slope),
                    raw.slope > f.slope,
                );
            }
            _ => summary.check("fit_valid", 0.0, "== 1", false),
        }
        summary.fits.insert("wick".into(), fit);
        summary.fits.insert("raw".into(), raw_fit);
        Ok(StudyOutput {
            tables: vec![table, ct],
            summary,
            files: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_interval() {
        assert!((admissible_rate(0.9, 4.0) - 0.8 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn equal_levels_have_zero_gap() {
        let g = SpectralGrid::shared(16, 32).unwrap();
        let y = compute_y(&wickgp_core::noise::sample_noise(3, 0, 16).unwrap(), &g).unwrap();
        let w = wick_from_yn(&compute_yn(&y, 8).unwrap(), 8).unwrap();
        let v = w.wick.clone();
        assert_eq!(negative_norm(&g, &v - &w.wick, 0.9, 4.0).unwrap(), 0.0);
    }
}
