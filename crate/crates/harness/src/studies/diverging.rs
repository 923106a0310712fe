use wickgp_core::spaces::hilbert_norm;

use super::common::{fit_levels, grid, initial_data, lambda_n, moment, per_realization, split_failures};
use super::levels::coupled_levels;
use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::{num, FitEntry, StudyOutput, Summary, Table};
use crate::registry::{RunContext, Study};

/// Growth in N of sup_t |v^N|_{W^{σ,2}}; σ = 2 for the linear flow and the
/// first entry of `sigma_list` otherwise.
pub struct DivergingBound;

impl DivergingBound {
    pub fn regularity(cfg: &ExperimentConfig) -> f64 {
        if cfg.lambda == 0.0 {
            2.0
        } else {
            cfg.sigma_list.first().copied().unwrap_or(1.6)
        }
    }
}

impl Study for DivergingBound {
    fn kind(&self) -> StudyKind {
        StudyKind::DivergingBound
    }

    fn about(&self) -> &'static str {
        "growth of sup-in-time Sobolev norms across truncation levels"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        if cfg.n_list.len() < 3 {
            return Err(HarnessError::Invalid("diverging_bound needs at least 3 levels".into()));
        }
        let sigma = Self::regularity(cfg);
        let g = grid(cfg)?;
        let v0 = initial_data(cfg, &g)?;
        let results = per_realization(cfg.realizations, |r| {
            ctx.log(|| format!("realization {r}"));
            let sups = coupled_levels(cfg, &g, &v0, r)?.map(|levels| {
                levels
                    .iter()
                    .map(|lv| {
                        let mut best = (f64::NEG_INFINITY, 0.0);
                        for (v, &t) in lv.snapshots.iter().zip(&lv.times) {
                            let x = hilbert_norm(v, sigma);
                            if x > best.0 {
                                best = (x, t);
                            }
                        }
                        best
                    })
                    .collect::<Vec<_>>()
            });
            Ok::<_, HarnessError>((r, sups))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        let (ok, failed) = split_failures(results);

        let mut table = Table::new("norms", &["realization", "N", "sup_norm", "argmax_t"]);
        let (t_lo, t_hi) = (cfg.t_final.min(0.0), cfg.t_final.max(0.0));
        let mut argmax_ok = true;
        for (r, sups) in &ok {
            for (&n, &(x, t)) in cfg.n_list.iter().zip(sups) {
                argmax_ok &= (t_lo..=t_hi).contains(&t);
                table.push(vec![r.to_string(), n.to_string(), num(x), num(t)]);
            }
        }

        let mut summary = Summary::new(cfg);
        summary.failures = failed.len();
        summary.failure_diagnostics = failed;
        summary.metric("sigma", sigma);
        let mut points = Vec::new();
        for (i, &n) in cfg.n_list.iter().enumerate() {
            let col: Vec<f64> = ok.iter().map(|(_, s)| s[i].0).collect();
            let mom = moment(&col, cfg.p);
            summary.metric(&format!("moment_N{n}"), mom);
            points.push((lambda_n(n), mom));
        }
        summary.check("argmax_in_window", argmax_ok as u8 as f64, "== 1", argmax_ok);
        let fit = fit_levels(&points, summary.failures, cfg.realizations);
        match &fit {
            FitEntry::Fitted(f) => {
                let pass = f.slope >= cfg.min_slope && f.slope <= cfg.max_slope;
                summary.check(
                    "slope",
                    f.slope,
                    &format!("in [{}, {}]", cfg.min_slope, cfg.max_slope),
                    pass,
                );
            }
            other => summary.check("fit_valid", 0.0, "== 1", matches!(other, FitEntry::Degenerate { .. })),
        }
        summary.fits.insert("sup_norm".into(), fit);
        Ok(StudyOutput {
            tables: vec![table],
            summary,
            files: Vec::new(),
        })
    }
}
