use std::sync::Arc;

use num_complex::Complex64;
use wickgp_core::dynamics::{run_on_level, NoiseLevel};
use wickgp_core::noise::compute_y;
use wickgp_core::observables::{focusing_event_predicate, sigma_norm};

use super::common::{grid, initial_data, integrator, noise, per_realization};
use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::{num, StudyOutput, Summary, Table};
use crate::registry::{RunContext, Study};

/// Smallness event for the focusing flow, and Σ-norm boundedness of the
/// runs it admits. The first entry of `L_list` drives the simulations.
pub struct FocusingGate;

struct Outcome {
    /// Predicate value per L.
    values: Vec<f64>,
    holds: Vec<bool>,
    ran: bool,
    /// sup_t |v|_Σ / |v0|_Σ of the run.
    growth: f64,
    blowup: Option<String>,
}

impl Study for FocusingGate {
    fn kind(&self) -> StudyKind {
        StudyKind::FocusingGate
    }

    fn about(&self) -> &'static str {
        "focusing smallness event and boundedness of the admitted runs"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        if !(cfg.lambda > 0.0) {
            return Err(HarnessError::Invalid(format!(
                "focusing_gate needs lambda > 0, got {}",
                cfg.lambda
            )));
        }
        let g = grid(cfg)?;
        let n = *cfg.n_list.last().expect("validated non-empty");
        let l0 = cfg.l_list[0];
        let raw = initial_data(cfg, &g)?;
        let v0 = raw.scale(Complex64::new(l0 / raw.l2_norm(), 0.0));
        let sigma0 = sigma_norm(&v0);
        let icfg = integrator(cfg);

        let outcomes = per_realization(cfg.realizations, |r| {
            let xi = noise(cfg, r, cfg.k)?;
            let y = compute_y(&xi, &g)?;
            let mut values = Vec::new();
            let mut holds = Vec::new();
            for &l in &cfg.l_list {
                let ev = focusing_event_predicate(&y, cfg.lambda, l)?;
                values.push(ev.value);
                holds.push(ev.holds);
            }
            let mut out = Outcome {
                values,
                holds,
                ran: false,
                growth: f64::NAN,
                blowup: None,
            };
            if out.holds[0] || cfg.run_failing {
                ctx.log(|| format!("realization {r}: running N = {n}"));
                let run = match NoiseLevel::build(&xi, &g, n, cfg.renormalize) {
                    Ok(level) => run_on_level(Arc::new(level), &v0, &icfg, cfg.lambda).map(Some),
                    Err(wickgp_core::Error::ExpOverflow(x)) => {
                        out.blowup = Some(format!("exponential overflow {x:.3e} while building the level"));
                        Ok(None)
                    }
                    Err(e) => Err(e),
                }?;
                out.ran = true;
                if let Some(run) = run {
                    let sup = run.series.sigma_norm.iter().copied().fold(0.0, f64::max);
                    out.growth = sup / sigma0;
                    out.blowup = run.blowup;
                }
            }
            Ok::<_, HarnessError>(out)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

        let mut header = vec!["realization".to_string()];
        for l in &cfg.l_list {
            header.push(format!("value_L{l}"));
            header.push(format!("holds_L{l}"));
        }
        header.extend(["ran", "sigma_growth", "blowup"].map(String::from));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut table = Table::new("focusing", &header_refs);
        for (r, o) in outcomes.iter().enumerate() {
            let mut row = vec![r.to_string()];
            for (v, h) in o.values.iter().zip(&o.holds) {
                row.push(num(*v));
                row.push(h.to_string());
            }
            row.push(o.ran.to_string());
            row.push(num(o.growth));
            row.push(o.blowup.is_some().to_string());
            table.push(row);
        }

        let mut summary = Summary::new(cfg);
        let total = outcomes.len() as f64;
        let mut fractions = Vec::new();
        for (i, l) in cfg.l_list.iter().enumerate() {
            let f = outcomes.iter().filter(|o| o.holds[i]).count() as f64 / total;
            summary.metric(&format!("pass_fraction_L{l}"), f);
            fractions.push((*l, f));
        }
        let mut ordered = fractions.clone();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone = ordered.windows(2).all(|w| w[1].1 <= w[0].1);

        let admitted: Vec<&Outcome> = outcomes.iter().filter(|o| o.holds[0]).collect();
        let bounded = admitted
            .iter()
            .filter(|o| o.blowup.is_none() && o.growth < cfg.bound_factor)
            .count();
        let max_growth = admitted.iter().map(|o| o.growth).fold(0.0, f64::max);
        for (r, o) in outcomes.iter().enumerate() {
            if let Some(msg) = &o.blowup {
                summary.failure_diagnostics.push(format!("realization {r}: {msg}"));
            }
        }
        summary.failures = summary.failure_diagnostics.len();
        summary.metric("admitted_runs", admitted.len() as f64);
        summary.metric("max_sigma_growth", max_growth);
        let failing_overflows = outcomes
            .iter()
            .filter(|o| !o.holds[0] && o.ran && o.blowup.is_some())
            .count();
        summary.metric("failing_runs_with_guard", failing_overflows as f64);

        summary.check(
            "pass_fraction",
            fractions[0].1,
            &format!(">= {}", cfg.min_pass_fraction),
            fractions[0].1 >= cfg.min_pass_fraction,
        );
        summary.check(
            "admitted_bounded",
            bounded as f64,
            &format!("== {}", admitted.len()),
            bounded == admitted.len(),
        );
        summary.check("monotone_in_L", monotone as u8 as f64, "== 1", monotone);
        Ok(StudyOutput {
            tables: vec![table],
            summary,
            files: Vec::new(),
        })
    }
}
