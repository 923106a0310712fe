use wickgp_core::hermite::CoefField;

use super::common::{
    fit_levels, grid, initial_data, lambda_n, moment, per_realization, split_failures, standard_error,
};
use super::levels::{coupled_levels, LevelTrajectory};
use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::{num, FitEntry, StudyOutput, Summary, Table};
use crate::registry::{RunContext, Study};

/// sup_t |v^N − v^M|_{L²} for consecutive levels M < N of one coupled run.
pub struct ConvergeN;

struct PairGap {
    m: usize,
    n: usize,
    gap: f64,
    argmax_t: f64,
}

fn pair_gaps(levels: &[LevelTrajectory]) -> Result<Vec<PairGap>, HarnessError> {
    let mut out = Vec::new();
    for w in levels.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let mut gap = 0.0;
        let mut argmax_t = lo.times.first().copied().unwrap_or(0.0);
        for ((a, b), &t) in lo.snapshots.iter().zip(&hi.snapshots).zip(&lo.times) {
            let d = l2_distance(a, b)?;
            if d > gap {
                gap = d;
                argmax_t = t;
            }
        }
        out.push(PairGap {
            m: lo.n,
            n: hi.n,
            gap,
            argmax_t,
        });
    }
    Ok(out)
}

fn l2_distance(a: &CoefField, b: &CoefField) -> Result<f64, HarnessError> {
    Ok(b.sub(a)?.l2_norm())
}

impl Study for ConvergeN {
    fn kind(&self) -> StudyKind {
        StudyKind::ConvergeN
    }

    fn about(&self) -> &'static str {
        "Cauchy-in-N gaps of coupled solutions across truncation levels"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        if cfg.n_list.len() < 3 {
            return Err(HarnessError::Invalid("converge_N needs at least 3 levels".into()));
        }
        let g = grid(cfg)?;
        let v0 = initial_data(cfg, &g)?;
        let results = per_realization(cfg.realizations, |r| {
            ctx.log(|| format!("realization {r}"));
            let gaps = match coupled_levels(cfg, &g, &v0, r)? {
                Ok(levels) => Ok(pair_gaps(&levels)?),
                Err(msg) => Err(msg),
            };
            Ok::<_, HarnessError>((r, gaps))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        let (ok, failed) = split_failures(results);

        let mut table = Table::new("gaps", &["realization", "M", "N", "gap", "argmax_t"]);
        for (r, gaps) in &ok {
            for p in gaps {
                table.push(vec![r.to_string(), p.m.to_string(), p.n.to_string(), num(p.gap), num(p.argmax_t)]);
            }
        }

        let mut summary = Summary::new(cfg);
        summary.failures = failed.len();
        summary.failure_diagnostics = failed;
        let pairs = cfg.n_list.len() - 1;
        let mut points = Vec::with_capacity(pairs);
        for i in 0..pairs {
            let col: Vec<f64> = ok.iter().map(|(_, g)| g[i].gap).collect();
            let m = cfg.n_list[i];
            let mom = moment(&col, cfg.p);
            summary.metric(&format!("moment_M{m}"), mom);
            summary.metric(&format!("mean_gap_M{m}"), col.iter().sum::<f64>() / col.len().max(1) as f64);
            summary.metric(&format!("stderr_gap_M{m}"), standard_error(&col));
            points.push((lambda_n(m), mom));
        }
        let monotone = ok
            .iter()
            .filter(|(_, g)| g.windows(2).all(|w| w[1].gap < w[0].gap))
            .count() as f64
            / ok.len().max(1) as f64;
        summary.metric("monotone_fraction", monotone);

        let fit = fit_levels(&points, summary.failures, cfg.realizations);
        match &fit {
            FitEntry::Fitted(f) => {
                let limit = cfg.max_slope.min(0.0);
                summary.check("slope", f.slope, &format!("< {limit}"), f.slope < limit);
                summary.check(
                    "residual",
                    f.residual,
                    &format!("< {}", cfg.max_residual),
                    f.residual < cfg.max_residual,
                );
                summary.check(
                    "monotone_fraction",
                    monotone,
                    &format!(">= {}", cfg.min_monotone_fraction),
                    monotone >= cfg.min_monotone_fraction,
                );
            }
            FitEntry::Degenerate { .. } => summary.metric("degenerate", 1.0),
            FitEntry::Invalid { .. } => summary.check("fit_valid", 0.0, "== 1", false),
        }
        summary.fits.insert("gap".into(), fit);
        Ok(StudyOutput {
            tables: vec![table],
            summary,
            files: Vec::new(),
        })
    }
}
