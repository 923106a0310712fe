use std::sync::Arc;

use wickgp_core::dynamics::{continue_simulation, run_on_level, Checkpoint, NoiseLevel, SimRun};
use wickgp_core::observables::ObservableSeries;

use super::common::{grid, initial_data, integrator, noise};
use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::{num, StudyOutput, Summary, Table};
use crate::registry::{RunContext, Study};

/// Plain trajectories: one per (realization, N), observables written as CSV.
///
/// With `resume_from` set the single run continues from a checkpoint instead.
pub struct Simulate;

impl Study for Simulate {
    fn kind(&self) -> StudyKind {
        StudyKind::Simulate
    }

    fn about(&self) -> &'static str {
        "integrate the transformed equation and record observables"
    }

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        let mut summary = Summary::new(cfg);
        let mut files = Vec::new();
        let mut runs = Table::new(
            "runs",
            &["realization", "N", "steps", "t_end", "mass_drift", "energy_drift", "blowup"],
        );
        let mut last: Option<SimRun> = None;
        let mut total = 0usize;

        if let Some(path) = &cfg.resume_from {
            let ckpt = Checkpoint::load(path)?;
            let mut icfg = ckpt.config.clone();
            icfg.t_final = cfg.t_final;
            let state = ckpt.restore()?;
            ctx.log(|| format!("resuming at t = {} (step {})", state.t, state.steps));
            let run = continue_simulation(state, &icfg)?;
            record(&mut runs, &mut files, &mut summary, ckpt.stream_index as usize, &run)?;
            total = 1;
            last = Some(run);
        } else {
            let g = grid(cfg)?;
            let v0 = initial_data(cfg, &g)?;
            let icfg = integrator(cfg);
            for r in 0..cfg.realizations {
                let xi = noise(cfg, r, cfg.k)?;
                if cfg.dump_noise {
                    files.push((format!("noise_r{r}.json"), xi.to_json()? + "\n"));
                }
                for &n in &cfg.n_list {
                    ctx.log(|| format!("realization {r}, N = {n}"));
                    let level = Arc::new(NoiseLevel::build(&xi, &g, n, cfg.renormalize)?);
                    let run = run_on_level(level, &v0, &icfg, cfg.lambda)?;
                    record(&mut runs, &mut files, &mut summary, r, &run)?;
                    total += 1;
                    last = Some(run);
                }
            }
        }

        if let (Some(path), Some(run)) = (&cfg.checkpoint_out, &last) {
            if total != 1 {
                return Err(HarnessError::Invalid(
                    "checkpoint_out needs exactly one run (R = 1 and a single N)".into(),
                ));
            }
            let icfg = match &cfg.resume_from {
                Some(p) => {
                    let mut c = Checkpoint::load(p)?.config;
                    c.t_final = cfg.t_final;
                    c
                }
                None => integrator(cfg),
            };
            run.state.checkpoint(&icfg).save(path)?;
        }

        summary.realizations = total;
        summary.failures = summary.failure_diagnostics.len();
        summary.check("blowups", summary.failures as f64, "== 0", summary.failures == 0);
        Ok(StudyOutput {
            tables: vec![runs],
            summary,
            files,
        })
    }
}

fn record(
    runs: &mut Table,
    files: &mut Vec<(String, String)>,
    summary: &mut Summary,
    r: usize,
    run: &SimRun,
) -> Result<(), HarnessError> {
    let n = run.state.n();
    let mass_drift = ObservableSeries::relative_drift(&run.series.mass);
    let energy_drift = ObservableSeries::relative_drift(&run.series.energy);
    runs.push(vec![
        r.to_string(),
        n.to_string(),
        run.state.steps.to_string(),
        num(run.state.t),
        num(mass_drift),
        num(energy_drift),
        run.blowup.is_some().to_string(),
    ]);
    if let Some(msg) = &run.blowup {
        summary.failure_diagnostics.push(format!("realization {r}, N = {n}: {msg}"));
    }
    let key = format!("r{r}_N{n}");
    summary.metric(&format!("mass_drift_{key}"), mass_drift);
    summary.metric(&format!("energy_drift_{key}"), energy_drift);
    let mut csv = Vec::new();
    run.series.write_csv(&mut csv)?;
    files.push((
        format!("observables_{key}.csv"),
        String::from_utf8(csv).expect("csv output is utf-8"),
    ));
    Ok(())
}
