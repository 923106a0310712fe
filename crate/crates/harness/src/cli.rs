//! Command line front end; one subcommand per registered study.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{value_parser, Arg, ArgAction, ArgMatches, Command};

use crate::config::{ExperimentConfig, StudyKind};
use crate::registry::{Registry, RunContext};

pub fn command(registry: &Registry) -> Command {
    let mut cmd = Command::new("wickgp")
        .about("Spectral experiments for the renormalized Gross-Pitaevskii equation with white noise")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for study in registry.iter() {
        cmd = cmd.subcommand(
            Command::new(study.kind().name())
                .about(study.about())
                .arg(
                    Arg::new("config")
                        .long("config")
                        .value_name("PATH")
                        .value_parser(value_parser!(PathBuf))
                        .help("key = value config file; defaults apply to missing keys"),
                )
                .arg(
                    Arg::new("seed")
                        .long("seed")
                        .value_parser(value_parser!(u64))
                        .help("override the config seed"),
                )
                .arg(
                    Arg::new("out")
                        .long("out")
                        .value_name("DIR")
                        .value_parser(value_parser!(PathBuf))
                        .help("output directory (overrides output_path)"),
                )
                .arg(
                    Arg::new("threads")
                        .long("threads")
                        .value_parser(value_parser!(usize))
                        .help("worker threads; results do not depend on it"),
                )
                .arg(
                    Arg::new("set")
                        .long("set")
                        .value_name("KEY=VALUE")
                        .action(ArgAction::Append)
                        .help("override one config key, may repeat"),
                )
                .arg(
                    Arg::new("verbose")
                        .long("verbose")
                        .short('v')
                        .action(ArgAction::SetTrue),
                ),
        );
    }
    cmd
}

fn build_config(kind: StudyKind, m: &ArgMatches) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let cfg = ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
            if cfg.kind != kind {
                bail!("{} describes a `{}` study, not `{kind}`", path.display(), cfg.kind);
            }
            cfg
        }
        None => ExperimentConfig::new(kind),
    };
    for assignment in m.get_many::<String>("set").into_iter().flatten() {
        let (key, value) = assignment
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got `{assignment}`"))?;
        if key.trim() == "kind" {
            bail!("the study kind is chosen by the subcommand");
        }
        cfg.set(key.trim(), value.trim()).map_err(anyhow::Error::msg)?;
    }
    if let Some(&seed) = m.get_one::<u64>("seed") {
        cfg.seed = seed;
    }
    if let Some(out) = m.get_one::<PathBuf>("out") {
        cfg.output_path = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the CLI and returns the process exit code: 0 iff every check passed.
pub fn run<I, T>(args: I) -> anyhow::Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let registry = Registry::builtin();
    let matches = command(&registry).try_get_matches_from(args)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let kind: StudyKind = name.parse()?;
    let cfg = build_config(kind, sub)?;
    let ctx = RunContext {
        verbose: sub.get_flag("verbose"),
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(&t) = sub.get_one::<usize>("threads") {
        pool = pool.num_threads(t);
    }
    let pool = pool.build()?;
    let output = pool.install(|| registry.run(&cfg, &ctx))?;
    let written = output.write(&cfg.output_path)?;
    for c in &output.summary.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {} ({})", c.name, c.value, c.condition);
    }
    if output.summary.failures > 0 {
        println!("{} realization failure(s)", output.summary.failures);
    }
    ctx.log(|| format!("wrote {} files to {}", written.len(), cfg.output_path.display()));
    Ok(if output.summary.pass { 0 } else { 1 })
}
