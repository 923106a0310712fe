//! Studies are trait objects registered by kind; the CLI builds one
//! subcommand per registered study.

use std::collections::BTreeMap;

use crate::config::{ExperimentConfig, StudyKind};
use crate::error::HarnessError;
use crate::output::StudyOutput;
use crate::studies;

/// Per-run settings that are not part of the experiment itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunContext {
    pub verbose: bool,
}

impl RunContext {
    pub fn log(&self, msg: impl FnOnce() -> String) {
        if self.verbose {
            eprintln!("[wickgp] {}", msg());
        }
    }
}

pub trait Study: Send + Sync {
    fn kind(&self) -> StudyKind;

    /// One line for `--help`.
    fn about(&self) -> &'static str;

    fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError>;
}

pub struct Registry {
    studies: BTreeMap<StudyKind, Box<dyn Study>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            studies: BTreeMap::new(),
        }
    }

    /// All built-in studies.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(studies::Simulate));
        r.register(Box::new(studies::ConvergeN));
        r.register(Box::new(studies::NoiseRates));
        r.register(Box::new(studies::WickRates));
        r.register(Box::new(studies::DivergingBound));
        r.register(Box::new(studies::Inequalities));
        r.register(Box::new(studies::FocusingGate));
        r
    }

    /// Replaces any study already registered under the same kind.
    pub fn register(&mut self, study: Box<dyn Study>) {
        self.studies.insert(study.kind(), study);
    }

    pub fn get(&self, kind: StudyKind) -> Option<&dyn Study> {
        self.studies.get(&kind).map(|s| s.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Study> {
        self.studies.values().map(|s| s.as_ref())
    }

    pub fn run(&self, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<StudyOutput, HarnessError> {
        let study = self
            .get(cfg.kind)
            .ok_or_else(|| HarnessError::UnknownStudy(cfg.kind.to_string()))?;
        cfg.validate()?;
        ctx.log(|| format!("running {} with R = {}", cfg.kind, cfg.realizations));
        study.run(cfg, ctx)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_is_registered() {
        let r = Registry::builtin();
        for k in StudyKind::ALL {
            assert_eq!(r.get(k).unwrap().kind(), k);
        }
        assert_eq!(r.iter().count(), StudyKind::ALL.len());
    }

    #[test]
    fn missing_study_is_an_error() {
        let r = Registry::empty();
        let cfg = ExperimentConfig::new(StudyKind::Simulate);
        assert!(matches!(
            r.run(&cfg, &RunContext::default()),
            Err(HarnessError::UnknownStudy(_))
        ));
    }
}
