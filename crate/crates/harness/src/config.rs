//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, lists are comma separated.
//! Unknown keys and repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Simulate,
    #[serde(rename = "converge_N")]
    ConvergeN,
    NoiseRates,
    WickRates,
    DivergingBound,
    Inequalities,
    FocusingGate,
}

impl StudyKind {
    pub const ALL: [StudyKind; 7] = [
        StudyKind::Simulate,
        StudyKind::ConvergeN,
        StudyKind::NoiseRates,
        StudyKind::WickRates,
        StudyKind::DivergingBound,
        StudyKind::Inequalities,
        StudyKind::FocusingGate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Simulate => "simulate",
            StudyKind::ConvergeN => "converge_N",
            StudyKind::NoiseRates => "noise_rates",
            StudyKind::WickRates => "wick_rates",
            StudyKind::DivergingBound => "diverging_bound",
            StudyKind::Inequalities => "inequalities",
            StudyKind::FocusingGate => "focusing_gate",
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StudyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::UnknownStudy(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    White,
    Zero,
}

impl FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "white" => Ok(NoiseKind::White),
            "zero" => Ok(NoiseKind::Zero),
            other => Err(format!("expected `white` or `zero`, got `{other}`")),
        }
    }
}

/// Every study reads the fields it needs and ignores the rest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: StudyKind,
    #[serde(rename = "K")]
    pub k: usize,
    /// Quadrature points per axis; 0 means 2K.
    #[serde(rename = "Mq")]
    pub mq: usize,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    #[serde(rename = "R")]
    pub realizations: usize,
    pub seed: u64,
    pub noise: NoiseKind,
    pub lambda: f64,
    pub renormalize: bool,
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub sigma_list: Vec<f64>,
    pub s: f64,
    pub s_prime: f64,
    pub q: f64,
    pub p: f64,
    pub kappa: f64,
    pub a_list: Vec<f64>,
    pub delta0: f64,
    #[serde(rename = "L_list")]
    pub l_list: Vec<f64>,
    pub run_failing: bool,
    pub dump_noise: bool,
    pub bound_factor: f64,
    pub min_pass_fraction: f64,
    pub min_slope: f64,
    pub max_slope: f64,
    pub max_residual: f64,
    pub min_monotone_fraction: f64,
    pub slope_tolerance: f64,
    pub max_bg_drift: f64,
    pub v0_path: Option<PathBuf>,
    pub checkpoint_out: Option<PathBuf>,
    pub resume_from: Option<PathBuf>,
    pub output_path: PathBuf,
}

impl ExperimentConfig {
    /// Defaults; slope thresholds and sizes depend on the study kind.
    pub fn new(kind: StudyKind) -> Self {
        let mut cfg = Self {
            kind,
            k: 48,
            mq: 0,
            n_list: vec![8, 12, 16, 24, 32],
            realizations: 20,
            seed: 0,
            noise: NoiseKind::White,
            lambda: 0.0,
            renormalize: true,
            dt: 1e-3,
            t_final: 1.0,
            record_every: 10,
            sigma_list: vec![1.6],
            s: 0.9,
            s_prime: 0.35,
            q: 4.0,
            p: 2.0,
            kappa: 0.25,
            a_list: vec![1.0],
            delta0: 0.2,
            l_list: vec![0.1],
            run_failing: false,
            dump_noise: false,
            bound_factor: 10.0,
            min_pass_fraction: 0.0,
            min_slope: f64::NEG_INFINITY,
            max_slope: f64::INFINITY,
            max_residual: f64::INFINITY,
            min_monotone_fraction: 0.0,
            slope_tolerance: 0.1,
            max_bg_drift: 0.2,
            v0_path: None,
            checkpoint_out: None,
            resume_from: None,
            output_path: PathBuf::from("out"),
        };
        match kind {
            StudyKind::Simulate => {
                cfg.realizations = 1;
                cfg.n_list = vec![16];
            }
            StudyKind::ConvergeN => cfg.max_slope = 0.0,
            StudyKind::DivergingBound => cfg.max_slope = 0.5,
            StudyKind::NoiseRates | StudyKind::WickRates => {
                cfg.k = 96;
                cfg.n_list = vec![8, 16, 32, 64];
                cfg.realizations = 100;
            }
            StudyKind::Inequalities => cfg.realizations = 1000,
            StudyKind::FocusingGate => {
                cfg.lambda = 1.0;
                cfg.n_list = vec![16];
                cfg.realizations = 100;
            }
        }
        cfg
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut pairs = BTreeMap::new();
        let mut order = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Config {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim().to_string();
            if pairs.insert(key.clone(), (line, value.trim().to_string())).is_some() {
                return Err(HarnessError::Config {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            order.push(key);
        }
        let (kind_line, kind) = pairs.remove("kind").ok_or_else(|| HarnessError::Invalid("missing `kind`".into()))?;
        let kind = kind.parse().map_err(|e: HarnessError| HarnessError::Config {
            line: kind_line,
            msg: e.to_string(),
        })?;
        let mut cfg = Self::new(kind);
        for key in order.iter().filter(|k| *k != "kind") {
            let (line, value) = &pairs[key];
            cfg.set(key, value).map_err(|msg| HarnessError::Config { line: *line, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "K" => self.k = scalar(key, value)?,
            "Mq" => self.mq = scalar(key, value)?,
            "N_list" => self.n_list = list(key, value)?,
            "R" => self.realizations = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "noise" => self.noise = scalar(key, value)?,
            "lambda" => self.lambda = scalar(key, value)?,
            "renormalize" => self.renormalize = scalar(key, value)?,
            "dt" => self.dt = scalar(key, value)?,
            "t_final" => self.t_final = scalar(key, value)?,
            "record_every" => self.record_every = scalar(key, value)?,
            "sigma_list" => self.sigma_list = list(key, value)?,
            "s" => self.s = scalar(key, value)?,
            "s_prime" => self.s_prime = scalar(key, value)?,
            "q" => self.q = scalar(key, value)?,
            "p" => self.p = scalar(key, value)?,
            "kappa" => self.kappa = scalar(key, value)?,
            "a_list" => self.a_list = list(key, value)?,
            "delta0" => self.delta0 = scalar(key, value)?,
            "L_list" => self.l_list = list(key, value)?,
            "run_failing" => self.run_failing = scalar(key, value)?,
            "dump_noise" => self.dump_noise = scalar(key, value)?,
            "bound_factor" => self.bound_factor = scalar(key, value)?,
            "min_pass_fraction" => self.min_pass_fraction = scalar(key, value)?,
            "min_slope" => self.min_slope = scalar(key, value)?,
            "max_slope" => self.max_slope = scalar(key, value)?,
            "max_residual" => self.max_residual = scalar(key, value)?,
            "min_monotone_fraction" => self.min_monotone_fraction = scalar(key, value)?,
            "slope_tolerance" => self.slope_tolerance = scalar(key, value)?,
            "max_bg_drift" => self.max_bg_drift = scalar(key, value)?,
            "v0_path" => self.v0_path = Some(PathBuf::from(value)),
            "checkpoint_out" => self.checkpoint_out = Some(PathBuf::from(value)),
            "resume_from" => self.resume_from = Some(PathBuf::from(value)),
            "output_path" => self.output_path = PathBuf::from(value),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn mq(&self) -> usize {
        if self.mq == 0 {
            2 * self.k
        } else {
            self.mq
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Invalid(m));
        if self.k == 0 {
            return bad("K must be positive".into());
        }
        if self.realizations == 0 {
            return bad("R must be at least 1".into());
        }
        if self.n_list.is_empty() {
            return bad("N_list is empty".into());
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("N_list must be strictly increasing, got {:?}", self.n_list));
        }
        if let Some(&top) = self.n_list.last() {
            if top + 1 > self.k {
                return bad(format!("max(N_list) = {top} exceeds K-1 = {}", self.k - 1));
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !self.t_final.is_finite() {
            return bad("t_final must be finite".into());
        }
        if self.record_every == 0 {
            return bad("record_every must be positive".into());
        }
        if !(self.p >= 1.0) || !(self.q >= 2.0) {
            return bad(format!("need p >= 1 and q >= 2, got p={}, q={}", self.p, self.q));
        }
        if self.l_list.is_empty() || self.l_list.iter().any(|l| !(*l > 0.0)) {
            return bad("L_list must hold positive values".into());
        }
        Ok(())
    }

    /// Canonical text form; parsing it back yields the same config.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        let mut lines = vec![
            format!("kind = {}", self.kind),
            format!("K = {}", self.k),
            format!("Mq = {}", self.mq),
            format!(
                "N_list = {}",
                self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
            ),
            format!("R = {}", self.realizations),
            format!("seed = {}", self.seed),
            format!("noise = {}", if self.noise == NoiseKind::White { "white" } else { "zero" }),
            format!("lambda = {:?}", self.lambda),
            format!("renormalize = {}", self.renormalize),
            format!("dt = {:?}", self.dt),
            format!("t_final = {:?}", self.t_final),
            format!("record_every = {}", self.record_every),
            format!("sigma_list = {}", join(&self.sigma_list)),
            format!("s = {:?}", self.s),
            format!("s_prime = {:?}", self.s_prime),
            format!("q = {:?}", self.q),
            format!("p = {:?}", self.p),
            format!("kappa = {:?}", self.kappa),
            format!("a_list = {}", join(&self.a_list)),
            format!("delta0 = {:?}", self.delta0),
            format!("L_list = {}", join(&self.l_list)),
            format!("run_failing = {}", self.run_failing),
            format!("dump_noise = {}", self.dump_noise),
            format!("bound_factor = {:?}", self.bound_factor),
            format!("min_pass_fraction = {:?}", self.min_pass_fraction),
            format!("min_slope = {:?}", self.min_slope),
            format!("max_slope = {:?}", self.max_slope),
            format!("max_residual = {:?}", self.max_residual),
            format!("min_monotone_fraction = {:?}", self.min_monotone_fraction),
            format!("slope_tolerance = {:?}", self.slope_tolerance),
            format!("max_bg_drift = {:?}", self.max_bg_drift),
            format!("output_path = {}", self.output_path.display()),
        ];
        for (key, path) in [
            ("v0_path", &self.v0_path),
            ("checkpoint_out", &self.checkpoint_out),
            ("resume_from", &self.resume_from),
        ] {
            if let Some(p) = path {
                lines.push(format!("{key} = {}", p.display()));
            }
        }
        lines.join("\n") + "\n"
    }
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e: T::Err| format!("`{key}`: cannot parse `{}`: {e}", value.trim()))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    let value = value.trim().trim_start_matches('[').trim_end_matches(']');
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|item| scalar(key, item)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_typed_values() {
        let cfg = ExperimentConfig::parse(
            "# wick study\nkind = wick_rates\nK = 96\nN_list = 8, 16,32,64\nR=300\nq = 4\ns = 0.9 # trailing\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, StudyKind::WickRates);
        assert_eq!(cfg.k, 96);
        assert_eq!(cfg.mq(), 192);
        assert_eq!(cfg.n_list, vec![8, 16, 32, 64]);
        assert_eq!(cfg.realizations, 300);
        assert_eq!(cfg.q, 4.0);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let err = ExperimentConfig::parse("kind = simulate\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().contains("unknown key `foo`"), "{err}");
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(ExperimentConfig::parse("kind = simulate\nK = 8\nK = 9\n").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::parse("kind = simulate\nK = eight\n").is_err());
        assert!(ExperimentConfig::parse("kind = nope\n").is_err());
        assert!(ExperimentConfig::parse("K = 8\n").is_err());
        assert!(ExperimentConfig::parse("kind = simulate\nnoise = pink\n").is_err());
        assert!(ExperimentConfig::parse("kind = simulate\nK = 16\nN_list = 8,4\n").is_err());
        assert!(ExperimentConfig::parse("kind = simulate\nK = 16\nN_list = 8,16\n").is_err());
        assert!(ExperimentConfig::parse("kind = simulate\nR = 0\n").is_err());
        assert!(ExperimentConfig::parse("kind = simulate\njust words\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::new(StudyKind::FocusingGate);
        cfg.lambda = 1.0;
        cfg.l_list = vec![0.05, 0.1, 0.2];
        cfg.max_slope = 0.5;
        cfg.v0_path = Some("v0.csv".into());
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in StudyKind::ALL {
            assert_eq!(k.name().parse::<StudyKind>().unwrap(), k);
        }
    }
}
