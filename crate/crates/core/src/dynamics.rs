//! Time integration of the regularized renormalized equation.
//!
//! The v-equation
//! i∂_t v + Hv + 2∇Y_N·∇v + xY_N·xv + :|∇Y_N|²: v + λ|v|²v e^{2Y_N} = 0
//! is integrated through u = v e^{Y_N}, which solves
//! i∂_t u + Hu + (ξ_N − C_N²) u + λ|u|²u = 0.
//! That form splits into two exactly solvable flows: the diagonal Hermite
//! phase and a pointwise phase rotation by the real potential.

use std::path::Path;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hermite::{CoefField, GridField, SpectralGrid};
use crate::noise::{
    cached_counterterm, compute_y, compute_yn, exp_weight_values, sample_noise, truncated_noise,
    wick_from_yn, NoiseRealization,
};
use crate::observables::{ObservableSeries, WeightedFrame};
use crate::spaces::hilbert_norm;

fn check_pair(a: &CoefField, b: &CoefField) -> Result<()> {
    if a.grid().same_as(b.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn multiply_by_exp(f: &CoefField, yn: &CoefField, a: f64) -> Result<CoefField> {
    check_pair(f, yn)?;
    let w = exp_weight_values(&yn.synthesize().re(), a)?;
    let mut g = f.synthesize();
    Zip::from(g.values_mut()).and(&w.values).for_each(|z, &e| *z *= e);
    Ok(g.analyze())
}

/// u = v e^{Y_N}, projected back onto the K×K modes.
pub fn u_from_v(v: &CoefField, yn: &CoefField) -> Result<CoefField> {
    multiply_by_exp(v, yn, 1.0)
}

/// v = u e^{−Y_N}, projected back onto the K×K modes.
pub fn v_from_u(u: &CoefField, yn: &CoefField) -> Result<CoefField> {
    multiply_by_exp(u, yn, -1.0)
}

/// Exact flow of i∂_t u + Hu = 0: c_k ← e^{−iλ_k²τ} c_k.
pub fn linear_flow(u: &CoefField, tau: f64) -> CoefField {
    if tau == 0.0 {
        return u.clone();
    }
    u.apply_complex_multiplier(|k| Complex64::from_polar(1.0, -k.eigenvalue() * tau))
}

/// Exact flow of i∂_t u = −(V + λ|u|²) u on the nodes, followed by analysis.
pub fn potential_flow(u: &CoefField, potential: &Array2<f64>, lambda: f64, tau: f64) -> CoefField {
    let mut g = u.synthesize();
    rotate_phase(&mut g, potential, lambda, tau);
    g.analyze()
}

fn rotate_phase(g: &mut GridField, potential: &Array2<f64>, lambda: f64, tau: f64) {
    Zip::from(g.values_mut()).and(potential).for_each(|z, &v| {
        let phase = tau * (v + lambda * z.norm_sqr());
        *z *= Complex64::from_polar(1.0, phase);
    });
}

/// Everything deterministic about one (realization, N) pair: Y_N, the
/// potential V_N = ξ_N − C_N² on the nodes, and the observable frame.
#[derive(Debug)]
pub struct NoiseLevel {
    pub n: usize,
    pub seed: u64,
    pub stream_index: u64,
    pub noise_zero: bool,
    pub xi_sha256: String,
    pub renormalized: bool,
    pub yn: CoefField,
    pub potential: Array2<f64>,
    pub frame: WeightedFrame,
}

fn xi_checksum(noise: &NoiseRealization) -> String {
    let mut h = Sha256::new();
    for v in noise.xi.iter() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl NoiseLevel {
    /// `renormalize = false` drops the −C_N² shift (diagnostic ablation only).
    pub fn build(noise: &NoiseRealization, grid: &Arc<SpectralGrid>, n: usize, renormalize: bool) -> Result<Self> {
        let y = compute_y(noise, grid)?;
        let yn = compute_yn(&y, n)?;
        let noise_zero = noise.xi.iter().all(|&x| x == 0.0);
        // A zero noise is deterministic: its counterterm E|∇Y_N|² vanishes.
        let (potential, frame) = if noise_zero {
            (Array2::zeros((grid.mq(), grid.mq())), WeightedFrame::flat(grid))
        } else {
            let xi_n = truncated_noise(noise, grid, n)?.synthesize().re();
            let potential = if renormalize {
                &xi_n - &*cached_counterterm(n, grid)
            } else {
                xi_n
            };
            let wick = wick_from_yn(&yn, n)?;
            (potential, WeightedFrame::new(&yn, Some(&wick))?)
        };
        Ok(Self {
            n,
            seed: noise.seed,
            stream_index: noise.stream_index,
            noise_zero,
            xi_sha256: xi_checksum(noise),
            renormalized: renormalize,
            yn,
            potential,
            frame,
        })
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.yn.grid()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    Strang,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// May be negative for backward runs.
    pub t_final: f64,
    pub scheme: Scheme,
    /// Observables are sampled every `record_every` steps (and at the end).
    pub record_every: usize,
    /// σ values whose W^{σ,2} norms are recorded.
    pub w_sigma: Vec<f64>,
    /// Subtract the counterterm C_N² from the potential.
    pub renormalize: bool,
    /// Σ-norm growth factor over 1 + |u_0|_Σ treated as blow-up.
    pub blowup_factor: f64,
    /// Keep v at every sampled time.
    pub keep_snapshots: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            scheme: Scheme::Strang,
            record_every: 10,
            w_sigma: Vec::new(),
            renormalize: true,
            blowup_factor: 1e4,
            keep_snapshots: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need dt > 0 and finite t_final, got dt={}, t_final={}",
                self.dt, self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> u64 {
        (self.t_final.abs() / self.dt).round() as u64
    }

    pub fn signed_dt(&self) -> f64 {
        if self.t_final < 0.0 { -self.dt } else { self.dt }
    }
}

/// Solution state in the u-variable.
#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    pub steps: u64,
    pub u: CoefField,
    pub lambda: f64,
    pub level: Arc<NoiseLevel>,
}

impl SimState {
    pub fn new(u: CoefField, lambda: f64, level: Arc<NoiseLevel>) -> Self {
        Self {
            t: 0.0,
            steps: 0,
            u,
            lambda,
            level,
        }
    }

    /// Starts from v0 by mapping it to u0 = v0 e^{Y_N}.
    pub fn from_v(v0: &CoefField, lambda: f64, level: Arc<NoiseLevel>) -> Result<Self> {
        let u = u_from_v(v0, &level.yn)?;
        Ok(Self::new(u, lambda, level))
    }

    pub fn n(&self) -> usize {
        self.level.n
    }

    pub fn v(&self) -> Result<CoefField> {
        v_from_u(&self.u, &self.level.yn)
    }

    /// Half potential, full linear, half potential.
    pub fn advance(&mut self, dt: f64) {
        let half = 0.5 * dt;
        let pot = &self.level.potential;
        let u = potential_flow(&self.u, pot, self.lambda, half);
        let u = linear_flow(&u, dt);
        self.u = potential_flow(&u, pot, self.lambda, half);
        self.t += dt;
        self.steps += 1;
    }

    pub fn checkpoint(&self, cfg: &IntegratorConfig) -> Checkpoint {
        let grid = self.u.grid();
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            t: self.t,
            steps: self.steps,
            n: self.level.n,
            k: grid.k(),
            mq: grid.mq(),
            seed: self.level.seed,
            stream_index: self.level.stream_index,
            noise_zero: self.level.noise_zero,
            xi_sha256: self.level.xi_sha256.clone(),
            lambda: self.lambda,
            config: cfg.clone(),
            u: self.u.coef().iter().flat_map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// One Strang step on a copy of `state`.
pub fn strang_step(state: &SimState, dt: f64) -> SimState {
    let mut next = state.clone();
    next.advance(dt);
    next
}

#[derive(Clone, Debug)]
pub struct SimRun {
    pub series: ObservableSeries,
    pub state: SimState,
    /// v at every sampled time when `keep_snapshots` is set.
    pub snapshots: Vec<CoefField>,
    /// Suspected blow-up; the run stopped early.
    pub blowup: Option<String>,
}

/// Integrates from the current state to step `cfg.total_steps()`, sampling
/// observables in the v-representation.
pub fn continue_simulation(mut state: SimState, cfg: &IntegratorConfig) -> Result<SimRun> {
    cfg.validate()?;
    let dt = cfg.signed_dt();
    let total = cfg.total_steps();
    let mut series = ObservableSeries::new(&cfg.w_sigma);
    let mut snapshots = Vec::new();
    let sigma0 = hilbert_norm(&state.u, 1.0);
    let ceiling = cfg.blowup_factor * (1.0 + sigma0);

    let sample = |state: &SimState, series: &mut ObservableSeries, snaps: &mut Vec<CoefField>| -> Result<()> {
        let v = state.v()?;
        series.record_state(state.t, &state.u, &v, &state.level.frame, state.lambda)?;
        if cfg.keep_snapshots {
            snaps.push(v);
        }
        Ok(())
    };

    if state.steps == 0 {
        sample(&state, &mut series, &mut snapshots)?;
    }
    let mut blowup = None;
    while state.steps < total {
        state.advance(dt);
        // avoid drift from summing dt
        state.t = state.steps as f64 * dt;
        let finite = state.u.coef().iter().all(|z| z.re.is_finite() && z.im.is_finite());
        let sigma = if finite { hilbert_norm(&state.u, 1.0) } else { f64::INFINITY };
        if !(sigma <= ceiling) {
            blowup = Some(format!(
                "Sigma norm of u reached {sigma:.3e} (ceiling {ceiling:.3e}) at t = {:.6}",
                state.t
            ));
            break;
        }
        if state.steps % cfg.record_every as u64 == 0 || state.steps == total {
            match sample(&state, &mut series, &mut snapshots) {
                Ok(()) => {}
                Err(Error::ExpOverflow(x)) => {
                    blowup = Some(format!("exponential overflow {x:.3e} at t = {:.6}", state.t));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(SimRun {
        series,
        state,
        snapshots,
        blowup,
    })
}

/// Builds V_N, maps v0 → u0 and integrates up to `cfg.t_final`.
pub fn run_simulation(
    noise: &NoiseRealization,
    grid: &Arc<SpectralGrid>,
    n: usize,
    v0: &CoefField,
    cfg: &IntegratorConfig,
    lambda: f64,
) -> Result<SimRun> {
    let level = Arc::new(NoiseLevel::build(noise, grid, n, cfg.renormalize)?);
    run_on_level(level, v0, cfg, lambda)
}

pub fn run_on_level(level: Arc<NoiseLevel>, v0: &CoefField, cfg: &IntegratorConfig, lambda: f64) -> Result<SimRun> {
    cfg.validate()?;
    let state = SimState::from_v(v0, lambda, level)?;
    continue_simulation(state, cfg)
}

const CHECKPOINT_FORMAT: &str = "wickgp-checkpoint";
const CHECKPOINT_VERSION: u32 = 1;

/// Versioned record of a simulation state sufficient for exact resume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub t: f64,
    pub steps: u64,
    pub n: usize,
    pub k: usize,
    pub mq: usize,
    pub seed: u64,
    pub stream_index: u64,
    pub noise_zero: bool,
    pub xi_sha256: String,
    pub lambda: f64,
    pub config: IntegratorConfig,
    /// Row-major (k1, k2) coefficients, interleaved re, im.
    pub u: Vec<f64>,
}

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!("unsupported checkpoint {} v{}", ck.format, ck.version)));
        }
        Ok(ck)
    }

    /// Rebuilds the state, regenerating the noise from (seed, stream_index).
    pub fn restore(&self) -> Result<SimState> {
        if self.u.len() != 2 * self.k * self.k {
            return Err(Error::Format(format!(
                "expected {} values for u, found {}",
                2 * self.k * self.k,
                self.u.len()
            )));
        }
        let grid = SpectralGrid::shared(self.k, self.mq)?;
        let noise = if self.noise_zero {
            NoiseRealization::zero(self.k)
        } else {
            sample_noise(self.seed, self.stream_index, self.k)?
        };
        if xi_checksum(&noise) != self.xi_sha256 {
            return Err(Error::Format("regenerated noise does not match the recorded checksum".into()));
        }
        let level = Arc::new(NoiseLevel::build(&noise, &grid, self.n, self.config.renormalize)?);
        let coef = Array2::from_shape_fn((self.k, self.k), |(a, b)| {
            let i = 2 * (a * self.k + b);
            Complex64::new(self.u[i], self.u[i + 1])
        });
        Ok(SimState {
            t: self.t,
            steps: self.steps,
            u: CoefField::from_coef(&grid, coef)?,
            lambda: self.lambda,
            level,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::MultiIndex;

    fn grid() -> Arc<SpectralGrid> {
        SpectralGrid::shared(12, 24).unwrap()
    }

    #[test]
    fn transforms_without_noise_are_identity() {
        let g = grid();
        let v = CoefField::from_fn(&g, |k| Complex64::new(1.0 / (1.0 + k.order() as f64), -0.2));
        let zero = CoefField::zeros(&g);
        assert!(u_from_v(&v, &zero).unwrap().max_abs_diff(&v) < 1e-12);
        assert!(v_from_u(&v, &zero).unwrap().max_abs_diff(&v) < 1e-12);
    }

    #[test]
    fn linear_flow_phases() {
        let g = grid();
        let h0 = CoefField::delta(&g, MultiIndex::new(0, 0));
        assert_eq!(linear_flow(&h0, 0.0).max_abs_diff(&h0), 0.0);
        assert!(linear_flow(&h0, std::f64::consts::PI).max_abs_diff(&h0) < 1e-12);
        let v = CoefField::from_fn(&g, |k| Complex64::new(k.k1 as f64, k.k2 as f64));
        let w = linear_flow(&v, 0.37);
        for s in [0.0, 1.0, 2.5] {
            assert!((hilbert_norm(&w, s) - hilbert_norm(&v, s)).abs() < 1e-12 * hilbert_norm(&v, s));
        }
    }

    #[test]
    fn potential_flow_special_cases() {
        let g = grid();
        let m = g.mq();
        let v = CoefField::from_fn(&g, |k| Complex64::new(0.5_f64.powi(k.order() as i32), 0.1)).drop_top_shells(5);
        let zero = Array2::zeros((m, m));
        assert!(potential_flow(&v, &zero, 0.0, 0.3).max_abs_diff(&v) < 1e-12);
        let c = Array2::from_elem((m, m), 1.7);
        let rotated = potential_flow(&v, &c, 0.0, 0.3);
        let expect = v.scale(Complex64::from_polar(1.0, 0.3 * 1.7));
        assert!(rotated.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn pointwise_rotation_preserves_grid_norm() {
        let g = grid();
        let m = g.mq();
        let v = CoefField::from_fn(&g, |k| Complex64::new((k.k1 as f64).sin(), (k.k2 as f64).cos()));
        let pot = Array2::from_shape_fn((m, m), |(i, j)| (i as f64 * 0.37).sin() * 3.0 + j as f64 * 0.01);
        let mut grid_v = v.synthesize();
        let before = grid_v.l2_norm();
        rotate_phase(&mut grid_v, &pot, -2.0, 0.7);
        assert!((grid_v.l2_norm() - before).abs() < 1e-12 * before);
    }

    #[test]
    fn config_validation() {
        let mut cfg = IntegratorConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.t_final = -0.5;
        assert_eq!(cfg.signed_dt(), -1e-3);
        assert_eq!(cfg.total_steps(), 500);
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
    }
}
