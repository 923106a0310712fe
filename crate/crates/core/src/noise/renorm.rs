use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::Array2;

use super::sample::NoiseRealization;
use crate::error::{Error, Result};
use crate::hermite::{Axis, CoefField, GridField, SpectralGrid};
use crate::spaces::{smooth_truncate, truncation_weight};

/// Y = (−H)^{-1} ξ, i.e. Y_k = ξ_k / λ_k².
pub fn compute_y(noise: &NoiseRealization, grid: &Arc<SpectralGrid>) -> Result<CoefField> {
    Ok(noise.field(grid)?.hermite_power(-1.0))
}

/// N ≤ K − 1, so the support |k| < N of χ_{·,N} lies inside the K×K square.
pub fn check_level(n: usize, grid: &SpectralGrid) -> Result<()> {
    if n + 1 > grid.k() {
        return Err(Error::UnderResolvedTruncation { n, k: grid.k() });
    }
    Ok(())
}

/// Y_N = S_N Y.
pub fn compute_yn(y: &CoefField, n: usize) -> Result<CoefField> {
    check_level(n, y.grid())?;
    Ok(smooth_truncate(y, n))
}

/// ξ_N = S_N ξ = −H Y_N.
pub fn truncated_noise(noise: &NoiseRealization, grid: &Arc<SpectralGrid>, n: usize) -> Result<CoefField> {
    check_level(n, grid)?;
    Ok(smooth_truncate(&noise.field(grid)?, n))
}

/// C_N²(x) = Σ_k χ_{k,N}² |∇h_k(x)|² / λ_k⁴ on the grid nodes, assembled as
/// D W Pᵀ + P W Dᵀ with D = (ψ'_n(x_i))², P = (ψ_n(x_i))² and
/// W_k = χ_{k,N}² / λ_k⁴.
pub fn counterterm_values(n: usize, grid: &SpectralGrid) -> Array2<f64> {
    let k = grid.k();
    let weights = Array2::from_shape_fn((k, k), |(a, b)| {
        let idx = crate::hermite::MultiIndex::new(a, b);
        let chi = truncation_weight(idx, n);
        chi * chi / idx.eigenvalue().powi(2)
    });
    let d2 = grid.basis_derivative().mapv(|v| v * v);
    let p2 = grid.basis().mapv(|v| v * v);
    let left = d2.dot(&weights).dot(&p2.t());
    let right = p2.dot(&weights).dot(&d2.t());
    left + right
}

type CacheKey = (usize, usize, usize);

/// Read-mostly table of counterterms keyed by (N, K, Mq); each entry is
/// initialized exactly once.
#[derive(Default)]
pub struct CountertermCache {
    table: Mutex<HashMap<CacheKey, Arc<OnceLock<Arc<Array2<f64>>>>>>,
}

impl CountertermCache {
    pub fn get(&self, n: usize, grid: &SpectralGrid) -> Arc<Array2<f64>> {
        let slot = {
            let mut table = self.table.lock().expect("counterterm cache poisoned");
            table.entry((n, grid.k(), grid.mq())).or_default().clone()
        };
        slot.get_or_init(|| Arc::new(counterterm_values(n, grid))).clone()
    }
}

static GLOBAL_CACHE: OnceLock<CountertermCache> = OnceLock::new();

/// Cached C_N² as a grid field.
pub fn compute_counterterm(n: usize, grid: &Arc<SpectralGrid>) -> Result<GridField> {
    check_level(n, grid)?;
    let values = GLOBAL_CACHE.get_or_init(CountertermCache::default).get(n, grid);
    GridField::from_real(grid, (*values).clone())
}

pub(crate) fn cached_counterterm(n: usize, grid: &SpectralGrid) -> Arc<Array2<f64>> {
    GLOBAL_CACHE.get_or_init(CountertermCache::default).get(n, grid)
}

/// ∇Y_N, the deterministic counterterm C_N² and :|∇Y_N|²: = |∇Y_N|² − C_N².
#[derive(Clone, Debug)]
pub struct WickField {
    pub n: usize,
    pub grad_yn: [Array2<f64>; 2],
    pub counterterm: Arc<Array2<f64>>,
    pub wick: Array2<f64>,
}

impl WickField {
    /// |∇Y_N|² node-wise, i.e. the unrenormalized square.
    pub fn raw_square(&self) -> Array2<f64> {
        &self.grad_yn[0] * &self.grad_yn[0] + &self.grad_yn[1] * &self.grad_yn[1]
    }

    pub fn wick_field(&self, grid: &Arc<SpectralGrid>) -> Result<GridField> {
        GridField::from_real(grid, self.wick.clone())
    }
}

/// Builds the Wick field from an already truncated Y_N.
pub fn wick_from_yn(yn: &CoefField, n: usize) -> Result<WickField> {
    let grid = yn.grid();
    check_level(n, grid)?;
    let grad = Axis::BOTH.map(|a| yn.derivative(a).synthesize().re());
    let counterterm = cached_counterterm(n, grid);
    let wick = &grad[0] * &grad[0] + &grad[1] * &grad[1] - &*counterterm;
    Ok(WickField {
        n,
        grad_yn: grad,
        counterterm,
        wick,
    })
}

pub fn compute_wick(noise: &NoiseRealization, grid: &Arc<SpectralGrid>, n: usize) -> Result<WickField> {
    let y = compute_y(noise, grid)?;
    let yn = compute_yn(&y, n)?;
    wick_from_yn(&yn, n)
}

/// e^{a Y_N} on the nodes, with its extreme values.
#[derive(Clone, Debug)]
pub struct ExpWeight {
    pub values: Array2<f64>,
    pub max: f64,
    pub min: f64,
}

const EXP_GUARD: f64 = 700.0;

/// e^{a·Y} from grid samples of Y; fails if |a|·max|Y| > 700.
pub fn exp_weight_values(y_grid: &Array2<f64>, a: f64) -> Result<ExpWeight> {
    let ymax = y_grid.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(a.abs() * ymax <= EXP_GUARD) {
        return Err(Error::ExpOverflow(a.abs() * ymax));
    }
    let values = y_grid.mapv(|v| (a * v).exp());
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ExpWeight { values, max, min })
}

pub fn exp_weight(yn: &CoefField, a: f64) -> Result<ExpWeight> {
    exp_weight_values(&yn.synthesize().re(), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::MultiIndex;
    use crate::noise::sample_noise;

    fn grid() -> Arc<SpectralGrid> {
        SpectralGrid::shared(12, 24).unwrap()
    }

    #[test]
    fn y_of_ground_state_noise() {
        let g = grid();
        let mut noise = NoiseRealization::zero(12);
        noise.xi[[0, 0]] = 1.0;
        let y = compute_y(&noise, &g).unwrap();
        assert_eq!(y.get(MultiIndex::new(0, 0)).re, 0.5);
        assert!(y.is_real());
        assert!(compute_y(&NoiseRealization::zero(12), &g).unwrap().is_zero());
    }

    #[test]
    fn level_zero_kills_everything() {
        let g = grid();
        let noise = sample_noise(3, 0, 12).unwrap();
        let y = compute_y(&noise, &g).unwrap();
        assert!(compute_yn(&y, 0).unwrap().is_zero());
        let c = compute_counterterm(0, &g).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }

    #[test]
    fn under_resolved_level_rejected() {
        let g = grid();
        let y = CoefField::zeros(&g);
        assert!(compute_yn(&y, 11).is_ok());
        assert!(matches!(
            compute_yn(&y, 12),
            Err(Error::UnderResolvedTruncation { n: 12, k: 12 })
        ));
    }

    #[test]
    fn counterterm_even_and_positive() {
        let g = grid();
        let c = counterterm_values(8, &g);
        let m = g.mq();
        for i in 0..m {
            for j in 0..m {
                assert!(c[[i, j]] > 0.0);
                assert!((c[[i, j]] - c[[m - 1 - i, m - 1 - j]]).abs() < 1e-12 * c[[i, j]].max(1e-300));
            }
        }
    }

    #[test]
    fn zero_noise_wick_is_minus_counterterm() {
        let g = grid();
        let w = compute_wick(&NoiseRealization::zero(12), &g, 7).unwrap();
        let expect = w.counterterm.mapv(|v| -v);
        assert_eq!(w.wick, expect);
    }

    #[test]
    fn wick_plus_counterterm_is_square() {
        let g = grid();
        let w = compute_wick(&sample_noise(5, 1, 12).unwrap(), &g, 9).unwrap();
        let diff = &w.wick + &*w.counterterm - w.raw_square();
        assert!(diff.iter().all(|d| d.abs() < 1e-10));
    }

    #[test]
    fn exp_weight_inverse_and_guard() {
        let g = grid();
        let y = compute_y(&sample_noise(2, 2, 12).unwrap(), &g).unwrap();
        let yn = compute_yn(&y, 9).unwrap();
        let p = exp_weight(&yn, 2.0).unwrap();
        let m = exp_weight(&yn, -2.0).unwrap();
        assert!((&p.values * &m.values).iter().all(|v| (v - 1.0).abs() < 1e-12));
        let flat = exp_weight(&CoefField::zeros(&g), 4.0).unwrap();
        assert!(flat.values.iter().all(|&v| v == 1.0));
        let huge = yn.scale(1e6.into());
        assert!(matches!(exp_weight(&huge, 4.0), Err(Error::ExpOverflow(_))));
    }
}
