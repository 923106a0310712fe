use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::grid::SpectralGrid;
use crate::error::{Error, Result};

/// A 2D Hermite mode k = (k1, k2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    pub k1: usize,
    pub k2: usize,
}

impl MultiIndex {
    pub const fn new(k1: usize, k2: usize) -> Self {
        Self { k1, k2 }
    }

    /// |k| = k1 + k2.
    pub const fn order(self) -> usize {
        self.k1 + self.k2
    }

    /// λ_k² = 2|k| + 2, so that −H h_k = λ_k² h_k.
    pub fn eigenvalue(self) -> f64 {
        2.0 * self.order() as f64 + 2.0
    }
}

/// λ² attached to truncation level N, i.e. λ_{(N,0)}² = 2N + 2.
pub fn level_eigenvalue(n: usize) -> f64 {
    2.0 * n as f64 + 2.0
}

/// A complex field held by its Hermite coefficients over the K×K mode square.
#[derive(Clone, Debug)]
pub struct CoefField {
    grid: Arc<SpectralGrid>,
    coef: Array2<Complex64>,
    real: bool,
}

/// A complex field sampled at the tensor Gauss–Hermite nodes.
#[derive(Clone, Debug)]
pub struct GridField {
    grid: Arc<SpectralGrid>,
    values: Array2<Complex64>,
}

fn all_real(a: &Array2<Complex64>) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

fn split(a: &Array2<Complex64>) -> (Array2<f64>, Array2<f64>) {
    (a.mapv(|z| z.re), a.mapv(|z| z.im))
}

fn join(re: Array2<f64>, im: Option<Array2<f64>>) -> Array2<Complex64> {
    match im {
        Some(im) => Zip::from(&re).and(&im).map_collect(|&r, &i| Complex64::new(r, i)),
        None => re.mapv(|r| Complex64::new(r, 0.0)),
    }
}

impl CoefField {
    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        let k = grid.k();
        Self {
            grid: grid.clone(),
            coef: Array2::zeros((k, k)),
            real: true,
        }
    }

    /// Unit coefficient at `idx`, i.e. the field h_idx.
    pub fn delta(grid: &Arc<SpectralGrid>, idx: MultiIndex) -> Self {
        let mut f = Self::zeros(grid);
        f.coef[[idx.k1, idx.k2]] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn from_coef(grid: &Arc<SpectralGrid>, coef: Array2<Complex64>) -> Result<Self> {
        let k = grid.k();
        if coef.dim() != (k, k) {
            return Err(Error::InvalidArgument(format!(
                "coefficient array {:?} does not match K = {k}",
                coef.dim()
            )));
        }
        let real = all_real(&coef);
        Ok(Self {
            grid: grid.clone(),
            coef,
            real,
        })
    }

    pub fn from_real(grid: &Arc<SpectralGrid>, coef: Array2<f64>) -> Result<Self> {
        Self::from_coef(grid, coef.mapv(|r| Complex64::new(r, 0.0)))
    }

    pub fn from_fn(grid: &Arc<SpectralGrid>, mut f: impl FnMut(MultiIndex) -> Complex64) -> Self {
        let k = grid.k();
        let coef = Array2::from_shape_fn((k, k), |(a, b)| f(MultiIndex::new(a, b)));
        let real = all_real(&coef);
        Self {
            grid: grid.clone(),
            coef,
            real,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn coef(&self) -> &Array2<Complex64> {
        &self.coef
    }

    pub fn into_coef(self) -> Array2<Complex64> {
        self.coef
    }

    pub fn get(&self, idx: MultiIndex) -> Complex64 {
        self.coef[[idx.k1, idx.k2]]
    }

    /// Reality flag: every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Σ|c_k|², equal to the L² norm squared by Parseval.
    pub fn norm_sqr(&self) -> f64 {
        self.coef.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// max_k |c_k − d_k|.
    pub fn max_abs_diff(&self, other: &CoefField) -> f64 {
        Zip::from(&self.coef)
            .and(&other.coef)
            .fold(0.0_f64, |m, a, b| m.max((a - b).norm()))
    }

    pub fn map_coef(&self, mut f: impl FnMut(MultiIndex, Complex64) -> Complex64) -> Self {
        let coef = Array2::from_shape_fn(self.coef.dim(), |(a, b)| {
            f(MultiIndex::new(a, b), self.coef[[a, b]])
        });
        let real = all_real(&coef);
        Self {
            grid: self.grid.clone(),
            coef,
            real,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_coef(|_, c| c * s)
    }

    pub fn add(&self, other: &CoefField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CoefField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CoefField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let coef = Zip::from(&self.coef).and(&other.coef).map_collect(|&a, &b| f(a, b));
        let real = all_real(&coef);
        Ok(Self {
            grid: self.grid.clone(),
            coef,
            real,
        })
    }

    /// Σ_k c_k h_k evaluated at every tensor node: Φ C Φᵀ per real part.
    pub fn synthesize(&self) -> GridField {
        let phi = self.grid.basis();
        let apply = |c: &Array2<f64>| phi.dot(c).dot(&phi.t());
        let values = if self.real {
            join(apply(&self.coef.mapv(|z| z.re)), None)
        } else {
            let (re, im) = split(&self.coef);
            join(apply(&re), Some(apply(&im)))
        };
        GridField {
            grid: self.grid.clone(),
            values,
        }
    }
}

impl CoefField {
    /// ∂_i of the field evaluated exactly at the nodes, using tabulated ψ'_n
    /// (no truncation of the top mode, unlike the coefficient-space ladder).
    pub fn synthesize_derivative(&self, axis: super::Axis) -> GridField {
        let phi = self.grid.basis();
        let dphi = self.grid.basis_derivative();
        let apply = |c: &Array2<f64>| match axis {
            super::Axis::X1 => dphi.dot(c).dot(&phi.t()),
            super::Axis::X2 => phi.dot(c).dot(&dphi.t()),
        };
        let values = if self.real {
            join(apply(&self.coef.mapv(|z| z.re)), None)
        } else {
            let (re, im) = split(&self.coef);
            join(apply(&re), Some(apply(&im)))
        };
        GridField {
            grid: self.grid.clone(),
            values,
        }
    }
}

impl GridField {
    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        let m = grid.mq();
        Self {
            grid: grid.clone(),
            values: Array2::zeros((m, m)),
        }
    }

    pub fn from_values(grid: &Arc<SpectralGrid>, values: Array2<Complex64>) -> Result<Self> {
        let m = grid.mq();
        if values.dim() != (m, m) {
            return Err(Error::InvalidArgument(format!(
                "grid array {:?} does not match Mq = {m}",
                values.dim()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_real(grid: &Arc<SpectralGrid>, values: Array2<f64>) -> Result<Self> {
        Self::from_values(grid, values.mapv(|r| Complex64::new(r, 0.0)))
    }

    /// Samples f(x, y) at the tensor nodes.
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let x = grid.nodes();
        let m = grid.mq();
        Self {
            grid: grid.clone(),
            values: Array2::from_shape_fn((m, m), |(i, j)| f(x[i], x[j])),
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn re(&self) -> Array2<f64> {
        self.values.mapv(|z| z.re)
    }

    /// Quadrature of |g|^q over the plane.
    pub fn integrate_abs_pow(&self, q: f64) -> f64 {
        let p = self.values.mapv(|z| {
            let a = z.norm();
            if q == 2.0 { a * a } else { a.powf(q) }
        });
        self.grid.integrate(&p)
    }

    /// Quadrature L^q norm; q = ∞ gives the node-wise max.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            self.max_abs()
        } else {
            self.integrate_abs_pow(q).powf(1.0 / q)
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate_abs_pow(2.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// c_k = Σ_ij w̃_i w̃_j g(x_i, x_j) h_k(x_i, x_j), as Wᵀ G W per real part.
    pub fn analyze(&self) -> CoefField {
        let w = self.grid.weighted_basis();
        let apply = |g: &Array2<f64>| w.t().dot(g).dot(w);
        let (coef, real) = if all_real(&self.values) {
            (join(apply(&self.values.mapv(|z| z.re)), None), true)
        } else {
            let (re, im) = split(&self.values);
            let c = join(apply(&re), Some(apply(&im)));
            let real = all_real(&c);
            (c, real)
        };
        CoefField {
            grid: self.grid.clone(),
            coef,
            real,
        }
    }

    /// Node-wise product.
    pub fn mul(&self, other: &GridField) -> Result<GridField> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(GridField {
            grid: self.grid.clone(),
            values: &self.values * &other.values,
        })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridField {
        GridField {
            grid: self.grid.clone(),
            values: self.values.mapv(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(k: usize, m: usize) -> Arc<SpectralGrid> {
        SpectralGrid::shared(k, m).unwrap()
    }

    #[test]
    fn analyze_single_mode() {
        let g = grid(8, 16);
        let field = CoefField::delta(&g, MultiIndex::new(2, 3)).synthesize();
        let c = field.analyze();
        for a in 0..8 {
            for b in 0..8 {
                let expect = if (a, b) == (2, 3) { 1.0 } else { 0.0 };
                assert!((c.coef()[[a, b]] - expect).norm() < 1e-10);
            }
        }
        assert!(c.is_real());
    }

    #[test]
    fn zero_in_zero_out() {
        let g = grid(6, 12);
        assert!(GridField::zeros(&g).analyze().is_zero());
        assert_eq!(CoefField::zeros(&g).synthesize().max_abs(), 0.0);
    }

    #[test]
    fn x_times_ground_state() {
        let g = grid(8, 16);
        let f = GridField::from_fn(&g, |x, y| {
            Complex64::new(x * (-(x * x + y * y) / 2.0).exp() / PI.sqrt(), 0.0)
        });
        let c = f.analyze();
        assert!((c.get(MultiIndex::new(1, 0)).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }

    #[test]
    fn ground_state_samples() {
        let g = grid(4, 8);
        let f = CoefField::delta(&g, MultiIndex::new(0, 0)).synthesize();
        let x = g.nodes();
        for i in 0..8 {
            for j in 0..8 {
                let expect = (-(x[i] * x[i] + x[j] * x[j]) / 2.0).exp() / PI.sqrt();
                assert!((f.values()[[i, j]].re - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = grid(4, 8);
        assert!(CoefField::from_real(&g, Array2::zeros((3, 3))).is_err());
        assert!(GridField::from_real(&g, Array2::zeros((4, 4))).is_err());
    }
}
