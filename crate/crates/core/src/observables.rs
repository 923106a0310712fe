//! Transformed mass and energy of the v-variable, Σ and W^{σ,2} norms,
//! the Gagliardo–Nirenberg and Brezis–Gallouet checkers and the focusing
//! smallness event.

use std::io::Write;
use std::sync::Arc;

use ndarray::{Array2, Zip};

use crate::error::{Error, Result};
use crate::hermite::{Axis, CoefField, SpectralGrid};
use crate::noise::{exp_weight_values, WickField};
use crate::spaces::hilbert_norm;

/// Grid-side data of Y_N shared by every observable of one (realization, N).
#[derive(Clone, Debug)]
pub struct WeightedFrame {
    grid: Arc<SpectralGrid>,
    y: Array2<f64>,
    grad_y: [Array2<f64>; 2],
    e2y: Array2<f64>,
    e4y: Array2<f64>,
    emy: Array2<f64>,
    wick: Array2<f64>,
    x2: Array2<f64>,
}

fn radial_square(grid: &SpectralGrid) -> Array2<f64> {
    let x = grid.nodes();
    let m = grid.mq();
    Array2::from_shape_fn((m, m), |(i, j)| x[i] * x[i] + x[j] * x[j])
}

impl WeightedFrame {
    /// `wick` may be `None` for the noiseless frame (then :|∇Y_N|²: = 0).
    pub fn new(yn: &CoefField, wick: Option<&WickField>) -> Result<Self> {
        let grid = yn.grid().clone();
        let y = yn.synthesize().re();
        let e2y = exp_weight_values(&y, 2.0)?.values;
        let e4y = exp_weight_values(&y, 4.0)?.values;
        let emy = exp_weight_values(&y, -1.0)?.values;
        let grad_y = Axis::BOTH.map(|a| yn.synthesize_derivative(a).re());
        let m = grid.mq();
        let wick = match wick {
            Some(w) => w.wick.clone(),
            None => Array2::zeros((m, m)),
        };
        let x2 = radial_square(&grid);
        Ok(Self {
            grid,
            y,
            grad_y,
            e2y,
            e4y,
            emy,
            wick,
            x2,
        })
    }

    /// Y_N = 0, no Wick term.
    pub fn flat(grid: &Arc<SpectralGrid>) -> Self {
        let m = grid.mq();
        Self {
            grid: grid.clone(),
            y: Array2::zeros((m, m)),
            grad_y: [Array2::zeros((m, m)), Array2::zeros((m, m))],
            e2y: Array2::ones((m, m)),
            e4y: Array2::ones((m, m)),
            emy: Array2::ones((m, m)),
            wick: Array2::zeros((m, m)),
            x2: radial_square(grid),
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    fn check(&self, v: &CoefField) -> Result<()> {
        if self.grid.same_as(v.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// M̃_N(v) = ∫ |v|² e^{2Y_N}.
    pub fn mass(&self, v: &CoefField) -> Result<f64> {
        self.check(v)?;
        let dens = v.synthesize().values().mapv(|z| z.norm_sqr());
        Ok(self.mass_from_density(&dens))
    }

    fn mass_from_density(&self, dens: &Array2<f64>) -> f64 {
        self.grid.integrate(&(dens * &self.e2y))
    }

    /// Ẽ_N(v) split into its addends.
    pub fn energy(&self, v: &CoefField, lambda: f64) -> Result<EnergyParts> {
        self.check(v)?;
        let dens = v.synthesize().values().mapv(|z| z.norm_sqr());
        let grad2 = Axis::BOTH
            .iter()
            .map(|&a| v.synthesize_derivative(a).values().mapv(|z| z.norm_sqr()))
            .fold(Array2::<f64>::zeros(dens.dim()), |acc, g| acc + g);
        Ok(self.energy_from_densities(&dens, &grad2, lambda))
    }

    fn energy_from_densities(&self, dens: &Array2<f64>, grad2: &Array2<f64>, lambda: f64) -> EnergyParts {
        let g = &self.grid;
        let gradient = 0.5 * g.integrate(&(grad2 * &self.e2y));
        let weighted = dens * &self.e2y;
        let confinement = 0.5 * g.integrate(&(&self.x2 * &weighted));
        let potential_y = -0.5
            * g.integrate(&Zip::from(&self.x2).and(&self.y).and(&weighted).map_collect(|a, b, c| a * b * c));
        let wick = -0.5 * g.integrate(&(&self.wick * &weighted));
        let quartic = -0.25 * lambda * g.integrate(&(dens * dens * &self.e4y));
        EnergyParts {
            gradient,
            confinement,
            potential_y,
            wick,
            quartic,
        }
    }

    /// M̃_N and Ẽ_N of v = u e^{−Y_N} evaluated node-wise, without projecting
    /// v back onto the K×K modes: v = e^{−Y_N} u and
    /// ∇v = e^{−Y_N}(∇u − u ∇Y_N), with ∇u taken exactly at the nodes.
    pub fn mass_energy_from_u(&self, u: &CoefField, lambda: f64) -> Result<(f64, EnergyParts)> {
        self.check(u)?;
        let ug = u.synthesize().into_values();
        let v = Zip::from(&ug).and(&self.emy).map_collect(|z, &e| z * e);
        let dens = v.mapv(|z| z.norm_sqr());
        let mut grad2 = Array2::<f64>::zeros(dens.dim());
        for (axis, gy) in Axis::BOTH.iter().zip(&self.grad_y) {
            let du = u.synthesize_derivative(*axis).into_values();
            Zip::from(&mut grad2)
                .and(&du)
                .and(&ug)
                .and(gy)
                .and(&self.emy)
                .for_each(|acc, d, z, &g, &e| *acc += ((d - z * g) * e).norm_sqr());
        }
        Ok((self.mass_from_density(&dens), self.energy_from_densities(&dens, &grad2, lambda)))
    }
}

/// The five integrals of Ẽ_N:
/// ½∫|∇v|²e^{2Y}, ½∫|xv|²e^{2Y}, −½∫|xv|²Y e^{2Y}, −½∫:|∇Y|²:|v|²e^{2Y},
/// −(λ/4)∫|v|⁴e^{4Y}.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyParts {
    pub gradient: f64,
    pub confinement: f64,
    pub potential_y: f64,
    pub wick: f64,
    pub quartic: f64,
}

impl EnergyParts {
    pub fn kinetic(&self) -> f64 {
        self.gradient + self.confinement
    }

    pub fn total(&self) -> f64 {
        self.gradient + self.confinement + self.potential_y + self.wick + self.quartic
    }
}

pub fn transformed_mass(v: &CoefField, yn: &CoefField) -> Result<f64> {
    WeightedFrame::new(yn, None)?.mass(v)
}

pub fn transformed_energy(v: &CoefField, yn: &CoefField, wick: Option<&WickField>, lambda: f64) -> Result<EnergyParts> {
    WeightedFrame::new(yn, wick)?.energy(v, lambda)
}

/// |v|_Σ = |v|_{W^{1,2}}.
pub fn sigma_norm(v: &CoefField) -> f64 {
    hilbert_norm(v, 1.0)
}

/// |∇v|²_{L²} from exact nodal gradients.
pub fn gradient_norm_sqr(v: &CoefField) -> f64 {
    Axis::BOTH
        .iter()
        .map(|&a| v.synthesize_derivative(a).integrate_abs_pow(2.0))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs, or 0 when both vanish.
    pub ratio: f64,
    pub pass: bool,
}

/// |u|⁴_{L⁴} ≤ ½ |u|²_{L²} |∇u|²_{L²}; passes iff ratio ≤ 1 + 1e-8.
pub fn check_gagliardo_nirenberg(v: &CoefField) -> InequalityReport {
    let g = v.synthesize();
    let lhs = g.integrate_abs_pow(4.0);
    let rhs = 0.5 * g.integrate_abs_pow(2.0) * gradient_norm_sqr(v);
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    InequalityReport {
        lhs,
        rhs,
        ratio,
        pass: ratio <= 1.0 + 1e-8,
    }
}

/// Empirical constant of |v|_∞ ≤ C(1 + |v|_Σ √(1 + ln(1 + |v|_{W^{σ,2}}))).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrezisGallouetReport {
    pub linf: f64,
    pub sigma: f64,
    pub w_sigma: f64,
    pub constant: f64,
}

pub fn check_brezis_gallouet(v: &CoefField, sigma: f64) -> Result<BrezisGallouetReport> {
    if !(sigma > 1.0) {
        return Err(Error::InvalidArgument(format!("Brezis-Gallouet needs sigma > 1, got {sigma}")));
    }
    let linf = v.synthesize().max_abs();
    let s = sigma_norm(v);
    let ws = hilbert_norm(v, sigma);
    let constant = linf / (1.0 + s * (1.0 + (1.0 + ws).ln()).sqrt());
    Ok(BrezisGallouetReport {
        linf,
        sigma: s,
        w_sigma: ws,
        constant,
    })
}

/// Evaluation of λL² |e^{−2Y}|²_∞ |e^{2Y}|_∞ |e^{4Y}|_∞ < 4 on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FocusingEvent {
    pub holds: bool,
    /// The product; infinite when it overflowed.
    pub value: f64,
    /// 4 − value.
    pub margin: f64,
    pub diagnostic: Option<String>,
}

pub fn focusing_event_predicate(y: &CoefField, lambda: f64, l: f64) -> Result<FocusingEvent> {
    if !(lambda > 0.0 && l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "focusing event needs lambda > 0 and L > 0, got {lambda}, {l}"
        )));
    }
    let yg = y.synthesize().re();
    let ymax = yg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ymin = yg.iter().copied().fold(f64::INFINITY, f64::min);
    // |e^{−2Y}|²_∞ = e^{−4 min Y}, |e^{2Y}|_∞ = e^{2 max Y}, |e^{4Y}|_∞ = e^{4 max Y}
    let log_value = lambda.ln() + 2.0 * l.ln() - 4.0 * ymin + 6.0 * ymax;
    if !(log_value < 700.0) {
        return Ok(FocusingEvent {
            holds: false,
            value: f64::INFINITY,
            margin: f64::NEG_INFINITY,
            diagnostic: Some(format!("exponential weights overflow (log value {log_value:.1})")),
        });
    }
    let value = log_value.exp();
    Ok(FocusingEvent {
        holds: value < 4.0,
        value,
        margin: 4.0 - value,
        diagnostic: None,
    })
}

/// Observables of one trajectory, sampled in the v-representation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub parts: Vec<EnergyParts>,
    pub sigma_norm: Vec<f64>,
    pub l2_norm: Vec<f64>,
    /// (σ, |v(t)|_{W^{σ,2}}) columns.
    pub w_sigma_norms: Vec<(f64, Vec<f64>)>,
}

impl ObservableSeries {
    pub fn new(sigmas: &[f64]) -> Self {
        Self {
            w_sigma_norms: sigmas.iter().map(|&s| (s, Vec::new())).collect(),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples every observable of `v` at time `t`.
    pub fn record(&mut self, t: f64, v: &CoefField, frame: &WeightedFrame, lambda: f64) -> Result<()> {
        let mass = frame.mass(v)?;
        let parts = frame.energy(v, lambda)?;
        self.push(t, mass, parts, v);
        Ok(())
    }

    /// Samples a simulation state: mass and energy from v = u e^{−Y_N} on the
    /// nodes, norms from the projected coefficients `v`.
    pub fn record_state(&mut self, t: f64, u: &CoefField, v: &CoefField, frame: &WeightedFrame, lambda: f64) -> Result<()> {
        let (mass, parts) = frame.mass_energy_from_u(u, lambda)?;
        self.push(t, mass, parts, v);
        Ok(())
    }

    fn push(&mut self, t: f64, mass: f64, parts: EnergyParts, v: &CoefField) {
        self.times.push(t);
        self.mass.push(mass);
        self.energy.push(parts.total());
        self.parts.push(parts);
        self.sigma_norm.push(sigma_norm(v));
        self.l2_norm.push(v.l2_norm());
        for (s, col) in self.w_sigma_norms.iter_mut() {
            col.push(hilbert_norm(v, *s));
        }
    }

    pub fn append(&mut self, other: ObservableSeries) {
        self.times.extend(other.times);
        self.mass.extend(other.mass);
        self.energy.extend(other.energy);
        self.parts.extend(other.parts);
        self.sigma_norm.extend(other.sigma_norm);
        self.l2_norm.extend(other.l2_norm);
        for ((_, a), (_, b)) in self.w_sigma_norms.iter_mut().zip(other.w_sigma_norms) {
            a.extend(b);
        }
    }

    /// max_t |q(t) − q(0)| / |q(0)|.
    pub fn relative_drift(values: &[f64]) -> f64 {
        match values.first() {
            Some(&q0) if q0 != 0.0 => values.iter().fold(0.0_f64, |m, q| m.max((q - q0).abs())) / q0.abs(),
            _ => 0.0,
        }
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("t,mass,energy,energy_kinetic,energy_potY,energy_wick,energy_quartic,l2,sigma");
        for (s, _) in &self.w_sigma_norms {
            h.push_str(&format!(",w_sigma_{s}"));
        }
        h
    }

    /// One row per sample; decimal formatting is locale-independent.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        for i in 0..self.len() {
            let p = &self.parts[i];
            let mut row = vec![
                self.times[i],
                self.mass[i],
                self.energy[i],
                p.kinetic(),
                p.potential_y,
                p.wick,
                p.quartic,
                self.l2_norm[i],
                self.sigma_norm[i],
            ];
            row.extend(self.w_sigma_norms.iter().map(|(_, col)| col[i]));
            let line: Vec<String> = row.iter().map(|v| format!("{v:.15e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::MultiIndex;
    use crate::noise::{compute_wick, compute_y, compute_yn, sample_noise};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid() -> Arc<SpectralGrid> {
        SpectralGrid::shared(12, 24).unwrap()
    }

    #[test]
    fn mass_without_noise_is_l2() {
        let g = grid();
        let h0 = CoefField::delta(&g, MultiIndex::new(0, 0));
        let zero = CoefField::zeros(&g);
        assert!((transformed_mass(&h0, &zero).unwrap() - 1.0).abs() < 1e-12);
        let v = CoefField::from_fn(&g, |k| Complex64::new(1.0 / (1.0 + k.order() as f64), 0.3)).drop_top_shells(4);
        assert!((transformed_mass(&v, &zero).unwrap() - v.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn ground_state_energy() {
        let g = grid();
        let h0 = CoefField::delta(&g, MultiIndex::new(0, 0));
        let e = transformed_energy(&h0, &CoefField::zeros(&g), None, 0.0).unwrap();
        assert!((e.total() - 1.0).abs() < 1e-12);
        assert!((e.kinetic() - 0.5 * sigma_norm(&h0).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn defocusing_energy_exceeds_quadratic_part() {
        let g = grid();
        let v = CoefField::from_fn(&g, |k| Complex64::new(0.5_f64.powi(k.order() as i32), 0.1)).drop_top_shells(3);
        let e = transformed_energy(&v, &CoefField::zeros(&g), None, -1.0).unwrap();
        assert!(e.total() >= 0.5 * sigma_norm(&v).powi(2));
        assert!(e.quartic > 0.0);
    }

    #[test]
    fn mass_sandwich() {
        let g = grid();
        let noise = sample_noise(4, 0, 12).unwrap();
        let yn = compute_yn(&compute_y(&noise, &g).unwrap(), 8).unwrap();
        let v = CoefField::from_fn(&g, |k| Complex64::new(0.6_f64.powi(k.order() as i32), 0.0));
        let m = transformed_mass(&v, &yn).unwrap();
        let l2 = v.synthesize().integrate_abs_pow(2.0);
        let lo = crate::noise::exp_weight(&yn, -2.0).unwrap().max;
        let hi = crate::noise::exp_weight(&yn, 2.0).unwrap().max;
        assert!(l2 / lo <= m && m <= hi * l2);
        let w = compute_wick(&noise, &g, 8).unwrap();
        assert!(transformed_energy(&v, &yn, Some(&w), 1.0).unwrap().total().is_finite());
    }

    #[test]
    fn gagliardo_nirenberg_gaussian() {
        let g = grid();
        let h0 = CoefField::delta(&g, MultiIndex::new(0, 0));
        let r = check_gagliardo_nirenberg(&h0);
        // |h0|⁴_{L⁴} = 1/(2π) (quadrature of a non-polynomial integrand),
        // ½|h0|²|∇h0|² = ½ (exact)
        assert!((r.lhs - 1.0 / (2.0 * PI)).abs() < 1e-10);
        assert!((r.rhs - 0.5).abs() < 1e-13);
        assert!((r.ratio - 1.0 / PI).abs() < 1e-10 && r.pass);
        let z = check_gagliardo_nirenberg(&CoefField::zeros(&g));
        assert!(z.pass && z.ratio == 0.0);
    }

    #[test]
    fn brezis_gallouet_ground_state() {
        let g = grid();
        let h0 = CoefField::delta(&g, MultiIndex::new(0, 0));
        let sigma = 1.5;
        let r = check_brezis_gallouet(&h0, sigma).unwrap();
        let expect = PI.powf(-0.5) / (1.0 + 2f64.sqrt() * (1.0 + (1.0 + 2f64.powf(sigma / 2.0)).ln()).sqrt());
        // grid max sits at the nodes closest to the origin, not at 0 itself
        let node = g.nodes()[g.mq() / 2];
        let linf = (-node * node).exp() / PI.sqrt();
        assert!((r.linf - linf).abs() < 1e-14);
        assert!((r.constant - expect).abs() < 0.05 * expect);
        assert_eq!(check_brezis_gallouet(&CoefField::zeros(&g), sigma).unwrap().constant, 0.0);
        assert!(check_brezis_gallouet(&h0, 1.0).is_err());
    }

    #[test]
    fn focusing_predicate_flat_noise() {
        let g = grid();
        let y = CoefField::zeros(&g);
        let e = focusing_event_predicate(&y, 1.0, 1.0).unwrap();
        assert!(e.holds && (e.value - 1.0).abs() < 1e-15);
        let edge = focusing_event_predicate(&y, 1.0, 2.0).unwrap();
        assert!(!edge.holds && (edge.value - 4.0).abs() < 1e-12);
        let noisy = compute_y(&sample_noise(9, 0, 12).unwrap(), &g).unwrap();
        let a = focusing_event_predicate(&noisy, 1.0, 0.1).unwrap();
        let b = focusing_event_predicate(&noisy, 1.0, 0.2).unwrap();
        assert!((b.value / a.value - 4.0).abs() < 1e-12);
        assert!(focusing_event_predicate(&y, 0.0, 1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = grid();
        let mut s = ObservableSeries::new(&[1.6]);
        let frame = WeightedFrame::flat(&g);
        s.record(0.0, &CoefField::delta(&g, MultiIndex::new(0, 0)), &frame, 0.0).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,mass,energy,energy_kinetic,energy_potY,energy_wick,energy_quartic,l2,sigma,w_sigma_1.6"
        );
        assert_eq!(lines.next().unwrap().split(',').count(), 10);
    }
}
