use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use wickgp_core::hermite::{hermite_row, Axis, CoefField, Ladder, MultiIndex, SpectralGrid};

fn grid(k: usize, mq: usize) -> Arc<SpectralGrid> {
    SpectralGrid::shared(k, mq).unwrap()
}

fn field(g: &Arc<SpectralGrid>, coefs: &[(f64, f64)]) -> CoefField {
    let k = g.k();
    CoefField::from_fn(g, |m| {
        let (re, im) = coefs[(m.k1 * k + m.k2) % coefs.len()];
        Complex64::new(re, im) / (1.0 + m.order() as f64)
    })
}

fn inner(a: &CoefField, b: &CoefField) -> Complex64 {
    a.coef().iter().zip(b.coef()).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn orthonormal_by_trapezoid() {
    // trapezoid on [−14, 14] is spectrally accurate for these decaying functions
    let h = 0.02;
    let n = (28.0 / h) as usize;
    let mut gram = vec![vec![0.0; 32]; 32];
    for i in 0..=n {
        let x = -14.0 + i as f64 * h;
        let row = hermite_row(x, 32);
        for a in 0..32 {
            for b in 0..32 {
                gram[a][b] += h * row[a] * row[b];
            }
        }
    }
    for a in 0..32 {
        for b in 0..32 {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((gram[a][b] - want).abs() < 1e-12, "({a},{b}) {}", gram[a][b]);
        }
    }
}

#[test]
fn orthonormal_on_quadrature_grid() {
    let g = grid(32, 64);
    let (phi, w) = (g.basis(), g.weights());
    for a in 0..32 {
        for b in 0..32 {
            let s: f64 = (0..64).map(|i| w[i] * phi[[i, a]] * phi[[i, b]]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 1e-12, "({a},{b}) {s}");
        }
    }
}

#[test]
fn two_dimensional_products() {
    let g = grid(8, 16);
    for j in [MultiIndex::new(0, 0), MultiIndex::new(3, 1), MultiIndex::new(7, 7)] {
        for k in [MultiIndex::new(0, 0), MultiIndex::new(3, 1), MultiIndex::new(2, 5)] {
            let p = CoefField::delta(&g, j).synthesize().re() * CoefField::delta(&g, k).synthesize().re();
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((g.integrate(&p) - want).abs() < 1e-12);
        }
    }
}

#[test]
fn eigen_relation() {
    // (−∂₁² − ∂₂² + x₁² + x₂²) h_k = λ_k² h_k, two shells of headroom
    let g = grid(12, 24);
    let c = field(&g, &[(1.0, -0.5), (0.3, 0.2), (-0.7, 0.1)]).drop_top_shells(2);
    let mut lhs = CoefField::zeros(&g);
    for ax in Axis::BOTH {
        let dd = c.derivative(ax).derivative(ax);
        let xx = c.position(ax).position(ax);
        lhs = lhs.sub(&dd).unwrap().add(&xx).unwrap();
    }
    let want = c.apply_multiplier(|m| m.eigenvalue());
    assert!(lhs.max_abs_diff(&want) < 1e-12);
}

#[test]
fn spectral_derivative_matches_nodal() {
    let g = grid(16, 32);
    let c = field(&g, &[(0.4, 0.0), (-1.0, 0.5), (0.2, 0.9), (0.0, -0.3)]).drop_top_shells(1);
    for ax in Axis::BOTH {
        let a = c.derivative(ax).synthesize();
        let b = c.synthesize_derivative(ax);
        let diff = (a.values() - b.values()).mapv(|z| z.norm()).fold(0.0f64, |m, v| m.max(*v));
        assert!(diff < 1e-12, "{diff}");
    }
}

fn coef_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(coefs in coef_strategy()) {
        let g = grid(10, 20);
        let c = field(&g, &coefs);
        let nodal = c.synthesize().integrate_abs_pow(2.0);
        prop_assert!((nodal - c.norm_sqr()).abs() < 1e-12 * (1.0 + c.norm_sqr()));
        prop_assert!(c.synthesize().analyze().max_abs_diff(&c) < 1e-12);
    }

    #[test]
    fn ladder_adjoint(f in coef_strategy(), h in coef_strategy(), axis in prop::bool::ANY) {
        let g = grid(10, 20);
        let ax = if axis { Axis::X1 } else { Axis::X2 };
        let a = field(&g, &f).drop_top_shells(1);
        let b = field(&g, &h).drop_top_shells(1);
        let lhs = inner(&a.ladder(Ladder::Lower(ax)), &b);
        let rhs = inner(&a, &b.ladder(Ladder::Raise(ax)));
        prop_assert!((lhs - rhs).norm() < 1e-12);
        // ∂ is skew, x is symmetric
        let d = inner(&a.derivative(ax), &b) + inner(&a, &b.derivative(ax));
        let x = inner(&a.position(ax), &b) - inner(&a, &b.position(ax));
        prop_assert!(d.norm() < 1e-12 && x.norm() < 1e-12);
    }
}
