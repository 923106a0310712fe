use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::Array2;

use super::functions::{christoffel_sum, hermite_derivative_row, hermite_row, newton_ratio};
use crate::error::{Error, Result};

/// Gauss–Hermite nodes and modified weights on one axis, plus the tabulated
/// basis ψ_n(x_i) for the retained modes n < K.
///
/// Modified weights integrate against Lebesgue measure: ∫ f dx ≈ Σ w̃_i f(x_i)
/// for Gaussian-decaying f. The 2D grid is the tensor product of this axis
/// with itself.
#[derive(Debug)]
pub struct SpectralGrid {
    k: usize,
    mq: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Mq × K, entry (i, n) = ψ_n(x_i).
    basis: Array2<f64>,
    /// Mq × K, entry (i, n) = w̃_i ψ_n(x_i).
    weighted_basis: Array2<f64>,
    /// Mq × K, entry (i, n) = ψ'_n(x_i).
    basis_derivative: Array2<f64>,
}

/// Gauss–Hermite rule of order `mq` with modified weights.
///
/// Nodes are the eigenvalues of the Jacobi matrix (zero diagonal,
/// off-diagonal √(n/2)), polished by Newton on ψ_mq. The eigenvector of the
/// Jacobi matrix at node x is proportional to (ψ_0(x), …, ψ_{mq−1}(x)), so the
/// Golub–Welsch weight w_i = √π v_{0i}² becomes w̃_i = w_i e^{x_i²} =
/// 1 / Σ_n ψ_n(x_i)², evaluated with the log-scaled recurrence.
pub fn gauss_hermite(mq: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(mq >= 1);
    let jacobi = DMatrix::from_fn(mq, mq, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));

    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let step = newton_ratio(mq, *x);
            if !step.is_finite() {
                break;
            }
            *x -= step;
            if step.abs() < 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    // exact symmetry
    for i in 0..mq / 2 {
        let j = mq - 1 - i;
        let half = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -half;
        nodes[j] = half;
    }
    if mq % 2 == 1 {
        nodes[mq / 2] = 0.0;
    }

    let weights = nodes.iter().map(|&x| 1.0 / christoffel_sum(x, mq)).collect();
    (nodes, weights)
}

impl SpectralGrid {
    /// Grid for the K×K mode square with `mq` quadrature points per axis.
    pub fn new(k: usize, mq: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::EmptyBasis);
        }
        if mq < 2 * k {
            return Err(Error::UnderResolvedGrid { k, mq });
        }
        let (nodes, weights) = gauss_hermite(mq);
        let mut basis = Array2::zeros((mq, k));
        let mut weighted_basis = Array2::zeros((mq, k));
        let mut basis_derivative = Array2::zeros((mq, k));
        for (i, (&x, &w)) in nodes.iter().zip(&weights).enumerate() {
            let row = hermite_row(x, k);
            let drow = hermite_derivative_row(x, k);
            for n in 0..k {
                basis[[i, n]] = row[n];
                weighted_basis[[i, n]] = w * row[n];
                basis_derivative[[i, n]] = drow[n];
            }
        }
        Ok(Self {
            k,
            mq,
            nodes,
            weights,
            basis,
            weighted_basis,
            basis_derivative,
        })
    }

    pub fn shared(k: usize, mq: usize) -> Result<Arc<Self>> {
        Self::new(k, mq).map(Arc::new)
    }

    /// Basis cutoff: modes 0 ≤ k1, k2 < K.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Quadrature points per axis.
    pub fn mq(&self) -> usize {
        self.mq
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    pub fn weighted_basis(&self) -> &Array2<f64> {
        &self.weighted_basis
    }

    pub fn basis_derivative(&self) -> &Array2<f64> {
        &self.basis_derivative
    }

    /// Two grids are interchangeable iff they share (K, Mq).
    pub fn same_as(&self, other: &SpectralGrid) -> bool {
        self.k == other.k && self.mq == other.mq
    }

    /// Σ_ij w̃_i w̃_j f(x_i, x_j).
    pub fn integrate(&self, values: &Array2<f64>) -> f64 {
        let mut total = 0.0;
        for (i, wi) in self.weights.iter().enumerate() {
            let mut row = 0.0;
            for (j, wj) in self.weights.iter().enumerate() {
                row += wj * values[[i, j]];
            }
            total += wi * row;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::hermite_1d;

    #[test]
    fn two_point_rule() {
        let g = SpectralGrid::new(1, 2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.nodes()[0] + r).abs() < 1e-15);
        assert!((g.nodes()[1] - r).abs() < 1e-15);
        let s: f64 = g
            .nodes()
            .iter()
            .zip(g.weights())
            .map(|(&x, &w)| w * hermite_1d(0, x).powi(2))
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_under_resolved() {
        assert!(matches!(
            SpectralGrid::new(8, 15),
            Err(Error::UnderResolvedGrid { k: 8, mq: 15 })
        ));
        assert!(matches!(SpectralGrid::new(0, 4), Err(Error::EmptyBasis)));
    }

    #[test]
    fn large_rule_weights_positive_and_normalized() {
        for mq in [64, 192, 400] {
            let (x, w) = gauss_hermite(mq);
            assert!(w.iter().all(|&v| v.is_finite() && v > 0.0));
            let s: f64 = x.iter().zip(&w).map(|(&x, &w)| w * hermite_1d(0, x).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12, "mq={mq} s={s}");
            for i in 0..mq {
                assert_eq!(x[i], -x[mq - 1 - i]);
            }
        }
    }
}
