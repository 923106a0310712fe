//! Spectral operators acting on Hermite coefficients.

use num_complex::Complex64;

use super::field::{CoefField, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X1, Axis::X2];

    fn component(self, k: MultiIndex) -> usize {
        match self {
            Axis::X1 => k.k1,
            Axis::X2 => k.k2,
        }
    }

    fn shift(self, k: MultiIndex, delta: isize) -> Option<MultiIndex> {
        let (a, b) = match self {
            Axis::X1 => (k.k1.checked_add_signed(delta)?, k.k2),
            Axis::X2 => (k.k1, k.k2.checked_add_signed(delta)?),
        };
        Some(MultiIndex::new(a, b))
    }
}

/// The ladder operators A_i = ∂_i + x_i and A_{−i} = −∂_i + x_i.
///
/// `Lower(i)` is A_i (A_i h_k = √(2k_i) h_{k−e_i}); `Raise(i)` is A_{−i}
/// (A_{−i} h_k = √(2(k_i+1)) h_{k+e_i}). Content pushed past the cutoff K by
/// `Raise` is dropped, so all operators stay endomorphisms of the K×K space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Lower(Axis),
    Raise(Axis),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpatialOp {
    /// ∂_i = (A_i − A_{−i}) / 2
    Derivative(Axis),
    /// x_i · = (A_i + A_{−i}) / 2
    Position(Axis),
}

impl CoefField {
    /// (m·c)_k = m(k) c_k.
    pub fn apply_multiplier(&self, m: impl Fn(MultiIndex) -> f64) -> CoefField {
        self.map_coef(|k, c| c * m(k))
    }

    pub fn apply_complex_multiplier(&self, m: impl Fn(MultiIndex) -> Complex64) -> CoefField {
        self.map_coef(|k, c| c * m(k))
    }

    /// (−H)^α, i.e. multiplication by λ_k^{2α}.
    pub fn hermite_power(&self, alpha: f64) -> CoefField {
        if alpha == 0.0 {
            return self.clone();
        }
        self.apply_multiplier(|k| k.eigenvalue().powf(alpha))
    }

    pub fn ladder(&self, dir: Ladder) -> CoefField {
        let kmax = self.grid().k();
        let src = self.coef();
        match dir {
            Ladder::Lower(axis) => self.map_coef(|k, _| match axis.shift(k, 1) {
                Some(up) if axis.component(up) < kmax => {
                    src[[up.k1, up.k2]] * (2.0 * axis.component(up) as f64).sqrt()
                }
                _ => Complex64::new(0.0, 0.0),
            }),
            Ladder::Raise(axis) => self.map_coef(|k, _| match axis.shift(k, -1) {
                Some(down) => src[[down.k1, down.k2]] * (2.0 * axis.component(k) as f64).sqrt(),
                None => Complex64::new(0.0, 0.0),
            }),
        }
    }

    /// Spectral ∂_i or x_i· via the ladder decomposition.
    pub fn spatial(&self, op: SpatialOp) -> CoefField {
        let kmax = self.grid().k();
        let src = self.coef();
        let (axis, sign) = match op {
            SpatialOp::Derivative(a) => (a, -1.0),
            SpatialOp::Position(a) => (a, 1.0),
        };
        // (A_i ± A_{−i}) / 2 folded into one pass
        self.map_coef(|k, _| {
            let ki = axis.component(k);
            let mut acc = Complex64::new(0.0, 0.0);
            if ki + 1 < kmax {
                let up = axis.shift(k, 1).unwrap();
                acc += src[[up.k1, up.k2]] * ((ki + 1) as f64 / 2.0).sqrt();
            }
            if ki > 0 {
                let down = axis.shift(k, -1).unwrap();
                acc += src[[down.k1, down.k2]] * (sign * (ki as f64 / 2.0).sqrt());
            }
            acc
        })
    }

    pub fn derivative(&self, axis: Axis) -> CoefField {
        self.spatial(SpatialOp::Derivative(axis))
    }

    pub fn position(&self, axis: Axis) -> CoefField {
        self.spatial(SpatialOp::Position(axis))
    }

    /// Zeroes every mode with k1 ≥ K − shells or k2 ≥ K − shells.
    pub fn drop_top_shells(&self, shells: usize) -> CoefField {
        let keep = self.grid().k().saturating_sub(shells);
        self.map_coef(|k, c| {
            if k.k1 < keep && k.k2 < keep {
                c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}
