//! Hermite–Sobolev norms W^{s,q}, the smooth spectral truncation
//! S_N = χ(−H/λ_N²) and the norm inequalities built on them.

use crate::error::{Error, Result};
use crate::hermite::{level_eigenvalue, CoefField, MultiIndex};

/// Regularity s and integrability q ∈ {2} ∪ (2, ∞].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevIndex {
    pub s: f64,
    pub q: f64,
}

impl SobolevIndex {
    pub fn new(s: f64, q: f64) -> Result<Self> {
        if !(q >= 2.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Sobolev index needs finite s and q in [2, inf], got s={s}, q={q}"
            )));
        }
        Ok(Self { s, q })
    }

    pub const fn hilbert(s: f64) -> Self {
        Self { s, q: 2.0 }
    }

    /// q = 2 norms are exact on coefficients; the rest are grid quadratures.
    pub fn is_exact(&self) -> bool {
        self.q == 2.0
    }
}

/// A norm value together with whether it is exact or a grid approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormValue {
    pub value: f64,
    pub approximate: bool,
}

/// |c|_{W^{s,q}} = |(−H)^{s/2} c|_{L^q}.
pub fn sobolev_norm(c: &CoefField, idx: SobolevIndex) -> NormValue {
    if idx.is_exact() {
        return NormValue {
            value: hilbert_norm(c, idx.s),
            approximate: false,
        };
    }
    let value = c.hermite_power(idx.s / 2.0).synthesize().lq_norm(idx.q);
    NormValue {
        value,
        approximate: true,
    }
}

/// (Σ λ_k^{2s} |c_k|²)^{1/2}.
pub fn hilbert_norm(c: &CoefField, s: f64) -> f64 {
    let mut acc = 0.0;
    for ((a, b), z) in c.coef().indexed_iter() {
        let n2 = z.norm_sqr();
        if n2 == 0.0 {
            continue;
        }
        let lam2 = MultiIndex::new(a, b).eigenvalue();
        acc += if s == 0.0 { n2 } else { lam2.powf(s) * n2 };
    }
    acc.sqrt()
}

/// Smooth bump: 1 on [0, 1/2], 0 on [1, ∞), C^∞ transition in between
/// built from f(t) = e^{−1/t}. Even in r.
pub fn cutoff(r: f64) -> f64 {
    let r = r.abs();
    if r <= 0.5 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = f(1.0 - r);
    let b = f(r - 0.5);
    a / (a + b)
}

/// χ_{k,N} = χ(λ_k² / λ_N²).
pub fn truncation_weight(k: MultiIndex, n: usize) -> f64 {
    cutoff(k.eigenvalue() / level_eigenvalue(n))
}

/// S_N c.
pub fn smooth_truncate(c: &CoefField, n: usize) -> CoefField {
    c.apply_multiplier(|k| truncation_weight(k, n))
}

/// Ratios for the two truncation estimates (C = 1, p = 2):
/// `low`  = |S_N c|_{W^{α+s,2}} / (λ_N^s |c|_{W^{α,2}})
/// `high` = |c − S_N c|_{W^{α,2}} / (λ_{⌊N/2⌋}^{−s} |c|_{W^{α+s,2}})
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    pub low: f64,
    pub high: f64,
    /// c = 0: both sides vanish, nothing to check.
    pub vacuous: bool,
}

impl TruncationReport {
    pub fn passes(&self) -> bool {
        self.vacuous || (self.low <= 1.0 + 1e-12 && self.high <= 1.0 + 1e-12)
    }
}

pub fn check_truncation_estimates(c: &CoefField, n: usize, s: f64, alpha: f64) -> Result<TruncationReport> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("truncation estimate needs s > 0, got {s}")));
    }
    if c.is_zero() {
        return Ok(TruncationReport {
            low: 0.0,
            high: 0.0,
            vacuous: true,
        });
    }
    let lam_n = level_eigenvalue(n).sqrt();
    let lam_half = level_eigenvalue(n / 2).sqrt();
    let sc = smooth_truncate(c, n);
    let low = hilbert_norm(&sc, alpha + s) / (lam_n.powf(s) * hilbert_norm(c, alpha));
    let gap = c.sub(&sc)?;
    let high = hilbert_norm(&gap, alpha) / (lam_half.powf(-s) * hilbert_norm(c, alpha + s));
    Ok(TruncationReport {
        low,
        high,
        vacuous: false,
    })
}

/// Real bracket ⟨T, φ⟩ = Re ∫ T φ̄ in Parseval form.
pub fn duality_bracket(t: &CoefField, phi: &CoefField) -> Result<f64> {
    if !t.grid().same_as(phi.grid()) {
        return Err(Error::GridMismatch);
    }
    Ok(t.coef()
        .iter()
        .zip(phi.coef().iter())
        .map(|(a, b)| (a * b.conj()).re)
        .sum())
}

/// |f|_{W^{σ,2}} / (|f|_{W^{2,2}}^{σ/2} |f|_{L²}^{1−σ/2}); at most 1 by Hölder.
/// Returns `None` for the zero field.
pub fn interpolation_check(c: &CoefField, sigma: f64) -> Result<Option<f64>> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::InvalidArgument(format!("interpolation needs 0 < sigma < 2, got {sigma}")));
    }
    if c.is_zero() {
        return Ok(None);
    }
    let mid = hilbert_norm(c, sigma);
    let top = hilbert_norm(c, 2.0);
    let base = c.l2_norm();
    Ok(Some(mid / (top.powf(sigma / 2.0) * base.powf(1.0 - sigma / 2.0))))
}
