//! Normalized Hermite functions ψ_n, the L²(ℝ) eigenfunctions of -d²/dx² + x².

use std::f64::consts::PI;

const RESCALE_AT: f64 = 1e200;
const LN_RESCALE: f64 = 460.517_018_598_809_1; // ln(1e200)

/// Walks the three-term recurrence
/// ψ_{n+1} = x √(2/(n+1)) ψ_n − √(n/(n+1)) ψ_{n−1}
/// while carrying a separate logarithmic scale, so that neither the
/// Gaussian seed e^{−x²/2} underflows nor the growing tail overflows.
#[derive(Clone, Debug)]
struct ScaledRecurrence {
    x: f64,
    n: usize,
    prev: f64,
    cur: f64,
    log_scale: f64,
}

impl ScaledRecurrence {
    fn new(x: f64) -> Self {
        Self {
            x,
            n: 0,
            prev: 0.0,
            cur: 1.0,
            log_scale: -0.5 * x * x - 0.25 * PI.ln(),
        }
    }

    /// Current ψ_n(x), materialized from the scaled representation.
    fn value(&self) -> f64 {
        scaled_to_f64(self.cur, self.log_scale)
    }

    fn advance(&mut self) {
        let n = self.n as f64;
        let next = self.x * (2.0 / (n + 1.0)).sqrt() * self.cur - (n / (n + 1.0)).sqrt() * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        if self.cur.abs() > RESCALE_AT {
            self.prev /= RESCALE_AT;
            self.cur /= RESCALE_AT;
            self.log_scale += LN_RESCALE;
        }
    }
}

fn scaled_to_f64(mantissa: f64, log_scale: f64) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    mantissa.signum() * (mantissa.abs().ln() + log_scale).exp()
}

/// ψ_n(x), evaluated by the stable normalized recurrence.
pub fn hermite_1d(n: usize, x: f64) -> f64 {
    let mut rec = ScaledRecurrence::new(x);
    for _ in 0..n {
        rec.advance();
    }
    rec.value()
}

/// ψ_0(x), …, ψ_{count−1}(x).
pub fn hermite_row(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut rec = ScaledRecurrence::new(x);
    for n in 0..count {
        if n > 0 {
            rec.advance();
        }
        out.push(rec.value());
    }
    out
}

/// Derivatives ψ'_0(x), …, ψ'_{count−1}(x) via
/// ψ'_n = √(n/2) ψ_{n−1} − √((n+1)/2) ψ_{n+1}.
pub fn hermite_derivative_row(x: f64, count: usize) -> Vec<f64> {
    let psi = hermite_row(x, count + 1);
    (0..count)
        .map(|n| {
            let lower = if n > 0 { (n as f64 / 2.0).sqrt() * psi[n - 1] } else { 0.0 };
            lower - ((n as f64 + 1.0) / 2.0).sqrt() * psi[n + 1]
        })
        .collect()
}

/// Ratio ψ_m(x) / ψ'_m(x) for m ≥ 1, independent of the running scale.
/// Used for Newton polishing of quadrature nodes.
pub(crate) fn newton_ratio(m: usize, x: f64) -> f64 {
    let mut rec = ScaledRecurrence::new(x);
    for _ in 0..m {
        rec.advance();
    }
    // ψ'_m = √(2m) ψ_{m−1} − x ψ_m
    let deriv = (2.0 * m as f64).sqrt() * rec.prev - x * rec.cur;
    rec.cur / deriv
}

/// Σ_{n<count} ψ_n(x)², the Christoffel sum of the Hermite functions.
pub(crate) fn christoffel_sum(x: f64, count: usize) -> f64 {
    let mut rec = ScaledRecurrence::new(x);
    let mut sum = 0.0;
    for n in 0..count {
        if n > 0 {
            rec.advance();
        }
        let v = rec.value();
        sum += v * v;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_at_origin() {
        assert!((hermite_1d(0, 0.0) - 0.751_125_544_464_942_5).abs() < 1e-15);
        assert_eq!(hermite_1d(1, 0.0), 0.0);
    }

    #[test]
    fn parity() {
        for n in 0..20 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let a = hermite_1d(n, 1.7);
            let b = hermite_1d(n, -1.7);
            assert!((a - sign * b).abs() < 1e-14);
        }
    }

    #[test]
    fn far_tail_is_finite_and_tiny() {
        let v = hermite_1d(10, 36.0);
        assert!(v.is_finite());
        assert!(v > 0.0 && v < 1e-250);
        assert_eq!(hermite_1d(3, 80.0), 0.0);
    }

    #[test]
    fn derivative_of_ground_state() {
        let x = 0.83;
        let d = hermite_derivative_row(x, 1)[0];
        assert!((d + x * hermite_1d(0, x)).abs() < 1e-15);
    }
}
