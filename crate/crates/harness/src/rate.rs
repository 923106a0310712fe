//! Log-log least squares for convergence and growth rates.

use serde::Serialize;

use crate::error::HarnessError;

/// Ordinary least squares of ln(value) against ln(λ_N).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals in log space.
    pub residual: f64,
    /// Standard error of the slope (0 for an exact fit or 3 points on a line).
    pub slope_stderr: f64,
    pub points: usize,
}

/// Fits ln(value) = intercept + slope · ln(λ) over `(λ, value)` pairs.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, HarnessError> {
    if points.len() < 3 {
        return Err(HarnessError::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(l, v)) = points.iter().find(|(l, v)| !(*v > 0.0) || !(*l > 0.0) || !v.is_finite()) {
        return Err(HarnessError::Fit(format!("non-positive or non-finite point ({l}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|(l, _)| l.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let residual = (sse / n).sqrt();
    let slope_stderr = if points.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateFit {
        xs,
        ys,
        slope,
        intercept,
        residual,
        slope_stderr,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambdas() -> Vec<f64> {
        [4usize, 8, 12, 16, 24, 32, 48, 64]
            .iter()
            .map(|&n| (2.0 * n as f64 + 2.0).sqrt())
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = lambdas().into_iter().map(|l| (l, l.powf(-0.5))).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn constant_values() {
        let pts: Vec<_> = lambdas().into_iter().map(|l| (l, 3.0)).collect();
        let f = fit_rate(&pts).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        // fixed ±1% multiplicative perturbations
        let noise = [0.01, -0.008, 0.004, -0.01, 0.009, -0.003, 0.006, -0.01];
        let pts: Vec<_> = lambdas()
            .into_iter()
            .zip(noise)
            .map(|(l, e)| (l, l.powf(-0.5) * (1.0 + e)))
            .collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 0.05, "slope {}", f.slope);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_rate(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)]).is_err());
    }
}
