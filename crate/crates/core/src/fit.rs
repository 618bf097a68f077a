//! Ordinary least squares for exponent estimation in log–log coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {0} is not finite")]
    NonFinite(usize),
    #[error("x values are degenerate (zero variance)")]
    DegenerateX,
}

/// A fitted line through `(x, y)` points, with `x` and `y` already in log
/// coordinates, so `exponent` is the power-law slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares line through the given points.
pub fn fit_line(points: &[(f64, f64)]) -> Result<SlopeFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    for (i, &(x, y)) in points.iter().enumerate() {
        if !(x.is_finite() && y.is_finite()) {
            return Err(FitError::NonFinite(i));
        }
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(FitError::DegenerateX);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + exponent * p.0)).powi(2))
        .sum();
    Ok(SlopeFit {
        exponent,
        intercept,
        rms_residual: (ss_res / n).sqrt(),
        points: points.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 2.0 - 3.0 * i as f64)).collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.exponent + 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
        assert_eq!(fit.points.len(), 5);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            fit_line(&[(0.0, 0.0), (1.0, 1.0)]),
            Err(FitError::TooFewPoints(2))
        );
        assert_eq!(
            fit_line(&[(0.0, 0.0), (1.0, f64::NAN), (2.0, 0.0)]),
            Err(FitError::NonFinite(1))
        );
        assert_eq!(
            fit_line(&[(1.0, 0.0), (1.0, 1.0), (1.0, 2.0)]),
            Err(FitError::DegenerateX)
        );
    }

    #[test]
    fn noisy_slope_close() {
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let x = i as f64 * 0.5;
                (x, 1.0 + 0.75 * x + if i % 2 == 0 { 0.01 } else { -0.01 })
            })
            .collect();
        let fit = fit_line(&pts).unwrap();
        assert!((fit.exponent - 0.75).abs() < 0.01);
        assert!(fit.rms_residual <= 0.011);
    }
}
