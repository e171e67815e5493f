//! Least-squares scaling fits.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// `ln y = slope · ln x + intercept`, for power laws.
    LogLog,
    /// `y = slope · x + intercept`.
    Linear,
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitKind::LogLog => "log-log",
            FitKind::Linear => "linear",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub kind: FitKind,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in the fitted space.
    pub residual: f64,
    pub r_squared: f64,
}

impl fmt::Display for Fit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fit: slope {:.6}, intercept {:.6}, rms residual {:.3e}, R² {:.6}",
            self.kind, self.slope, self.intercept, self.residual, self.r_squared
        )
    }
}

pub fn scaling_fit(points: &[(f64, f64)], kind: FitKind) -> Result<Fit> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    let pts: Vec<(f64, f64)> = match kind {
        FitKind::Linear => points.to_vec(),
        FitKind::LogLog => points
            .iter()
            .map(|&(x, y)| {
                if x > 0.0 && y > 0.0 {
                    Ok((x.ln(), y.ln()))
                } else {
                    Err(Error::Fit(format!("log-log fit needs positive values, got ({x}, {y})")))
                }
            })
            .collect::<Result<_>>()?,
    };
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all sizes are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    Ok(Fit {
        kind,
        slope,
        intercept,
        residual: (ssr / n).sqrt(),
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_law() {
        let f = scaling_fit(&[(1.0, 1.0), (2.0, 4.0), (3.0, 9.0)], FitKind::LogLog).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn exact_line() {
        let f = scaling_fit(&[(2.0, 48.0), (3.0, 52.0), (4.0, 56.0)], FitKind::Linear).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-12);
        assert!((f.intercept - 40.0).abs() < 1e-12);
        assert!(f.residual < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_input_rejected() {
        assert!(scaling_fit(&[(1.0, 1.0)], FitKind::Linear).is_err());
        assert!(scaling_fit(&[(1.0, 0.0), (2.0, 1.0)], FitKind::LogLog).is_err());
        assert!(scaling_fit(&[(1.0, 1.0), (1.0, 2.0)], FitKind::Linear).is_err());
    }
}
