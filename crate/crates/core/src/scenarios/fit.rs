//! Least-squares fits of counting curves.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals (the larger of the
    /// classical and the HC3 estimate).
    pub stderr: f64,
    pub points: usize,
}

impl LineFit {
    /// Half-width of the two-sided `level` confidence interval for the slope.
    pub fn confidence_half_width(&self, level: f64) -> f64 {
        let dof = (self.points - 2) as f64;
        let t = StudentsT::new(0.0, 1.0, dof)
            .map(|d| d.inverse_cdf(0.5 + level / 2.0))
            .unwrap_or(f64::INFINITY);
        t * self.stderr
    }
}

fn line_fit(pts: &[(f64, f64)]) -> LineFit {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    // classical and leverage-corrected (HC3) estimates; the larger is kept
    // because count noise is far from homoscedastic on a log scale
    let stderr = if pts.len() > 2 {
        let classical = ssr / (n - 2.0) / sxx;
        let hc3: f64 = pts
            .iter()
            .map(|p| {
                let dx = p.0 - mx;
                let lev = 1.0 / n + dx * dx / sxx;
                let r = (p.1 - intercept - slope * p.0) / (1.0 - lev).max(1e-12);
                dx * dx * r * r
            })
            .sum::<f64>()
            / (sxx * sxx);
        classical.max(hc3).sqrt()
    } else {
        f64::INFINITY
    };
    LineFit {
        slope,
        intercept,
        stderr,
        points: pts.len(),
    }
}

/// Slope of `log N` against `log|E|`; points with `N ≤ 0` are unusable.
pub fn fit_power(energies: &[f64], counts: &[f64]) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> = energies
        .iter()
        .zip(counts)
        .filter(|(e, n)| **n > 0.0 && **e != 0.0)
        .map(|(e, n)| (e.abs().ln(), n.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            need: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    Ok(line_fit(&pts))
}

/// Slope ("level") of `N` against `|ln|E||`.
pub fn fit_log(energies: &[f64], counts: &[f64]) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> = energies
        .iter()
        .zip(counts)
        .filter(|(e, n)| n.is_finite() && **e != 0.0 && e.abs() != 1.0)
        .map(|(e, n)| (e.abs().ln().abs(), *n))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            need: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    Ok(line_fit(&pts))
}
