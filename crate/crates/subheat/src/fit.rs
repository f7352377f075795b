//! Ordinary least squares on log-log data.
//!
//! Every scaling claim in this crate reduces to "this quantity behaves like
//! a power of t (or r) on the resolved window", so slope fits are the common
//! currency of the analysis layer.

use serde::Serialize;

use crate::error::{Error, Result};

/// An OLS line fit through log-log data.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    /// Abscissae (already logarithms).
    pub log_x: Vec<f64>,
    /// Ordinates (already logarithms).
    pub log_y: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Window in original (non-log) units.
    pub window: (f64, f64),
}

/// Least-squares line through `(log_x, log_y)`; requires at least 5 points
/// for scaling fits (use [`fit_loglog`] directly for shorter diagnostics).
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() < 5 {
        return Err(Error::InvalidGrid(format!(
            "slope fits need at least 5 points, got {}",
            xs.len()
        )));
    }
    let log_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let log_y: Vec<f64> = ys
        .iter()
        .map(|&y| {
            if y > 0.0 && y.is_finite() {
                Ok(y.ln())
            } else {
                Err(Error::InvalidGrid(format!(
                    "log-log fit requires positive finite data, got {y}"
                )))
            }
        })
        .collect::<Result<_>>()?;
    let line = fit_loglog(&log_x, &log_y)?;
    Ok(SlopeFit {
        window: (xs[0], xs[xs.len() - 1]),
        log_x,
        log_y,
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
    })
}

pub(crate) struct Line {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub(crate) fn fit_loglog(x: &[f64], y: &[f64]) -> Result<Line> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidGrid(
            "need at least 2 points to fit a line".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidGrid(
            "degenerate abscissae in line fit".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(Line {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let xs: Vec<f64> = (1..=8).map(|k| 0.01 * 2.0f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.5 * x.powf(-1.25)).collect();
        let fit = fit_slope(&xs, &ys).unwrap();
        assert!((fit.slope + 1.25).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(fit_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn nonpositive_data_rejected() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [1.0, 2.0, 0.0, 4.0, 5.0];
        assert!(fit_slope(&xs, &ys).is_err());
    }
}
