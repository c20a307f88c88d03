//! Windowed least-squares fits in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidParams("x and y lengths differ".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParams("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(xi, yi)| (yi - slope * xi - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok((slope, intercept, r2))
}

/// Fits `ln|u| = slope·ln r + intercept` over samples with `r` in `window`.
pub fn loglog_fit(samples: &[(f64, f64)], window: (f64, f64)) -> Result<FitResult> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidParams(format!("fit window ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    let inside: Vec<(f64, f64)> = samples.iter().copied().filter(|&(r, _)| r >= lo && r <= hi).collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: inside.len() });
    }
    let positive = inside.iter().all(|&(_, u)| u > 0.0);
    let negative = inside.iter().all(|&(_, u)| u < 0.0);
    if !(positive || negative) {
        return Err(Error::SignChange);
    }
    let x: Vec<f64> = inside.iter().map(|&(r, _)| r.ln()).collect();
    let y: Vec<f64> = inside.iter().map(|&(_, u)| u.abs().ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&x, &y)?;
    Ok(FitResult { slope, intercept, r_squared, window })
}
