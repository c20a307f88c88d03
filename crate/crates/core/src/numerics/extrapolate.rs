//! Sequence acceleration for limits sampled along geometric sequences.

use crate::error::{Error, Result};

/// Limit estimate and a spread-based error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limit {
    pub value: f64,
    pub error: f64,
}

/// One sweep of Aitken's Δ² process. Terms with a vanishing second difference
/// are passed through unchanged.
pub fn aitken(seq: &[f64]) -> Vec<f64> {
    seq.windows(3)
        .map(|w| {
            let d2 = w[2] - 2.0 * w[1] + w[0];
            if d2.abs() <= 1e-14 * (w[0].abs() + w[1].abs() + w[2].abs()) {
                w[2]
            } else {
                w[2] - (w[2] - w[1]).powi(2) / d2
            }
        })
        .collect()
}

/// Extrapolates the limit of a sequence converging geometrically.
///
/// The error is the spread of the last three accelerated terms, or of the last
/// three raw terms when fewer than five are available.
pub fn extrapolate_limit(seq: &[f64]) -> Result<Limit> {
    if seq.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, found: seq.len() });
    }
    if seq.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { at: f64::NAN });
    }
    let acc = aitken(seq);
    let tail: &[f64] = if acc.len() >= 3 { &acc[acc.len() - 3..] } else { &seq[seq.len() - 3..] };
    let value = *acc.last().unwrap();
    let spread = tail.iter().fold(0.0f64, |m, v| m.max((v - value).abs()));
    Ok(Limit { value, error: spread })
}

/// Richardson extrapolation of a sequence `a_i = L + Σ_j c_j θ^{j i}`.
///
/// Each of the `depth` levels removes one mode `θ^j`. The error is the change
/// produced by the last level.
pub fn richardson_limit(seq: &[f64], theta: f64, depth: usize) -> Result<Limit> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParams(format!("Richardson ratio {theta} must lie in (0, 1)")));
    }
    if seq.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: seq.len() });
    }
    if seq.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { at: f64::NAN });
    }
    let depth = depth.min(seq.len() - 1).max(1);
    let mut prev = seq.to_vec();
    let mut last_change = 0.0;
    for j in 1..=depth {
        let f = theta.powi(j as i32);
        let next: Vec<f64> = prev.windows(2).map(|w| (w[1] - f * w[0]) / (1.0 - f)).collect();
        last_change = (next.last().unwrap() - prev.last().unwrap()).abs();
        prev = next;
    }
    Ok(Limit { value: *prev.last().unwrap(), error: last_change })
}
