//! Classification of the behaviour of a sampled radial solution as `r → 0`:
//! removable, weak (`k μ_p`), strong (`λ r^{-β_q}`) or critical logarithmic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{extrapolate_limit, linear_fit, loglog_fit, richardson_limit, FitResult, Limit};
use crate::params::ProblemParams;
use crate::radial_families::RadialProfile;

/// Minimum number of profile nodes inside the classification window.
pub const MIN_WINDOW_SAMPLES: usize = 32;
/// Largest admissible upper window edge.
pub const MAX_WINDOW_HI: f64 = 1e-2;
/// Default window.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-6, 1e-3);
/// Relative spread above which [`estimate_flux`] reports divergence.
pub const FLUX_CAUCHY_TOL: f64 = 1e-3;
/// Nodes per decade of the geometric sequences used for extrapolation.
const SEQ_PER_DECADE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    RemovableOrRegular,
    WeakSingular,
    StrongSingular,
    CriticalLogProfile,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityClassification {
    pub verdict: Verdict,
    /// Flux `k = lim r^{(N-1)/(p-1)} u'`-normalized weak constant (signed).
    pub k_hat: Option<f64>,
    /// The same limit against `μ_p` of the `(abs-0)` normalization,
    /// `k_hat (p-1)/(N-p)` (equal to `k_hat` when `p = N`).
    pub mu_ratio: Option<f64>,
    /// Extrapolated `lim r^{β_q}|u|`.
    pub lambda_hat: Option<f64>,
    /// Log-log slope of `|u|` over the window (absent when `u` changes sign).
    pub fitted_exponent: Option<f64>,
    pub diagnostics: Vec<FitResult>,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// When set, a profile with `sup |u|` below this value on the window is
    /// regular. When absent, regularity is decided from the decay of `r|u'|`.
    pub bound_for_regular: Option<f64>,
}

/// Fundamental solution in the flux normalization:
/// `(p-1)/(N-p) r^{(p-N)/(p-1)}`, or `-ln r` when `p = N`, so that
/// `r^{(N-1)/(p-1)}|μ̂'| = 1`.
pub fn mu_flux_normalized(params: &ProblemParams, r: f64) -> f64 {
    if params.p_equals_n() {
        -r.ln()
    } else {
        (params.p() - 1.0) / (params.nf() - params.p()) * r.powf(params.fundamental_exponent())
    }
}

/// Factor converting the flux `k` into the `(abs-0)` ratio `lim u/μ_p`.
pub fn flux_to_mu_ratio(params: &ProblemParams) -> f64 {
    if params.p_equals_n() {
        1.0
    } else {
        (params.p() - 1.0) / (params.nf() - params.p())
    }
}

/// Geometric sequence from `hi` down to `lo`.
fn descending_sequence(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi / lo).log10() * SEQ_PER_DECADE).floor() as usize;
    let ratio = 10f64.powf(-1.0 / SEQ_PER_DECADE);
    (0..=n).map(|j| hi * ratio.powi(j as i32)).filter(|&r| r >= lo).collect()
}

/// Increment ratios `Δu/Δμ̂` along `seq`.
fn increment_ratios(profile: &RadialProfile, params: &ProblemParams, seq: &[f64]) -> Result<Vec<f64>> {
    let u: Vec<f64> = seq.iter().map(|&r| profile.interpolate(r)).collect::<Result<_>>()?;
    Ok(seq
        .windows(2)
        .zip(u.windows(2))
        .map(|(r, v)| (v[1] - v[0]) / (mu_flux_normalized(params, r[1]) - mu_flux_normalized(params, r[0])))
        .collect())
}

/// Depth of the Richardson tables used for increment ratios.
const RICHARDSON_DEPTH: usize = 4;

/// Limit of a ratio sequence along [`descending_sequence`]. Away from the
/// critical exponent the corrections are powers of `r^γ`, `γ = (q+1-p)b/(p-1)`,
/// which Richardson extrapolation removes; otherwise Aitken's process is used.
fn sequence_limit(params: &ProblemParams, seq: &[f64]) -> Result<Limit> {
    let gamma = params.first_integral_exponent();
    if gamma > 1e-3 && !params.is_critical() {
        richardson_limit(seq, 10f64.powf(-gamma / SEQ_PER_DECADE), RICHARDSON_DEPTH)
    } else {
        extrapolate_limit(seq)
    }
}

/// Limits from the two halves of `seq` and their relative spread.
fn two_window_limit(params: &ProblemParams, seq: &[f64]) -> Result<(f64, f64)> {
    if seq.len() < 6 {
        return Err(Error::InsufficientSamples { needed: 6, found: seq.len() });
    }
    let mid = seq.len() / 2;
    let a = sequence_limit(params, &seq[..mid])?;
    let b = sequence_limit(params, &seq[mid..])?;
    let spread = (a.value - b.value).abs() / b.value.abs().max(f64::MIN_POSITIVE);
    Ok((b.value, spread.max(b.error / b.value.abs().max(f64::MIN_POSITIVE))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxEstimate {
    /// `lim u/μ_p` in the `(abs-0)` normalization.
    pub ratio: f64,
    /// Flux `k = lim r^{(N-1)/(p-1)}|u'|`, signed like `u`.
    pub k: f64,
    /// Relative extrapolation error estimate.
    pub error: f64,
}

/// Extrapolated `lim_{r→0} u/μ_p`, computed from increments of `u` along a
/// geometric sequence covering the lowest three decades of the profile.
pub fn estimate_flux(profile: &RadialProfile, params: &ProblemParams) -> Result<FluxEstimate> {
    let lo = profile.r[0];
    let hi = (lo * 1e3).min(*profile.r.last().unwrap());
    let seq = descending_sequence(lo, hi);
    let ratios = increment_ratios(profile, params, &seq)?;
    let (k, spread) = two_window_limit(params, &ratios)?;
    if !(spread <= FLUX_CAUCHY_TOL) || !k.is_finite() {
        return Err(Error::Divergent { spread });
    }
    Ok(FluxEstimate { ratio: k * flux_to_mu_ratio(params), k, error: spread })
}

fn window_samples(profile: &RadialProfile, window: (f64, f64)) -> Vec<(f64, f64, f64)> {
    (0..profile.len())
        .filter(|&i| profile.r[i] >= window.0 && profile.r[i] <= window.1)
        .map(|i| (profile.r[i], profile.u[i], profile.du[i]))
        .collect()
}

/// Classifies the singularity at `r = 0` with default options.
pub fn classify(
    profile: &RadialProfile,
    params: &ProblemParams,
    window: (f64, f64),
    tol: f64,
) -> Result<SingularityClassification> {
    classify_with(profile, params, window, tol, &ClassifyOptions::default())
}

/// Decision procedure, each branch evaluated independently:
///
/// 1. regular: `sup|u| < bound_for_regular`, or without a bound
///    `r_lo|u'(r_lo)| ≤ 0.1 r_hi|u'(r_hi)|`;
/// 2. weak: the increment ratio `Δu/Δμ̂` extrapolated on the two halves of the
///    window agrees to `tol`;
/// 3. strong: log-log slope within `tol` of `-β_q` and extrapolated
///    `r^{β_q}|u|` within relative `tol` of `λ` (positive data, `q < q_c`) or
///    `λ̃` (negative data, `q_c < q < p`);
/// 4. critical: at `q = q_c` with negative data, `(r^{(N-1)/(p-1)}|u'|)^{-(p-1)/(N-1)}`
///    is affine in `-ln r` with slope `1/(N-1)` to relative `tol`.
///
/// More than one passing branch yields `ConflictingFits`; none yields
/// `Unclassified`.
pub fn classify_with(
    profile: &RadialProfile,
    params: &ProblemParams,
    window: (f64, f64),
    tol: f64,
    opts: &ClassifyOptions,
) -> Result<SingularityClassification> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi <= MAX_WINDOW_HI) {
        return Err(Error::InvalidParams(format!("window ({lo}, {hi}) must satisfy 0 < lo < hi ≤ {MAX_WINDOW_HI}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }
    let pts = window_samples(profile, window);
    if pts.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_WINDOW_SAMPLES, found: pts.len() });
    }
    let (r_lo, _, du_lo) = pts[0];
    let (r_hi, u_hi, du_hi) = *pts.last().unwrap();
    let samples: Vec<(f64, f64)> = pts.iter().map(|&(r, u, _)| (r, u)).collect();
    let mut diagnostics = Vec::new();
    let main_fit = loglog_fit(&samples, window).ok();
    if let Some(f) = main_fit {
        diagnostics.push(f);
    }
    let mut result = SingularityClassification {
        verdict: Verdict::Unclassified,
        k_hat: None,
        mu_ratio: None,
        lambda_hat: None,
        fitted_exponent: main_fit.map(|f| f.slope),
        diagnostics: Vec::new(),
        window,
    };
    let mut passed: Vec<Verdict> = Vec::new();

    // 1. Regular.
    let regular = match opts.bound_for_regular {
        Some(bound) => pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max) < bound,
        None => r_lo * du_lo.abs() <= 0.1 * r_hi * du_hi.abs(),
    };
    if regular {
        passed.push(Verdict::RemovableOrRegular);
    }

    let positive = pts.iter().all(|p| p.1 > 0.0);
    let negative = pts.iter().all(|p| p.1 < 0.0);

    // 2. Weak.
    if !regular {
        let seq = descending_sequence(r_lo, r_hi);
        if let Ok(ratios) = increment_ratios(profile, params, &seq) {
            if let Ok((k, spread)) = two_window_limit(params, &ratios) {
                let sign_ok = (k > 0.0 && u_hi > 0.0) || (k < 0.0 && u_hi < 0.0);
                if spread <= tol && k != 0.0 && sign_ok {
                    passed.push(Verdict::WeakSingular);
                    result.k_hat = Some(k);
                    result.mu_ratio = Some(k * flux_to_mu_ratio(params));
                }
            }
        }
    }

    // 3. Strong.
    let beta = params.beta_q();
    if let (Some(fit), true) = (main_fit, positive || negative) {
        let target = if positive { params.lambda_singular().ok() } else { params.lambda_tilde().ok() };
        if let (Some(lambda), true) = (target, (fit.slope + beta).abs() <= tol) {
            let seq = descending_sequence(r_lo, r_hi);
            let scaled: Result<Vec<f64>> =
                seq.iter().map(|&r| profile.interpolate(r).map(|u| r.powf(beta) * u.abs())).collect();
            if let Ok(lim) = scaled.and_then(|s| extrapolate_limit(&s)) {
                result.lambda_hat = Some(lim.value);
                if (lim.value - lambda).abs() <= tol * lambda {
                    passed.push(Verdict::StrongSingular);
                }
            }
        }
    }

    // 4. Critical logarithmic profile.
    if params.is_critical() && negative && !params.p_equals_n() {
        let n = params.nf();
        let p = params.p();
        let e = (n - 1.0) / (p - 1.0);
        let l: Vec<f64> = pts.iter().map(|x| -x.0.ln()).collect();
        let y: Vec<f64> = pts.iter().map(|x| (x.0.powf(e) * x.2.abs()).powf(-1.0 / e)).collect();
        if y.iter().all(|v| v.is_finite()) {
            if let Ok((slope, intercept, r2)) = linear_fit(&l, &y) {
                diagnostics.push(FitResult { slope, intercept, r_squared: r2, window });
                if (slope * (n - 1.0) - 1.0).abs() <= tol && r2 >= 1.0 - tol {
                    passed.push(Verdict::CriticalLogProfile);
                }
            }
        }
        let shaped: Vec<(f64, f64)> =
            pts.iter().map(|x| (-x.0.ln(), x.1.abs() * x.0.powf(-params.fundamental_exponent()))).collect();
        if let Ok(mut f) = loglog_fit(&shaped, (-hi.ln(), -lo.ln())) {
            f.window = window;
            diagnostics.push(f);
        }
    }

    result.diagnostics = diagnostics;
    match passed.len() {
        0 => Ok(result),
        1 => {
            result.verdict = passed[0];
            Ok(result)
        }
        _ => Err(Error::ConflictingFits(format!("{passed:?}"))),
    }
}

/// Residual of the sphere equation for a constant `ω`:
/// `-X^q - (β_q(p-1)+p-N) X^{p-1}` with `X = β_q ω`.
pub fn sphere_residual(params: &ProblemParams, omega: f64) -> Result<f64> {
    params.require_supercritical_below_p()?;
    let beta = params.beta_q();
    let x = (beta * omega).abs();
    let c = beta * (params.p() - 1.0) + params.p() - params.nf();
    Ok(-x.powf(params.q()) - c * x.powf(params.p() - 1.0))
}

/// [`sphere_residual`] at `ω = λ̃`, which should vanish.
pub fn verify_constant_sphere_solution(params: &ProblemParams) -> Result<f64> {
    sphere_residual(params, params.lambda_tilde()?)
}
