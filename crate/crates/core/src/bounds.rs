//! A-priori gradient machinery: the Keller–Osserman barrier
//! `w = λ(R² - r²)^{-2/(q+1-p)}` for `z = |∇u|²`, its calibration, and the
//! pointwise, Harnack and Liouville consequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{loglog_fit, FitResult};
use crate::params::ProblemParams;
use crate::radial_families::{FamilyDescriptor, RadialProfile};

/// Relative cutoff below `R` of the default residual grid.
pub const GRID_CUTOFF: f64 = 1e-6;
/// Nodes of the default residual grid (the symbolic endpoint `r = R` is extra).
pub const DEFAULT_GRID_NODES: usize = 2001;
/// Relative bracket width at which calibration stops.
pub const CALIBRATION_REL_TOL: f64 = 1e-6;

/// Constants of the inequality `𝒜(z) + C z^{q+2-p} - D|∇z|²/z ≤ 0`, with the
/// ellipticity window `θ|ξ|² ≤ a(ξ,ξ) ≤ Θ|ξ|²` of the linearized operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinConstants {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub theta: f64,
    #[serde(rename = "Theta")]
    pub theta_max: f64,
}

impl BernsteinConstants {
    /// Explicit constants with `C ≤ 1/(2N)`, `D > 0`.
    pub fn new(params: &ProblemParams, c: f64, d: f64) -> Result<Self> {
        let cap = 1.0 / (2.0 * params.nf());
        if !(c > 0.0 && c <= cap * (1.0 + 1e-15)) {
            return Err(Error::InvalidParams(format!("C = {c} must lie in (0, 1/(2N)] = (0, {cap}]")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParams(format!("D = {d} must be positive")));
        }
        let p = params.p();
        Ok(Self { c, d, theta: (p - 1.0).min(1.0), theta_max: (p - 1.0).max(1.0) })
    }

    /// Defaults from the Bernstein computation with the Young parameter
    /// `ε = 1/(2N(q+2-p))`: `C = 1/(2N)` and
    /// `D = (p-2)²/(2N) + |p-2|/2 + N(q+2-p)²/2`.
    pub fn default_for(params: &ProblemParams) -> Self {
        let n = params.nf();
        let p = params.p();
        let t = params.q() + 2.0 - p;
        let d = (p - 2.0).powi(2) / (2.0 * n) + (p - 2.0).abs() / 2.0 + n * t * t / 2.0;
        Self::new(params, 1.0 / (2.0 * n), d).expect("default constants are admissible")
    }
}

/// Geometry the barrier is checked in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Geometry {
    Euclidean {
        #[serde(rename = "R")]
        radius: f64,
    },
    Manifold {
        #[serde(rename = "B")]
        b: f64,
        #[serde(rename = "Btilde")]
        b_tilde: f64,
        #[serde(rename = "R")]
        radius: f64,
    },
}

/// Residual of the barrier operator on a grid.
///
/// Values are divided by `λ(R² - r²)^{-α-2}`, `α = 2/(q+1-p)`, which is positive
/// on `[0, R)`. The normalized residual is a polynomial in `r²` and `R² - r²`,
/// so the grid may include `r = R`, where it is evaluated symbolically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionReport {
    pub lambda: f64,
    pub mu: f64,
    pub residual_min: f64,
    /// `(r, normalized residual)` pairs.
    pub residual_grid: Vec<(f64, f64)>,
    pub constants: BernsteinConstants,
    pub geometry: Geometry,
}

impl SupersolutionReport {
    pub fn passed(&self) -> bool {
        self.residual_min >= 0.0
    }
}

/// Normalized residual of `w = λ(R²-r²)^{-α} + μ` at radius `r`.
///
/// The geometry enters through `Δr ≤ (N-1)(1+Br)/r` and the tangential Hessian
/// eigenvalue `w'(1+B̃r)/r`; the curvature term is `-(N-1)B²w`. For `p > 2`
/// the direction of `∇u` is chosen to maximize the Hessian eigenvalue, for
/// `p < 2` to minimize it, which makes the residual as small as possible.
/// With `B = B̃ = μ = 0` this is the Euclidean residual.
pub(crate) fn barrier_residual_normalized(
    params: &ProblemParams,
    consts: &BernsteinConstants,
    radius: f64,
    lambda: f64,
    mu: f64,
    b: f64,
    b_tilde: f64,
    r: f64,
) -> f64 {
    let s = params.excess();
    let n = params.nf();
    let p = params.p();
    let alpha = 2.0 / s;
    let r = r.clamp(0.0, radius);
    let dd = (radius * radius - r * r).max(0.0);
    let r2 = r * r;
    let w_hat = 1.0 + mu * dd.powf(alpha) / lambda;
    // w''/(λD^{-α-2}) and (w'/r)/(λD^{-α-2}).
    let w2 = (4.0 / s) * dd + (8.0 * (s + 2.0) / (s * s)) * r2;
    let w1r = (4.0 / s) * dd;
    let laplacian = w2 + (n - 1.0) * w1r * (1.0 + b * r);
    let tangential = w1r * (1.0 + b_tilde * r);
    let directional = if p > 2.0 {
        (p - 2.0) * w2.max(tangential)
    } else if p < 2.0 {
        (p - 2.0) * w1r
    } else {
        0.0
    };
    let absorption = consts.c * lambda.powf(s) * w_hat.powf(s + 1.0);
    let gradient = consts.d * (16.0 / (s * s)) * r2 / w_hat;
    let curvature = (n - 1.0) * b * b * dd * dd * w_hat;
    -laplacian - directional + absorption - gradient - curvature
}

/// `n` nodes from `0` to `R(1 - cutoff)` followed by the endpoint `R`.
pub fn default_residual_grid(radius: f64) -> Vec<f64> {
    let top = radius * (1.0 - GRID_CUTOFF);
    let mut g: Vec<f64> = (0..DEFAULT_GRID_NODES).map(|i| top * i as f64 / (DEFAULT_GRID_NODES - 1) as f64).collect();
    g.push(radius);
    g
}

pub(crate) fn residual_report(
    params: &ProblemParams,
    consts: &BernsteinConstants,
    geometry: Geometry,
    lambda: f64,
    mu: f64,
    r_grid: &[f64],
) -> SupersolutionReport {
    let (radius, b, bt) = match geometry {
        Geometry::Euclidean { radius } => (radius, 0.0, 0.0),
        Geometry::Manifold { b, b_tilde, radius } => (radius, b, b_tilde),
    };
    let residual_grid: Vec<(f64, f64)> = r_grid
        .iter()
        .map(|&r| (r, barrier_residual_normalized(params, consts, radius, lambda, mu, b, bt, r)))
        .collect();
    let residual_min = residual_grid.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    SupersolutionReport { lambda, mu, residual_min, residual_grid, constants: *consts, geometry }
}

/// Residual of the Euclidean barrier on `r_grid ⊂ [0, R]`.
pub fn bernstein_residual_euclidean(
    params: &ProblemParams,
    radius: f64,
    lambda: f64,
    consts: &BernsteinConstants,
    r_grid: &[f64],
) -> SupersolutionReport {
    residual_report(params, consts, Geometry::Euclidean { radius }, lambda, 0.0, r_grid)
}

/// Least `x` in a geometric search with `feasible(x)` true, bisected to
/// [`CALIBRATION_REL_TOL`]. Assumes feasibility is preserved when `x` grows.
pub(crate) fn least_feasible(mut feasible: impl FnMut(f64) -> bool, start: f64) -> f64 {
    let (mut lo, mut hi) = (start, start);
    if feasible(start) {
        loop {
            lo = hi / 2.0;
            if !feasible(lo) {
                break;
            }
            hi = lo;
            if hi < 1e-300 {
                return hi;
            }
        }
    } else {
        loop {
            hi = lo * 2.0;
            if feasible(hi) {
                break;
            }
            lo = hi;
            if lo > 1e300 {
                return f64::INFINITY;
            }
        }
    }
    while hi / lo - 1.0 > CALIBRATION_REL_TOL {
        let mid = (lo * hi).sqrt();
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Least `λ` (to relative accuracy 1e-6) for which the Euclidean barrier on
/// `B_R` has nonnegative residual on the default grid.
pub fn calibrate_lambda(params: &ProblemParams, radius: f64, consts: &BernsteinConstants) -> f64 {
    let grid = default_residual_grid(radius);
    least_feasible(
        |l| bernstein_residual_euclidean(params, radius, l, consts, &grid).passed(),
        radius.powf(2.0 / params.excess()),
    )
}

/// The constant `c` of `λ*(R) = (cR²)^{1/(q+1-p)}`, read off a calibration at `R = 1`.
pub fn calibrated_constant(params: &ProblemParams, consts: &BernsteinConstants) -> f64 {
    calibrate_lambda(params, 1.0, consts).powf(params.excess())
}

/// Gradient constant `c_g` of `|∇u(x)| ≤ c_g d(x)^{-1/(q+1-p)}`.
pub fn gradient_constant(params: &ProblemParams, consts: &BernsteinConstants) -> f64 {
    calibrated_constant(params, consts).powf(1.0 / (2.0 * params.excess()))
}

/// Distance function used by [`gradient_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// Ball of radius `R` around the origin: `d(r) = R - r`.
    Ball { radius: f64 },
    /// Punctured ball: `d(r) = min(r, R - r)`.
    PuncturedBall { radius: f64 },
    /// Puncture only: `d(r) = r`.
    Puncture,
}

impl BoundaryKind {
    pub fn distance(&self, r: f64) -> f64 {
        match *self {
            BoundaryKind::Ball { radius } => radius - r,
            BoundaryKind::PuncturedBall { radius } => r.min(radius - r),
            BoundaryKind::Puncture => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBoundReport {
    pub sup_product: f64,
    pub argmax_r: f64,
}

/// `sup |u'(r)| d(r)^{1/(q+1-p)}` over the grid (nodes with `d ≤ 0` skipped).
pub fn gradient_bound_check(
    params: &ProblemParams,
    profile: &RadialProfile,
    boundary: BoundaryKind,
) -> GradientBoundReport {
    let e = 1.0 / params.excess();
    let mut best = GradientBoundReport { sup_product: 0.0, argmax_r: profile.r[0] };
    for (&r, &du) in profile.r.iter().zip(&profile.du) {
        let d = boundary.distance(r);
        if d <= 0.0 {
            continue;
        }
        let v = du.abs() * d.powf(e);
        if v > best.sup_product {
            best = GradientBoundReport { sup_product: v, argmax_r: r };
        }
    }
    best
}

/// Upper bound on `|u(x)|` at distance `x_dist` from the singular point, for a
/// solution bounded by `boundary_max` on the sphere of radius `R`:
/// `c_g |x^{-β} - R^{-β}|/|β| + boundary_max`, or `c_g ln(R/x) + boundary_max`
/// when `p = q`.
pub fn pointwise_bound(params: &ProblemParams, x_dist: f64, radius: f64, boundary_max: f64) -> Result<f64> {
    pointwise_bound_with(params, x_dist, radius, boundary_max, &BernsteinConstants::default_for(params))
}

pub fn pointwise_bound_with(
    params: &ProblemParams,
    x_dist: f64,
    radius: f64,
    boundary_max: f64,
    consts: &BernsteinConstants,
) -> Result<f64> {
    if !(x_dist > 0.0 && x_dist <= radius) {
        return Err(Error::Domain(format!("need 0 < x_dist ≤ R, got {x_dist}, R={radius}")));
    }
    let cg = gradient_constant(params, consts);
    let beta = params.beta_q();
    let growth = if beta.abs() <= crate::params::CRITICAL_TOL {
        radius.ln() - x_dist.ln()
    } else {
        (x_dist.powf(-beta) - radius.powf(-beta)).abs() / beta.abs()
    };
    Ok(cg * growth + boundary_max)
}

/// Number of samples across the half ball in [`harnack_ratio`].
pub const HARNACK_SAMPLES: usize = 201;

/// `max/min` of a positive radial function over the half ball `B_{R/2}(a)`,
/// `|a| = center_r`, which meets the radii `[center_r - R/2, center_r + R/2]`.
/// The full ball `B_R(a)` must avoid the puncture and stay inside `domain`.
pub fn harnack_ratio(u: impl Fn(f64) -> Result<f64>, domain: (f64, f64), center_r: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || center_r - radius <= domain.0.max(0.0) || center_r + radius > domain.1 {
        return Err(Error::Domain(format!(
            "ball of radius {radius} around |a| = {center_r} leaves ({}, {}] or touches the puncture",
            domain.0, domain.1
        )));
    }
    let (lo, hi) = (center_r - radius / 2.0, center_r + radius / 2.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..HARNACK_SAMPLES {
        let r = lo + (hi - lo) * i as f64 / (HARNACK_SAMPLES - 1) as f64;
        let v = u(r)?;
        if !(v > 0.0) {
            return Err(Error::Domain(format!("solution is not positive at r = {r}")));
        }
        min = min.min(v);
        max = max.max(v);
    }
    Ok(max / min)
}

/// [`harnack_ratio`] for a sampled profile (cubic Hermite interpolation).
pub fn harnack_ratio_profile(profile: &RadialProfile, center_r: f64, radius: f64) -> Result<f64> {
    let domain = (profile.domain.0, profile.domain.1.min(*profile.r.last().unwrap()));
    harnack_ratio(|r| profile.interpolate(r), domain, center_r, radius)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleRow {
    /// `None` for the constant solution.
    pub k: Option<f64>,
    #[serde(rename = "M")]
    pub m: f64,
    /// `sup_r |u'(r)| r^{1/(q+1-p)}` on the grid.
    pub sup_scaled_gradient: f64,
    pub fitted_exponent: Option<f64>,
    /// `(R, |u'(R)|, c_g R^{-1/(q+1-p)})` at each decade of the grid.
    pub decay_table: Vec<(f64, f64, f64)>,
    pub bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub gradient_constant: f64,
    pub expected_exponent: f64,
    pub rows: Vec<LiouvilleRow>,
    pub passed: bool,
}

/// Gradient decay of entire (punctured-space) solutions.
///
/// For the constant solution and each global family `(k, M)` in `sweep`,
/// checks `|u'(r)| ≤ c_g r^{-1/(q+1-p)}` on `r_grid` and fits the decay
/// exponent over the last two decades of the grid (expected `-1/(q+1-p)`).
pub fn liouville_check(params: &ProblemParams, sweep: &[(f64, f64)], r_grid: &[f64]) -> Result<LiouvilleReport> {
    params.require_subcritical()?;
    if r_grid.len() < 2 || !(r_grid[0] > 0.0) {
        return Err(Error::InvalidParams("Liouville grid needs at least two positive nodes".into()));
    }
    let cg = gradient_constant(params, &BernsteinConstants::default_for(params));
    let e = 1.0 / params.excess();
    let r_max = *r_grid.last().unwrap();
    let decades: Vec<f64> = {
        let mut v = Vec::new();
        let mut x = 10f64.powf(r_grid[0].log10().ceil());
        while x <= r_max * (1.0 + 1e-12) {
            v.push(x);
            x *= 10.0;
        }
        v
    };
    let mut rows = vec![LiouvilleRow {
        k: None,
        m: 0.0,
        sup_scaled_gradient: 0.0,
        fitted_exponent: None,
        decay_table: decades.iter().map(|&r| (r, 0.0, cg * r.powf(-e))).collect(),
        bound_holds: true,
    }];
    let fit_window = ((r_max / 100.0).max(r_grid[0]), r_max);
    for &(k, m) in sweep {
        let desc = FamilyDescriptor::global(*params, k, m)?;
        let du: Vec<f64> = r_grid.iter().map(|&r| desc.u_prime(r).map(f64::abs)).collect::<Result<_>>()?;
        let sup = r_grid.iter().zip(&du).map(|(r, d)| d * r.powf(e)).fold(0.0, f64::max);
        let samples: Vec<(f64, f64)> = r_grid.iter().copied().zip(du.iter().copied()).collect();
        let fit: Option<FitResult> = loglog_fit(&samples, fit_window).ok();
        let decay_table =
            decades.iter().map(|&r| Ok((r, desc.u_prime(r)?.abs(), cg * r.powf(-e)))).collect::<Result<Vec<_>>>()?;
        rows.push(LiouvilleRow {
            k: Some(k),
            m,
            sup_scaled_gradient: sup,
            fitted_exponent: fit.map(|f| f.slope),
            bound_holds: sup <= cg,
            decay_table,
        });
    }
    let passed = rows.iter().all(|r| r.bound_holds);
    Ok(LiouvilleReport { gradient_constant: cg, expected_exponent: -e, rows, passed })
}

/// Largest `z/w` on the axis through the center of `B_R(a)`, where
/// `z = |u'|²` and `w` is the calibrated barrier; at most 1 when the barrier
/// dominates.
pub fn barrier_comparison(
    params: &ProblemParams,
    du: impl Fn(f64) -> Result<f64>,
    center_r: f64,
    radius: f64,
    consts: &BernsteinConstants,
) -> Result<f64> {
    if !(radius > 0.0 && center_r > radius) {
        return Err(Error::Domain("ball must avoid the puncture".into()));
    }
    let lambda = calibrate_lambda(params, radius, consts);
    let alpha = 2.0 / params.excess();
    let n = 401;
    let mut worst: f64 = 0.0;
    for i in 1..n {
        let t = radius * (2.0 * i as f64 / n as f64 - 1.0);
        let w = lambda * (radius * radius - t * t).powf(-alpha);
        let z = du(center_r + t)?.powi(2);
        worst = worst.max(z / w);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{log_grid, QuadratureSpec};
    use crate::radial_families::evaluate_family;

    fn pr(n: u32, p: f64, q: f64) -> ProblemParams {
        ProblemParams::new(n, p, q).unwrap()
    }

    #[test]
    fn default_constants() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let c = BernsteinConstants::default_for(&a);
        assert!((c.c - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.d - 8.0 / 3.0).abs() < 1e-14);
        assert_eq!((c.theta, c.theta_max), (1.0, 1.0));
        assert!(BernsteinConstants::new(&a, 0.5, 1.0).is_err());
    }

    #[test]
    fn calibration_matches_hand_value() {
        // A = 36, B = 552, C = 1/6: c = 3312.
        let a = pr(3, 2.0, 4.0 / 3.0);
        let c = calibrated_constant(&a, &BernsteinConstants::default_for(&a));
        assert!((c / 3312.0 - 1.0).abs() < 1e-5, "{c}");
    }

    #[test]
    fn small_lambda_fails() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let consts = BernsteinConstants::default_for(&a);
        let rep = bernstein_residual_euclidean(&a, 1.0, 1e-6, &consts, &default_residual_grid(1.0));
        assert!(rep.residual_min < 0.0);
    }

    #[test]
    fn saturation_of_strong_singular() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let d = FamilyDescriptor::strong_singular(a).unwrap();
        let prof = evaluate_family(&d, &log_grid(1e-4, 1.0, 200), &QuadratureSpec::default()).unwrap();
        let rep = gradient_bound_check(&a, &prof, BoundaryKind::Puncture);
        assert!((rep.sup_product - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_profile_has_zero_product() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let prof = RadialProfile::from_fn(&[0.1, 0.5, 0.9], |_| 2.0, |_| 0.0, (0.0, 1.0)).unwrap();
        assert_eq!(gradient_bound_check(&a, &prof, BoundaryKind::PuncturedBall { radius: 1.0 }).sup_product, 0.0);
    }

    #[test]
    fn pointwise_bound_endpoint() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        assert_eq!(pointwise_bound(&a, 1.0, 1.0, 0.7).unwrap(), 0.7);
        let b = pr(3, 2.0, 2.0);
        let v = pointwise_bound(&b, 0.5, 1.0, 0.0).unwrap();
        let cg = gradient_constant(&b, &BernsteinConstants::default_for(&b));
        assert!((v - cg * 2f64.ln()).abs() < 1e-12 * v);
    }

    #[test]
    fn harnack_examples() {
        assert_eq!(harnack_ratio(|_| Ok(3.0), (0.0, 1.0), 0.5, 0.25).unwrap(), 1.0);
        let u = |r: f64| Ok(0.5 * (r.powi(-2) - 1.0));
        let ratio = harnack_ratio(u, (0.0, 1.0), 0.5, 0.25).unwrap();
        let expected = (0.5 * (0.375f64.powi(-2) - 1.0)) / (0.5 * (0.625f64.powi(-2) - 1.0));
        assert!((ratio - expected).abs() < 1e-12);
        assert!(harnack_ratio(u, (0.0, 1.0), 0.2, 0.25).is_err());
    }

    #[test]
    fn liouville_decay() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let rep = liouville_check(&a, &[(1.0, 0.0), (2.0, 1.0)], &log_grid(1.0, 1e8, 161)).unwrap();
        assert!(rep.passed);
        for row in &rep.rows[1..] {
            let e = row.fitted_exponent.unwrap();
            assert!((e / -3.0 - 1.0).abs() < 0.01, "{e}");
        }
    }
}
