//! Hyperbolic model space of curvature `-B²`: the curvature-aware barrier,
//! the gradient bound with its large-distance plateau, radial solutions and
//! the exponential Harnack bound for `p`-harmonic functions.

use serde::{Deserialize, Serialize};

use crate::bounds::{
    default_residual_grid, least_feasible, residual_report, BernsteinConstants, Geometry, SupersolutionReport,
};
use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_to_infinity, solve_ivp, Endpoint, OdeSpec, QuadratureSpec};
use crate::params::ProblemParams;
use crate::radial_families::{first_integral_g, residual::flux, u_prime_exact, FamilySign, RadialProfile};

/// Lower curvature bounds `Ric ≥ -(N-1)B²` and `Sec ≥ -B̃²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "Btilde")]
    pub b_tilde: f64,
    pub p: f64,
}

impl CurvatureBounds {
    pub fn new(b: f64, b_tilde: f64, p: f64) -> Result<Self> {
        if !(b >= 0.0 && b_tilde >= 0.0 && b.is_finite() && b_tilde.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "curvature scales must be finite and ≥ 0, got B={b}, B̃={b_tilde}"
            )));
        }
        if !(p > 1.0) {
            return Err(Error::InvalidParams(format!("p = {p} must exceed 1")));
        }
        Ok(Self { b, b_tilde, p })
    }

    pub fn euclidean(p: f64) -> Self {
        Self { b: 0.0, b_tilde: 0.0, p }
    }

    /// `B_p = B + (p-2)₊ B̃`.
    pub fn b_p(&self) -> f64 {
        self.b + (self.p - 2.0).max(0.0) * self.b_tilde
    }
}

/// Simply connected space of constant curvature `-B²` (Euclidean for `B = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpace {
    pub n: u32,
    #[serde(rename = "B")]
    pub b: f64,
}

impl ModelSpace {
    pub fn new(n: u32, b: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("dimension {n} must be at least 2")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidParams(format!("B = {b} must be finite and ≥ 0")));
        }
        Ok(Self { n, b })
    }

    /// Geodesic-sphere scale `S(r) = sinh(Br)/B`, or `r` when `B = 0`.
    pub fn s(&self, r: f64) -> f64 {
        if self.b == 0.0 {
            r
        } else {
            (self.b * r).sinh() / self.b
        }
    }

    /// `ln S(r)`, accurate for large `Br`.
    pub fn ln_s(&self, r: f64) -> f64 {
        let x = self.b * r;
        if self.b == 0.0 {
            r.ln()
        } else if x < 20.0 {
            (x.sinh() / self.b).ln()
        } else {
            x - (2.0 * self.b).ln() + (-(-2.0 * x).exp()).ln_1p()
        }
    }

    /// `Δr = (N-1) S'/S`.
    pub fn laplacian_of_distance(&self, r: f64) -> f64 {
        let n1 = f64::from(self.n) - 1.0;
        if self.b == 0.0 {
            n1 / r
        } else {
            n1 * self.b / (self.b * r).tanh()
        }
    }
}

/// Residual of `w = λ(R²-r²)^{-2/(q+1-p)} + μ` for the curvature-corrected
/// operator, normalized as in [`crate::bounds::SupersolutionReport`].
pub fn bernstein_residual_manifold(
    params: &ProblemParams,
    curv: &CurvatureBounds,
    radius: f64,
    lambda: f64,
    mu: f64,
    consts: &BernsteinConstants,
    r_grid: &[f64],
) -> SupersolutionReport {
    let geometry = Geometry::Manifold { b: curv.b, b_tilde: curv.b_tilde, radius };
    residual_report(params, consts, geometry, lambda, mu, r_grid)
}

/// Shapes of the barrier parameters: `λ = c·max{(R⁴B²)^{1/s}, ((1+B_pR)R²)^{1/s}}`
/// and `μ = ((N-1)B²)^{1/s}`, `s = q+1-p`. Returns `(λ/c, μ)`.
pub fn barrier_scales(params: &ProblemParams, curv: &CurvatureBounds, radius: f64) -> (f64, f64) {
    let s = params.excess();
    let r2 = radius * radius;
    let l0 = (r2 * r2 * curv.b * curv.b).powf(1.0 / s).max(((1.0 + curv.b_p() * radius) * r2).powf(1.0 / s));
    let mu = ((params.nf() - 1.0) * curv.b * curv.b).powf(1.0 / s);
    (l0, mu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldCalibration {
    pub c: f64,
    pub lambda: f64,
    pub mu: f64,
    pub report: SupersolutionReport,
}

/// Least `c` (relative accuracy 1e-6) for which the barrier with the scales of
/// [`barrier_scales`] has nonnegative residual on the default grid.
pub fn calibrate_manifold(
    params: &ProblemParams,
    curv: &CurvatureBounds,
    radius: f64,
    consts: &BernsteinConstants,
) -> ManifoldCalibration {
    let grid = default_residual_grid(radius);
    let (l0, mu) = barrier_scales(params, curv, radius);
    let c =
        least_feasible(|c| bernstein_residual_manifold(params, curv, radius, c * l0, mu, consts, &grid).passed(), 1.0);
    let report = bernstein_residual_manifold(params, curv, radius, c * l0, mu, consts, &grid);
    ManifoldCalibration { c, lambda: c * l0, mu, report }
}

/// Bound on `|∇u|²` at distance `d` from the boundary:
/// `c·max{B^{2/s}, (1+B_p d)^{1/s} d^{-2/s}} + ((N-1)B²)^{1/s}`, i.e. the
/// barrier value `λR^{-4/s} + μ` at the centre of `B_d`, with `c` calibrated
/// at `R = d` using the default constants.
pub fn gradient_bound_manifold(params: &ProblemParams, curv: &CurvatureBounds, dist_to_boundary: f64) -> Result<f64> {
    if !(dist_to_boundary > 0.0 && dist_to_boundary.is_finite()) {
        return Err(Error::InvalidParams(format!("distance {dist_to_boundary} must be positive")));
    }
    let s = params.excess();
    let d = dist_to_boundary;
    let cal = calibrate_manifold(params, curv, d, &BernsteinConstants::default_for(params));
    let shape = curv.b.powf(2.0 / s).max((1.0 + curv.b_p() * d).powf(1.0 / s) * d.powf(-2.0 / s));
    Ok(cal.c * shape + cal.mu)
}

fn tail_spec(quad: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec { endpoint_exponent_hint: None, ..*quad }
}

/// `ln ∫_r^∞ S^{-e}` for `e > 0`, evaluated as
/// `-e ln S(r) + ln ∫_0^∞ (S(r)/S(r+x))^e dx` so that large `Br` cannot overflow.
pub fn ln_tail(model: &ModelSpace, e: f64, r: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(r > 0.0 && e > 0.0) {
        return Err(Error::Domain(format!("ln_tail needs r > 0 and e > 0, got r={r}, e={e}")));
    }
    let ls = model.ln_s(r);
    if model.b == 0.0 {
        if e <= 1.0 {
            return Err(Error::Domain(format!("∫_r^∞ t^-{e} diverges")));
        }
        return Ok((1.0 - e) * ls - (e - 1.0).ln());
    }
    let f = |x: f64| (-e * (model.ln_s(r + x) - ls)).exp();
    let split = 1.0 / model.b;
    let spec = tail_spec(quad);
    let head = integrate(f, 0.0, split, &spec)?;
    let tail = integrate_to_infinity(f, split, None, &spec)?;
    Ok(-e * ls + (head + tail).ln())
}

/// Exponent `e = (N-1)(q+1-p)/(p-1)` of `S^{-e}` in the first integral.
fn integral_exponent(params: &ProblemParams) -> f64 {
    (params.nf() - 1.0) * params.excess() / (params.p() - 1.0)
}

/// `∫_0^r S^{-e}` for `e < 1`.
fn head_integral(model: &ModelSpace, e: f64, r: f64, quad: &QuadratureSpec) -> Result<f64> {
    let spec = QuadratureSpec { ..*quad }.with_hint(-e, Endpoint::Lower);
    integrate(|t: f64| (-e * model.ln_s(t)).exp(), 0.0, r, &spec)
}

/// `G_B(r)` of the first integral `-|w|^{-q/(p-1)}w = G_B(r) + K`,
/// `w = S^{N-1}|u'|^{p-2}u'`, normalized to match the Euclidean `G` as `B → 0`:
/// `c₀∫_0^r S^{-e}` below the critical exponent, `-c₀∫_r^∞ S^{-e}` above it
/// and `c₀ ln(tanh(Br/2)/tanh(B/2))` at it, with `c₀ = (q+1-p)/(p-1)`.
pub fn first_integral_g_hyperbolic(
    params: &ProblemParams,
    model: &ModelSpace,
    r: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if model.b == 0.0 {
        return Ok(first_integral_g(params, r));
    }
    let c0 = params.excess() / (params.p() - 1.0);
    let e = integral_exponent(params);
    if params.is_critical() {
        let h = |x: f64| (0.5 * model.b * x).tanh().ln();
        return Ok(c0 * (h(r) - h(1.0)));
    }
    if e > 1.0 {
        return Ok(-c0 * ln_tail(model, e, r, quad)?.exp());
    }
    if model.b * r <= 1.0 {
        Ok(c0 * head_integral(model, e, r, quad)?)
    } else {
        Ok(c0
            * (head_integral(model, e, 1.0 / model.b, quad)? + ln_tail(model, e, 1.0 / model.b, quad)?.exp()
                - ln_tail(model, e, r, quad)?.exp()))
    }
}

/// `u'` from a first-integral value `Φ = G_B + K`.
fn u_prime_from_phi(params: &ProblemParams, model: &ModelSpace, r: f64, ln_abs_phi: f64, phi_sign: f64) -> f64 {
    let ln_mag = (1.0 - params.nf()) / (params.p() - 1.0) * model.ln_s(r) - ln_abs_phi / params.excess();
    -phi_sign * ln_mag.exp()
}

fn cumulative_u(r: &[f64], du: impl Fn(f64) -> Result<f64>, quad: &QuadratureSpec) -> Result<Vec<f64>> {
    let spec = tail_spec(quad);
    let mut u = vec![0.0; r.len()];
    for i in 1..r.len() {
        let g = |t: f64| {
            let x = t.exp();
            du(x).map(|d| d * x).unwrap_or(f64::NAN)
        };
        u[i] = u[i - 1] + integrate(g, r[i - 1].ln(), r[i].ln(), &spec)?;
    }
    Ok(u)
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: r_grid.len() });
    }
    if !(r_grid[0] > 0.0) || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("grid must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// `u'(r)` of the radial solution with first-integral constant `K`.
pub fn u_prime_hyperbolic(
    params: &ProblemParams,
    model: &ModelSpace,
    k: f64,
    r: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if model.b == 0.0 {
        // Exact Euclidean branch, identical to the flat families.
        let sign = if first_integral_g(params, r) + k > 0.0 { FamilySign::Positive } else { FamilySign::Negative };
        return match sign {
            FamilySign::Positive => u_prime_exact(params, r, k, sign),
            FamilySign::Negative => u_prime_exact(params, r, -k, sign),
        };
    }
    let phi = first_integral_g_hyperbolic(params, model, r, quad)? + k;
    if phi == 0.0 || !phi.is_finite() {
        return Err(Error::Domain(format!("first integral vanishes at r = {r} (blow-up locus)")));
    }
    Ok(u_prime_from_phi(params, model, r, phi.abs().ln(), phi.signum()))
}

/// Radial solution on the model space with first-integral constant `K`,
/// sampled on `r_grid` and anchored at `u(r_grid[0]) = 0`.
pub fn solve_radial_hyperbolic(
    params: &ProblemParams,
    model: &ModelSpace,
    k: f64,
    r_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<RadialProfile> {
    check_grid(r_grid)?;
    let du: Vec<f64> = r_grid.iter().map(|&r| u_prime_hyperbolic(params, model, k, r, quad)).collect::<Result<_>>()?;
    if du.windows(2).any(|w| w[0].signum() != w[1].signum()) {
        return Err(Error::Domain("first integral changes sign inside the grid (blow-up)".into()));
    }
    let u = cumulative_u(r_grid, |r| u_prime_hyperbolic(params, model, k, r, quad), quad)?;
    RadialProfile::new(r_grid.to_vec(), u, du, None, (0.0, f64::INFINITY))
}

/// `u'` of the extremal global solution, whose first integral vanishes at
/// infinity: `Φ = -c₀∫_r^∞ S^{-e}`. Requires `B > 0`.
pub fn u_prime_extremal(params: &ProblemParams, model: &ModelSpace, r: f64, quad: &QuadratureSpec) -> Result<f64> {
    if model.b == 0.0 {
        return Err(Error::Domain("the extremal global solution needs B > 0".into()));
    }
    let c0 = params.excess() / (params.p() - 1.0);
    let ln_phi = c0.ln() + ln_tail(model, integral_exponent(params), r, quad)?;
    Ok(u_prime_from_phi(params, model, r, ln_phi, -1.0))
}

/// Extremal global solution sampled on `r_grid`, `u(r_grid[0]) = 0`.
pub fn solve_extremal_hyperbolic(
    params: &ProblemParams,
    model: &ModelSpace,
    r_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<RadialProfile> {
    check_grid(r_grid)?;
    let du: Vec<f64> = r_grid.iter().map(|&r| u_prime_extremal(params, model, r, quad)).collect::<Result<_>>()?;
    let u = cumulative_u(r_grid, |r| u_prime_extremal(params, model, r, quad), quad)?;
    RadialProfile::new(r_grid.to_vec(), u, du, None, (0.0, f64::INFINITY))
}

/// Limit `((N-1)B)^{1/(q+1-p)}` of `|u'|` along the extremal global solution.
pub fn plateau_gradient(params: &ProblemParams, model: &ModelSpace) -> f64 {
    ((params.nf() - 1.0) * model.b).powf(1.0 / params.excess())
}

/// Direct integration of `(|u'|^{p-2}u')' + (N-1)(S'/S)|u'|^{p-2}u' - |u'|^q = 0`
/// in the variables `(u, w = S^{N-1}|u'|^{p-2}u')`, sampled at `nodes`.
pub fn integrate_hyperbolic_direct(
    params: &ProblemParams,
    model: &ModelSpace,
    r0: f64,
    u0: f64,
    du0: f64,
    nodes: &[f64],
    spec: &OdeSpec,
) -> Result<RadialProfile> {
    let mut nodes = nodes.to_vec();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if nodes.len() < 2 || nodes[0] < r0 {
        return Err(Error::InvalidParams("nodes must start at or after r0".into()));
    }
    let (n, p, q) = (params.nf(), params.p(), params.q());
    let m = *model;
    let w0 = m.s(r0).powf(n - 1.0) * flux(p, du0);
    let du_of = move |r: f64, w: f64| (w.abs() * m.s(r).powf(1.0 - n)).powf(1.0 / (p - 1.0)).copysign(w);
    let rhs = move |r: f64, y: &[f64]| {
        let du = du_of(r, y[1]);
        vec![du, m.s(r).powf(n - 1.0) * du.abs().powf(q)]
    };
    let end = *nodes.last().unwrap();
    let tr = solve_ivp(rhs, r0, &[u0, w0], end, spec, &nodes)?;
    let du: Vec<f64> = nodes.iter().zip(&tr.y).map(|(&r, y)| du_of(r, y[1])).collect();
    RadialProfile::new(nodes, tr.component(0), du, None, (0.0, f64::INFINITY))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PHarmonicReport {
    /// `sup |u'|/B` for `u = (1-p) ln v` (`sup |u'|` when `B = 0`).
    pub sup_log_gradient: f64,
    /// `κ = sup |(ln v)'|/B` (`sup |(ln v)'|` when `B = 0`).
    pub kappa: f64,
    /// `|(ln v)'|` at the last grid node.
    pub asymptotic_log_gradient: f64,
    /// `v(a)e^{-κB d} ≤ v ≤ v(a)e^{κB d}` on the grid, `a` the first node.
    pub two_sided_bound_holds: bool,
}

/// Radial `p`-harmonic function `v = ∫_r^∞ S^{-(N-1)/(p-1)}` on the model
/// space and the Harnack constants of `u = (1-p) ln v`.
pub fn p_harmonic_log_gradient(model: &ModelSpace, p: f64, r_grid: &[f64]) -> Result<PHarmonicReport> {
    p_harmonic_log_gradient_with(model, p, r_grid, &QuadratureSpec::default())
}

pub fn p_harmonic_log_gradient_with(
    model: &ModelSpace,
    p: f64,
    r_grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<PHarmonicReport> {
    if !(p > 1.0) {
        return Err(Error::InvalidParams(format!("p = {p} must exceed 1")));
    }
    check_grid(r_grid)?;
    let e = (f64::from(model.n) - 1.0) / (p - 1.0);
    let ln_v: Vec<f64> = r_grid.iter().map(|&r| ln_tail(model, e, r, quad)).collect::<Result<_>>()?;
    let log_grad: Vec<f64> = r_grid.iter().zip(&ln_v).map(|(&r, lv)| (-e * model.ln_s(r) - lv).exp()).collect();
    let scale = if model.b > 0.0 { model.b } else { 1.0 };
    let sup = log_grad.iter().copied().fold(0.0, f64::max);
    let kappa = sup / scale;
    let a = r_grid[0];
    let holds = r_grid.iter().zip(&ln_v).all(|(&r, lv)| {
        let d = r - a;
        let diff = lv - ln_v[0];
        diff.abs() <= kappa * scale * d * (1.0 + 1e-12) + 1e-12
    });
    Ok(PHarmonicReport {
        sup_log_gradient: (p - 1.0) * sup / scale,
        kappa,
        asymptotic_log_gradient: *log_grad.last().unwrap(),
        two_sided_bound_holds: holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bernstein_residual_euclidean;
    use crate::numerics::log_grid;

    fn pr(n: u32, p: f64, q: f64) -> ProblemParams {
        ProblemParams::new(n, p, q).unwrap()
    }

    #[test]
    fn euclidean_reduction_is_exact() {
        let a = pr(3, 3.0, 2.5);
        let consts = BernsteinConstants::default_for(&a);
        let grid = default_residual_grid(2.0);
        let e = bernstein_residual_euclidean(&a, 2.0, 7.0, &consts, &grid);
        let m = bernstein_residual_manifold(&a, &CurvatureBounds::euclidean(3.0), 2.0, 7.0, 0.0, &consts, &grid);
        assert_eq!(e.residual_grid, m.residual_grid);
    }

    #[test]
    fn calibrated_barrier_is_valid() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let cal = calibrate_manifold(
            &a,
            &CurvatureBounds::new(1.0, 1.0, 2.0).unwrap(),
            1.0,
            &BernsteinConstants::default_for(&a),
        );
        assert!(cal.report.passed());
        assert!(cal.c.is_finite());
    }

    #[test]
    fn model_space_log_scale() {
        let m = ModelSpace::new(3, 2.0).unwrap();
        for r in [0.1, 5.0, 9.0, 11.0] {
            assert!((m.ln_s(r) - m.s(r).ln()).abs() < 1e-12);
        }
        assert!(m.ln_s(1000.0).is_finite());
    }

    #[test]
    fn small_b_recovers_euclidean_derivative() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let q = QuadratureSpec::default();
        let flat = ModelSpace::new(3, 0.0).unwrap();
        let tiny = ModelSpace::new(3, 1e-7).unwrap();
        for r in [0.05, 0.3, 1.0] {
            let d0 = u_prime_hyperbolic(&a, &flat, 1.0, r, &q).unwrap();
            let d1 = u_prime_hyperbolic(&a, &tiny, 1.0, r, &q).unwrap();
            assert!((d1 / d0 - 1.0).abs() < 1e-6, "r={r}");
        }
    }

    #[test]
    fn extremal_plateau() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let m = ModelSpace::new(3, 1.0).unwrap();
        let d = u_prime_extremal(&a, &m, 200.0, &QuadratureSpec::default()).unwrap();
        assert!((d / plateau_gradient(&a, &m) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn green_function_log_gradient() {
        let m = ModelSpace::new(3, 1.0).unwrap();
        let rep = p_harmonic_log_gradient(&m, 2.0, &log_grid(1.0, 30.0, 50)).unwrap();
        assert!((rep.asymptotic_log_gradient - 2.0).abs() < 1e-6);
        // v = coth r - 1, |(ln v)'| = 2/(1 - e^{-2r}) ... at r = 1.
        let exact = 1.0 / (1.0f64.sinh().powi(2) * (1.0 / 1.0f64.tanh() - 1.0));
        assert!((rep.kappa - exact).abs() < 1e-9);
        assert!(rep.two_sided_bound_holds);
    }
}
