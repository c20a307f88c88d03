//! Independent solvers for the radial equation, used to cross-check the
//! quadrature families: the exact first integral, direct integration of the
//! `(u, w)` system, and shooting on the flux constant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{extrapolate_limit, find_root, loglog_fit, solve_ivp_observed, FitResult, OdeSpec};
use crate::params::ProblemParams;
use crate::radial_families::{first_integral_g, residual::flux, RadialProfile};

/// `|u'|` below which a trajectory is declared degenerate.
pub const DEGENERATE_GRADIENT: f64 = 1e-14;

/// The substitution `w = r^{N-1}|u'|^{p-2}u'` at radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WState {
    pub r: f64,
    pub w: f64,
}

impl WState {
    pub fn from_u_prime(params: &ProblemParams, r: f64, du: f64) -> Self {
        Self { r, w: r.powf(params.nf() - 1.0) * flux(params.p(), du) }
    }

    /// Recovers `u'` from `|u'| = (|w| r^{1-N})^{1/(p-1)}`, sign of `w`.
    pub fn u_prime(&self, params: &ProblemParams) -> f64 {
        let mag = (self.w.abs() * self.r.powf(1.0 - params.nf())).powf(1.0 / (params.p() - 1.0));
        mag.copysign(self.w)
    }
}

/// Solves `-|w|^{-q/(p-1)} w = G(r) + K` for `w`.
///
/// The sign of `G(r) + K` selects the branch: positive gives `w < 0`
/// (decreasing solutions), negative gives `w > 0`. The locus `G(r) + K = 0`,
/// where `|w|` is infinite, is a domain error.
pub fn first_integral(params: &ProblemParams, r: f64, k: f64) -> Result<WState> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r = {r} must be positive")));
    }
    let phi = first_integral_g(params, r) + k;
    if phi == 0.0 || !phi.is_finite() {
        return Err(Error::Domain(format!("first integral degenerates at r = {r} (blow-up locus)")));
    }
    let mag = phi.abs().powf(-(params.p() - 1.0) / params.excess());
    Ok(WState { r, w: -mag.copysign(phi) })
}

fn sort_nodes(nodes: &[f64], forward: bool) -> Vec<f64> {
    let mut v = nodes.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if !forward {
        v.reverse();
    }
    v
}

/// Integrates the radial equation from `(r0, u0, u'(r0) = du0)` towards `r1`
/// and samples it at `nodes` (all between `r0` and `r1`), or at the accepted
/// steps when `nodes` is empty.
///
/// The unknowns are `u` and `w`, with `dw/dr = r^{N-1}|u'|^q`, integrated in
/// `t = ln r`. Every accepted step checks that `w` is monotone and that `u'`
/// has not degenerated.
pub fn integrate_direct_at(
    params: &ProblemParams,
    r0: f64,
    u0: f64,
    du0: f64,
    r1: f64,
    nodes: &[f64],
    spec: &OdeSpec,
) -> Result<RadialProfile> {
    if !(r0 > 0.0 && r1 > 0.0) || r0 == r1 {
        return Err(Error::InvalidParams(format!("need distinct positive radii, got r0={r0}, r1={r1}")));
    }
    if !du0.is_finite() || du0.abs() < DEGENERATE_GRADIENT {
        return Err(Error::DegenerateGradient { at: r0 });
    }
    let pr = *params;
    let n = pr.nf();
    let q = pr.q();
    let forward = r1 > r0;
    let rnodes = sort_nodes(nodes, forward);
    let tnodes: Vec<f64> = rnodes.iter().map(|r| r.ln()).collect();
    let w0 = WState::from_u_prime(&pr, r0, du0).w;
    let rhs = move |t: f64, y: &[f64]| {
        let r = t.exp();
        let du = WState { r, w: y[1] }.u_prime(&pr);
        vec![r * du, r.powf(n) * du.abs().powf(q)]
    };
    let mut w_prev = w0;
    let observer = |t: f64, y: &[f64]| {
        let r = t.exp();
        let du = WState { r, w: y[1] }.u_prime(&pr);
        if du.abs() < DEGENERATE_GRADIENT {
            return Err(Error::DegenerateGradient { at: r });
        }
        let step = if forward { y[1] - w_prev } else { w_prev - y[1] };
        if step < -1e-9 * y[1].abs().max(w_prev.abs()) {
            return Err(Error::Domain(format!("w decreased along the trajectory at r = {r}")));
        }
        w_prev = y[1];
        Ok(())
    };
    let tr =
        solve_ivp_observed(rhs, r0.ln(), &[u0, w0], r1.ln(), spec, &tnodes, observer).map_err(|f| match f.error {
            Error::StepUnderflow { at } => Error::StepUnderflow { at: at.exp() },
            Error::BlowUp { at } => Error::BlowUp { at: at.exp() },
            e => e,
        })?;
    let mut rs: Vec<f64> = if rnodes.is_empty() {
        let mut v: Vec<f64> = tr.t.iter().map(|t| t.exp()).collect();
        let last = v.len() - 1;
        v[0] = r0;
        v[last] = r1;
        v
    } else {
        rnodes
    };
    let mut u: Vec<f64> = tr.y.iter().map(|y| y[0]).collect();
    let mut du: Vec<f64> = rs.iter().zip(&tr.y).map(|(&r, y)| WState { r, w: y[1] }.u_prime(&pr)).collect();
    if !forward {
        rs.reverse();
        u.reverse();
        du.reverse();
    }
    RadialProfile::new(rs, u, du, None, (0.0, f64::INFINITY))
}

/// [`integrate_direct_at`] sampled at the accepted steps.
pub fn integrate_direct(
    params: &ProblemParams,
    r0: f64,
    u0: f64,
    du0: f64,
    r1: f64,
    spec: &OdeSpec,
) -> Result<RadialProfile> {
    integrate_direct_at(params, r0, u0, du0, r1, &[], spec)
}

fn shooting_spec() -> OdeSpec {
    OdeSpec { abs_tol: 1e-13, rel_tol: 1e-13, min_step: 1e-12, max_step: 2.0, ..OdeSpec::default() }
}

/// Radius reached by the inward shooting integration.
pub const SHOOTING_R_MIN: f64 = 1e-30;

/// Flux `k = lim_{r→0} r^{(N-1)/(p-1)}|u'|` of the decreasing solution whose
/// first-integral constant is `K`.
///
/// Only the initial value `w(1)` is read off the first integral; the limit is
/// obtained by integrating `v = ln|w|` in `t = ln r` down to
/// [`SHOOTING_R_MIN`] and extrapolating `v` along a geometric sequence of radii.
pub fn flux_of_constant(params: &ProblemParams, k_const: f64) -> Result<f64> {
    params.require_subcritical()?;
    let start = first_integral(params, 1.0, k_const)?;
    if start.w >= 0.0 {
        return Err(Error::Domain(format!("K = {k_const} does not give a decreasing solution")));
    }
    let gamma = params.first_integral_exponent();
    let mm1 = params.excess() / (params.p() - 1.0);
    let rhs = move |t: f64, y: &[f64]| vec![-(gamma * t).exp() * (mm1 * y[0]).exp()];
    let t_end = SHOOTING_R_MIN.ln();
    let samples = 24;
    let nodes: Vec<f64> = (0..=samples).map(|j| t_end * j as f64 / samples as f64).collect();
    let tr = solve_ivp_observed(rhs, 0.0, &[start.w.abs().ln()], t_end, &shooting_spec(), &nodes, |_, _| Ok(()))?;
    let v = tr.component(0);
    let lim = extrapolate_limit(&v[v.len() / 2..])?;
    Ok((lim.value / (params.p() - 1.0)).exp())
}

/// Shooting residual `ln k(K) - ln k_target`.
pub fn shooting_residual(params: &ProblemParams, k_target: f64, k_const: f64) -> Result<f64> {
    Ok(flux_of_constant(params, k_const)?.ln() - k_target.ln())
}

/// Bracket for the first-integral constant scanned by [`shoot_for_flux`].
pub const SHOOTING_BRACKET: (f64, f64) = (1e-6, 1e6);

/// Recovers the first-integral constant `K` whose solution has flux `k`, by
/// Brent iteration on `ln K` over [`SHOOTING_BRACKET`].
pub fn shoot_for_flux(params: &ProblemParams, k: f64, tol: f64) -> Result<f64> {
    params.require_subcritical()?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParams(format!("flux k = {k} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }
    let (lo, hi) = (SHOOTING_BRACKET.0.ln(), SHOOTING_BRACKET.1.ln());
    let mut failure: Option<Error> = None;
    let f = |x: f64| match shooting_residual(params, k, x.exp()) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let root = find_root(f, lo, hi, 0.1 * tol);
    if let Some(e) = failure {
        return Err(e);
    }
    match root {
        Ok(r) => Ok(r.root.exp()),
        Err(Error::NoBracket { .. }) => Err(Error::NoBracket { lo: SHOOTING_BRACKET.0, hi: SHOOTING_BRACKET.1 }),
        Err(e) => Err(e),
    }
}

/// Log-power fit of the critical negative profile.
///
/// Integrates the increasing solution with first-integral data
/// `K - ln r/(N-1)` from `r = 1` (where `u = 0`) down to `window.0`, then fits
/// `ln(|u| r^{(N-p)/(p-1)})` against `ln(-ln r)` over `window`. The profile is
/// singular at the origin, so the growth guard of `spec` is switched off.
pub fn critical_log_power_fit(
    params: &ProblemParams,
    k_const: f64,
    window: (f64, f64),
    spec: &OdeSpec,
) -> Result<FitResult> {
    if !params.is_critical() || params.p_equals_n() {
        return Err(Error::Regime(format!("critical log profile requires q = q_c and p < N, got {params}")));
    }
    if !(window.0 > 0.0 && window.0 < window.1 && window.1 < 1.0) {
        return Err(Error::InvalidParams("window must satisfy 0 < lo < hi < 1".into()));
    }
    let start = first_integral(params, 1.0, -k_const)?;
    if start.w <= 0.0 {
        return Err(Error::Domain(format!("K = {k_const} does not give an increasing solution")));
    }
    let du0 = start.u_prime(params);
    let per_decade = 32.0;
    let count = ((window.1 / window.0).log10() * per_decade).ceil() as usize + 1;
    let nodes = crate::numerics::log_grid(window.0, window.1, count.max(8));
    let spec = OdeSpec { blow_up: f64::INFINITY, ..*spec };
    let prof = integrate_direct_at(params, 1.0, 0.0, du0, window.0, &nodes, &spec)?;
    let e = -params.fundamental_exponent();
    let samples: Vec<(f64, f64)> = prof.r.iter().zip(&prof.u).map(|(&r, &u)| (-r.ln(), u.abs() * r.powf(e))).collect();
    let lo = -window.1.ln();
    let hi = -window.0.ln();
    let mut fit = loglog_fit(&samples, (lo, hi))?;
    fit.window = window;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_families::{u_prime_exact, FamilySign};

    fn pr(n: u32, p: f64, q: f64) -> ProblemParams {
        ProblemParams::new(n, p, q).unwrap()
    }

    #[test]
    fn first_integral_examples() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let s = first_integral(&a, 1.0, 0.0).unwrap();
        assert!((s.w + 1.0).abs() < 1e-14);
        let c = pr(3, 2.0, 1.5);
        let s = first_integral(&c, 1.0, 1.0).unwrap();
        assert!((s.w.abs() - 1.0).abs() < 1e-15);
        assert!(matches!(first_integral(&a, 1.0, -first_integral_g(&a, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn first_integral_round_trip() {
        let a = pr(4, 3.0, 2.2);
        for &(r, k) in &[(0.1, 0.5), (0.7, 2.0), (3.0, 0.0)] {
            let s = first_integral(&a, r, k).unwrap();
            let d = u_prime_exact(&a, r, k, FamilySign::Positive).unwrap();
            assert!((s.u_prime(&a) / d - 1.0).abs() < 1e-12);
        }
        let b = pr(4, 2.0, 1.5);
        let s = first_integral(&b, 0.3, -0.0).unwrap();
        let d = u_prime_exact(&b, 0.3, 0.0, FamilySign::Negative).unwrap();
        assert!((s.u_prime(&b) / d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn direct_integration_reproduces_singular_solution() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let prof = integrate_direct(&a, 0.1, 50.0, -1000.0, 1.0, &OdeSpec::default()).unwrap();
        for (r, u) in prof.r.iter().zip(&prof.u) {
            let exact = 0.5 / (r * r);
            assert!((u - exact).abs() <= 1e-8 * exact, "r={r}");
        }
        assert_eq!(prof.r[0], 0.1);
        assert_eq!(*prof.r.last().unwrap(), 1.0);
    }

    #[test]
    fn direct_integration_negative_solution() {
        let b = pr(4, 2.0, 1.5);
        let nodes = [0.1, 0.2, 0.5, 1.0];
        let prof = integrate_direct_at(&b, 0.1, -10.0, 100.0, 1.0, &nodes, &OdeSpec::default()).unwrap();
        for (r, u) in prof.r.iter().zip(&prof.u) {
            assert!((u + 1.0 / r).abs() <= 1e-8 / r, "r={r}");
        }
    }

    #[test]
    fn backward_direct_integration() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let prof = integrate_direct_at(&a, 1.0, 0.5, -1.0, 0.01, &[0.01, 0.1, 1.0], &OdeSpec::default()).unwrap();
        assert_eq!(prof.r, vec![0.01, 0.1, 1.0]);
        assert!((prof.u[0] - 5000.0).abs() < 1e-5);
    }

    #[test]
    fn degenerate_start_rejected() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        assert!(matches!(
            integrate_direct(&a, 0.1, 0.0, 0.0, 1.0, &OdeSpec::default()),
            Err(Error::DegenerateGradient { .. })
        ));
    }

    #[test]
    fn shooting_unit_flux() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let k = shoot_for_flux(&a, 1.0, 1e-8).unwrap();
        assert!((k - 1.0).abs() < 1e-6, "{k}");
        let k2 = shoot_for_flux(&a, 2.0, 1e-8).unwrap();
        assert!((k2 / 2f64.powf(-1.0 / 3.0) - 1.0).abs() < 1e-6, "{k2}");
    }

    #[test]
    fn shooting_outside_bracket() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        assert!(matches!(shoot_for_flux(&a, 1e30, 1e-8), Err(Error::NoBracket { .. })));
    }
}
