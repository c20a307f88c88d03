//! Closed-form and quadrature-defined radial solution families.
//!
//! Every family is driven by the first integral
//! `-|w|^{-q/(p-1)} w = G(r) + K`, `w = r^{N-1}|u'|^{p-2}u'`, with
//! `G(r) = r^γ/b` (`γ = (q+1-p)b/(p-1)`) away from the critical exponent and
//! `G(r) = ln r/(N-1)` at `q = q_c`.

mod profile;
pub mod residual;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use profile::{fmt_f64, RadialProfile};

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_to_infinity, QuadratureSpec};
use crate::params::ProblemParams;

/// Upper end of the range where [`asymptotic_profile`] is meaningful.
pub const ASYMPTOTIC_R_SMALL: f64 = 1e-2;

/// Sign of `u'` selected from the first integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilySign {
    /// Decreasing solutions, `u' < 0`.
    Positive,
    /// Increasing solutions `u = -ũ`, `u' > 0`.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    FundamentalMuP,
    SingularPositiveU,
    SingularNegativeV,
    RegularFluxK,
    StrongSingular,
    GlobalKM,
    BlowupEps,
    CriticalNegativeProfile,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 8] = [
        FamilyKind::FundamentalMuP,
        FamilyKind::SingularPositiveU,
        FamilyKind::SingularNegativeV,
        FamilyKind::RegularFluxK,
        FamilyKind::StrongSingular,
        FamilyKind::GlobalKM,
        FamilyKind::BlowupEps,
        FamilyKind::CriticalNegativeProfile,
    ];
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL
            .iter()
            .copied()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown family `{s}`")))
    }
}

/// Symbolic identity of a solution family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    pub params: ProblemParams,
    /// Flux parameter (`RegularFluxK`, `GlobalKM`); scale for `FundamentalMuP`;
    /// free constant ν for `CriticalNegativeProfile`.
    pub k: Option<f64>,
    /// Value at infinity (`GlobalKM`).
    #[serde(rename = "M")]
    pub m: Option<f64>,
    /// Blow-up radius (`BlowupEps`).
    pub eps: Option<f64>,
}

impl FamilyDescriptor {
    /// Unvalidated descriptor without optional parameters.
    pub fn new(kind: FamilyKind, params: ProblemParams) -> Self {
        Self { kind, params, k: None, m: None, eps: None }
    }

    pub fn regular_flux(params: ProblemParams, k: f64) -> Result<Self> {
        Self { k: Some(k), ..Self::new(FamilyKind::RegularFluxK, params) }.validated()
    }

    pub fn strong_singular(params: ProblemParams) -> Result<Self> {
        Self::new(FamilyKind::StrongSingular, params).validated()
    }

    pub fn global(params: ProblemParams, k: f64, m: f64) -> Result<Self> {
        Self { k: Some(k), m: Some(m), ..Self::new(FamilyKind::GlobalKM, params) }.validated()
    }

    pub fn blowup(params: ProblemParams, eps: f64) -> Result<Self> {
        Self { eps: Some(eps), ..Self::new(FamilyKind::BlowupEps, params) }.validated()
    }

    pub fn singular_positive(params: ProblemParams) -> Result<Self> {
        Self::new(FamilyKind::SingularPositiveU, params).validated()
    }

    pub fn singular_negative(params: ProblemParams) -> Result<Self> {
        Self::new(FamilyKind::SingularNegativeV, params).validated()
    }

    pub fn fundamental(params: ProblemParams) -> Result<Self> {
        Self::new(FamilyKind::FundamentalMuP, params).validated()
    }

    pub fn critical_negative(params: ProblemParams) -> Result<Self> {
        Self::new(FamilyKind::CriticalNegativeProfile, params).validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks parameter presence and the regime required by the kind.
    pub fn validate(&self) -> Result<()> {
        let pr = &self.params;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidParams(format!("{} requires parameter {name}", self.kind)))
        };
        match self.kind {
            FamilyKind::RegularFluxK | FamilyKind::GlobalKM => {
                let k = need(self.k, "k")?;
                if !(k > 0.0 && k.is_finite()) {
                    return Err(Error::InvalidParams(format!("k = {k} must be positive")));
                }
                if self.kind == FamilyKind::GlobalKM {
                    let m = need(self.m, "M")?;
                    if !(m >= 0.0 && m.is_finite()) {
                        return Err(Error::InvalidParams(format!("M = {m} must be nonnegative")));
                    }
                }
                pr.require_subcritical()
            }
            FamilyKind::BlowupEps => {
                let e = need(self.eps, "eps")?;
                if !(e > 0.0 && e < 1.0) {
                    return Err(Error::InvalidParams(format!("eps = {e} must lie in (0, 1)")));
                }
                pr.require_subcritical()
            }
            FamilyKind::StrongSingular | FamilyKind::SingularPositiveU => pr.require_subcritical(),
            FamilyKind::SingularNegativeV => pr.require_supercritical_below_p(),
            FamilyKind::FundamentalMuP => {
                if let Some(k) = self.k {
                    if !k.is_finite() {
                        return Err(Error::InvalidParams("scale must be finite".into()));
                    }
                }
                if pr.p() > pr.nf() + crate::params::CRITICAL_TOL {
                    return Err(Error::Regime("fundamental solution requires p ≤ N".into()));
                }
                Ok(())
            }
            FamilyKind::CriticalNegativeProfile => {
                if !pr.is_critical() || pr.p_equals_n() || pr.p() > pr.nf() {
                    return Err(Error::Regime(format!("critical profile requires q = q_c and p < N, got {pr}")));
                }
                Ok(())
            }
        }
    }

    /// Natural radial domain `(r_min, r_max)`.
    pub fn natural_domain(&self) -> (f64, f64) {
        match self.kind {
            FamilyKind::RegularFluxK | FamilyKind::StrongSingular => (0.0, 1.0),
            FamilyKind::BlowupEps => (self.eps.unwrap_or(0.0), 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// First-integral constant `K` and branch, for families generated by it.
    pub fn first_integral_constant(&self) -> Option<(f64, FamilySign)> {
        let pr = &self.params;
        match self.kind {
            FamilyKind::RegularFluxK | FamilyKind::GlobalKM => Some((self.k?.powf(-pr.excess()), FamilySign::Positive)),
            FamilyKind::StrongSingular | FamilyKind::SingularPositiveU => Some((0.0, FamilySign::Positive)),
            FamilyKind::SingularNegativeV => Some((0.0, FamilySign::Negative)),
            FamilyKind::BlowupEps => {
                let e = self.eps?;
                Some((-e.powf(pr.first_integral_exponent()) / pr.coefficient_b(), FamilySign::Positive))
            }
            FamilyKind::FundamentalMuP | FamilyKind::CriticalNegativeProfile => None,
        }
    }

    /// Analytic `u'(r)`.
    pub fn u_prime(&self, r: f64) -> Result<f64> {
        match self.kind {
            FamilyKind::FundamentalMuP => Ok(self.k.unwrap_or(1.0) * mu_p_prime(&self.params, r)),
            FamilyKind::CriticalNegativeProfile => {
                Err(Error::Unsupported("the critical negative profile is only known asymptotically".into()))
            }
            _ => {
                let (k, sign) = self.first_integral_constant().expect("validated descriptor");
                u_prime_exact(&self.params, r, k, sign)
            }
        }
    }
}

impl fmt::Display for FamilyDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.params)?;
        for (key, v) in [("k", self.k), ("M", self.m), ("eps", self.eps)] {
            if let Some(v) = v {
                write!(f, " {key}={v}")?;
            }
        }
        Ok(())
    }
}

/// Fundamental solution: `r^{(p-N)/(p-1)}` for `p < N`, `-ln r` for `p = N`.
pub fn mu_p(params: &ProblemParams, r: f64) -> f64 {
    if params.p_equals_n() {
        -r.ln()
    } else {
        r.powf(params.fundamental_exponent())
    }
}

/// Derivative of [`mu_p`].
pub fn mu_p_prime(params: &ProblemParams, r: f64) -> f64 {
    if params.p_equals_n() {
        -1.0 / r
    } else {
        let e = params.fundamental_exponent();
        e * r.powf(e - 1.0)
    }
}

/// The `r`-dependent part `G(r)` of the first integral.
pub fn first_integral_g(params: &ProblemParams, r: f64) -> f64 {
    if params.is_critical() {
        r.ln() / (params.nf() - 1.0)
    } else {
        r.powf(params.first_integral_exponent()) / params.coefficient_b()
    }
}

/// `u'(r)` on the branch `sign` with first-integral constant `K`.
///
/// The positive branch uses the bracket `G(r) + K` and returns
/// `-r^{(1-N)/(p-1)} (G+K)^{-1/(q+1-p)}`; the negative branch uses `K - G(r)`
/// and returns the same magnitude with a plus sign.
pub fn u_prime_exact(params: &ProblemParams, r: f64, k: f64, sign: FamilySign) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r = {r} must be positive")));
    }
    let g = first_integral_g(params, r);
    let bracket = match sign {
        FamilySign::Positive => g + k,
        FamilySign::Negative => k - g,
    };
    if !(bracket > 0.0) {
        return Err(Error::Domain(format!("first-integral bracket {bracket:e} ≤ 0 at r = {r} (blow-up locus)")));
    }
    let mag = r.powf(params.flux_exponent()) * bracket.powf(-1.0 / params.excess());
    Ok(match sign {
        FamilySign::Positive => -mag,
        FamilySign::Negative => mag,
    })
}

fn check_grid(grid: &[f64], domain: (f64, f64)) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: grid.len() });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("grid must be strictly increasing".into()));
    }
    if !(grid[0] > domain.0) || *grid.last().unwrap() > domain.1 {
        return Err(Error::Domain(format!(
            "grid [{}, {}] must lie in ({}, {}]",
            grid[0],
            grid.last().unwrap(),
            domain.0,
            domain.1
        )));
    }
    Ok(())
}

/// `∫ |u'|` between consecutive nodes, integrated in `t = ln r`.
fn panel_integrals<F: Fn(f64) -> Result<f64>>(du: &F, nodes: &[f64], quad: &QuadratureSpec) -> Result<Vec<f64>> {
    let spec = QuadratureSpec { endpoint_exponent_hint: None, ..*quad };
    let g = |t: f64| {
        let r = t.exp();
        du(r).map(|d| d.abs() * r).unwrap_or(f64::NAN)
    };
    nodes.windows(2).map(|w| integrate(g, w[0].ln(), w[1].ln(), &spec)).collect()
}

/// `u(r_i) = base + ∫_{r_i}^{upper} |u'|` on `grid`, with `upper = 1` or `∞`.
fn accumulate<F: Fn(f64) -> Result<f64>>(
    du: &F,
    grid: &[f64],
    to_infinity: Option<f64>,
    base: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let mut nodes = grid.to_vec();
    let tail = match to_infinity {
        None => {
            if *nodes.last().unwrap() < 1.0 {
                nodes.push(1.0);
            }
            0.0
        }
        Some(decay) => {
            let spec = QuadratureSpec { endpoint_exponent_hint: None, ..*quad };
            integrate_to_infinity(
                |r| du(r).map(f64::abs).unwrap_or(f64::NAN),
                *nodes.last().unwrap(),
                Some(decay),
                &spec,
            )?
        }
    };
    let panels = panel_integrals(du, &nodes, quad)?;
    let mut u = vec![0.0; nodes.len()];
    let mut acc = tail;
    *u.last_mut().unwrap() = base + acc;
    for i in (0..panels.len()).rev() {
        acc += panels[i];
        u[i] = base + acc;
    }
    u.truncate(grid.len());
    Ok(u)
}

/// Samples the family on `grid`.
///
/// Quadrature families integrate `|u'|` panel by panel in `ln r`, anchored at
/// `u(1) = 0` (ball families) or `u(∞) = M` (global family); `u'` is filled
/// analytically.
pub fn evaluate_family(desc: &FamilyDescriptor, grid: &[f64], quad: &QuadratureSpec) -> Result<RadialProfile> {
    desc.validate()?;
    let pr = desc.params;
    let domain = desc.natural_domain();
    check_grid(grid, domain)?;
    let du_fn = |r: f64| desc.u_prime(r);
    let beta = pr.beta_q();
    let u: Vec<f64> = match desc.kind {
        FamilyKind::CriticalNegativeProfile => {
            return Err(Error::Unsupported(
                "CriticalNegativeProfile has no closed form; use asymptotic_profile or radial_ode".into(),
            ))
        }
        FamilyKind::FundamentalMuP => grid.iter().map(|&r| desc.k.unwrap_or(1.0) * mu_p(&pr, r)).collect(),
        FamilyKind::SingularPositiveU => {
            let l = pr.lambda_singular()?;
            grid.iter().map(|&r| l * r.powf(-beta)).collect()
        }
        FamilyKind::StrongSingular => {
            let l = pr.lambda_singular()?;
            grid.iter().map(|&r| l * (r.powf(-beta) - 1.0)).collect()
        }
        FamilyKind::SingularNegativeV => {
            let l = pr.lambda_tilde()?;
            grid.iter().map(|&r| -l * r.powf(-beta)).collect()
        }
        FamilyKind::RegularFluxK | FamilyKind::BlowupEps => accumulate(&du_fn, grid, None, 0.0, quad)?,
        FamilyKind::GlobalKM => accumulate(&du_fn, grid, Some(1.0 / pr.excess()), desc.m.unwrap_or(0.0), quad)?,
    };
    let du = grid.iter().map(|&r| du_fn(r)).collect::<Result<Vec<f64>>>()?;
    RadialProfile::new(grid.to_vec(), u, du, Some(*desc), domain)
}

/// Leading-order behaviour of the family as `r → 0`.
///
/// * `RegularFluxK`, `GlobalKM`: `k(p-1)/(N-p) r^{(p-N)/(p-1)}`, or `-k ln r` when `p = N`.
/// * `StrongSingular`, `SingularPositiveU`: `λ r^{-β_q}`.
/// * `SingularNegativeV`: `-λ̃ r^{-β_q}`.
/// * `FundamentalMuP`: `k μ_p(r)`.
/// * `CriticalNegativeProfile`: `-ν r^{(p-N)/(p-1)} (-ln r)^{-(N-1)/(p-1)}`, with
///   `ν = k` when given and otherwise the value
///   `(p-1)/(N-p) (N-1)^{(N-1)/(p-1)}` produced by the first integral.
pub fn asymptotic_profile(desc: &FamilyDescriptor, r: f64) -> Result<f64> {
    desc.validate()?;
    if !(r > 0.0 && r <= ASYMPTOTIC_R_SMALL) {
        return Err(Error::Domain(format!("asymptotic profile needs 0 < r ≤ {ASYMPTOTIC_R_SMALL}, got {r}")));
    }
    let pr = desc.params;
    let n = pr.nf();
    let p = pr.p();
    match desc.kind {
        FamilyKind::RegularFluxK | FamilyKind::GlobalKM => {
            let k = desc.k.unwrap_or(1.0);
            if pr.p_equals_n() {
                Ok(-k * r.ln())
            } else {
                Ok(k * (p - 1.0) / (n - p) * r.powf(pr.fundamental_exponent()))
            }
        }
        FamilyKind::StrongSingular | FamilyKind::SingularPositiveU => Ok(pr.lambda_singular()? * r.powf(-pr.beta_q())),
        FamilyKind::SingularNegativeV => Ok(-pr.lambda_tilde()? * r.powf(-pr.beta_q())),
        FamilyKind::FundamentalMuP => Ok(desc.k.unwrap_or(1.0) * mu_p(&pr, r)),
        FamilyKind::CriticalNegativeProfile => {
            let nu = desc.k.unwrap_or_else(|| (p - 1.0) / (n - p) * (n - 1.0).powf((n - 1.0) / (p - 1.0)));
            Ok(-nu * r.powf(pr.fundamental_exponent()) * (-r.ln()).powf(-(n - 1.0) / (p - 1.0)))
        }
        FamilyKind::BlowupEps => Err(Error::Unsupported("BlowupEps is not defined near r = 0".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::log_grid;

    fn pr(n: u32, p: f64, q: f64) -> ProblemParams {
        ProblemParams::new(n, p, q).unwrap()
    }

    #[test]
    fn mu_p_examples() {
        assert_eq!(mu_p(&pr(3, 3.0, 2.5), 1.0), 0.0);
        assert!((mu_p(&pr(3, 2.0, 1.2), 0.5) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn u_prime_examples() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        for r in [0.01, 0.3, 1.0, 7.0] {
            let d = u_prime_exact(&a, r, 0.0, FamilySign::Positive).unwrap();
            assert!((d + r.powi(-3)).abs() <= 1e-12 * r.powi(-3), "r={r}");
        }
        let b = pr(4, 2.0, 1.5);
        for r in [0.01, 0.3, 1.0, 7.0] {
            let d = u_prime_exact(&b, r, 0.0, FamilySign::Negative).unwrap();
            assert!((d - r.powi(-2)).abs() <= 1e-12 * r.powi(-2), "r={r}");
        }
    }

    #[test]
    fn u_prime_flux_asymptotics() {
        let a = pr(4, 2.0, 1.1);
        let k: f64 = 2.0;
        let r = 1e-8;
        let d = u_prime_exact(&a, r, k.powf(-a.excess()), FamilySign::Positive).unwrap();
        let lead = -k * r.powf(a.flux_exponent());
        assert!((d / lead - 1.0).abs() < 1e-3);
    }

    #[test]
    fn blowup_locus_is_domain_error() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        assert!(matches!(u_prime_exact(&a, 0.5, -2.0, FamilySign::Positive), Err(Error::Domain(_))));
    }

    #[test]
    fn strong_singular_value() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let d = FamilyDescriptor::strong_singular(a).unwrap();
        let prof = evaluate_family(&d, &[0.25, 0.5, 1.0], &QuadratureSpec::default()).unwrap();
        assert!((prof.u[1] - 1.5).abs() < 1e-14);
        assert_eq!(prof.u[2], 0.0);
    }

    #[test]
    fn regular_flux_vanishes_at_one() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        for k in [0.5, 1.0, 4.0] {
            let d = FamilyDescriptor::regular_flux(a, k).unwrap();
            let prof = evaluate_family(&d, &log_grid(1e-3, 1.0, 20), &QuadratureSpec::default()).unwrap();
            assert_eq!(*prof.u.last().unwrap(), 0.0);
            assert!(prof.u[0] > 0.0);
        }
    }

    #[test]
    fn infinite_k_quadrature_matches_closed_form() {
        // K = 0 integrand over [r, 1] against 0.5 (r^-2 - 1).
        let a = pr(3, 2.0, 4.0 / 3.0);
        let grid = log_grid(1e-3, 1.0, 30);
        let u = accumulate(
            &|r| u_prime_exact(&a, r, 0.0, FamilySign::Positive),
            &grid,
            None,
            0.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        for (r, v) in grid.iter().zip(&u) {
            let exact = 0.5 * (r.powi(-2) - 1.0);
            assert!((v - exact).abs() <= 1e-11 * exact.max(1.0), "r={r}");
        }
    }

    #[test]
    fn global_family_tends_to_m() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let d = FamilyDescriptor::global(a, 1.0, 2.5).unwrap();
        let prof = evaluate_family(&d, &log_grid(1e-2, 1e6, 50), &QuadratureSpec::default()).unwrap();
        assert!((prof.u.last().unwrap() - 2.5).abs() < 1e-9);
        assert!(prof.u.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn blowup_grid_touching_eps_is_domain_error() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let d = FamilyDescriptor::blowup(a, 0.1).unwrap();
        let err = evaluate_family(&d, &[0.1, 0.5, 1.0], &QuadratureSpec::default());
        assert!(matches!(err, Err(Error::Domain(_))));
        assert!(evaluate_family(&d, &[0.1001, 0.5, 1.0], &QuadratureSpec::default()).is_ok());
    }

    #[test]
    fn descriptor_validation() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        assert!(FamilyDescriptor::regular_flux(a, -1.0).is_err());
        assert!(FamilyDescriptor::blowup(a, 1.0).is_err());
        assert!(FamilyDescriptor::global(a, 1.0, -1.0).is_err());
        assert!(FamilyDescriptor::singular_negative(a).is_err());
        assert!(FamilyDescriptor::strong_singular(pr(3, 2.0, 1.6)).is_err());
        assert!(FamilyDescriptor::critical_negative(pr(3, 2.0, 1.5)).is_ok());
        let mut d = FamilyDescriptor::new(FamilyKind::RegularFluxK, a);
        assert!(d.validate().is_err());
        d.k = Some(1.0);
        assert!(d.validate().is_ok());
    }

    #[test]
    fn critical_profile_is_unsupported_for_evaluation() {
        let d = FamilyDescriptor::critical_negative(pr(3, 2.0, 1.5)).unwrap();
        assert!(matches!(evaluate_family(&d, &[0.1, 0.2], &QuadratureSpec::default()), Err(Error::Unsupported(_))));
        assert!(asymptotic_profile(&d, 1e-3).unwrap() < 0.0);
    }

    #[test]
    fn asymptotics() {
        let a = pr(3, 2.0, 4.0 / 3.0);
        let d = FamilyDescriptor::regular_flux(a, 1.0).unwrap();
        assert!((asymptotic_profile(&d, 1e-3).unwrap() - 1e3).abs() < 1e-9);
        let b = pr(3, 3.0, 2.5);
        let d = FamilyDescriptor::regular_flux(b, 2.0).unwrap();
        assert!((asymptotic_profile(&d, 1e-3).unwrap() + 2.0 * 1e-3f64.ln()).abs() < 1e-12);
        let c = pr(4, 2.0, 1.5);
        let d = FamilyDescriptor::singular_negative(c).unwrap();
        assert!((asymptotic_profile(&d, 1e-3).unwrap() + 1e3).abs() < 1e-9);
        assert!(asymptotic_profile(&d, 0.5).is_err());
    }

    #[test]
    fn family_kind_parse() {
        for k in FamilyKind::ALL {
            assert_eq!(k.to_string().parse::<FamilyKind>().unwrap(), k);
        }
        assert!("nope".parse::<FamilyKind>().is_err());
    }
}
