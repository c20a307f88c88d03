//! Pointwise residual of the radial equation
//! `(|u'|^{p-2}u')' + (N-1)/r · |u'|^{p-2}u' - |u'|^q = 0`.

use crate::error::{Error, Result};
use crate::params::ProblemParams;

/// Relative step of the finite-difference stencil.
pub const STENCIL_REL_STEP: f64 = 1e-3;

/// `|x|^{p-2} x`.
pub fn flux(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(p - 2.0) * x
    }
}

/// The three terms of the radial operator at `r`: divergence part, drift part
/// and absorption `|u'|^q`.
pub fn residual_terms<F>(params: &ProblemParams, r: f64, du: F, lower: f64) -> Result<[f64; 3]>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(r > lower) {
        return Err(Error::Domain(format!("residual node {r} not above {lower}")));
    }
    let p = params.p();
    let h = (STENCIL_REL_STEP * r).min(0.25 * (r - lower));
    let phi = |x: f64| du(x).map(|d| flux(p, d));
    let d_phi = (phi(r - 2.0 * h)? - 8.0 * phi(r - h)? + 8.0 * phi(r + h)? - phi(r + 2.0 * h)?) / (12.0 * h);
    let g = du(r)?;
    Ok([d_phi, (params.nf() - 1.0) / r * flux(p, g), g.abs().powf(params.q())])
}

/// Residual normalized by the sum of the term magnitudes, so that it is
/// scale-free across decades of `r`.
///
/// `du` is evaluated on a five-point stencil around `r` that stays above
/// `lower`. With `absorption = false` the `|u'|^q` term is dropped, which
/// tests `p`-harmonicity.
pub fn normalized_residual<F>(params: &ProblemParams, r: f64, du: F, lower: f64, absorption: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let [a, b, c] = residual_terms(params, r, du, lower)?;
    let c = if absorption { c } else { 0.0 };
    let scale = a.abs() + b.abs() + c.abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((a + b - c).abs() / scale)
}

/// Largest normalized residual over `grid`.
pub fn max_normalized_residual<F>(
    params: &ProblemParams,
    grid: &[f64],
    du: F,
    lower: f64,
    absorption: bool,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    grid.iter().try_fold(0.0f64, |m, &r| Ok(m.max(normalized_residual(params, r, &du, lower, absorption)?)))
}
