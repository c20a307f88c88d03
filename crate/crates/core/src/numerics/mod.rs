//! Numerical kernels: quadrature, ODE stepping, root finding, fitting and
//! limit extrapolation.

pub mod extrapolate;
pub mod fit;
pub mod ode;
pub mod quadrature;
pub mod roots;

pub use extrapolate::{extrapolate_limit, richardson_limit, Limit};
pub use fit::{linear_fit, loglog_fit, FitResult};
pub use ode::{solve_ivp, solve_ivp_observed, IvpFailure, OdeSpec, Trajectory};
pub use quadrature::{integrate, integrate_to_infinity, Endpoint, QuadratureSpec};
pub use roots::{find_root, Root};

/// `n` log-spaced nodes on `[lo, hi]` (both included).
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "log_grid needs 0 < lo < hi and n >= 2");
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Log-spaced grid with `per_decade` nodes per factor of ten.
pub fn log_grid_per_decade(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
    log_grid(lo, hi, n)
}
