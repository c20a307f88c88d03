use pgrad::bounds::{calibrate_lambda, default_residual_grid, BernsteinConstants};
use pgrad::manifold::{
    barrier_scales, bernstein_residual_manifold, gradient_bound_manifold, integrate_hyperbolic_direct,
    p_harmonic_log_gradient, solve_extremal_hyperbolic, solve_radial_hyperbolic, CurvatureBounds, ModelSpace,
};
use pgrad::numerics::{log_grid, OdeSpec, QuadratureSpec};
use pgrad::radial_families::residual::flux;
use pgrad::ProblemParams;

fn pr(n: u32, p: f64, q: f64) -> ProblemParams {
    ProblemParams::new(n, p, q).unwrap()
}

#[test]
fn halved_mu_breaks_the_barrier_somewhere() {
    let mut broken = 0;
    for a in [pr(3, 2.0, 1.5), pr(3, 1.5, 1.0), pr(4, 3.0, 3.5)] {
        let consts = BernsteinConstants::default_for(&a);
        for b in [1.0, 2.0] {
            let curv = CurvatureBounds::new(b, b, a.p()).unwrap();
            let (l0, mu) = barrier_scales(&a, &curv, 4.0);
            let rep =
                bernstein_residual_manifold(&a, &curv, 4.0, 1e-3 * l0, 0.5 * mu, &consts, &default_residual_grid(4.0));
            if rep.residual_min < 0.0 {
                broken += 1;
            }
        }
    }
    assert!(broken > 0);
}

#[test]
fn euclidean_gradient_bound_is_recovered() {
    for a in [pr(3, 2.0, 4.0 / 3.0), pr(4, 3.0, 2.4)] {
        let consts = BernsteinConstants::default_for(&a);
        for d in [0.5, 2.0] {
            let flat = gradient_bound_manifold(&a, &CurvatureBounds::euclidean(a.p()), d).unwrap();
            let euclid = calibrate_lambda(&a, d, &consts) * d.powf(-4.0 / a.excess());
            assert!((flat / euclid - 1.0).abs() < 1e-5, "{a} d={d}: {flat} vs {euclid}");
        }
    }
}

#[test]
fn gradient_bound_plateau_scales_with_b() {
    let a = pr(3, 2.0, 1.5);
    let s = a.excess();
    let at = |b: f64| gradient_bound_manifold(&a, &CurvatureBounds::new(b, 0.0, 2.0).unwrap(), 1e6).unwrap();
    let ratio = at(2.0) / at(1.0);
    assert!((ratio / 2f64.powf(2.0 / s) - 1.0).abs() < 2e-2, "{ratio}");
}

#[test]
fn quadrature_solution_matches_direct_integration() {
    for (a, k) in [(pr(3, 2.0, 4.0 / 3.0), 1.0), (pr(3, 2.0, 1.8), -0.5), (pr(4, 3.0, 2.2), 2.0)] {
        let model = ModelSpace::new(a.n(), 1.0).unwrap();
        let quad = QuadratureSpec::default();
        let grid = log_grid(0.5, 5.0, 60);
        let prof = solve_radial_hyperbolic(&a, &model, k, &grid, &quad).unwrap();
        let direct =
            integrate_hyperbolic_direct(&a, &model, 0.5, prof.u[0], prof.du[0], &grid, &OdeSpec::default()).unwrap();
        let scale = prof.u.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (i, r) in grid.iter().enumerate() {
            assert!((direct.du[i] / prof.du[i] - 1.0).abs() < 1e-7, "{a} r={r}");
            assert!((direct.u[i] - prof.u[i]).abs() < 1e-7 * scale);
        }
        // w = S^{N-1}|u'|^{p-2}u' is nondecreasing.
        let w: Vec<f64> =
            grid.iter().zip(&prof.du).map(|(&r, &d)| model.s(r).powf(a.nf() - 1.0) * flux(a.p(), d)).collect();
        assert!(w.windows(2).all(|x| x[1] >= x[0]));
    }
}

#[test]
fn global_solutions_have_bounded_gradient() {
    let quad = QuadratureSpec::default();
    let grid = log_grid(1.0, 1e3, 200);
    for a in [pr(3, 2.0, 4.0 / 3.0), pr(4, 2.0, 1.5), pr(3, 3.0, 2.5)] {
        let model = ModelSpace::new(a.n(), 1.0).unwrap();
        let bound = gradient_bound_manifold(&a, &CurvatureBounds::new(1.0, 0.0, a.p()).unwrap(), 1e3).unwrap().sqrt();
        let mut sups = vec![solve_extremal_hyperbolic(&a, &model, &grid, &quad).unwrap()];
        // Above q_c the first integral must stay negative to avoid blow-up.
        let sign = if a.q() < a.q_c() { 1.0 } else { -1.0 };
        for k in [0.1, 1.0, 10.0] {
            let k = sign * k;
            sups.push(solve_radial_hyperbolic(&a, &model, k, &grid, &quad).unwrap());
        }
        for prof in sups {
            let sup = prof.du.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            assert!(sup.is_finite() && sup <= bound, "{a}: {sup} vs {bound}");
        }
    }
}

#[test]
fn harnack_constant_is_scale_free() {
    // (B, r) ↦ (ρB, r/ρ) leaves |u'|/B invariant.
    for p in [1.5, 2.0, 3.0] {
        let reps: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&b| {
                let grid = log_grid(1.0 / b, 30.0 / b, 100);
                p_harmonic_log_gradient(&ModelSpace::new(3, b).unwrap(), p, &grid).unwrap().sup_log_gradient
            })
            .collect();
        for r in &reps {
            assert!((r / reps[0] - 1.0).abs() < 1e-8, "p={p}: {reps:?}");
        }
    }
}

#[test]
fn flat_p_harmonic_log_gradient_is_explicit() {
    let grid = log_grid(1.0, 100.0, 50);
    let rep = p_harmonic_log_gradient(&ModelSpace::new(3, 0.0).unwrap(), 1.5, &grid).unwrap();
    // |v'| = r^{-4}, v = r^{-3}/3, |(ln v)'| = 3/r.
    assert!((rep.kappa - 3.0).abs() < 1e-12);
    assert!((rep.asymptotic_log_gradient - 0.03).abs() < 1e-14);
    assert!(rep.two_sided_bound_holds);
}
