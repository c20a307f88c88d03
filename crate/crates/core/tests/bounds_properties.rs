use pgrad::bounds::{
    barrier_comparison, bernstein_residual_euclidean, calibrate_lambda, default_residual_grid, harnack_ratio_profile,
    BernsteinConstants,
};
use pgrad::numerics::{log_grid, QuadratureSpec};
use pgrad::radial_families::{evaluate_family, FamilyDescriptor};
use pgrad::ProblemParams;
use proptest::prelude::*;

fn base() -> ProblemParams {
    ProblemParams::new(3, 2.0, 4.0 / 3.0).unwrap()
}

#[test]
fn barrier_dominates_family_gradients() {
    let a = base();
    let consts = BernsteinConstants::default_for(&a);
    for d in [
        FamilyDescriptor::regular_flux(a, 1.0).unwrap(),
        FamilyDescriptor::regular_flux(a, 50.0).unwrap(),
        FamilyDescriptor::strong_singular(a).unwrap(),
    ] {
        for (center, radius) in [(0.5, 0.25), (0.3, 0.2), (0.8, 0.1)] {
            let ratio = barrier_comparison(&a, |r| d.u_prime(r), center, radius, &consts).unwrap();
            assert!(ratio <= 1.0, "{:?} at {center}: {ratio}", d.kind);
        }
    }
}

#[test]
fn harnack_ratio_is_uniform_in_k() {
    let a = base();
    let grid = log_grid(1e-3, 1.0, 400);
    let ratios: Vec<f64> = [1.0, 4.0, 16.0, 64.0, 256.0, 1024.0]
        .iter()
        .map(|&k| {
            let p = evaluate_family(&FamilyDescriptor::regular_flux(a, k).unwrap(), &grid, &QuadratureSpec::default())
                .unwrap();
            harnack_ratio_profile(&p, 0.3, 0.2).unwrap()
        })
        .collect();
    let strong =
        evaluate_family(&FamilyDescriptor::strong_singular(a).unwrap(), &grid, &QuadratureSpec::default()).unwrap();
    let bound = harnack_ratio_profile(&strong, 0.3, 0.2).unwrap();
    assert!(ratios.iter().all(|r| *r <= bound * (1.0 + 1e-9)), "{ratios:?} vs {bound}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residual_sign_is_scale_invariant(radius in 0.1f64..10.0, t in 0.2f64..5.0) {
        // (R, λ) ↦ (ρR, ρ^{2/s}λ) multiplies the normalized residual by ρ².
        let a = base();
        let consts = BernsteinConstants::default_for(&a);
        let lam = calibrate_lambda(&a, 1.0, &consts) * t;
        let one = bernstein_residual_euclidean(&a, 1.0, lam, &consts, &default_residual_grid(1.0));
        let lam_r = lam * radius.powf(2.0 / a.excess());
        let scaled = bernstein_residual_euclidean(&a, radius, lam_r, &consts, &default_residual_grid(radius));
        prop_assert_eq!(one.passed(), scaled.passed());
        let expect = one.residual_min * radius * radius;
        prop_assert!((scaled.residual_min - expect).abs() <= 1e-9 * expect.abs().max(radius * radius));
    }

    #[test]
    fn calibrated_lambda_is_monotone_in_constants(c1 in 0.02f64..0.16, c2 in 0.02f64..0.16, d1 in 0.5f64..10.0, d2 in 0.5f64..10.0) {
        let a = base();
        let (c_lo, c_hi) = (c1.min(c2), c1.max(c2));
        let (d_lo, d_hi) = (d1.min(d2), d1.max(d2));
        let lam = |c: f64, d: f64| calibrate_lambda(&a, 1.0, &BernsteinConstants::new(&a, c, d).unwrap());
        let slack = 1.0 + 2e-6;
        prop_assert!(lam(c_hi, d_lo) <= lam(c_lo, d_lo) * slack);
        prop_assert!(lam(c_lo, d_lo) <= lam(c_lo, d_hi) * slack);
    }
}
