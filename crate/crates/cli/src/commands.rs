use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use pgrad::bounds::{
    bernstein_residual_euclidean, calibrate_lambda, default_residual_grid, gradient_bound_check, gradient_constant,
    harnack_ratio_profile, liouville_check, BernsteinConstants, BoundaryKind, SupersolutionReport,
};
use pgrad::manifold::{calibrate_manifold, p_harmonic_log_gradient, CurvatureBounds, ModelSpace};
use pgrad::numerics::{log_grid_per_decade, QuadratureSpec};
use pgrad::radial_families::{evaluate_family, FamilyDescriptor, FamilyKind, RadialProfile};
use pgrad::singularity::{classify, verify_constant_sphere_solution, Verdict, DEFAULT_WINDOW};
use pgrad::ProblemParams;

use crate::args::{Check, Options};
use crate::error::{exit, CliError};
use crate::output::{emit, envelope, to_json_text, write_atomic};

const DEFAULT_N: u32 = 3;
const DEFAULT_P: f64 = 2.0;
const DEFAULT_Q: f64 = 4.0 / 3.0;
const DEFAULT_GRID: (f64, f64) = (1e-8, 1.0);
const DEFAULT_PER_DECADE: usize = 64;
const DEFAULT_TOL: f64 = 1e-2;
const SPHERE_TOL: f64 = 1e-12;

fn params(o: &Options) -> Result<ProblemParams, CliError> {
    Ok(ProblemParams::new(o.n.unwrap_or(DEFAULT_N), o.p.unwrap_or(DEFAULT_P), o.q.unwrap_or(DEFAULT_Q))?)
}

fn grid(o: &Options, default: (f64, f64)) -> Result<Vec<f64>, CliError> {
    let lo = o.grid_lo.unwrap_or(default.0);
    let hi = o.grid_hi.unwrap_or(default.1);
    let per = o.grid_per_decade.unwrap_or(DEFAULT_PER_DECADE);
    if !(lo > 0.0 && hi > lo && per > 0) {
        return Err(CliError::Input(format!(
            "grid needs 0 < grid-lo < grid-hi and grid-per-decade > 0, got {lo}, {hi}, {per}"
        )));
    }
    Ok(log_grid_per_decade(lo, hi, per))
}

fn descriptor(o: &Options, a: ProblemParams, default: FamilyKind) -> Result<FamilyDescriptor, CliError> {
    let kind = match &o.family {
        Some(name) => name.parse::<FamilyKind>()?,
        None => default,
    };
    let d = FamilyDescriptor { k: o.k, m: o.m, eps: o.eps, ..FamilyDescriptor::new(kind, a) };
    d.validate()?;
    Ok(d)
}

fn params_json(a: &ProblemParams) -> Value {
    json!({ "n": a.n(), "p": a.p(), "q": a.q() })
}

/// Exit code of a command that ran to completion.
pub struct Outcome {
    pub code: i32,
}

fn finish(o: &Options, command: &str, body: impl Serialize, code: i32) -> Result<Outcome, CliError> {
    emit(o.out.as_deref(), &to_json_text(&envelope(command, body)?))?;
    Ok(Outcome { code })
}

pub fn constants(o: &Options) -> Result<Outcome, CliError> {
    let a = params(o)?;
    let body = json!({
        "params": params_json(&a),
        "excess": a.excess(),
        "q_c": a.q_c(),
        "q_tilde": a.q_tilde(),
        "q_star": a.q_star(),
        "beta_q": a.beta_q(),
        "b": a.coefficient_b(),
        "first_integral_exponent": a.first_integral_exponent(),
        "fundamental_exponent": a.fundamental_exponent(),
        "lambda": a.lambda_singular().ok(),
        "lambda_tilde": a.lambda_tilde().ok(),
        "regime": a.classify_regime(),
    });
    finish(o, "constants", body, exit::SUCCESS)
}

pub fn family(o: &Options) -> Result<Outcome, CliError> {
    let a = params(o)?;
    let d = descriptor(o, a, FamilyKind::StrongSingular)?;
    let g = grid(o, DEFAULT_GRID)?;
    let prof = evaluate_family(&d, &g, &QuadratureSpec::default())?;
    let csv = prof.to_csv();
    match o.out.as_deref() {
        None => print!("{csv}"),
        Some(path) => {
            write_atomic(path, &csv)?;
            let meta = envelope(
                "family",
                json!({ "family": d, "samples": prof.len(), "domain": [prof.domain.0, prof.domain.1], "csv": path }),
            )?;
            write_atomic(&path.with_extension("json"), &to_json_text(&meta))?;
            print!("{}", to_json_text(&meta));
        }
    }
    Ok(Outcome { code: exit::SUCCESS })
}

#[derive(Serialize)]
struct Assertion {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn verdict(assertions: &[Assertion]) -> (Vec<&'static str>, i32) {
    let failures: Vec<&'static str> = assertions.iter().filter(|a| !a.passed).map(|a| a.name).collect();
    let code = if failures.is_empty() { exit::SUCCESS } else { exit::ASSERTION_FAILED };
    (failures, code)
}

fn finish_verify(o: &Options, which: &str, report: Value, assertions: Vec<Assertion>) -> Result<Outcome, CliError> {
    let (failures, code) = verdict(&assertions);
    let body = json!({ "check": which, "passed": failures.is_empty(), "failures": failures, "assertions": assertions, "report": report });
    finish(o, "verify", body, code)
}

/// Report without the full residual grid.
fn residual_summary(rep: &SupersolutionReport) -> Value {
    let argmin =
        rep.residual_grid.iter().fold((f64::NAN, f64::INFINITY), |m, &(r, v)| if v < m.1 { (r, v) } else { m });
    json!({
        "lambda": rep.lambda,
        "mu": rep.mu,
        "residual_min": rep.residual_min,
        "argmin_r": argmin.0,
        "grid_nodes": rep.residual_grid.len(),
        "constants": rep.constants,
        "geometry": rep.geometry,
    })
}

pub fn verify(o: &Options, which: Check) -> Result<Outcome, CliError> {
    let a = params(o)?;
    let radius = o.radius.unwrap_or(1.0);
    if radius.is_nan() || radius <= 0.0 {
        return Err(CliError::Input(format!("R = {radius} must be positive")));
    }
    match which {
        Check::GradientBound => {
            let d = descriptor(o, a, FamilyKind::StrongSingular)?;
            let prof = evaluate_family(&d, &grid(o, (1e-6, 1.0))?, &QuadratureSpec::default())?;
            let rep = gradient_bound_check(&a, &prof, BoundaryKind::Puncture);
            let cg = gradient_constant(&a, &BernsteinConstants::default_for(&a));
            let saturation =
                if a.coefficient_b() > 0.0 { Some(a.coefficient_b().powf(1.0 / a.excess())) } else { None };
            let report = json!({
                "family": d,
                "sup_product": rep.sup_product,
                "argmax_r": rep.argmax_r,
                "saturation_constant": saturation,
                "gradient_constant": cg,
            });
            let assertions = vec![Assertion {
                name: "sup_product_le_gradient_constant",
                passed: rep.sup_product <= cg,
                detail: format!("{} <= {cg}", rep.sup_product),
            }];
            finish_verify(o, "gradient-bound", report, assertions)
        }
        Check::Supersolution => {
            let consts = BernsteinConstants::default_for(&a);
            let lambda = calibrate_lambda(&a, radius, &consts);
            let rep = bernstein_residual_euclidean(&a, radius, lambda, &consts, &default_residual_grid(radius));
            let mut report = residual_summary(&rep);
            report["c"] = json!(lambda.powf(a.excess()) / (radius * radius));
            let assertions = vec![Assertion {
                name: "residual_nonnegative",
                passed: rep.passed(),
                detail: format!("residual_min = {}", rep.residual_min),
            }];
            finish_verify(o, "supersolution", report, assertions)
        }
        Check::SupersolutionManifold => {
            let curv = CurvatureBounds::new(o.b.unwrap_or(0.0), o.b_tilde.unwrap_or(0.0), a.p())?;
            let cal = calibrate_manifold(&a, &curv, radius, &BernsteinConstants::default_for(&a));
            let mut report = residual_summary(&cal.report);
            report["c"] = json!(cal.c);
            report["B_p"] = json!(curv.b_p());
            let assertions = vec![Assertion {
                name: "residual_nonnegative",
                passed: cal.report.passed(),
                detail: format!("residual_min = {}", cal.report.residual_min),
            }];
            finish_verify(o, "supersolution-manifold", report, assertions)
        }
        Check::Harnack => harnack(o, a),
        Check::Liouville => {
            let g = grid(o, (1e-2, 1e6))?;
            let sweep = [(0.5, 0.0), (1.0, 1.0), (4.0, 0.0), (16.0, 2.0)];
            let rep = liouville_check(&a, &sweep, &g)?;
            let assertions = vec![Assertion {
                name: "gradient_decay_bound",
                passed: rep.passed,
                detail: format!("|u'| r^(1/(q+1-p)) <= {}", rep.gradient_constant),
            }];
            finish_verify(o, "liouville", serde_json::to_value(&rep).unwrap(), assertions)
        }
        Check::SphereConstant => {
            let residual = verify_constant_sphere_solution(&a)?;
            let report = json!({ "params": params_json(&a), "lambda_tilde": a.lambda_tilde()?, "residual": residual });
            let assertions = vec![Assertion {
                name: "sphere_residual_small",
                passed: residual.abs() < SPHERE_TOL,
                detail: format!("|{residual}| < {SPHERE_TOL}"),
            }];
            finish_verify(o, "sphere-constant", report, assertions)
        }
    }
}

/// Harnack ratios of positive families on a fixed ball, plus the
/// exponential Harnack bound on the model space when `B > 0`.
fn harnack(o: &Options, a: ProblemParams) -> Result<Outcome, CliError> {
    let g = grid(o, (1e-3, 1.0))?;
    let hi = *g.last().unwrap();
    let (center, radius) = (0.6 * hi, o.radius.unwrap_or(0.3 * hi));
    let quad = QuadratureSpec::default();
    let mut rows = Vec::new();
    for k in [1.0, 4.0, 16.0, 64.0, 256.0] {
        let prof = evaluate_family(&FamilyDescriptor::regular_flux(a, k)?, &g, &quad)?;
        rows.push(json!({ "k": k, "ratio": harnack_ratio_profile(&prof, center, radius)? }));
    }
    let max_ratio = rows.iter().filter_map(|r| r["ratio"].as_f64()).fold(0.0, f64::max);
    let mut assertions = vec![Assertion {
        name: "ratios_finite",
        passed: max_ratio.is_finite(),
        detail: format!("max ratio {max_ratio}"),
    }];
    let mut report = json!({ "center_r": center, "radius": radius, "families": rows, "max_ratio": max_ratio });
    let b = o.b.unwrap_or(0.0);
    if b > 0.0 {
        let model = ModelSpace::new(a.n(), b)?;
        let rep = p_harmonic_log_gradient(&model, a.p(), &log_grid_per_decade(1.0 / b, 30.0 / b, 32))?;
        assertions.push(Assertion {
            name: "p_harmonic_two_sided_bound",
            passed: rep.kappa.is_finite() && rep.two_sided_bound_holds,
            detail: format!("kappa = {}", rep.kappa),
        });
        report["p_harmonic"] = serde_json::to_value(rep).unwrap();
    }
    finish_verify(o, "harnack", report, assertions)
}

pub fn classify_file(o: &Options, input: &Path) -> Result<Outcome, CliError> {
    let text =
        std::fs::read_to_string(input).map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
    let prof = RadialProfile::from_csv(&text)?;
    let a = match (o.n, o.p, o.q, prof.family) {
        (None, None, None, Some(d)) => d.params,
        _ => params(o)?,
    };
    let window = (o.window_lo.unwrap_or(DEFAULT_WINDOW.0), o.window_hi.unwrap_or(DEFAULT_WINDOW.1));
    let c = classify(&prof, &a, window, o.tol.unwrap_or(DEFAULT_TOL))?;
    let code = if c.verdict == Verdict::Unclassified { exit::INCONCLUSIVE } else { exit::SUCCESS };
    finish(o, "classify", json!({ "params": params_json(&a), "classification": c }), code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_assertions_are_listed() {
        let a = vec![
            Assertion { name: "ok", passed: true, detail: String::new() },
            Assertion { name: "bad", passed: false, detail: String::new() },
        ];
        assert_eq!(verdict(&a), (vec!["bad"], exit::ASSERTION_FAILED));
        assert_eq!(verdict(&a[..1]), (vec![], exit::SUCCESS));
    }
}
