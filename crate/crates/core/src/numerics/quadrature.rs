//! Globally adaptive Gauss–Kronrod (10/21) quadrature with optional
//! power-law endpoint substitution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Endpoint {
    #[default]
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Known behaviour `f(s) ~ |s - e|^h` at the endpoint `e` named by `singular_endpoint`.
    pub endpoint_exponent_hint: Option<f64>,
    pub singular_endpoint: Endpoint,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
            endpoint_exponent_hint: None,
            singular_endpoint: Endpoint::Lower,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    pub fn with_hint(mut self, exponent: f64, at: Endpoint) -> Self {
        self.endpoint_exponent_hint = Some(exponent);
        self.singular_endpoint = at;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParams("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParams("max_subdivisions must be at least 1".into()));
        }
        if let Some(h) = self.endpoint_exponent_hint {
            if !(h > -1.0) {
                return Err(Error::InvalidParams(format!("endpoint exponent {h} is not integrable")));
            }
        }
        Ok(())
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

/// One 21-point Kronrod panel; the error estimate follows QUADPACK's `qk21`.
fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let mut segments = vec![kronrod21(f, a, b)?];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= spec.max_subdivisions {
            return Err(Error::NonConvergence { a, b, error });
        }
        // Bisect the worst panel; ties resolve to the lowest index.
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Panel cannot be split any further in floating point.
            return Err(Error::NonConvergence { a, b, error });
        }
        segments[worst] = kronrod21(f, seg.a, mid)?;
        segments.push(kronrod21(f, mid, seg.b)?);
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Integrates `f` over `[a, b]`.
///
/// With an exponent hint `h` the singular endpoint is removed by the change of
/// variables `s = a + t^{1/(1+h)}` (or its mirror image at `b`), which turns a
/// pure power `(s-a)^h` into a constant. Without a hint the adaptive bisection
/// refines geometrically toward any endpoint singularity.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !(a < b) {
        if a == b {
            return Ok(0.0);
        }
        return Err(Error::InvalidParams(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
    }
    match spec.endpoint_exponent_hint {
        None => adaptive(&f, a, b, spec),
        Some(h) => {
            let m = 1.0 / (1.0 + h);
            let t_max = (b - a).powf(1.0 + h);
            let jac = move |t: f64| m * t.powf(m - 1.0);
            match spec.singular_endpoint {
                // Nodes that round onto the singular endpoint are moved one ulp inside.
                Endpoint::Lower => adaptive(
                    &|t: f64| {
                        let s = a + t.powf(m);
                        f(if s <= a { next_up(a) } else { s }) * jac(t)
                    },
                    0.0,
                    t_max,
                    spec,
                ),
                Endpoint::Upper => adaptive(
                    &|t: f64| {
                        let s = b - t.powf(m);
                        f(if s >= b { next_down(b) } else { s }) * jac(t)
                    },
                    0.0,
                    t_max,
                    spec,
                ),
            }
        }
    }
}

/// Integrates `f` over `[a, ∞)` for `a > 0`.
///
/// Uses `s = a τ^{-m}` on `τ ∈ (0, 1]`; with `decay = d` (meaning
/// `f(s) ~ s^{-d}`) the exponent `m = 1/(d-1)` makes the transformed integrand
/// bounded at `τ = 0`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    decay: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if !(a > 0.0) {
        return Err(Error::InvalidParams(format!("lower bound {a} must be positive")));
    }
    let m = match decay {
        Some(d) if d > 1.0 => 1.0 / (d - 1.0),
        Some(d) => return Err(Error::InvalidParams(format!("decay exponent {d} is not integrable at infinity"))),
        None => 1.0,
    };
    let g = |tau: f64| {
        let s = a * tau.powf(-m);
        if !s.is_finite() {
            return 0.0;
        }
        f(s) * a * m * tau.powf(-m - 1.0)
    };
    let inner = QuadratureSpec { endpoint_exponent_hint: None, ..*spec };
    adaptive(&g, 0.0, 1.0, &inner)
}
