//! Dormand–Prince 5(4) with step-size control and continuous (dense) output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default growth factor, relative to `max(1, |y0|)`, at which a component is
/// treated as blown up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Growth factor relative to `max(1, |y0|)` declared as blow-up.
    pub blow_up: f64,
}

impl Default for OdeSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-11, min_step: 1e-14, max_step: 1.0, blow_up: BLOW_UP_THRESHOLD }
    }
}

impl OdeSpec {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParams("ODE tolerances must be positive".into()));
        }
        if !(self.min_step > 0.0 && self.min_step <= self.max_step) {
            return Err(Error::InvalidParams("ODE steps must satisfy 0 < min_step <= max_step".into()));
        }
        if !(self.blow_up > 1.0) {
            return Err(Error::InvalidParams("blow-up factor must exceed 1".into()));
        }
        Ok(())
    }
}

/// Sampled solution: `y[i]` is the state at `t[i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        self.t.last().map(|&t| (t, self.y.last().unwrap().as_slice()))
    }

    /// Values of component `i` along the trajectory.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.y.iter().map(|y| y[i]).collect()
    }
}

/// Failed integration together with everything computed before the failure.
#[derive(Debug, Clone)]
pub struct IvpFailure {
    pub error: Error,
    pub partial: Trajectory,
}

impl From<IvpFailure> for Error {
    fn from(f: IvpFailure) -> Self {
        f.error
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn lincomb(y: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, ki) in out.iter_mut().zip(k.iter()) {
                *o += h * c * ki;
            }
        }
    }
    out
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// With empty `nodes` the accepted steps are returned; otherwise the dense
/// interpolant is sampled at `nodes`, which must lie between `t0` and `t1` and
/// be ordered in the direction of integration. `observer` is called on every
/// accepted step and may abort the run by returning an error.
pub fn solve_ivp_observed<F, O>(
    f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    spec: &OdeSpec,
    nodes: &[f64],
    mut observer: O,
) -> std::result::Result<Trajectory, IvpFailure>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    O: FnMut(f64, &[f64]) -> Result<()>,
{
    let fail = |error: Error, partial: Trajectory| Err(IvpFailure { error, partial });
    if let Err(e) = spec.validate() {
        return fail(e, Trajectory::default());
    }
    if t0 == t1 || !t0.is_finite() || !t1.is_finite() {
        return fail(Error::InvalidParams("solve_ivp needs distinct finite endpoints".into()), Trajectory::default());
    }
    let dir = (t1 - t0).signum();
    for w in nodes.windows(2) {
        if (w[1] - w[0]) * dir < 0.0 {
            return fail(
                Error::InvalidParams("output nodes must follow the integration direction".into()),
                Trajectory::default(),
            );
        }
    }
    if nodes.iter().any(|&s| (s - t0) * dir < 0.0 || (s - t1) * dir > 0.0) {
        return fail(Error::InvalidParams("output nodes must lie between t0 and t1".into()), Trajectory::default());
    }

    let blow_up_at = spec.blow_up * y0.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let dense = !nodes.is_empty();
    let mut out = Trajectory::default();
    let mut next_node = 0usize;
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = f(t, &y);
    if !all_finite(&y) || !all_finite(&k1) {
        return fail(Error::NonFinite { at: t0 }, out);
    }
    if let Err(e) = observer(t, &y) {
        return fail(e, out);
    }
    if dense {
        while next_node < nodes.len() && nodes[next_node] == t0 {
            out.t.push(t0);
            out.y.push(y.clone());
            next_node += 1;
        }
    } else {
        out.t.push(t0);
        out.y.push(y.clone());
    }

    let span = (t1 - t0).abs();
    let sc: Vec<f64> = y.iter().map(|v| spec.abs_tol + spec.rel_tol * v.abs()).collect();
    let norm =
        |v: &[f64]| (v.iter().zip(&sc).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt();
    let (d0, d1) = (norm(&y), norm(&k1));
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h = h.clamp(spec.min_step, spec.max_step).min(span);
    let mut last_fail = false;

    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let mut hs = h.min(remaining);
        if remaining - hs < spec.min_step * 0.5 {
            hs = remaining;
        }
        let hd = hs * dir;

        let k2 = f(t + C2 * hd, &lincomb(&y, hd, &[(A21, &k1)]));
        let k3 = f(t + C3 * hd, &lincomb(&y, hd, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hd, &lincomb(&y, hd, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * hd, &lincomb(&y, hd, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + hd, &lincomb(&y, hd, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = lincomb(&y, hd, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + hd, &y1);

        let finite = [&k2, &k3, &k4, &k5, &k6, &k7, &y1].iter().all(|v| all_finite(v));
        let err = if finite {
            let mut acc = 0.0;
            for i in 0..y.len() {
                let e = hd * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = spec.abs_tol + spec.rel_tol * y[i].abs().max(y1[i].abs());
                acc += (e / sc).powi(2);
            }
            (acc / y.len().max(1) as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            let t_new = if hs == remaining { t1 } else { t + hd };
            if dense {
                let rc2: Vec<f64> = y1.iter().zip(&y).map(|(a, b)| a - b).collect();
                let rc3: Vec<f64> = (0..y.len()).map(|i| hd * k1[i] - rc2[i]).collect();
                let rc4: Vec<f64> = (0..y.len()).map(|i| rc2[i] - hd * k7[i] - rc3[i]).collect();
                let rc5: Vec<f64> = (0..y.len())
                    .map(|i| hd * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
                    .collect();
                while next_node < nodes.len() && (nodes[next_node] - t_new) * dir <= 0.0 {
                    let s = nodes[next_node];
                    let th = ((s - t) / hd).clamp(0.0, 1.0);
                    let th1 = 1.0 - th;
                    let ys: Vec<f64> = if s == t_new {
                        y1.clone()
                    } else {
                        (0..y.len())
                            .map(|i| y[i] + th * (rc2[i] + th1 * (rc3[i] + th * (rc4[i] + th1 * rc5[i]))))
                            .collect()
                    };
                    out.t.push(s);
                    out.y.push(ys);
                    next_node += 1;
                }
            }
            t = t_new;
            y = y1;
            k1 = k7;
            if !dense {
                out.t.push(t);
                out.y.push(y.clone());
            }
            if let Some(v) = y.iter().find(|v| v.abs() > blow_up_at) {
                log::debug!("blow-up detected at t={t}, |y|={}", v.abs());
                return fail(Error::BlowUp { at: t }, out);
            }
            if let Err(e) = observer(t, &y) {
                return fail(e, out);
            }
            let mut fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            if last_fail {
                fac = fac.min(1.0);
            }
            last_fail = false;
            h = (hs * fac).min(spec.max_step);
        } else {
            last_fail = true;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h = hs * fac;
            if h < spec.min_step {
                log::debug!("step underflow at t={t}");
                return fail(Error::StepUnderflow { at: t }, out);
            }
        }
    }
    Ok(out)
}

/// [`solve_ivp_observed`] without an observer.
pub fn solve_ivp<F>(
    f: F,
    t0: f64,
    y0: &[f64],
    t1: f64,
    spec: &OdeSpec,
    nodes: &[f64],
) -> std::result::Result<Trajectory, IvpFailure>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    solve_ivp_observed(f, t0, y0, t1, spec, nodes, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let tr = solve_ivp(|_, y| vec![y[0]], 0.0, &[1.0], 1.0, &OdeSpec::default(), &[]).unwrap();
        let (t, y) = tr.last().unwrap();
        assert_eq!(t, 1.0);
        assert!((y[0] - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn zero_field_is_constant() {
        let nodes = [0.0, 0.5, 1.0, 2.0];
        let tr = solve_ivp(|_, _| vec![0.0, 0.0], 0.0, &[3.0, -1.0], 2.0, &OdeSpec::default(), &nodes).unwrap();
        assert_eq!(tr.t, nodes);
        for y in &tr.y {
            assert_eq!(y, &vec![3.0, -1.0]);
        }
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let nodes: Vec<f64> = (0..=40).map(|i| 0.05 * i as f64).collect();
        let spec = OdeSpec { max_step: 0.5, ..OdeSpec::default() };
        let tr = solve_ivp(|_, y| vec![y[1], -y[0]], 0.0, &[0.0, 1.0], 2.0, &spec, &nodes).unwrap();
        for (t, y) in tr.t.iter().zip(&tr.y) {
            assert!((y[0] - t.sin()).abs() < 1e-9, "t={t}");
            assert!((y[1] - t.cos()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn backward_integration() {
        let tr = solve_ivp(|_, y| vec![-y[0]], 1.0, &[1.0], 0.0, &OdeSpec::default(), &[0.5, 0.0]).unwrap();
        assert!((tr.y[0][0] - 0.5f64.exp()).abs() < 1e-10);
        assert!((tr.y[1][0] - 1.0f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn blow_up_is_reported_with_partial_trajectory() {
        // y' = y², y(0)=1 blows up at t=1.
        let err = solve_ivp(|_, y| vec![y[0] * y[0]], 0.0, &[1.0], 2.0, &OdeSpec::default(), &[]).unwrap_err();
        match err.error {
            Error::BlowUp { at } | Error::StepUnderflow { at } => assert!((at - 1.0).abs() < 1e-6, "{at}"),
            e => panic!("unexpected {e:?}"),
        }
        assert!(err.partial.len() > 2);
    }

    #[test]
    fn observer_can_abort() {
        let err = solve_ivp_observed(
            |_, _| vec![1.0],
            0.0,
            &[0.0],
            10.0,
            &OdeSpec::default(),
            &[],
            |t, _| if t > 1.0 { Err(Error::DegenerateGradient { at: t }) } else { Ok(()) },
        )
        .unwrap_err();
        assert!(matches!(err.error, Error::DegenerateGradient { .. }));
    }

    #[test]
    fn invalid_inputs() {
        let bad = OdeSpec { min_step: 2.0, max_step: 1.0, ..OdeSpec::default() };
        assert!(solve_ivp(|_, y| y.to_vec(), 0.0, &[1.0], 1.0, &bad, &[]).is_err());
        assert!(solve_ivp(|_, y| y.to_vec(), 0.0, &[1.0], 0.0, &OdeSpec::default(), &[]).is_err());
        assert!(solve_ivp(|_, y| y.to_vec(), 0.0, &[1.0], 1.0, &OdeSpec::default(), &[0.5, 0.2]).is_err());
    }
}
