//! Sampled radial profiles and their CSV form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{FamilyDescriptor, FamilyKind};
use crate::error::{Error, Result};
use crate::params::ProblemParams;

/// Shortest round-trip decimal form of `x`, switching to exponent notation
/// outside `[1e-4, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

mod extended_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else if x < 0.0 {
            Repr::Text("-inf".into())
        } else {
            Repr::Text("nan".into())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse::<f64>().map_err(|_| E::custom(format!("not a number: {t}"))),
        }
    }

    pub fn serialize<S: Serializer>(v: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
        (to_repr(v.0), to_repr(v.1)).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(f64, f64), D::Error> {
        let (a, b) = <(Repr, Repr)>::deserialize(d)?;
        Ok((from_repr(a)?, from_repr(b)?))
    }
}

/// A radial function sampled on a strictly increasing positive grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub family: Option<FamilyDescriptor>,
    /// Natural domain `(r_min, r_max)`; `r_max` may be infinite.
    #[serde(with = "extended_float")]
    pub domain: (f64, f64),
}

impl RadialProfile {
    pub fn new(
        r: Vec<f64>,
        u: Vec<f64>,
        du: Vec<f64>,
        family: Option<FamilyDescriptor>,
        domain: (f64, f64),
    ) -> Result<Self> {
        if r.len() != u.len() || r.len() != du.len() {
            return Err(Error::InvalidParams(format!(
                "profile columns differ in length: r={}, u={}, du={}",
                r.len(),
                u.len(),
                du.len()
            )));
        }
        if r.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, found: r.len() });
        }
        if !(r[0] > 0.0) || r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("profile grid must be positive and strictly increasing".into()));
        }
        if !(domain.0 < domain.1) || r[0] < domain.0 || *r.last().unwrap() > domain.1 {
            return Err(Error::Domain(format!(
                "grid [{}, {}] lies outside the domain ({}, {})",
                r[0],
                r.last().unwrap(),
                domain.0,
                domain.1
            )));
        }
        if u.iter().chain(&du).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("profile values must be finite".into()));
        }
        Ok(Self { r, u, du, family, domain })
    }

    /// Builds a profile from closed-form `u` and `u'` on `grid`.
    pub fn from_fn(grid: &[f64], u: impl Fn(f64) -> f64, du: impl Fn(f64) -> f64, domain: (f64, f64)) -> Result<Self> {
        Self::new(
            grid.to_vec(),
            grid.iter().map(|&r| u(r)).collect(),
            grid.iter().map(|&r| du(r)).collect(),
            None,
            domain,
        )
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// `(r, u)` pairs.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.r.iter().copied().zip(self.u.iter().copied()).collect()
    }

    /// Cubic Hermite interpolation of `u` at `x` inside the grid.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let n = self.r.len();
        if !(x >= self.r[0] && x <= self.r[n - 1]) {
            return Err(Error::Domain(format!("{x} outside sampled range [{}, {}]", self.r[0], self.r[n - 1])));
        }
        let i = match self.r.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => return Ok(self.u[i]),
            Err(i) => i - 1,
        };
        let (r0, r1) = (self.r[i], self.r[i + 1]);
        let h = r1 - r0;
        let t = (x - r0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.u[i] + h10 * h * self.du[i] + h01 * self.u[i + 1] + h11 * h * self.du[i + 1])
    }

    /// CSV text: `#` metadata lines, an `r,u,du` header, then one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match &self.family {
            Some(f) => {
                let _ = write!(
                    out,
                    "# family={:?} n={} p={} q={}",
                    f.kind,
                    f.params.n(),
                    fmt_f64(f.params.p()),
                    fmt_f64(f.params.q())
                );
                for (key, v) in [("k", f.k), ("M", f.m), ("eps", f.eps)] {
                    if let Some(v) = v {
                        let _ = write!(out, " {key}={}", fmt_f64(v));
                    }
                }
                out.push('\n');
            }
            None => out.push_str("# family=none\n"),
        }
        let _ = writeln!(out, "# domain={},{}", fmt_f64(self.domain.0), fmt_f64(self.domain.1));
        out.push_str("r,u,du\n");
        for i in 0..self.r.len() {
            let _ = writeln!(out, "{},{},{}", fmt_f64(self.r[i]), fmt_f64(self.u[i]), fmt_f64(self.du[i]));
        }
        out
    }

    /// Parses the output of [`RadialProfile::to_csv`].
    ///
    /// Metadata comments are optional; without a `domain` line the domain is
    /// taken as `(0, ∞)`. Errors carry the 1-based line number.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta: Vec<(String, String, usize)> = Vec::new();
        let mut header_seen = false;
        let (mut r, mut u, mut du) = (Vec::new(), Vec::new(), Vec::new());
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                for tok in comment.split_whitespace() {
                    if let Some((k, v)) = tok.split_once('=') {
                        meta.push((k.to_string(), v.to_string(), line_no));
                    }
                }
                continue;
            }
            if !header_seen {
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols != ["r", "u", "du"] {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header `r,u,du`, found `{line}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            let mut vals = [0.0; 3];
            for (j, c) in cols.iter().enumerate() {
                vals[j] = c
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { line: line_no, message: format!("cannot parse `{c}` as a number") })?;
            }
            r.push(vals[0]);
            u.push(vals[1]);
            du.push(vals[2]);
        }
        if !header_seen {
            return Err(Error::Parse { line: text.lines().count().max(1), message: "missing `r,u,du` header".into() });
        }
        let mut domain = (0.0, f64::INFINITY);
        let get = |key: &str| meta.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l));
        let num = |v: &str, l: usize| {
            v.parse::<f64>().map_err(|_| Error::Parse { line: l, message: format!("bad number `{v}`") })
        };
        if let Some((v, l)) = get("domain") {
            let (a, b) = v.split_once(',').ok_or(Error::Parse { line: l, message: "domain must be `lo,hi`".into() })?;
            domain = (num(a, l)?, num(b, l)?);
        }
        let family = match get("family") {
            None | Some(("none", _)) => None,
            Some((name, l)) => {
                let kind: FamilyKind =
                    name.parse().map_err(|_| Error::Parse { line: l, message: format!("unknown family `{name}`") })?;
                let field = |key: &str| -> Result<Option<f64>> {
                    match get(key) {
                        Some((v, l)) => num(v, l).map(Some),
                        None => Ok(None),
                    }
                };
                let (n, p, q) = match (get("n"), field("p")?, field("q")?) {
                    (Some((n, nl)), Some(p), Some(q)) => {
                        let n = n
                            .parse::<u32>()
                            .map_err(|_| Error::Parse { line: nl, message: format!("bad dimension `{n}`") })?;
                        (n, p, q)
                    }
                    _ => return Err(Error::Parse { line: l, message: "family metadata needs n, p and q".into() }),
                };
                let params = ProblemParams::new(n, p, q)?;
                let mut d = FamilyDescriptor::new(kind, params);
                d.k = field("k")?;
                d.m = field("M")?;
                d.eps = field("eps")?;
                Some(d)
            }
        };
        let n = r.len();
        Self::new(r, u, du, family, domain).map_err(|e| match e {
            Error::InvalidParams(m) | Error::Domain(m) => Error::Parse { line: n + 1, message: m },
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RadialProfile {
        RadialProfile::from_fn(&[0.1, 0.2, 0.5, 1.0], |r| 1.0 / r, |r| -1.0 / (r * r), (0.0, f64::INFINITY)).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let p = sample();
        let back = RadialProfile::from_csv(&p.to_csv()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn json_round_trip_with_infinite_domain() {
        let p = sample();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"inf\""));
        let back: RadialProfile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let text = "# family=none\nr,u,du\n0.1,1,2\n0.2,x,3\n";
        match RadialProfile::from_csv(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(RadialProfile::from_csv("1,2,3\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn validation() {
        assert!(RadialProfile::new(vec![1.0], vec![1.0], vec![1.0], None, (0.0, 2.0)).is_err());
        assert!(RadialProfile::new(vec![1.0, 0.5], vec![1.0; 2], vec![1.0; 2], None, (0.0, 2.0)).is_err());
        assert!(RadialProfile::new(vec![1.0, 3.0], vec![1.0; 2], vec![1.0; 2], None, (0.0, 2.0)).is_err());
    }

    #[test]
    fn hermite_interpolation_is_exact_for_cubics() {
        let p = RadialProfile::from_fn(&[1.0, 2.0, 3.0], |r| r * r * r, |r| 3.0 * r * r, (0.0, 4.0)).unwrap();
        assert!((p.interpolate(1.5).unwrap() - 3.375).abs() < 1e-12);
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    }
}
