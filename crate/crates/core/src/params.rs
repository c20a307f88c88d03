//! Problem parameters `(N, p, q)`, the critical exponents derived from them,
//! and the explicit constants of the singular radial solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used to decide that `q` sits exactly on a critical value.
pub const CRITICAL_TOL: f64 = 1e-12;

/// The triple `(N, p, q)` of `-Δp u + |∇u|^q = 0`.
///
/// Construction enforces `N ≥ 2`, `p > 1` and `q > p - 1`. The stronger
/// requirement `p ≤ N` only matters for the classification constants and is
/// checked by the operations that need it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ProblemParams {
    n: u32,
    p: f64,
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: u32,
    p: f64,
    q: f64,
}

impl TryFrom<RawParams> for ProblemParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ProblemParams::new(raw.n, raw.p, raw.q)
    }
}

impl From<ProblemParams> for RawParams {
    fn from(p: ProblemParams) -> Self {
        RawParams { n: p.n, p: p.p, q: p.q }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    /// `p - 1 < q < q_c`
    SubcriticalAbsorption,
    /// `q = q_c`
    Critical,
    /// `q_c < q < p`
    SupercriticalBelowP,
    /// `q = p`
    QEqualsP,
    /// `q > p`
    QAboveP,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub q_c: f64,
    pub q_tilde: f64,
    /// `q` coincides with `q_c` (also set when the tag resolved to `QEqualsP`).
    pub critical: bool,
    /// `q ≥ q̃`
    pub above_q_tilde: bool,
}

impl ProblemParams {
    pub fn new(n: u32, p: f64, q: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("dimension N = {n} must be at least 2")));
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidParams(format!("p = {p} must be a finite number > 1")));
        }
        if !q.is_finite() || q + 1.0 - p <= 0.0 {
            return Err(Error::InvalidParams(format!("q = {q} must be finite with q > p - 1 = {}", p - 1.0)));
        }
        Ok(Self { n, p, q })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `N` as a float, for use in formulas.
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Same `(N, p)` with a different `q`.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.n, self.p, q)
    }

    /// `q + 1 - p`, strictly positive.
    pub fn excess(&self) -> f64 {
        self.q + 1.0 - self.p
    }

    /// Removability threshold `q_c = N(p-1)/(N-1)`.
    pub fn q_c(&self) -> f64 {
        let n = self.nf();
        n * (self.p - 1.0) / (n - 1.0)
    }

    /// `β_q = (p-q)/(q+1-p)`, the exponent of the strong singular profile.
    pub fn beta_q(&self) -> f64 {
        (self.p - self.q) / self.excess()
    }

    /// `b = (N(p-1) - (N-1)q)/(q+1-p)`, positive iff `q < q_c`.
    pub fn coefficient_b(&self) -> f64 {
        let n = self.nf();
        (n * (self.p - 1.0) - (n - 1.0) * self.q) / self.excess()
    }

    /// `q̃ = p - 1 + p/N`.
    pub fn q_tilde(&self) -> f64 {
        self.p - 1.0 + self.p / self.nf()
    }

    /// Conjugate exponent `q* = q/(q+1-p)`.
    pub fn q_star(&self) -> f64 {
        self.q / self.excess()
    }

    /// Exponent `(q+1-p)b/(p-1)` of the power of `r` in the first integral.
    pub fn first_integral_exponent(&self) -> f64 {
        self.excess() * self.coefficient_b() / (self.p - 1.0)
    }

    /// Exponent `(p-N)/(p-1)` of the fundamental solution (zero when `p = N`).
    pub fn fundamental_exponent(&self) -> f64 {
        (self.p - self.nf()) / (self.p - 1.0)
    }

    /// Exponent `(1-N)/(p-1)` of `|u'|` for `p`-harmonic radial functions.
    pub fn flux_exponent(&self) -> f64 {
        (1.0 - self.nf()) / (self.p - 1.0)
    }

    pub fn p_equals_n(&self) -> bool {
        (self.p - self.nf()).abs() <= CRITICAL_TOL
    }

    pub fn is_critical(&self) -> bool {
        (self.q - self.q_c()).abs() <= CRITICAL_TOL
    }

    fn require_p_le_n(&self) -> Result<()> {
        if self.p > self.nf() + CRITICAL_TOL {
            return Err(Error::Regime(format!("requires p ≤ N, got p = {} > N = {}", self.p, self.n)));
        }
        Ok(())
    }

    /// Admissible range for the positive singular families: `1 < p ≤ N`, `p-1 < q < q_c`.
    pub fn require_subcritical(&self) -> Result<()> {
        self.require_p_le_n()?;
        if self.q >= self.q_c() - CRITICAL_TOL {
            return Err(Error::Regime(format!("requires q < q_c = {}, got q = {}", self.q_c(), self.q)));
        }
        Ok(())
    }

    /// Admissible range for the negative singular solution: `1 < p ≤ N`, `q_c < q < p`.
    pub fn require_supercritical_below_p(&self) -> Result<()> {
        self.require_p_le_n()?;
        if self.q <= self.q_c() + CRITICAL_TOL || self.q >= self.p - CRITICAL_TOL {
            return Err(Error::Regime(format!(
                "requires q_c = {} < q < p = {}, got q = {}",
                self.q_c(),
                self.p,
                self.q
            )));
        }
        Ok(())
    }

    /// `λ_{N,p,q} = β_q^{-1} (β_q(p-1) + p - N)^{1/(q+1-p)}`, the constant of the
    /// positive singular solution `λ r^{-β_q}`.
    pub fn lambda_singular(&self) -> Result<f64> {
        self.require_subcritical()?;
        let beta = self.beta_q();
        let base = beta * (self.p - 1.0) + self.p - self.nf();
        Ok(base.max(0.0).powf(1.0 / self.excess()) / beta)
    }

    /// `λ̃_{N,p,q} = β_q^{-1} (N - p - β_q(p-1))^{1/(q+1-p)}`, the constant of the
    /// negative singular solution `-λ̃ r^{-β_q}`.
    pub fn lambda_tilde(&self) -> Result<f64> {
        self.require_supercritical_below_p()?;
        let beta = self.beta_q();
        let base = self.nf() - self.p - beta * (self.p - 1.0);
        Ok(base.max(0.0).powf(1.0 / self.excess()) / beta)
    }

    /// Regime of `q` relative to `q_c`, `q̃` and `p`.
    ///
    /// Equalities are decided with [`CRITICAL_TOL`]. When `q = p = q_c`
    /// (which happens for `N = p`) the tag is `QEqualsP` with `critical` set.
    pub fn classify_regime(&self) -> Regime {
        let q_c = self.q_c();
        let q_tilde = self.q_tilde();
        let critical = (self.q - q_c).abs() <= CRITICAL_TOL;
        let tag = if (self.q - self.p).abs() <= CRITICAL_TOL {
            RegimeTag::QEqualsP
        } else if critical {
            RegimeTag::Critical
        } else if self.q > self.p {
            RegimeTag::QAboveP
        } else if self.q < q_c {
            RegimeTag::SubcriticalAbsorption
        } else {
            RegimeTag::SupercriticalBelowP
        };
        Regime { tag, q_c, q_tilde, critical, above_q_tilde: self.q >= q_tilde - CRITICAL_TOL }
    }
}

impl std::fmt::Display for ProblemParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={} p={} q={}", self.n, self.p, self.q)
    }
}
