//! Numerical laboratory for the quasilinear equation `−Δₚu + |∇u|^q = 0`.
//!
//! The crate implements the explicit radial solution families, the critical
//! exponents and constants, the Keller–Osserman gradient barrier, an isolated
//! singularity classifier, and the hyperbolic model-space extensions.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::too_many_arguments)]

pub mod bounds;
pub mod error;
pub mod manifold;
pub mod numerics;
pub mod params;
pub mod radial_families;
pub mod radial_ode;
pub mod singularity;

pub use error::{Error, Result};
pub use params::{ProblemParams, Regime, RegimeTag};
