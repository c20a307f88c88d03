use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pgrad", version, about = "Numerical laboratory for -Δp u + |∇u|^q = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical exponents, singular constants and the regime of (N, p, q).
    Constants,
    /// Sample a radial family and write it as CSV.
    Family,
    /// Run a numerical verification; exits 0 iff every assertion passes.
    Verify {
        #[arg(value_enum)]
        which: Check,
    },
    /// Classify the singularity at the origin of a profile read from CSV.
    Classify {
        /// Profile in the `r,u,du` CSV format.
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    GradientBound,
    Supersolution,
    SupersolutionManifold,
    Harnack,
    Liouville,
    SphereConstant,
}

/// Flags shared by every command. Unset flags fall back to `--config`, then
/// to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Plain-text `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q: Option<f64>,
    /// Family kind, e.g. StrongSingular or RegularFluxK.
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long = "M", global = true, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    /// Ball radius.
    #[arg(long = "R", global = true, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Ricci lower-bound scale.
    #[arg(long = "B", global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Sectional lower-bound scale.
    #[arg(long = "Btilde", global = true, allow_negative_numbers = true)]
    pub b_tilde: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_lo: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub grid_hi: Option<f64>,
    #[arg(long, global = true)]
    pub grid_per_decade: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub window_lo: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub window_hi: Option<f64>,
    /// Classification tolerance.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}
