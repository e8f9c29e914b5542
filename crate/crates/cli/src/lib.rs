//! Experiment harness: named experiments that read flat parameters, write
//! deterministic artifacts and a summary record with pass/fail assertions.

pub mod bundle;
pub mod config;
mod experiments;

use std::fmt;
use std::path::Path;

pub use featurespace;

pub use bundle::{Assertion, Bundle, Summary};
pub use config::{parse_kernel, parse_points, Params};

pub const EXPERIMENTS: &[&str] = &[
    "gram",
    "psd",
    "order-chain",
    "monotone-limit",
    "feature-verify",
    "gaussian-mc",
    "dual-pairing",
    "delta-expand",
    "order-operator",
    "multiplier",
    "ifs-figure",
    "ifs-kernel",
    "ktransform-roundtrip",
];

#[derive(Debug)]
pub enum HarnessError {
    /// Unknown experiment, malformed parameters or config file.
    Config(String),
    /// The output directory or a file in it could not be written.
    Output(String),
    /// The computation itself failed.
    Kernel(featurespace::KernelError),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Output(_) => 2,
            HarnessError::Kernel(_) => 1,
        }
    }
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(m) => write!(f, "config error: {m}"),
            HarnessError::Output(m) => write!(f, "output error: {m}"),
            HarnessError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<featurespace::KernelError> for HarnessError {
    fn from(e: featurespace::KernelError) -> Self {
        HarnessError::Kernel(e)
    }
}

/// Runs experiment `name` and writes its bundle into `out`.
pub fn run(name: &str, params: &Params, out: &Path) -> Result<Summary, HarnessError> {
    let f = match name {
        "gram" => experiments::gram_matrix,
        "psd" => experiments::psd,
        "order-chain" => experiments::order_chain,
        "monotone-limit" => experiments::monotone_limit_exp,
        "feature-verify" => experiments::feature_verify,
        "gaussian-mc" => experiments::gaussian_mc,
        "dual-pairing" => experiments::dual_pairing_exp,
        "delta-expand" => experiments::delta_expand_exp,
        "order-operator" => experiments::order_operator,
        "multiplier" => experiments::multiplier,
        "ifs-figure" => experiments::ifs_figure,
        "ifs-kernel" => experiments::ifs_kernel_exp,
        "ktransform-roundtrip" => experiments::ktransform_roundtrip,
        other => return Err(HarnessError::Config(format!("unknown experiment `{other}`"))),
    };
    let mut bundle = Bundle::create(out, name, params.as_json())?;
    f(params, &mut bundle)?;
    bundle.finish()
}
