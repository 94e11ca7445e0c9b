//! Command-line front end for `loewner-core`.
//!
//! A run is described by a [`config::RunConfig`], dispatched by
//! [`commands::run`] and reported as an [`envelope::Envelope`]. Exit codes:
//! `0` success, `2` invalid input, `3` numerical failure.

use std::path::PathBuf;

use serde_json::{json, Value};

pub mod commands;
pub mod config;
pub mod envelope;
pub mod export;
pub mod parallel;
pub mod tokens;

pub use commands::run;
pub use config::RunConfig;
pub use envelope::Envelope;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] loewner_core::Error),
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("format error: {0}")]
    Format(String),
}

impl CliError {
    pub fn config(key: &str, message: String) -> Self {
        CliError::Config { key: key.to_string(), message }
    }

    pub fn io(path: PathBuf, source: std::io::Error) -> Self {
        CliError::Io { path, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) if e.is_validation() => "validation",
            CliError::Core(_) => "numerical",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Format(_) => "format",
        }
    }

    /// Structured fields of the failure, for the error envelope.
    pub fn diagnostics(&self) -> Value {
        use loewner_core::Error as E;
        let c = |z: loewner_core::Complex64| json!([z.re, z.im]);
        match self {
            CliError::Core(e) => match e {
                E::Convergence { last, previous, horizon } => {
                    json!({ "error": "convergence", "last": c(*last), "previous": c(*previous), "horizon": horizon })
                }
                E::BarrierViolation { t, modulus } => json!({ "error": "barrier-violation", "t": t, "modulus": modulus }),
                E::IntegrationFailure { last_good_time } => {
                    json!({ "error": "integration-failure", "last_good_time": last_good_time })
                }
                E::StepBudget { last_good_time } => json!({ "error": "step-budget", "last_good_time": last_good_time }),
                E::Extrapolation { t } => json!({ "error": "extrapolation", "t": t }),
                E::TimeSingularity { t } => json!({ "error": "time-singularity", "t": t }),
                E::BoundaryResolution { theta, residual } => {
                    json!({ "error": "boundary-resolution", "theta": theta, "residual": residual })
                }
                E::BeckerConditionViolated { margin } => json!({ "error": "becker-condition", "margin": margin }),
                E::NotQuasiconformal { rho, modulus } => json!({ "error": "not-quasiconformal", "rho": rho, "modulus": modulus }),
                E::SingularValue { z, t } => json!({ "error": "singular-value", "z": c(*z), "t": t }),
                E::NotHerglotz { z, t, re } => json!({ "error": "not-herglotz", "z": c(*z), "t": t, "re": re }),
                E::OutOfDisk { z } => json!({ "error": "out-of-disk", "z": c(*z) }),
                E::OutsideSamples { z } => json!({ "error": "outside-samples", "z": c(*z) }),
                E::DegenerateJacobian { z } => json!({ "error": "degenerate-jacobian", "z": c(*z) }),
                E::DerivativeDegenerate { z } => json!({ "error": "derivative-degenerate", "z": c(*z) }),
                E::CannotInvert { defect } => json!({ "error": "cannot-invert", "defect": defect }),
                other => json!({ "error": format!("{other:?}") }),
            },
            CliError::Config { key, .. } => json!({ "key": key }),
            CliError::Io { path, source } => json!({ "path": path.display().to_string(), "io": source.kind().to_string() }),
            CliError::Format(_) => Value::Null,
        }
    }
}
