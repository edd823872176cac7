//! Command implementations behind the `hnoether` binary. Each command
//! returns a serializable report; printing and exit codes are left to the
//! caller.

mod commands;
mod registry;
mod report;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::{
    cmd_check, cmd_examples, cmd_identity_check, cmd_integral, cmd_simulate, cmd_verify, SimulateOptions,
};
pub use registry::{example_names, example_source, load_example, EXAMPLES};
pub use report::{
    DivergenceSummary, DriftSummary, ExampleInfo, IdentityCaseSummary, IdentityReport, IntegralSummary,
    RelationSummary, Report, Reproducer, SymmetrySummary, SystemSummary, VerifySummary,
};

use crate::hamiltonian::{HamiltonianError, SystemError};
use crate::numerics::NumericsError;
use crate::parser::{ContextError, ParseError, SystemFileError, SystemSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    File(#[from] SystemFileError),
    #[error("cannot parse `{text}`: {source}")]
    Parse {
        text: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerics(NumericsError::Singular { .. } | NumericsError::NoConvergence { .. }) => {
                EXIT_NUMERIC
            }
            CliError::Hamiltonian(HamiltonianError::NotInvariant { .. } | HamiltonianError::Sampling { .. }) => {
                EXIT_VERDICT
            }
            _ => EXIT_USAGE,
        }
    }
}

/// Where a system definition comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemSource {
    Example(String),
    File(PathBuf),
}

impl SystemSource {
    pub fn load(&self) -> Result<SystemSpec, CliError> {
        match self {
            SystemSource::Example(name) => load_example(name),
            SystemSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() })?;
                Ok(crate::parser::parse_system_file(&text)?)
            }
        }
    }
}

/// Overrides applied to a loaded system before any check runs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Settings {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

impl Settings {
    pub fn apply(&self, mut spec: SystemSpec) -> Result<SystemSpec, CliError> {
        if let Some(seed) = self.seed {
            spec.system = spec.system.with_seed(seed);
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
            }
            spec.system = spec.system.with_tolerance(tol);
        }
        Ok(spec)
    }
}
