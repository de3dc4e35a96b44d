use std::path::PathBuf;

use substrat_core::{
    DecomposeError, DiagramError, Error as CoreError, MeasureError, SpectralError, SubstError,
    TowerError,
};
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VALIDATION: u8 = 2;
    pub const REFUTED: u8 = 3;
    pub const NON_CONVERGENCE: u8 = 4;
    pub const IO: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse word {input:?}: {reason}")]
    Word { input: String, reason: String },
    #[error(
        "substitution {0:?} is neither a readable file, a fixture under $SUBSTRAT_FIXTURES, nor a built-in fixture"
    )]
    NotFound(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}
from_core!(
    SubstError,
    DecomposeError,
    TowerError,
    DiagramError,
    SpectralError,
    MeasureError
);

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Word { .. } => exit::VALIDATION,
            CliError::NotFound(_) | CliError::Io { .. } => exit::IO,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::Subst(e) => subst_code(e),
        CoreError::Decompose(e) => decompose_code(e),
        CoreError::Tower(TowerError::Decompose(e)) => decompose_code(e),
        CoreError::Tower(TowerError::Subst(e)) => subst_code(e),
        CoreError::Tower(_) | CoreError::Diagram(_) => exit::VALIDATION,
        CoreError::Spectral(SpectralError::NoConvergence { .. } | SpectralError::Degenerate) => {
            exit::NON_CONVERGENCE
        }
        CoreError::Spectral(_) => exit::VALIDATION,
        CoreError::Measure(MeasureError::NoConvergence { .. }) => exit::NON_CONVERGENCE,
        CoreError::Measure(MeasureError::Subst(e)) => subst_code(e),
        CoreError::Measure(_) => exit::VALIDATION,
    }
}

fn subst_code(e: &SubstError) -> u8 {
    match e {
        SubstError::NonStabilizing { .. } => exit::NON_CONVERGENCE,
        _ => exit::VALIDATION,
    }
}

fn decompose_code(e: &DecomposeError) -> u8 {
    match e {
        DecomposeError::AmbiguousDecomposition { .. } => exit::REFUTED,
        DecomposeError::Subst(e) => subst_code(e),
        _ => exit::VALIDATION,
    }
}
