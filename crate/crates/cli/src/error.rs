use serde::Serialize;

/// Exit code when every check passed.
pub const EXIT_PASS: i32 = 0;
/// Exit code for a failed check or a runtime error.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for bad flags or configuration.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] iadof::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    /// Parameter problems reported by the library count as usage errors;
    /// everything else (numerics, corrupted inputs, I/O) as failures.
    pub fn exit_code(&self) -> i32 {
        use iadof::Error::{InvalidConfig, InvalidGrid, NotApplicable};
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(InvalidConfig(_) | InvalidGrid(_) | NotApplicable(_)) => EXIT_USAGE,
            _ => EXIT_FAIL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => core_kind(e),
            CliError::Io { .. } => "io",
            CliError::Input(_) => "input",
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind().to_string(),
            message: self.to_string(),
        }
    }
}

fn core_kind(e: &iadof::Error) -> &'static str {
    use iadof::Error::*;
    match e {
        InvalidConfig(_) => "invalid_config",
        SlotsExhausted { .. } => "slots_exhausted",
        Shape(_) => "shape",
        MuCapExceeded { .. } => "mu_cap_exceeded",
        IllConditioned { .. } => "ill_conditioned",
        Eigen(_) => "eigen",
        RankDeficient(_) => "rank_deficient",
        NotApplicable(_) => "not_applicable",
        NotSeparable { .. } => "not_separable",
        InvalidGrid(_) => "invalid_grid",
        Numerical(_) => "numerical",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}
