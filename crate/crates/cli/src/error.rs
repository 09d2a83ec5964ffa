use mzipmed_core::Error as CoreError;
use serde::Serialize;

/// Failure class, which determines the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// Unreadable input, invalid flags or configuration (exit 2).
    Input,
    /// A model failed to converge or produced unusable estimates (exit 3).
    Convergence,
    /// Too many resampling or simulation replicates failed (exit 4).
    Resampling,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Input => 2,
            ErrorKind::Convergence => 3,
            ErrorKind::Resampling => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Input, message: message.into() }
    }

    pub fn convergence(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Convergence, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    /// Single-line JSON rendering for stderr.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            kind: ErrorKind,
            exit_code: i32,
        }
        serde_json::to_string(&Line { error: &self.message, kind: self.kind, exit_code: self.exit_code() })
            .expect("error line serializes")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let kind = match e {
            CoreError::TooManyFailures { .. } => ErrorKind::Resampling,
            CoreError::NonFinite(_)
            | CoreError::NonConvergence(_)
            | CoreError::NotConverged
            | CoreError::SingularHessian
            | CoreError::SingularCovariance
            | CoreError::NonPositiveEstimate(_)
            | CoreError::NullTotalEffect => ErrorKind::Convergence,
            CoreError::RankDeficient
            | CoreError::DimensionMismatch(_)
            | CoreError::DegenerateOutcome(_)
            | CoreError::SpecMismatch(_)
            | CoreError::InvalidInput(_) => ErrorKind::Input,
        };
        Self { kind, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
