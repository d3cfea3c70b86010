use std::path::Path;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mellin_sampling::Error),

    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },

    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("failing checks: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn read(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Read { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Write { path: path.display().to_string(), message: e.to_string() }
    }

    /// Stable identifier reported in the error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Read { .. } | CliError::Write { .. } => "io",
            CliError::Config(_) => "config",
            CliError::ChecksFailed(_) => "checks-failed",
        }
    }

    /// Process exit status: 1 failed checks, 2 bad configuration or
    /// parameters, 3 unparsable input data, 4 I/O, 5 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use mellin_sampling::Error as E;
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Read { .. } | CliError::Write { .. } => 4,
            CliError::Core(e) => match root(e) {
                E::InvalidParameter(_) | E::DimensionMismatch { .. } | E::Domain(_) => 2,
                E::Parse(_) => 3,
                _ => 5,
            },
        }
    }

    /// `{"code": …, "message": …}`, plus the failing check names when present.
    pub fn to_json(&self) -> String {
        let mut doc = serde_json::json!({ "code": self.code(), "message": self.to_string() });
        if let CliError::ChecksFailed(names) = self {
            doc["failing_checks"] = serde_json::json!(names);
        }
        doc.to_string()
    }
}

fn root(e: &mellin_sampling::Error) -> &mellin_sampling::Error {
    match e {
        mellin_sampling::Error::Trial { source, .. } => root(source),
        other => other,
    }
}
