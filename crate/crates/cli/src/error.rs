use serde_json::json;
use tensormor_core::Error as CoreError;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// 2 for usage and configuration problems, 3 for numerical failures, 1
    /// otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(
                CoreError::InvalidArgument(_)
                | CoreError::Domain(_)
                | CoreError::UnsupportedCoefficient { .. }
                | CoreError::Capacity { .. },
            ) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Core(CoreError::Breakdown { .. }) => "breakdown",
            CliError::Core(CoreError::Divergence { .. }) => "divergence",
            CliError::Core(CoreError::Degenerate { .. }) => "degenerate",
            CliError::Core(CoreError::Capacity { .. }) => "capacity",
            CliError::Core(CoreError::Domain(_)) => "domain",
            CliError::Core(CoreError::InvalidArgument(_)) => "invalid-argument",
            CliError::Core(CoreError::UnsupportedCoefficient { .. }) => "unsupported-coefficient",
            CliError::Core(_) => "data",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON description for standard error.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        match self {
            CliError::Core(CoreError::Breakdown { pivot, condition, .. }) => {
                v["pivot"] = json!(pivot);
                v["condition"] = json!(condition.map(|c| if c.is_finite() { json!(c) } else { json!("inf") }));
            }
            CliError::Core(CoreError::Divergence { iteration, residual, trace }) => {
                v["iteration"] = json!(iteration);
                v["residual"] = json!(residual);
                v["trace_records"] = json!(trace.records.len());
            }
            CliError::Core(CoreError::Capacity { .. }) => {
                v["hint"] = json!("use a smaller grid or compress with tt-svd at lower dimension");
            }
            _ => {}
        }
        v
    }
}
