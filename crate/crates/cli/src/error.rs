use std::path::PathBuf;

use combidyn_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Parse {
        /// Dotted field path, or `<document>` for syntax errors.
        path: String,
        line: Option<usize>,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn parse(path: impl Into<String>, line: Option<usize>, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => match e.root() {
                CoreError::Infeasible | CoreError::Constraint(_) => "infeasible",
                CoreError::IntegrationDiverged { .. }
                | CoreError::AdjointDiverged { .. }
                | CoreError::TuViolation { .. } => "numeric",
                CoreError::EnumerationRefused { .. } => "refused",
                _ => "invalid",
            },
        }
    }

    /// 0 ok, 2 parse, 3 infeasible, 4 numeric, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "parse" => 2,
            "infeasible" => 3,
            "numeric" => 4,
            _ => 1,
        }
    }

    /// One machine-parseable line: `error: kind=... [field=... line=...] message="..."`.
    pub fn error_line(&self) -> String {
        let mut out = format!("error: kind={}", self.kind());
        if let CliError::Parse { path, line, .. } = self {
            out.push_str(&format!(" field={path}"));
            if let Some(l) = line {
                out.push_str(&format!(" line={l}"));
            }
        }
        if let CliError::Core(e) = self {
            if let CoreError::Step { step, .. } = e {
                out.push_str(&format!(" step={step}"));
            }
        }
        let message = match self {
            CliError::Parse { message, .. } => message.clone(),
            CliError::Core(e) => e.root().to_string(),
            other => other.to_string(),
        };
        out.push_str(&format!(" message={message:?}"));
        out
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
