use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gradbem::Error),

    #[error("invalid configuration: {field}: {message}")]
    Config { field: String, message: String },

    #[error("cannot parse configuration: {0}")]
    ConfigSyntax(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report: {0}")]
    Report(String),

    #[error("stage '{stage}' failed: {source} (partial manifest at {manifest})")]
    StageFailed {
        stage: String,
        manifest: PathBuf,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    /// Machine-readable category printed on failure.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Config { .. } | CliError::ConfigSyntax(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Report(_) => "report",
            CliError::StageFailed { source, .. } => source.category(),
        }
    }

    /// Process exit code for the category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" | "argument" => 3,
            "io" => 4,
            "parse" => 5,
            "mesh" | "patch" | "remesh" => 6,
            "capacity" | "solver" | "overflow" => 7,
            "evaluation" | "metrics" => 8,
            "report" => 9,
            _ => 1,
        }
    }
}
