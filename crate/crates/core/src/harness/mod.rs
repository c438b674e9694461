//! Config-driven runs: resolve a scenario, simulate, check diagnostics and
//! write the trace, report and plot.

mod config;
mod output;
mod run;

pub use config::{validate, ConfigIssue, Diagnostics, OutputConfig, RunConfig, ScenarioSource};
pub use output::{plot_svg, trace_csv};
pub use run::{evaluate, run, AlphaRun, Checked, RunReport, RunResult};

use std::path::PathBuf;

use thiserror::Error;

/// Output root override for relative output directories.
pub const OUT_ROOT_ENV: &str = "SIGMA_CONSENSUS_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Pass,
    OutcomeFailed,
    ConfigError,
    InvariantViolation,
}

impl RunStatus {
    pub fn code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::OutcomeFailed => 1,
            RunStatus::ConfigError => 2,
            RunStatus::InvariantViolation => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config could not be parsed: {0}")]
    Parse(String),
    #[error("config is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ConfigIssue>),
    #[error(transparent)]
    Core(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn status(&self) -> RunStatus {
        match self {
            HarnessError::Parse(_) | HarnessError::Invalid(_) | HarnessError::Io { .. } => RunStatus::ConfigError,
            HarnessError::Core(crate::Error::Invariant(_)) => RunStatus::InvariantViolation,
            HarnessError::Core(_) => RunStatus::ConfigError,
        }
    }

    /// One-line JSON error record.
    pub fn to_json(&self) -> String {
        let issues = match self {
            HarnessError::Invalid(v) => v.clone(),
            _ => Vec::new(),
        };
        serde_json::json!({
            "status": self.status(),
            "exit_code": self.status().code(),
            "error": self.to_string(),
            "issues": issues,
        })
        .to_string()
    }
}

/// `SIGMA_CONSENSUS_OUT` when set, else the working directory.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}
