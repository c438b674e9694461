use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::lyapunov::window_length;
use crate::scenarios::{builtin, Scenario, BUILTIN_NAMES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioSource {
    Builtin(String),
    Inline(Box<Scenario>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    pub monotone: bool,
    pub window_decrease: bool,
    pub alpha: bool,
    /// Start times for the critical-set counters.
    pub alpha_t0: Vec<usize>,
    pub theorem3: bool,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            monotone: true,
            window_decrease: true,
            alpha: true,
            alpha_t0: vec![0],
            theorem3: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths resolve against the output root.
    pub dir: PathBuf,
    pub trace: String,
    pub report: String,
    pub plot: bool,
    pub plot_file: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            trace: "trace.csv".into(),
            report: "report.json".into(),
            plot: true,
            plot_file: "plot.svg".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    /// Overrides the scenario's horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// Overrides the scenario's seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn builtin(name: &str) -> Self {
        RunConfig {
            scenario: ScenarioSource::Builtin(name.into()),
            horizon: None,
            seed: None,
            diagnostics: Diagnostics::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn inline(scenario: Scenario) -> Self {
        RunConfig {
            scenario: ScenarioSource::Inline(Box::new(scenario)),
            ..RunConfig::builtin("")
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// The scenario with overrides applied.
    pub fn resolve(&self) -> Result<Scenario, HarnessError> {
        let mut s = match &self.scenario {
            ScenarioSource::Builtin(name) => builtin(name).ok_or_else(|| {
                HarnessError::Invalid(vec![ConfigIssue::new(
                    "scenario.builtin",
                    format!("unknown builtin {name:?}; known: {}", BUILTIN_NAMES.join(", ")),
                )])
            })?,
            ScenarioSource::Inline(s) => (**s).clone(),
        };
        if let Some(h) = self.horizon {
            s.horizon = h;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl ConfigIssue {
    fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigIssue {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Schema-level and cross-field problems; empty means the config runs.
pub fn validate(config: &RunConfig) -> Vec<ConfigIssue> {
    let s = match config.resolve() {
        Ok(s) => s,
        Err(HarnessError::Invalid(v)) => return v,
        Err(e) => return vec![ConfigIssue::new("scenario", e.to_string())],
    };
    let mut issues = Vec::new();
    let (n, h, p) = (s.initial.n(), s.initial.h(), s.initial.p());
    if let Err(e) = s.kind.validate(p) {
        issues.push(ConfigIssue::new("scenario.kind", e.to_string()));
    }
    if let Err(e) = s.policy.validate(h) {
        issues.push(ConfigIssue::new("scenario.policy", e.to_string()));
    }
    if (s.schedule.n(), s.schedule.h()) != (n, h) {
        issues.push(ConfigIssue::new(
            "scenario.schedule",
            format!(
                "schedule has n = {}, h = {} but the initial state has n = {n}, h = {h}",
                s.schedule.n(),
                s.schedule.h()
            ),
        ));
    }
    let d = &config.diagnostics;
    if let (true, Some(w)) = (d.window_decrease || d.theorem3, s.window) {
        let need = window_length(n, h, w);
        if s.horizon < need {
            issues.push(ConfigIssue::new(
                "horizon",
                format!("window decrease needs horizon >= {need}, got {}", s.horizon),
            ));
        }
    }
    if d.alpha {
        if let Some(&t0) = d.alpha_t0.iter().find(|&&t0| t0 > s.horizon) {
            issues.push(ConfigIssue::new(
                "diagnostics.alpha_t0",
                format!("start time {t0} is past the horizon {}", s.horizon),
            ));
        }
    }
    issues
}
