use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{validate, Diagnostics, RunConfig};
use super::output::{plot_svg, trace_csv};
use super::{HarnessError, RunStatus};
use crate::dynamics::Trace;
use crate::error::Error;
use crate::lyapunov::{
    alpha_counters, check_monotone, check_theorem3_conditions, check_window_decrease, mu_trace, spread,
    DecreaseReport, Theorem3Report, SIGMA_X_TOL,
};
use crate::scenarios::{ExpectedOutcome, OutcomeCheck, Scenario};

/// A diagnostic result. Only applicable diagnostics affect the exit status;
/// the theorem checks assume agents use their current position and (for
/// window checks) a known connectivity window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Checked<T> {
    pub applicable: bool,
    pub passed: bool,
    pub result: T,
}

impl<T> Checked<T> {
    fn gates(&self) -> bool {
        self.applicable && !self.passed
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaRun {
    pub t0: usize,
    pub monotone: bool,
    /// `counters[k][t - t0]`; empty when the state at `t0` is a consensus.
    pub counters: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub kind: String,
    pub n: usize,
    pub h: usize,
    pub p: usize,
    pub horizon: usize,
    pub seed: u64,
    pub j_self: usize,
    pub expected: ExpectedOutcome,
    pub outcome: OutcomeCheck,
    pub final_spread: f64,
    pub mu: Vec<f64>,
    pub monotone: Option<Checked<DecreaseReport>>,
    pub window_decrease: Option<Checked<DecreaseReport>>,
    pub alpha: Option<Checked<Vec<AlphaRun>>>,
    pub theorem3: Option<Checked<Theorem3Report>>,
    pub status: RunStatus,
    pub exit_code: i32,
}

pub struct RunResult {
    pub report: RunReport,
    pub trace: Trace,
    pub files: Vec<PathBuf>,
}

/// Simulate `scenario` and run the selected diagnostics.
pub fn evaluate(scenario: &Scenario, diag: &Diagnostics) -> Result<(Trace, RunReport), HarnessError> {
    let trace = scenario.run()?;
    let kind = &scenario.kind;
    let current_self = scenario.policy.j_self == 0;
    let h = scenario.initial.h();

    let monotone = if diag.monotone {
        let r = check_monotone(&trace, kind, SIGMA_X_TOL)?;
        Some(Checked {
            applicable: current_self,
            passed: r.passed(),
            result: r,
        })
    } else {
        None
    };
    let window_decrease = match (diag.window_decrease, scenario.window) {
        (true, Some(w)) => {
            let r = check_window_decrease(&trace, kind, h, w)?;
            Some(Checked {
                applicable: current_self,
                passed: r.passed(),
                result: r,
            })
        }
        _ => None,
    };
    let alpha = if diag.alpha {
        let mut runs = Vec::new();
        for &t0 in &diag.alpha_t0 {
            let counters = match alpha_counters(&trace, kind, t0) {
                Ok(c) => c,
                Err(Error::SingletonState) => Vec::new(),
                Err(e) => return Err(e.into()),
            };
            let monotone = counters.iter().all(|s| s.windows(2).all(|w| w[1] <= w[0]));
            runs.push(AlphaRun { t0, monotone, counters });
        }
        Some(Checked {
            applicable: current_self,
            passed: runs.iter().all(|r| r.monotone),
            result: runs,
        })
    } else {
        None
    };
    let theorem3 = match (diag.theorem3, scenario.window) {
        (true, Some(w)) => {
            let r = check_theorem3_conditions(&trace, kind, w)?;
            Some(Checked {
                applicable: current_self,
                passed: r.passed(),
                result: r,
            })
        }
        _ => None,
    };

    let outcome = scenario.check(&trace);
    let diag_failed = monotone.as_ref().is_some_and(Checked::gates)
        || window_decrease.as_ref().is_some_and(Checked::gates)
        || alpha.as_ref().is_some_and(Checked::gates)
        || theorem3.as_ref().is_some_and(Checked::gates);
    let status = if !outcome.met {
        RunStatus::OutcomeFailed
    } else if diag_failed {
        RunStatus::InvariantViolation
    } else {
        RunStatus::Pass
    };
    let report = RunReport {
        scenario: scenario.name.clone(),
        kind: kind.label(),
        n: scenario.initial.n(),
        h,
        p: scenario.initial.p(),
        horizon: scenario.horizon,
        seed: scenario.seed,
        j_self: scenario.policy.j_self,
        expected: scenario.expected.clone(),
        outcome,
        final_spread: spread(trace.last()),
        mu: mu_trace(&trace, kind)?,
        monotone,
        window_decrease,
        alpha,
        theorem3,
        status,
        exit_code: status.code(),
    };
    Ok((trace, report))
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, HarnessError> {
    fs::write(&path, contents).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Validate, simulate, check and write artifacts under `root`.
pub fn run(config: &RunConfig, root: &Path) -> Result<RunResult, HarnessError> {
    let issues = validate(config);
    if !issues.is_empty() {
        return Err(HarnessError::Invalid(issues));
    }
    let scenario = config.resolve()?;
    let (trace, report) = evaluate(&scenario, &config.diagnostics)?;
    let dir = root.join(&config.output.dir);
    fs::create_dir_all(&dir).map_err(|source| HarnessError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut files = vec![
        write(dir.join(&config.output.trace), &trace_csv(&trace))?,
        write(
            dir.join(&config.output.report),
            &serde_json::to_string_pretty(&report).expect("reports serialize"),
        )?,
    ];
    if config.output.plot {
        files.push(write(dir.join(&config.output.plot_file), &plot_svg(&trace, &report.mu))?);
    }
    Ok(RunResult { report, trace, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example4_builtins_pass() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["example4-delayed", "example4-current"] {
            let r = run(&RunConfig::builtin(name), dir.path()).unwrap();
            assert_eq!(r.report.status, RunStatus::Pass, "{name}: {}", r.report.outcome.detail);
        }
    }

    #[test]
    fn delayed_self_diagnostics_fail_but_do_not_gate() {
        let s = crate::scenarios::builtin("example4-delayed").unwrap();
        let (_, r) = evaluate(&s, &Diagnostics::default()).unwrap();
        let w = r.window_decrease.unwrap();
        assert!(!w.applicable && !w.passed);
        assert_eq!(r.status, RunStatus::Pass);
    }

    #[test]
    fn invalid_config_is_a_config_error() {
        let mut c = RunConfig::builtin("jointly-connected");
        c.horizon = Some(3);
        let e = run(&c, Path::new("/nonexistent")).err().unwrap();
        assert_eq!(e.status(), RunStatus::ConfigError);
        assert!(e.to_json().contains("\"exit_code\":2"));
    }

    #[test]
    fn unmet_outcome_is_exit_one() {
        let mut c = RunConfig::builtin("example4-current");
        c.horizon = Some(5);
        c.diagnostics.window_decrease = false;
        c.diagnostics.theorem3 = false;
        let dir = tempfile::tempdir().unwrap();
        let r = run(&c, dir.path()).unwrap();
        assert_eq!(r.report.exit_code, 1);
        assert_eq!(r.files.len(), 3);
    }
}
