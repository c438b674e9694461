//! The hull of all current and delayed positions as a set-valued Lyapunov
//! function, and checks of its decrease properties along traces.

use serde::Serialize;

use crate::dynamics::{SystemState, Trace};
use crate::error::{Error, Result};
use crate::geometry::{euclidean_diameter, PointSet};
use crate::sigma::{build_sigma, HullSet, SigmaKind};

/// Spread at or below which a state counts as consensus.
pub const SPREAD_TOL: f64 = 1e-7;
/// Boundary tolerance for critical-set membership.
pub const SIGMA_X_TOL: f64 = 1e-9;
/// Slack on strict mu comparisons for warped kinds.
pub const WARPED_MU_SLACK: f64 = 1e-6;

/// All `n h` slot values, deduplicated.
pub fn project_pi(state: &SystemState) -> PointSet {
    PointSet::new(state.slots().iter().cloned()).expect("states are nonempty and uniform")
}

pub fn spread(state: &SystemState) -> f64 {
    euclidean_diameter(&project_pi(state))
}

pub fn v_hull(state: &SystemState, kind: &SigmaKind) -> Result<HullSet> {
    build_sigma(kind, &project_pi(state))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub t: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DecreaseReport {
    pub windows_checked: usize,
    pub violations: Vec<Violation>,
    pub min_drop: Option<f64>,
    /// Smallest observed window drop; a sampled stand-in for the uniform
    /// decrease constant.
    pub beta_estimate: Option<f64>,
}

impl DecreaseReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovRecord {
    pub t: usize,
    pub mu_v: f64,
    pub inclusion_ok: Option<bool>,
    pub alpha: Option<Vec<usize>>,
}

fn hulls(trace: &Trace, kind: &SigmaKind) -> Result<Vec<HullSet>> {
    trace.states.iter().map(|s| v_hull(s, kind)).collect()
}

/// One-step nesting `V(t + 1) ⊆ V(t)` up to `tol` in world units.
pub fn check_monotone(trace: &Trace, kind: &SigmaKind, tol: f64) -> Result<DecreaseReport> {
    let hs = hulls(trace, kind)?;
    let mut report = DecreaseReport::default();
    for (t, w) in hs.windows(2).enumerate() {
        report.windows_checked += 1;
        let excess = w[1].excess_over(&w[0], tol)?;
        if !excess.is_empty() {
            let worst = excess.iter().copied().fold(0.0, f64::max);
            report.violations.push(Violation {
                t: t + 1,
                detail: format!("V({}) leaves V({t}) by {worst:.3e}", t + 1),
            });
        }
    }
    Ok(report)
}

pub fn mu_trace(trace: &Trace, kind: &SigmaKind) -> Result<Vec<f64>> {
    Ok(hulls(trace, kind)?.iter().map(HullSet::mu).collect())
}

/// `(n - 1)^2 (h + T)`.
pub fn window_length(n: usize, h: usize, window: usize) -> usize {
    (n - 1).pow(2) * (h + window)
}

/// Strict decrease of `mu(V)` across every window of length
/// `(n - 1)^2 (h + T)` that starts away from consensus.
pub fn check_window_decrease(trace: &Trace, kind: &SigmaKind, h: usize, window: usize) -> Result<DecreaseReport> {
    let n = trace.states[0].n();
    let len = window_length(n, h, window);
    if trace.len() <= len {
        return Err(Error::TraceTooShort {
            len: trace.len(),
            needed: len + 1,
        });
    }
    let slack = if kind.is_warped() { WARPED_MU_SLACK } else { 0.0 };
    let mut mu: Vec<Option<f64>> = vec![None; trace.len()];
    let mut mu_at = |t: usize| -> Result<f64> {
        if let Some(m) = mu[t] {
            return Ok(m);
        }
        let m = v_hull(&trace.states[t], kind)?.mu();
        mu[t] = Some(m);
        Ok(m)
    };
    let mut report = DecreaseReport::default();
    for t0 in 0..trace.len() - len {
        if spread(&trace.states[t0]) <= SPREAD_TOL {
            continue;
        }
        let (before, after) = (mu_at(t0)?, mu_at(t0 + len)?);
        let drop = before - after;
        report.windows_checked += 1;
        report.min_drop = Some(report.min_drop.map_or(drop, |d: f64| d.min(drop)));
        let decreased = after < before + slack;
        if !decreased {
            report.violations.push(Violation {
                t: t0,
                detail: format!("mu {before:.6e} -> {after:.6e} over [{t0}, {}]", t0 + len),
            });
        }
    }
    report.beta_estimate = report.min_drop;
    Ok(report)
}

/// `alpha[k][t - t0]`: number of agents whose position at `t` lies in the
/// critical set of `x_k(t0)` relative to `pi(x(t0))`.
pub fn alpha_counters(trace: &Trace, kind: &SigmaKind, t0: usize) -> Result<Vec<Vec<usize>>> {
    let start = trace.states.get(t0).ok_or(Error::TraceTooShort {
        len: trace.len(),
        needed: t0 + 1,
    })?;
    let s = project_pi(start);
    if s.is_singleton() {
        return Err(Error::SingletonState);
    }
    let hull = build_sigma(kind, &s)?;
    let n = start.n();
    let mut out = vec![Vec::with_capacity(trace.len() - t0); n];
    for state in &trace.states[t0..] {
        for (k, series) in out.iter_mut().enumerate() {
            let x = start.current(k);
            let mut count = 0;
            for j in 0..n {
                if hull.sigma_x_contains(x, state.current(j), SIGMA_X_TOL)? {
                    count += 1;
                }
            }
            series.push(count);
        }
    }
    Ok(out)
}

/// Every counter series is nonincreasing. A state already at consensus at
/// `t0` has nothing to count and passes.
pub fn check_alpha_monotone(trace: &Trace, kind: &SigmaKind, t0: usize) -> Result<bool> {
    match alpha_counters(trace, kind, t0) {
        Ok(series) => Ok(series.iter().all(|s| s.windows(2).all(|w| w[1] <= w[0]))),
        Err(Error::SingletonState) => Ok(true),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem3Report {
    /// Every current position lies in its own `V`.
    pub positions_in_v: bool,
    /// `V(t + 1) ⊆ V(t)` at every step.
    pub nesting: bool,
    /// Every window away from consensus shows a positive drop.
    pub uniform_decrease: bool,
    pub beta_estimate: Option<f64>,
    pub violations: Vec<Violation>,
}

impl Theorem3Report {
    pub fn passed(&self) -> bool {
        self.positions_in_v && self.nesting && self.uniform_decrease
    }
}

pub fn check_theorem3_conditions(trace: &Trace, kind: &SigmaKind, window: usize) -> Result<Theorem3Report> {
    let h = trace.states[0].h();
    let mut violations = Vec::new();
    let mut positions_in_v = true;
    for (t, state) in trace.states.iter().enumerate() {
        let v = v_hull(state, kind)?;
        for k in 0..state.n() {
            if !v.contains(state.current(k), SIGMA_X_TOL) {
                positions_in_v = false;
                violations.push(Violation {
                    t,
                    detail: format!("agent {} outside V", k + 1),
                });
            }
        }
    }
    let monotone = check_monotone(trace, kind, SIGMA_X_TOL)?;
    let decrease = check_window_decrease(trace, kind, h, window)?;
    let strictly_positive = decrease.min_drop.is_none_or(|d| d > 0.0);
    let uniform_decrease = decrease.passed() && strictly_positive;
    if decrease.passed() && !strictly_positive {
        violations.push(Violation {
            t: 0,
            detail: "window drop not bounded away from zero".into(),
        });
    }
    violations.extend(monotone.violations.iter().cloned());
    violations.extend(decrease.violations);
    Ok(Theorem3Report {
        positions_in_v,
        nesting: monotone.passed(),
        uniform_decrease,
        beta_estimate: decrease.beta_estimate,
        violations,
    })
}

/// Per-step summary: `mu(V)`, one-step nesting and (when `alpha_from` is
/// given) the counters from that start time onward.
pub fn lyapunov_records(trace: &Trace, kind: &SigmaKind, alpha_from: Option<usize>) -> Result<Vec<LyapunovRecord>> {
    let hs = hulls(trace, kind)?;
    let alpha = match alpha_from {
        Some(t0) => match alpha_counters(trace, kind, t0) {
            Ok(a) => Some((t0, a)),
            Err(Error::SingletonState) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    hs.iter()
        .enumerate()
        .map(|(t, v)| {
            let inclusion_ok = match t {
                0 => None,
                _ => Some(v.excess_over(&hs[t - 1], SIGMA_X_TOL)?.is_empty()),
            };
            let alpha = alpha
                .as_ref()
                .filter(|(t0, _)| t >= *t0)
                .map(|(t0, a)| a.iter().map(|s| s[t - t0]).collect());
            Ok(LyapunovRecord {
                t,
                mu_v: v.mu(),
                inclusion_ok,
                alpha,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, UpdatePolicy};
    use crate::geometry::Point;
    use crate::graph::{DelayGraph, GraphSchedule};

    fn xy(x: f64, y: f64) -> Point {
        Point::xy(x, y)
    }

    fn pair_trace(horizon: usize) -> Trace {
        let s = SystemState::at_rest(vec![xy(0.0, 0.0), xy(2.0, 0.0)], 1).unwrap();
        let g = DelayGraph::from_triples(2, 1, &[[1, 0, 2], [2, 0, 1]]).unwrap();
        simulate(
            &s,
            &GraphSchedule::constant(g),
            &SigmaKind::ConvexHull,
            &UpdatePolicy::shrink(0.5),
            horizon,
            0,
        )
        .unwrap()
    }

    fn rest_trace() -> Trace {
        let s = SystemState::at_rest(vec![xy(1.0, 1.0); 3], 2).unwrap();
        let g = DelayGraph::from_triples(3, 2, &[[1, 0, 2], [2, 1, 3]]).unwrap();
        simulate(&s, &GraphSchedule::constant(g), &SigmaKind::ConvexHull, &UpdatePolicy::default(), 30, 0).unwrap()
    }

    #[test]
    fn project_pi_examples() {
        let rest = SystemState::at_rest(vec![xy(1.0, 1.0); 3], 2).unwrap();
        assert!(project_pi(&rest).is_singleton());
        let two = SystemState::new(vec![vec![xy(0.0, 0.0); 2], vec![xy(1.0, 0.0); 2]]).unwrap();
        assert_eq!(project_pi(&two).len(), 2);
        let three = SystemState::at_rest(vec![xy(0.0, 0.0), xy(1.0, 0.0), xy(0.0, 1.0)], 1).unwrap();
        assert_eq!(project_pi(&three).len(), 3);
    }

    #[test]
    fn pair_mu_halves_each_step() {
        let mu = mu_trace(&pair_trace(5), &SigmaKind::ConvexHull).unwrap();
        assert!((mu[0] - 2.0).abs() < 1e-12);
        assert!((mu[1] - 1.0).abs() < 1e-12);
        assert!(mu.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn consensus_trace_is_vacuous() {
        let tr = rest_trace();
        let kind = SigmaKind::ConvexHull;
        assert!(mu_trace(&tr, &kind).unwrap().iter().all(|&m| m == 0.0));
        assert!(check_monotone(&tr, &kind, 1e-9).unwrap().passed());
        let w = check_window_decrease(&tr, &kind, 2, 0).unwrap();
        assert_eq!(w.windows_checked, 0);
        assert!(check_alpha_monotone(&tr, &kind, 0).unwrap());
        assert_eq!(alpha_counters(&tr, &kind, 0), Err(Error::SingletonState));
    }

    #[test]
    fn forged_jump_is_detected() {
        let mut tr = pair_trace(6);
        let forged = SystemState::at_rest(vec![xy(0.0, 0.0), xy(5.0, 0.0)], 1).unwrap();
        tr.states[3] = forged;
        let r = check_monotone(&tr, &SigmaKind::ConvexHull, 1e-9).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].t, 3);
    }

    #[test]
    fn pair_alpha_drops_after_first_step() {
        let tr = pair_trace(4);
        let a = alpha_counters(&tr, &SigmaKind::ConvexHull, 0).unwrap();
        assert_eq!(a[0], vec![1, 0, 0, 0, 0]);
        assert_eq!(a[1], vec![1, 0, 0, 0, 0]);
        assert!(check_alpha_monotone(&tr, &SigmaKind::ConvexHull, 0).unwrap());
    }

    #[test]
    fn window_decrease_on_pair() {
        let tr = pair_trace(40);
        let r = check_window_decrease(&tr, &SigmaKind::ConvexHull, 1, 0).unwrap();
        assert!(r.passed());
        assert!(r.beta_estimate.unwrap() > 0.0);
        assert!(matches!(
            check_window_decrease(&pair_trace(0), &SigmaKind::ConvexHull, 1, 0),
            Err(Error::TraceTooShort { .. })
        ));
    }

    #[test]
    fn theorem3_on_pair_and_on_frozen_split() {
        let kind = SigmaKind::ConvexHull;
        assert!(check_theorem3_conditions(&pair_trace(20), &kind, 0).unwrap().passed());
        let s = SystemState::at_rest(vec![xy(0.0, 0.0), xy(1.0, 1.0)], 1).unwrap();
        let tr = simulate(&s, &GraphSchedule::constant(DelayGraph::empty(2, 1)), &kind, &UpdatePolicy::default(), 10, 0).unwrap();
        let r = check_theorem3_conditions(&tr, &kind, 0).unwrap();
        assert!(r.positions_in_v && r.nesting);
        assert!(!r.uniform_decrease);
    }

    #[test]
    fn records_carry_alpha_from_start() {
        let recs = lyapunov_records(&pair_trace(3), &SigmaKind::ConvexHull, Some(1)).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(recs[0].inclusion_ok, None);
        assert!(recs[0].alpha.is_none());
        assert_eq!(recs[1].alpha.as_deref(), Some(&[1, 1][..]));
        assert!(recs.iter().skip(1).all(|r| r.inclusion_ok == Some(true)));
    }
}
