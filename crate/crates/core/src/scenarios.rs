//! Canned experiments: the delayed-self counterexample, isolated groups
//! and seeded jointly connected runs.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, SystemState, Trace, UpdatePolicy};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};
use crate::graph::{DelayArc, DelayGraph, GraphSchedule, RandomSchedule};
use crate::lyapunov::{spread, window_length};
use crate::sigma::{build_sigma, SigmaKind};

/// Probability of each extra random arc per step in generated schedules.
pub const RANDOM_ARC_DENSITY: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ExpectedOutcome {
    /// Final spread of all slots below `tol`.
    Consensus { tol: f64 },
    /// Spread never below `min_spread` and the listed agents (1-based)
    /// never move.
    PersistentSplit {
        min_spread: f64,
        #[serde(default)]
        frozen: Vec<usize>,
    },
    /// Even- and odd-time positions of `agent` (1-based) settle on two
    /// distinct values: over the last `tail` samples of each subsequence,
    /// spread below `settle` and mean gap above `min_gap`.
    Oscillation {
        agent: usize,
        min_gap: f64,
        #[serde(default = "default_tail")]
        tail: usize,
        #[serde(default = "default_settle")]
        settle: f64,
    },
}

fn default_tail() -> usize {
    200
}

fn default_settle() -> f64 {
    1e-6
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeCheck {
    pub met: bool,
    /// Final spread, smallest spread or subsequence gap, by outcome.
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub initial: SystemState,
    pub schedule: GraphSchedule,
    pub kind: SigmaKind,
    #[serde(default)]
    pub policy: UpdatePolicy,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    /// Connectivity window `T`, when the schedule guarantees one.
    #[serde(default)]
    pub window: Option<usize>,
    pub expected: ExpectedOutcome,
}

impl Scenario {
    pub fn run(&self) -> Result<Trace> {
        simulate(&self.initial, &self.schedule, &self.kind, &self.policy, self.horizon, self.seed)
    }

    /// `(n - 1)^2 (h + T)` when a window is known.
    pub fn decrease_window(&self) -> Option<usize> {
        self.window
            .map(|w| window_length(self.initial.n(), self.initial.h(), w))
    }

    pub fn check(&self, trace: &Trace) -> OutcomeCheck {
        check_outcome(&self.expected, trace)
    }
}

pub fn check_outcome(expected: &ExpectedOutcome, trace: &Trace) -> OutcomeCheck {
    match *expected {
        ExpectedOutcome::Consensus { tol } => {
            let s = spread(trace.last());
            OutcomeCheck {
                met: s < tol,
                value: s,
                detail: format!("final spread {s:.3e} against {tol:.1e}"),
            }
        }
        ExpectedOutcome::PersistentSplit {
            min_spread,
            ref frozen,
        } => {
            let lowest = trace.states.iter().map(spread).fold(f64::INFINITY, f64::min);
            let first = &trace.states[0];
            let moved: Vec<usize> = frozen
                .iter()
                .copied()
                .filter(|&k| {
                    k == 0
                        || k > first.n()
                        || trace.states.iter().any(|s| {
                            (0..s.h()).any(|j| s.get(k - 1, j) != first.get(k - 1, j))
                        })
                })
                .collect();
            OutcomeCheck {
                met: lowest >= min_spread - 1e-12 && moved.is_empty(),
                value: lowest,
                detail: format!("smallest spread {lowest:.6e} against {min_spread:.6e}; moved frozen agents {moved:?}"),
            }
        }
        ExpectedOutcome::Oscillation {
            agent,
            min_gap,
            tail,
            settle,
        } => match oscillation(trace, agent, tail) {
            Some((gap, sa, sb)) => OutcomeCheck {
                met: sa < settle && sb < settle && gap > min_gap,
                value: gap,
                detail: format!("subsequence gap {gap:.6e}, spreads {sa:.1e} / {sb:.1e}"),
            },
            None => OutcomeCheck {
                met: false,
                value: 0.0,
                detail: format!("trace too short for {tail} samples per parity"),
            },
        },
    }
}

/// Gap between the means of the last `tail` even-time and odd-time
/// positions of `agent` (1-based), and the spread of each subsequence.
pub fn oscillation(trace: &Trace, agent: usize, tail: usize) -> Option<(f64, f64, f64)> {
    if agent == 0 || agent > trace.states[0].n() || tail == 0 {
        return None;
    }
    let path = trace.path(agent - 1);
    let tail_of = |parity: usize| -> Option<Vec<&Point>> {
        let sub: Vec<&Point> = path.iter().copied().skip(parity).step_by(2).collect();
        (sub.len() >= tail).then(|| sub[sub.len() - tail..].to_vec())
    };
    let (even, odd) = (tail_of(0)?, tail_of(1)?);
    let stats = |pts: &[&Point]| {
        let p = pts[0].dim();
        let mean: Vec<f64> = (0..p)
            .map(|i| pts.iter().map(|x| x.coords()[i]).sum::<f64>() / pts.len() as f64)
            .collect();
        let set = PointSet::new(pts.iter().map(|x| (*x).clone())).expect("nonempty tail");
        (mean, crate::geometry::euclidean_diameter(&set))
    };
    let (ma, sa) = stats(&even);
    let (mb, sb) = stats(&odd);
    let gap = ma.iter().zip(&mb).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Some((gap, sa, sb))
}

/// Three agents, `h = 2`, alternating graphs
/// `{((2,1),1), ((1,0),2)}` and `{((2,1),3), ((3,0),2)}`.
pub fn example4_schedule() -> GraphSchedule {
    GraphSchedule::periodic(vec![
        DelayGraph::from_triples(3, 2, &[[2, 1, 1], [1, 0, 2]]).expect("valid arcs"),
        DelayGraph::from_triples(3, 2, &[[2, 1, 3], [3, 0, 2]]).expect("valid arcs"),
    ])
    .expect("same shape")
}

pub fn example4_counterexample(delayed_self: bool) -> Scenario {
    let initial = SystemState::at_rest(
        vec![Point::xy(0.0, 0.0), Point::xy(2.0, 0.0), Point::xy(4.0, 0.0)],
        2,
    )
    .expect("valid state");
    let (name, j_self, expected) = if delayed_self {
        (
            "example4-delayed",
            1,
            ExpectedOutcome::Oscillation {
                agent: 2,
                min_gap: 0.01,
                tail: default_tail(),
                settle: default_settle(),
            },
        )
    } else {
        ("example4-current", 0, ExpectedOutcome::Consensus { tol: 1e-3 })
    };
    Scenario {
        name: name.into(),
        initial,
        schedule: example4_schedule(),
        kind: SigmaKind::ConvexHull,
        policy: UpdatePolicy::shrink(0.5).with_j_self(j_self),
        horizon: 2000,
        seed: 0,
        window: Some(1),
        expected,
    }
}

/// Groups `l1` and `l2` (1-based) exchange only internally and start at
/// `y` and `ybar`; every other agent listens to everyone and starts on the
/// pullback segment between them. Runs for `t_isolated` steps.
#[allow(clippy::too_many_arguments)]
pub fn split_groups(
    n: usize,
    h: usize,
    l1: &BTreeSet<usize>,
    l2: &BTreeSet<usize>,
    y: Point,
    ybar: Point,
    kind: SigmaKind,
    t_isolated: usize,
) -> Result<Scenario> {
    if l1.is_empty() || l2.is_empty() || !l1.is_disjoint(l2) {
        return Err(Error::InvalidGroups);
    }
    if let Some(&bad) = l1.union(l2).find(|&&k| k == 0 || k > n) {
        return Err(Error::NodeOutOfRange { node: bad, n });
    }
    if y.distance(&ybar) == 0.0 || h == 0 {
        return Err(Error::InvalidGroups);
    }
    let seg = build_sigma(&kind, &PointSet::new([y.clone(), ybar.clone()])?)?;
    let others: Vec<usize> = (1..=n).filter(|k| !l1.contains(k) && !l2.contains(k)).collect();
    let mut positions = Vec::with_capacity(n);
    let mut arcs = Vec::new();
    for l in 1..=n {
        let group = if l1.contains(&l) {
            Some(l1)
        } else if l2.contains(&l) {
            Some(l2)
        } else {
            None
        };
        match group {
            Some(g) => {
                positions.push(if std::ptr::eq(g, l1) { y.clone() } else { ybar.clone() });
                arcs.extend(g.iter().filter(|&&k| k != l).map(|&k| DelayArc::new(k - 1, 0, l - 1)));
            }
            None => {
                let i = others.iter().position(|&k| k == l).expect("listed");
                let lambda = (i + 1) as f64 / (others.len() + 2) as f64;
                positions.push(seg.pullback_point(&y, &ybar, lambda));
                arcs.extend((1..=n).filter(|&k| k != l).map(|k| DelayArc::new(k - 1, 0, l - 1)));
            }
        }
    }
    let graph = DelayGraph::with_arcs(n, h, arcs)?;
    Ok(Scenario {
        name: "split-groups".into(),
        initial: SystemState::at_rest(positions, h)?,
        schedule: GraphSchedule::constant(graph),
        kind,
        policy: UpdatePolicy::default(),
        horizon: t_isolated,
        seed: 0,
        window: None,
        expected: ExpectedOutcome::PersistentSplit {
            min_spread: y.distance(&ybar),
            frozen: l1.union(l2).copied().collect(),
        },
    })
}

/// Seeded random schedule with a root on every `T`-window, random start
/// in `[-5, 5]^p`, default horizon `50 (n - 1)^2 (h + T)`.
pub fn jointly_connected_random(
    n: usize,
    h: usize,
    window: usize,
    p: usize,
    kind: SigmaKind,
    seed: u64,
    horizon: Option<usize>,
) -> Result<Scenario> {
    if n < 2 || h == 0 {
        return Err(Error::InvalidState(format!("need n >= 2 and h >= 1, got n = {n}, h = {h}")));
    }
    kind.validate(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = (0..n)
        .map(|_| Point::new((0..p).map(|_| rng.gen_range(-5.0..5.0)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        name: format!("jointly-connected-n{n}-h{h}-T{window}-s{seed}"),
        initial: SystemState::at_rest(positions, h)?,
        schedule: GraphSchedule::Random(RandomSchedule {
            n,
            h,
            window,
            density: RANDOM_ARC_DENSITY,
            seed,
            jointly_connected: true,
        }),
        kind,
        policy: UpdatePolicy::default(),
        horizon: horizon.unwrap_or(50 * window_length(n, h, window)),
        seed,
        window: Some(window),
        expected: ExpectedOutcome::Consensus { tol: 1e-3 },
    })
}

pub const BUILTIN_NAMES: [&str; 5] = [
    "example4-delayed",
    "example4-current",
    "split-groups",
    "jointly-connected",
    "jointly-connected-warped",
];

pub fn builtin(name: &str) -> Option<Scenario> {
    let mut s = match name {
        "example4-delayed" => example4_counterexample(true),
        "example4-current" => example4_counterexample(false),
        "split-groups" => split_groups(
            3,
            1,
            &BTreeSet::from([1]),
            &BTreeSet::from([2]),
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 1.0),
            SigmaKind::ConvexHull,
            1000,
        )
        .ok()?,
        "jointly-connected" => jointly_connected_random(3, 2, 2, 2, SigmaKind::ConvexHull, 7, None).ok()?,
        "jointly-connected-warped" => jointly_connected_random(
            5,
            3,
            4,
            2,
            SigmaKind::norm_rotation(0.04, SigmaKind::ConvexHull),
            7,
            None,
        )
        .ok()?,
        _ => return None,
    };
    s.name = name.into();
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{root_across, verify_uniform_connectivity};

    #[test]
    fn example4_schedule_matches_arcs_and_round_trips() {
        let s = example4_counterexample(true);
        assert_eq!(s.schedule.graph_at(0).to_triples(), vec![[1, 0, 2], [2, 1, 1]]);
        assert_eq!(s.schedule.graph_at(1).to_triples(), vec![[2, 1, 3], [3, 0, 2]]);
        let text = toml::to_string(&s).unwrap();
        let back: Scenario = toml::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!((0..50).all(|t| root_across(&s.schedule, t, 1).is_some()));
    }

    #[test]
    fn two_isolated_agents_never_move() {
        let s = split_groups(
            2,
            1,
            &BTreeSet::from([1]),
            &BTreeSet::from([2]),
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 1.0),
            SigmaKind::ConvexHull,
            50,
        )
        .unwrap();
        assert!(s.schedule.graph_at(0).is_empty());
        let tr = s.run().unwrap();
        assert!(tr.states.iter().all(|x| *x == s.initial));
        assert!(s.check(&tr).met);
    }

    #[test]
    fn third_agent_moves_but_groups_hold() {
        let s = builtin("split-groups").unwrap();
        let tr = s.run().unwrap();
        let c = s.check(&tr);
        assert!(c.met, "{}", c.detail);
        assert!(c.value >= 2f64.sqrt() - 1e-12);
        assert_ne!(tr.last().current(2), s.initial.current(2));
        assert!(!verify_uniform_connectivity(&s.schedule, 20, 5));
    }

    #[test]
    fn complete_group_stays_at_y() {
        let s = split_groups(
            4,
            2,
            &BTreeSet::from([1, 2]),
            &BTreeSet::from([3]),
            Point::xy(-1.0, 0.0),
            Point::xy(3.0, 0.0),
            SigmaKind::ConvexHull,
            30,
        )
        .unwrap();
        let tr = s.run().unwrap();
        assert!(tr.states.iter().all(|x| x.current(0) == &Point::xy(-1.0, 0.0)));
        assert!(s.check(&tr).met);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let r = split_groups(
            3,
            1,
            &BTreeSet::from([1, 2]),
            &BTreeSet::from([2]),
            Point::xy(0.0, 0.0),
            Point::xy(1.0, 1.0),
            SigmaKind::ConvexHull,
            10,
        );
        assert_eq!(r, Err(Error::InvalidGroups));
    }

    #[test]
    fn jointly_connected_schedule_has_roots() {
        let s = jointly_connected_random(3, 2, 2, 2, SigmaKind::ConvexHull, 7, None).unwrap();
        assert_eq!(s.horizon, 800);
        assert!(verify_uniform_connectivity(&s.schedule, s.horizon, 2));
        let c = s.check(&s.run().unwrap());
        assert!(c.met, "{}", c.detail);
    }

    #[test]
    fn builtins_are_listed() {
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name).unwrap().name, name);
        }
        assert!(builtin("nope").is_none());
    }
}
