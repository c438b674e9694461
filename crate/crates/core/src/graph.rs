//! Directed graphs with delays and time-indexed schedules of them.
//!
//! An arc `((k, j), l)` means agent `l` receives the position agent `k`
//! held `j` steps ago. Agents are 0-based in memory; the triple form used
//! in configuration files and fixtures is 1-based for agents and 0-based
//! for delays.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DelayArc {
    pub from: usize,
    pub delay: usize,
    pub to: usize,
}

impl DelayArc {
    pub fn new(from: usize, delay: usize, to: usize) -> Self {
        DelayArc { from, delay, to }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayGraph {
    n: usize,
    h: usize,
    arcs: BTreeSet<DelayArc>,
}

impl DelayGraph {
    pub fn empty(n: usize, h: usize) -> Self {
        DelayGraph {
            n,
            h,
            arcs: BTreeSet::new(),
        }
    }

    pub fn with_arcs(n: usize, h: usize, arcs: impl IntoIterator<Item = DelayArc>) -> Result<Self> {
        let mut g = DelayGraph::empty(n, h);
        for a in arcs {
            g.insert(a)?;
        }
        Ok(g)
    }

    /// From 1-based `(k, j, l)` triples.
    pub fn from_triples(n: usize, h: usize, triples: &[[usize; 3]]) -> Result<Self> {
        let mut g = DelayGraph::empty(n, h);
        for &[k, j, l] in triples {
            if k == 0 || l == 0 {
                return Err(Error::InvalidArc {
                    from: k,
                    delay: j,
                    to: l,
                    n,
                    h,
                });
            }
            g.insert(DelayArc::new(k - 1, j, l - 1))?;
        }
        Ok(g)
    }

    /// 1-based `(k, j, l)` triples in arc order.
    pub fn to_triples(&self) -> Vec<[usize; 3]> {
        self.arcs
            .iter()
            .map(|a| [a.from + 1, a.delay, a.to + 1])
            .collect()
    }

    pub fn insert(&mut self, a: DelayArc) -> Result<()> {
        if a.from >= self.n || a.to >= self.n || a.delay >= self.h || (a.from == a.to && a.delay == 0) {
            return Err(Error::InvalidArc {
                from: a.from + 1,
                delay: a.delay,
                to: a.to + 1,
                n: self.n,
                h: self.h,
            });
        }
        self.arcs.insert(a);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn arcs(&self) -> &BTreeSet<DelayArc> {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Arcs delivering information to agent `l`.
    pub fn incoming(&self, l: usize) -> impl Iterator<Item = &DelayArc> {
        self.arcs.iter().filter(move |a| a.to == l)
    }

    pub fn union_with(&mut self, other: &DelayGraph) -> Result<()> {
        if (other.n, other.h) != (self.n, self.h) {
            return Err(Error::GraphShape {
                n: other.n,
                h: other.h,
                expected_n: self.n,
                expected_h: self.h,
            });
        }
        self.arcs.extend(other.arcs.iter().copied());
        Ok(())
    }

    /// Successor lists of the delay-projected digraph.
    fn successors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for a in &self.arcs {
            if !out[a.from].contains(&a.to) {
                out[a.from].push(a.to);
            }
        }
        out
    }

    /// Nodes reachable from `k` by a nonempty path.
    fn reach(&self, succ: &[Vec<usize>], k: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue: VecDeque<usize> = succ[k].iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            if !seen[v] {
                seen[v] = true;
                queue.extend(succ[v].iter().copied());
            }
        }
        seen
    }
}

/// Nodes outside `l` with at least one arc into `l`.
pub fn neig(l: &BTreeSet<usize>, a: &DelayGraph) -> Result<BTreeSet<usize>> {
    if l.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    if let Some(&bad) = l.iter().find(|&&k| k >= a.n) {
        return Err(Error::NodeOutOfRange { node: bad, n: a.n });
    }
    Ok(a.arcs
        .iter()
        .filter(|arc| l.contains(&arc.to) && !l.contains(&arc.from))
        .map(|arc| arc.from)
        .collect())
}

/// Oriented path from `k` to `l`. A node reaches itself only through a
/// cycle (for instance a delayed self-arc).
pub fn is_connected(a: &DelayGraph, k: usize, l: usize) -> bool {
    if k >= a.n || l >= a.n {
        return false;
    }
    a.reach(&a.successors(), k)[l]
}

/// Lowest-index node connected to every other node.
pub fn root(a: &DelayGraph) -> Option<usize> {
    let succ = a.successors();
    (0..a.n).find(|&k| {
        let seen = a.reach(&succ, k);
        (0..a.n).all(|l| l == k || seen[l])
    })
}

/// Seeded random schedule. With `jointly_connected`, a random spanning
/// arborescence is injected at every time divisible by `window + 1`, so
/// every interval of `window + 1` consecutive steps has a root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSchedule {
    pub n: usize,
    pub h: usize,
    pub window: usize,
    /// Probability of each extra arc `(k, l)` per step.
    pub density: f64,
    pub seed: u64,
    pub jointly_connected: bool,
}

impl RandomSchedule {
    fn graph_at(&self, t: usize) -> DelayGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64);
        let mut g = DelayGraph::empty(self.n, self.h);
        for k in 0..self.n {
            for l in 0..self.n {
                if rng.gen::<f64>() >= self.density {
                    continue;
                }
                let lo = usize::from(k == l);
                if lo >= self.h {
                    continue;
                }
                let j = rng.gen_range(lo..self.h);
                g.arcs.insert(DelayArc::new(k, j, l));
            }
        }
        if self.jointly_connected && t.is_multiple_of(self.window + 1) && self.n > 1 {
            let mut order: Vec<usize> = (0..self.n).collect();
            order.shuffle(&mut rng);
            for i in 1..order.len() {
                let parent = order[rng.gen_range(0..i)];
                let j = rng.gen_range(0..self.h);
                g.arcs.insert(DelayArc::new(parent, j, order[i]));
            }
        }
        g
    }
}

/// Time-indexed sequence of graphs sharing `n` and `h`.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSchedule {
    Periodic(Vec<DelayGraph>),
    /// `graphs[t]` for `t < graphs.len()`, then `tail` forever.
    Explicit {
        graphs: Vec<DelayGraph>,
        tail: DelayGraph,
    },
    Random(RandomSchedule),
}

impl GraphSchedule {
    pub fn periodic(graphs: Vec<DelayGraph>) -> Result<Self> {
        let first = graphs.first().ok_or(Error::InvalidInterval(0, 0))?;
        check_shapes(first.n, first.h, &graphs)?;
        Ok(GraphSchedule::Periodic(graphs))
    }

    pub fn explicit(graphs: Vec<DelayGraph>, tail: DelayGraph) -> Result<Self> {
        check_shapes(tail.n, tail.h, &graphs)?;
        Ok(GraphSchedule::Explicit { graphs, tail })
    }

    pub fn constant(g: DelayGraph) -> Self {
        GraphSchedule::Periodic(vec![g])
    }

    pub fn n(&self) -> usize {
        match self {
            GraphSchedule::Periodic(g) => g[0].n,
            GraphSchedule::Explicit { tail, .. } => tail.n,
            GraphSchedule::Random(r) => r.n,
        }
    }

    pub fn h(&self) -> usize {
        match self {
            GraphSchedule::Periodic(g) => g[0].h,
            GraphSchedule::Explicit { tail, .. } => tail.h,
            GraphSchedule::Random(r) => r.h,
        }
    }

    pub fn graph_at(&self, t: usize) -> DelayGraph {
        match self {
            GraphSchedule::Periodic(g) => g[t % g.len()].clone(),
            GraphSchedule::Explicit { graphs, tail } => graphs.get(t).unwrap_or(tail).clone(),
            GraphSchedule::Random(r) => r.graph_at(t),
        }
    }
}

fn check_shapes(n: usize, h: usize, graphs: &[DelayGraph]) -> Result<()> {
    match graphs.iter().find(|g| (g.n, g.h) != (n, h)) {
        Some(g) => Err(Error::GraphShape {
            n: g.n,
            h: g.h,
            expected_n: n,
            expected_h: h,
        }),
        None => Ok(()),
    }
}

/// Arc union of `A(t)` for `t` in `[t0, t1]`.
pub fn union_over(schedule: &GraphSchedule, t0: usize, t1: usize) -> Result<DelayGraph> {
    if t0 > t1 {
        return Err(Error::InvalidInterval(t0, t1));
    }
    let mut g = DelayGraph::empty(schedule.n(), schedule.h());
    for t in t0..=t1 {
        g.union_with(&schedule.graph_at(t))?;
    }
    Ok(g)
}

/// A node connected to all others across `[t0, t0 + window]`.
pub fn root_across(schedule: &GraphSchedule, t0: usize, window: usize) -> Option<usize> {
    union_over(schedule, t0, t0 + window).ok().and_then(|g| root(&g))
}

/// Every window `[t0, t0 + window]` with `t0 <= horizon - window` has a root.
pub fn verify_uniform_connectivity(schedule: &GraphSchedule, horizon: usize, window: usize) -> bool {
    if horizon < window {
        return false;
    }
    (0..=horizon - window).all(|t0| root_across(schedule, t0, window).is_some())
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum ScheduleRepr {
    Periodic {
        n: usize,
        h: usize,
        graphs: Vec<Vec<[usize; 3]>>,
    },
    Explicit {
        n: usize,
        h: usize,
        graphs: Vec<Vec<[usize; 3]>>,
        tail: Vec<[usize; 3]>,
    },
    Random(RandomSchedule),
}

impl Serialize for GraphSchedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let triples = |gs: &[DelayGraph]| gs.iter().map(DelayGraph::to_triples).collect();
        let repr = match self {
            GraphSchedule::Periodic(gs) => ScheduleRepr::Periodic {
                n: self.n(),
                h: self.h(),
                graphs: triples(gs),
            },
            GraphSchedule::Explicit { graphs, tail } => ScheduleRepr::Explicit {
                n: self.n(),
                h: self.h(),
                graphs: triples(graphs),
                tail: tail.to_triples(),
            },
            GraphSchedule::Random(r) => ScheduleRepr::Random(r.clone()),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraphSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let graphs = |n, h, ts: Vec<Vec<[usize; 3]>>| {
            ts.iter()
                .map(|t| DelayGraph::from_triples(n, h, t))
                .collect::<Result<Vec<_>>>()
        };
        let out = match ScheduleRepr::deserialize(d)? {
            ScheduleRepr::Periodic { n, h, graphs: g } => {
                graphs(n, h, g).and_then(GraphSchedule::periodic)
            }
            ScheduleRepr::Explicit { n, h, graphs: g, tail } => graphs(n, h, g).and_then(|gs| {
                GraphSchedule::explicit(gs, DelayGraph::from_triples(n, h, &tail)?)
            }),
            ScheduleRepr::Random(r) => {
                if r.n == 0 || r.h == 0 || !(0.0..=1.0).contains(&r.density) {
                    Err(Error::InvalidState(format!(
                        "random schedule needs n, h >= 1 and density in [0, 1]; got n = {}, h = {}, density = {}",
                        r.n, r.h, r.density
                    )))
                } else {
                    Ok(GraphSchedule::Random(r))
                }
            }
        };
        out.map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(v: &[usize]) -> BTreeSet<usize> {
        v.iter().map(|k| k - 1).collect()
    }

    pub(crate) fn example4() -> GraphSchedule {
        GraphSchedule::periodic(vec![
            DelayGraph::from_triples(3, 2, &[[2, 1, 1], [1, 0, 2]]).unwrap(),
            DelayGraph::from_triples(3, 2, &[[2, 1, 3], [3, 0, 2]]).unwrap(),
        ])
        .unwrap()
    }

    /// Brute-force oracle: enumerate simple node sequences from `k`.
    fn path_exists(a: &DelayGraph, k: usize, l: usize) -> bool {
        fn go(a: &DelayGraph, cur: usize, target: usize, visited: &mut Vec<usize>) -> bool {
            for arc in a.arcs().iter().filter(|x| x.from == cur) {
                if arc.to == target {
                    return true;
                }
                if !visited.contains(&arc.to) {
                    visited.push(arc.to);
                    if go(a, arc.to, target, visited) {
                        return true;
                    }
                    visited.pop();
                }
            }
            false
        }
        go(a, k, l, &mut vec![k])
    }

    #[test]
    fn self_loop_without_delay_is_rejected() {
        assert!(DelayGraph::from_triples(2, 2, &[[1, 0, 1]]).is_err());
        assert!(DelayGraph::from_triples(2, 2, &[[1, 1, 1]]).is_ok());
        assert!(DelayGraph::from_triples(2, 2, &[[1, 2, 2]]).is_err());
        assert!(DelayGraph::from_triples(2, 2, &[[3, 0, 2]]).is_err());
    }

    #[test]
    fn neig_examples() {
        let a = DelayGraph::from_triples(3, 2, &[[2, 1, 1], [1, 0, 2]]).unwrap();
        assert_eq!(neig(&nodes(&[1]), &a).unwrap(), nodes(&[2]));
        assert!(neig(&nodes(&[2]), &DelayGraph::empty(3, 2)).unwrap().is_empty());
        let b = DelayGraph::from_triples(3, 1, &[[3, 0, 2]]).unwrap();
        assert_eq!(neig(&nodes(&[1, 2]), &b).unwrap(), nodes(&[3]));
        assert_eq!(neig(&BTreeSet::new(), &b), Err(Error::EmptyNodeSet));
    }

    #[test]
    fn union_examples() {
        let s = example4();
        let u = union_over(&s, 0, 1).unwrap();
        assert_eq!(
            u.to_triples(),
            vec![[1, 0, 2], [2, 1, 1], [2, 1, 3], [3, 0, 2]]
        );
        assert_eq!(union_over(&s, 5, 5).unwrap(), s.graph_at(5));
        let empty = GraphSchedule::constant(DelayGraph::empty(4, 1));
        assert!(union_over(&empty, 0, 9).unwrap().is_empty());
        assert!(union_over(&s, 3, 2).is_err());
    }

    #[test]
    fn connectivity_examples() {
        let u = union_over(&example4(), 0, 1).unwrap();
        assert!(is_connected(&u, 1, 0));
        assert!(is_connected(&u, 1, 2));
        let single = DelayGraph::from_triples(2, 2, &[[1, 1, 2]]).unwrap();
        assert!(is_connected(&single, 0, 1));
        assert!(!is_connected(&single, 1, 0));
        assert!(!is_connected(&single, 0, 0));
        let delayed_self = DelayGraph::from_triples(2, 2, &[[1, 1, 1]]).unwrap();
        assert!(is_connected(&delayed_self, 0, 0));
    }

    /// Reconstructed fixture: only the stated connectivity facts are
    /// encoded (1 and 2 mutually connected, 3 reaches both, nothing
    /// reaches 3).
    #[test]
    fn three_agent_fixture() {
        let a = DelayGraph::from_triples(3, 2, &[[1, 0, 2], [2, 1, 1], [3, 1, 1]]).unwrap();
        assert!(is_connected(&a, 0, 1) && is_connected(&a, 1, 0));
        assert!(is_connected(&a, 2, 0) && is_connected(&a, 2, 1));
        assert!(!is_connected(&a, 0, 2) && !is_connected(&a, 1, 2));
        assert_eq!(root(&a), Some(2));
    }

    #[test]
    fn root_examples() {
        let s = example4();
        // Strongly connected union: every node is a root; lowest index wins.
        assert_eq!(root_across(&s, 0, 1), Some(0));
        let u = union_over(&s, 0, 1).unwrap();
        assert!((0..3).all(|l| l == 1 || is_connected(&u, 1, l)));
        assert_eq!(root_across(&GraphSchedule::constant(DelayGraph::empty(3, 1)), 4, 7), None);
        let cliques =
            DelayGraph::from_triples(4, 1, &[[1, 0, 2], [2, 0, 1], [3, 0, 4], [4, 0, 3]]).unwrap();
        assert_eq!(root(&cliques), None);
    }

    #[test]
    fn uniform_connectivity_examples() {
        assert!(verify_uniform_connectivity(&example4(), 100, 1));
        let full = DelayGraph::from_triples(3, 1, &[[1, 0, 2], [2, 0, 3]]).unwrap();
        let mut graphs = vec![full.clone(); 100];
        for g in graphs.iter_mut().take(81).skip(50) {
            *g = DelayGraph::empty(3, 1);
        }
        let gap = GraphSchedule::explicit(graphs, full).unwrap();
        assert!(!verify_uniform_connectivity(&gap, 120, 10));
        assert!(verify_uniform_connectivity(&gap, 40, 10));
        let solo = GraphSchedule::constant(DelayGraph::empty(1, 1));
        assert!(verify_uniform_connectivity(&solo, 10, 0));
    }

    #[test]
    fn random_jointly_connected_has_roots_everywhere() {
        for seed in 0..20 {
            for window in 0..5 {
                let s = GraphSchedule::Random(RandomSchedule {
                    n: 5,
                    h: 3,
                    window,
                    density: 0.05,
                    seed,
                    jointly_connected: true,
                });
                assert!(verify_uniform_connectivity(&s, 60, window));
                assert_eq!(s.graph_at(17), s.graph_at(17));
            }
        }
    }

    #[test]
    fn reachability_matches_path_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let h = rng.gen_range(1..=3);
            let mut g = DelayGraph::empty(n, h);
            for _ in 0..rng.gen_range(0..12) {
                let a = DelayArc::new(rng.gen_range(0..n), rng.gen_range(0..h), rng.gen_range(0..n));
                let _ = g.insert(a);
            }
            for k in 0..n {
                for l in 0..n {
                    assert_eq!(is_connected(&g, k, l), path_exists(&g, k, l));
                }
            }
        }
    }

    #[test]
    fn schedule_round_trips_through_toml() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct Wrap {
            schedule: GraphSchedule,
        }
        let w = Wrap {
            schedule: example4(),
        };
        let text = toml::to_string(&w).unwrap();
        let back: Wrap = toml::from_str(&text).unwrap();
        assert_eq!(back, w);
        assert_eq!(
            back.schedule.graph_at(0).to_triples(),
            vec![[1, 0, 2], [2, 1, 1]]
        );
    }
}
