//! Synchronous agent updates with delayed information.
//!
//! Each step every agent collects its own position copy and the delayed
//! positions delivered by the current graph, builds the decision hull of
//! that set and picks a point in its relative interior.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};
use crate::graph::{DelayGraph, GraphSchedule};
use crate::sigma::{build_sigma, HullSet, SigmaKind};

/// Relative interior margin, as a fraction of the core's interior scale.
pub const EPS_RI: f64 = 1e-6;

/// Positions of `n` agents over the last `h` steps; slot `(k, j)` holds
/// `x_k(t - j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    n: usize,
    h: usize,
    p: usize,
    values: Vec<Point>,
}

impl SystemState {
    pub fn new(slots: Vec<Vec<Point>>) -> Result<Self> {
        let n = slots.len();
        let h = slots.first().map_or(0, Vec::len);
        if n == 0 || h == 0 {
            return Err(Error::InvalidState("state needs at least one agent and one slot".into()));
        }
        let p = slots[0][0].dim();
        let mut values = Vec::with_capacity(n * h);
        for (k, row) in slots.into_iter().enumerate() {
            if row.len() != h {
                return Err(Error::InvalidState(format!(
                    "agent {} has {} slots, expected {h}",
                    k + 1,
                    row.len()
                )));
            }
            for x in row {
                if x.dim() != p {
                    return Err(Error::DimensionMismatch {
                        expected: p,
                        found: x.dim(),
                    });
                }
                values.push(x);
            }
        }
        Ok(SystemState { n, h, p, values })
    }

    /// Every delay slot initialised to the current position.
    pub fn at_rest(positions: Vec<Point>, h: usize) -> Result<Self> {
        SystemState::new(positions.into_iter().map(|x| vec![x; h]).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, k: usize, j: usize) -> &Point {
        &self.values[k * self.h + j]
    }

    pub fn current(&self, k: usize) -> &Point {
        self.get(k, 0)
    }

    pub fn positions(&self) -> Vec<Point> {
        (0..self.n).map(|k| self.current(k).clone()).collect()
    }

    pub fn slots(&self) -> &[Point] {
        &self.values
    }

    pub fn to_nested(&self) -> Vec<Vec<Point>> {
        self.values.chunks(self.h).map(<[Point]>::to_vec).collect()
    }

    /// Next state with `x_k(t + 1) = updates[k]` and all slots shifted.
    fn advance(&self, updates: Vec<Point>) -> SystemState {
        let mut values = Vec::with_capacity(self.values.len());
        for (k, x) in updates.into_iter().enumerate() {
            values.push(x);
            values.extend_from_slice(&self.values[k * self.h..(k + 1) * self.h - 1]);
        }
        SystemState {
            n: self.n,
            h: self.h,
            p: self.p,
            values,
        }
    }
}

impl Serialize for SystemState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_nested().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SystemState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let slots = Vec::<Vec<Point>>::deserialize(d)?;
        SystemState::new(slots).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Selection {
    /// Move a fraction `lambda` of the way to the centroid of the received
    /// points, in warped coordinates.
    ShrinkToCentroid { lambda: f64 },
    /// Uniform draw from the slightly shrunk core.
    RandomInteriorPoint,
}

/// Selection rule plus the copy of its own position an agent uses.
/// Agents whose received set is a single point never move.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpdatePolicy {
    #[serde(flatten)]
    pub selection: Selection,
    #[serde(default)]
    pub j_self: usize,
}

impl UpdatePolicy {
    pub fn shrink(lambda: f64) -> Self {
        UpdatePolicy {
            selection: Selection::ShrinkToCentroid { lambda },
            j_self: 0,
        }
    }

    pub fn random() -> Self {
        UpdatePolicy {
            selection: Selection::RandomInteriorPoint,
            j_self: 0,
        }
    }

    pub fn with_j_self(mut self, j_self: usize) -> Self {
        self.j_self = j_self;
        self
    }

    pub fn validate(&self, h: usize) -> Result<()> {
        if let Selection::ShrinkToCentroid { lambda } = self.selection {
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::InvalidPolicy(format!("lambda must lie in (0, 1), got {lambda}")));
            }
        }
        if self.j_self >= h {
            return Err(Error::InvalidPolicy(format!(
                "j_self = {} must be below h = {h}",
                self.j_self
            )));
        }
        Ok(())
    }
}

impl Default for UpdatePolicy {
    fn default() -> Self {
        UpdatePolicy::shrink(0.5)
    }
}

/// Own copy `x_k(t - j_self)` followed by every delayed position delivered
/// to `k` by `a`, deduplicated.
pub fn received_set(state: &SystemState, a: &DelayGraph, k: usize, j_self: usize) -> Result<PointSet> {
    if k >= state.n {
        return Err(Error::NodeOutOfRange { node: k, n: state.n });
    }
    if j_self >= state.h {
        return Err(Error::InvalidPolicy(format!(
            "j_self = {j_self} must be below h = {}",
            state.h
        )));
    }
    let own = std::iter::once(state.get(k, j_self).clone());
    let others = a
        .incoming(k)
        .filter(|arc| arc.from < state.n && arc.delay < state.h)
        .map(|arc| state.get(arc.from, arc.delay).clone());
    PointSet::new(own.chain(others))
}

pub fn decision_hull(kind: &SigmaKind, received: &PointSet) -> Result<HullSet> {
    build_sigma(kind, received)
}

/// A point of the relative interior of `hull` (or `self_point` when the
/// received set is a single point).
pub fn select_update(
    policy: &UpdatePolicy,
    hull: &HullSet,
    received: &PointSet,
    self_point: &Point,
    rng: &mut ChaCha8Rng,
) -> Result<Point> {
    if !received.contains_point(self_point) {
        return Err(Error::Invariant("own position missing from the received set".into()));
    }
    if received.is_singleton() || hull.is_singleton() {
        return Ok(self_point.clone());
    }
    let margin = 0.5 * EPS_RI * hull.ri_scale();
    let ok = |x: &Point| hull.ri_contains(x, margin);
    match policy.selection {
        Selection::ShrinkToCentroid { lambda } => {
            let own = hull.to_core(self_point);
            let images: Vec<Vec<f64>> = received.points().iter().map(|x| hull.to_core(x)).collect();
            let m = images.len() as f64;
            let c: Vec<f64> = (0..own.len())
                .map(|i| images.iter().map(|y| y[i]).sum::<f64>() / m)
                .collect();
            let step: Vec<f64> = own.iter().zip(&c).map(|(a, b)| a + lambda * (b - a)).collect();
            [step, c]
                .iter()
                .map(|y| hull.from_core(y))
                .find(|x| ok(x))
                .or_else(|| Some(hull.centroid()).filter(|x| ok(x)))
                .ok_or_else(|| Error::Invariant("no relative interior point found".into()))
        }
        Selection::RandomInteriorPoint => {
            let x = hull.from_core(&hull.core().sample_interior(rng, EPS_RI));
            if ok(&x) {
                Ok(x)
            } else {
                let c = hull.centroid();
                if ok(&c) {
                    Ok(c)
                } else {
                    Err(Error::Invariant("no relative interior point found".into()))
                }
            }
        }
    }
}

/// Per-step record of what each agent saw and chose.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub received: Vec<PointSet>,
    pub chosen: Vec<Point>,
}

fn agent_rng(seed: u64, t: usize, n: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((t * n + k) as u64);
    rng
}

fn step_recorded(
    state: &SystemState,
    a: &DelayGraph,
    kind: &SigmaKind,
    policy: &UpdatePolicy,
    seed: u64,
    t: usize,
) -> Result<(SystemState, StepRecord)> {
    if (a.n(), a.h()) != (state.n, state.h) {
        return Err(Error::GraphShape {
            n: a.n(),
            h: a.h(),
            expected_n: state.n,
            expected_h: state.h,
        });
    }
    policy.validate(state.h)?;
    let mut received = Vec::with_capacity(state.n);
    let mut chosen = Vec::with_capacity(state.n);
    for k in 0..state.n {
        let r = received_set(state, a, k, policy.j_self)?;
        let own = state.get(k, policy.j_self);
        let x = if r.is_singleton() {
            own.clone()
        } else {
            let hull = decision_hull(kind, &r)?;
            select_update(policy, &hull, &r, own, &mut agent_rng(seed, t, state.n, k))?
        };
        received.push(r);
        chosen.push(x);
    }
    let next = state.advance(chosen.clone());
    Ok((next, StepRecord { received, chosen }))
}

/// One synchronous update at time `t` (which selects the random stream).
pub fn step(
    state: &SystemState,
    a: &DelayGraph,
    kind: &SigmaKind,
    policy: &UpdatePolicy,
    seed: u64,
    t: usize,
) -> Result<SystemState> {
    step_recorded(state, a, kind, policy, seed, t).map(|(s, _)| s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub kind: SigmaKind,
    pub policy: UpdatePolicy,
    pub seed: u64,
    pub states: Vec<SystemState>,
    pub records: Vec<StepRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &SystemState {
        self.states.last().expect("a trace holds at least its initial state")
    }

    /// Positions of agent `k` over time.
    pub fn path(&self, k: usize) -> Vec<&Point> {
        self.states.iter().map(|s| s.current(k)).collect()
    }

    /// Every slot of state `t + 1` except the current one is copied
    /// bit-for-bit from state `t`.
    pub fn check_shift(&self) -> bool {
        self.states.windows(2).all(|w| {
            (0..w[0].n).all(|k| (1..w[0].h).all(|j| w[1].get(k, j) == w[0].get(k, j - 1)))
        })
    }
}

pub fn simulate(
    initial: &SystemState,
    schedule: &GraphSchedule,
    kind: &SigmaKind,
    policy: &UpdatePolicy,
    horizon: usize,
    seed: u64,
) -> Result<Trace> {
    kind.validate(initial.p)?;
    policy.validate(initial.h)?;
    let mut states = Vec::with_capacity(horizon + 1);
    let mut records = Vec::with_capacity(horizon);
    states.push(initial.clone());
    for t in 0..horizon {
        let (next, rec) = step_recorded(&states[t], &schedule.graph_at(t), kind, policy, seed, t)?;
        states.push(next);
        records.push(rec);
    }
    Ok(Trace {
        kind: kind.clone(),
        policy: *policy,
        seed,
        states,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::euclidean_diameter;
    use crate::sigma::WarpMap;

    fn xy(x: f64, y: f64) -> Point {
        Point::xy(x, y)
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    fn close(a: &Point, b: &Point) -> bool {
        a.distance(b) < 1e-12
    }

    #[test]
    fn received_set_examples() {
        let s = SystemState::new(vec![
            vec![xy(0.0, 0.0), xy(9.0, 9.0)],
            vec![xy(1.0, 1.0), xy(5.0, 5.0)],
        ])
        .unwrap();
        let empty = DelayGraph::empty(2, 2);
        assert_eq!(received_set(&s, &empty, 0, 0).unwrap().points(), &[xy(0.0, 0.0)]);
        let a = DelayGraph::from_triples(2, 2, &[[2, 1, 1]]).unwrap();
        assert_eq!(
            received_set(&s, &a, 0, 0).unwrap().points(),
            &[xy(0.0, 0.0), xy(5.0, 5.0)]
        );
        assert_eq!(
            received_set(&s, &a, 0, 1).unwrap().points(),
            &[xy(9.0, 9.0), xy(5.0, 5.0)]
        );
        let same = SystemState::at_rest(vec![xy(2.0, 2.0), xy(2.0, 2.0)], 2).unwrap();
        assert!(received_set(&same, &a, 0, 0).unwrap().is_singleton());
    }

    #[test]
    fn select_update_examples() {
        let policy = UpdatePolicy::shrink(0.5);
        let single = PointSet::new([xy(0.0, 0.0)]).unwrap();
        let h = decision_hull(&SigmaKind::ConvexHull, &single).unwrap();
        assert_eq!(
            select_update(&policy, &h, &single, &xy(0.0, 0.0), &mut rng()).unwrap(),
            xy(0.0, 0.0)
        );

        let seg = PointSet::from_xy(&[(0.0, 0.0), (2.0, 0.0)]).unwrap();
        let h = decision_hull(&SigmaKind::ConvexHull, &seg).unwrap();
        let x = select_update(&policy, &h, &seg, &xy(0.0, 0.0), &mut rng()).unwrap();
        assert!(close(&x, &xy(0.5, 0.0)));
        assert!(h.ri_contains(&x, 1e-9));

        let tri = PointSet::from_xy(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)]).unwrap();
        let h = decision_hull(&SigmaKind::ConvexHull, &tri).unwrap();
        let x = select_update(&policy, &h, &tri, &xy(0.0, 0.0), &mut rng()).unwrap();
        assert!(close(&x, &xy(1.0 / 3.0, 1.0 / 3.0)));
    }

    #[test]
    fn selections_land_in_relative_interior_for_every_kind() {
        let kinds = [
            SigmaKind::ConvexHull,
            SigmaKind::axis_box(2),
            SigmaKind::right_triangles(crate::sigma::Side::Max),
            SigmaKind::norm_rotation(0.04, SigmaKind::ConvexHull),
            SigmaKind::intersection(SigmaKind::ConvexHull, SigmaKind::axis_box(2)),
        ];
        let sets = [
            vec![(2.0, 0.0), (1.0, 5.0), (0.0, -1.0)],
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)],
        ];
        for kind in &kinds {
            for pts in &sets {
                let r = PointSet::from_xy(pts).unwrap();
                let h = decision_hull(kind, &r).unwrap();
                for policy in [UpdatePolicy::shrink(0.5), UpdatePolicy::random()] {
                    for own in r.points() {
                        let x = select_update(&policy, &h, &r, own, &mut rng()).unwrap();
                        let margin = 0.5 * EPS_RI * h.ri_scale();
                        assert!(h.ri_contains(&x, margin), "{} {:?}", kind.label(), pts);
                    }
                }
            }
        }
    }

    #[test]
    fn warped_shrink_moves_in_warped_coordinates() {
        let kind = SigmaKind::norm_rotation(0.04, SigmaKind::ConvexHull);
        let r = PointSet::from_xy(&[(2.0, 0.0), (1.0, 5.0), (0.0, -1.0)]).unwrap();
        let h = decision_hull(&kind, &r).unwrap();
        let own = xy(2.0, 0.0);
        let x = select_update(&UpdatePolicy::shrink(0.5), &h, &r, &own, &mut rng()).unwrap();
        let w = WarpMap::NormRotation { alpha: 0.04 };
        let imgs: Vec<[f64; 2]> = r.points().iter().map(|p| w.forward([p.coords()[0], p.coords()[1]])).collect();
        let c = [
            imgs.iter().map(|v| v[0]).sum::<f64>() / 3.0,
            imgs.iter().map(|v| v[1]).sum::<f64>() / 3.0,
        ];
        let expect = w.inverse([(imgs[0][0] + c[0]) / 2.0, (imgs[0][1] + c[1]) / 2.0]);
        assert!(close(&x, &xy(expect[0], expect[1])));
    }

    #[test]
    fn step_examples() {
        let kind = SigmaKind::ConvexHull;
        let policy = UpdatePolicy::shrink(0.5);
        let s = SystemState::new(vec![
            vec![xy(0.0, 0.0), xy(1.0, 1.0)],
            vec![xy(3.0, 0.0), xy(4.0, 4.0)],
        ])
        .unwrap();
        let next = step(&s, &DelayGraph::empty(2, 2), &kind, &policy, 0, 0).unwrap();
        assert_eq!(next.positions(), s.positions());
        assert_eq!(next.get(0, 1), s.get(0, 0));
        assert_eq!(next.get(1, 1), s.get(1, 0));

        let pair = SystemState::at_rest(vec![xy(0.0, 0.0), xy(2.0, 0.0)], 1).unwrap();
        let full = DelayGraph::from_triples(2, 1, &[[1, 0, 2], [2, 0, 1]]).unwrap();
        let next = step(&pair, &full, &kind, &policy, 0, 0).unwrap();
        assert!(close(next.current(0), &xy(0.5, 0.0)));
        assert!(close(next.current(1), &xy(1.5, 0.0)));

        let rest = SystemState::at_rest(vec![xy(1.0, 2.0); 3], 2).unwrap();
        let g = DelayGraph::from_triples(3, 2, &[[1, 1, 2], [2, 0, 3], [3, 1, 1]]).unwrap();
        assert_eq!(step(&rest, &g, &kind, &UpdatePolicy::random(), 3, 0).unwrap(), rest);
    }

    #[test]
    fn simulate_examples() {
        let s = SystemState::at_rest(vec![xy(0.0, 0.0), xy(2.0, 0.0), xy(1.0, 3.0)], 2).unwrap();
        let sched = GraphSchedule::constant(
            DelayGraph::from_triples(3, 2, &[[1, 1, 2], [2, 0, 3], [3, 1, 1]]).unwrap(),
        );
        let kind = SigmaKind::ConvexHull;
        let t0 = simulate(&s, &sched, &kind, &UpdatePolicy::default(), 0, 1).unwrap();
        assert_eq!(t0.states, vec![s.clone()]);

        let a = simulate(&s, &sched, &kind, &UpdatePolicy::random(), 200, 9).unwrap();
        let b = simulate(&s, &sched, &kind, &UpdatePolicy::random(), 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.check_shift());
        let spread = euclidean_diameter(&PointSet::new(a.last().slots().to_vec()).unwrap());
        assert!(spread < 1e-3);

        let rest = SystemState::at_rest(vec![xy(1.0, 1.0); 3], 2).unwrap();
        let c = simulate(&rest, &sched, &kind, &UpdatePolicy::default(), 20, 0).unwrap();
        assert!(c.states.iter().all(|x| *x == rest));
    }

    #[test]
    fn invalid_policies_are_rejected() {
        assert!(UpdatePolicy::shrink(1.0).validate(2).is_err());
        assert!(UpdatePolicy::shrink(0.5).with_j_self(2).validate(2).is_err());
        assert!(UpdatePolicy::shrink(0.5).with_j_self(1).validate(2).is_ok());
    }

    #[test]
    fn state_round_trips_through_json() {
        let s = SystemState::new(vec![vec![xy(0.0, 1.0), xy(2.0, 3.0)]]).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, "[[[0.0,1.0],[2.0,3.0]]]");
        assert_eq!(serde_json::from_str::<SystemState>(&text).unwrap(), s);
        assert!(serde_json::from_str::<SystemState>("[[[0.0,1.0]],[]]").is_err());
    }
}
