//! Property checks for hull maps: containment, idempotence, monotonicity,
//! nonempty relative interior and boundary source points.
//!
//! [`HullMap`] lets the same monotonicity suite run against maps that are
//! not valid hulls, such as [`EnclosingBall`].

use rand::Rng;

use crate::error::Result;
use crate::geometry::{Point, PointSet};
use crate::sigma::{build_sigma, SigmaKind};

pub const PROPERTY_TOL: f64 = 1e-9;
pub const IDEMPOTENCE_TOL: f64 = 1e-6;

pub trait HullMap {
    fn name(&self) -> String;
    /// `map(a) ⊆ map(b)` within `tol`.
    fn subset(&self, a: &PointSet, b: &PointSet, tol: f64) -> Result<bool>;
}

impl HullMap for SigmaKind {
    fn name(&self) -> String {
        self.label()
    }

    fn subset(&self, a: &PointSet, b: &PointSet, tol: f64) -> Result<bool> {
        build_sigma(self, a)?.subset_of(&build_sigma(self, b)?, tol)
    }
}

/// Smallest enclosing disc. Not monotone, so not a hull map.
pub struct EnclosingBall;

impl EnclosingBall {
    pub fn disc(s: &PointSet) -> ([f64; 2], f64) {
        let pts: Vec<[f64; 2]> = s.points().iter().map(|p| [p.coords()[0], p.coords()[1]]).collect();
        let covers = |c: [f64; 2], r: f64| pts.iter().all(|p| dist(*p, c) <= r * (1.0 + 1e-12) + 1e-12);
        let mut best = (pts[0], 0.0);
        let mut found = pts.len() == 1;
        let consider = |c: [f64; 2], r: f64, best: &mut ([f64; 2], f64), found: &mut bool| {
            if (!*found || r < best.1) && covers(c, r) {
                *best = (c, r);
                *found = true;
            }
        };
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let c = [(pts[i][0] + pts[j][0]) / 2.0, (pts[i][1] + pts[j][1]) / 2.0];
                consider(c, dist(pts[i], c), &mut best, &mut found);
                for k in j + 1..pts.len() {
                    if let Some(c) = circumcenter(pts[i], pts[j], pts[k]) {
                        consider(c, dist(pts[i], c), &mut best, &mut found);
                    }
                }
            }
        }
        best
    }
}

impl HullMap for EnclosingBall {
    fn name(&self) -> String {
        "enclosing-ball".into()
    }

    fn subset(&self, a: &PointSet, b: &PointSet, tol: f64) -> Result<bool> {
        let (ca, ra) = EnclosingBall::disc(a);
        let (cb, rb) = EnclosingBall::disc(b);
        Ok(dist(ca, cb) + ra <= rb + tol)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<[f64; 2]> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-12 {
        return None;
    }
    let (a2, b2, c2) = (
        a[0] * a[0] + a[1] * a[1],
        b[0] * b[0] + b[1] * b[1],
        c[0] * c[0] + c[1] * c[1],
    );
    Some([
        (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d,
        (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d,
    ])
}

/// Random planar set of 1 to `max_len` points in `[-5, 5]^2`. About one
/// in five sets is collinear and one in ten repeats a point.
pub fn random_set<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> PointSet {
    let len = rng.gen_range(1..=max_len.max(1));
    let mut pts: Vec<Point> = Vec::with_capacity(len + 1);
    let collinear = rng.gen_bool(0.2);
    let (a, b) = (
        [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)],
        [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)],
    );
    for _ in 0..len {
        if collinear {
            let s: f64 = rng.gen_range(0.0..1.0);
            pts.push(Point::xy(a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])));
        } else {
            pts.push(Point::xy(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)));
        }
    }
    if rng.gen_bool(0.1) {
        pts.push(pts[0].clone());
    }
    PointSet::new(pts).expect("finite planar points")
}

/// Nonempty random subset of `s`.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, s: &PointSet) -> PointSet {
    let keep: Vec<Point> = s.points().iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if keep.is_empty() {
        PointSet::new([s.points()[rng.gen_range(0..s.len())].clone()]).expect("nonempty")
    } else {
        PointSet::new(keep).expect("nonempty")
    }
}

/// Every source point is in the hull; a singleton maps to itself.
pub fn check_containment(kind: &SigmaKind, s: &PointSet) -> Result<bool> {
    let h = build_sigma(kind, s)?;
    let inside = s.points().iter().all(|x| h.contains(x, PROPERTY_TOL));
    let singleton = !s.is_singleton() || (h.is_singleton() && h.centroid().distance(&s.points()[0]) <= PROPERTY_TOL);
    Ok(inside && singleton)
}

/// Rebuilding from a dense sample of the hull's boundary and core vertices
/// gives the same set, compared in core coordinates.
pub fn check_idempotence(kind: &SigmaKind, s: &PointSet, per_edge: usize) -> Result<bool> {
    let h = build_sigma(kind, s)?;
    let mut pts = h.core_vertices();
    pts.extend(h.boundary_samples(per_edge));
    let again = build_sigma(kind, &PointSet::new(pts)?)?;
    Ok(h.core().hausdorff(again.core()) <= IDEMPOTENCE_TOL)
}

pub fn check_monotonicity(map: &dyn HullMap, sub: &PointSet, s: &PointSet) -> Result<bool> {
    map.subset(sub, s, PROPERTY_TOL)
}

/// Number of nested pairs on which `map` fails monotonicity.
pub fn monotonicity_failures(map: &dyn HullMap, pairs: &[(PointSet, PointSet)]) -> Result<usize> {
    let mut failures = 0;
    for (sub, s) in pairs {
        if !check_monotonicity(map, sub, s)? {
            failures += 1;
        }
    }
    Ok(failures)
}

/// Triangle `(0,0), (4,0), (1,3)` and its shortest edge: the disc around
/// the edge sticks out of the disc around the triangle.
pub fn triangle_edge_witness() -> (PointSet, PointSet) {
    let edge = PointSet::from_xy(&[(0.0, 0.0), (1.0, 3.0)]).expect("valid");
    let tri = PointSet::from_xy(&[(0.0, 0.0), (4.0, 0.0), (1.0, 3.0)]).expect("valid");
    (edge, tri)
}

/// A non-singleton hull has a nonempty relative interior (its centroid)
/// and positive `mu`.
pub fn check_nonempty_interior(kind: &SigmaKind, s: &PointSet) -> Result<bool> {
    if s.is_singleton() {
        return Ok(true);
    }
    let h = build_sigma(kind, s)?;
    Ok(h.ri_contains(&h.centroid(), 0.0) && h.mu() > 0.0)
}

/// At least two source points lie on the relative boundary.
pub fn check_boundary_points(kind: &SigmaKind, s: &PointSet) -> Result<bool> {
    if s.is_singleton() {
        return Ok(true);
    }
    let h = build_sigma(kind, s)?;
    let on_boundary = s
        .points()
        .iter()
        .filter(|x| h.contains(x, PROPERTY_TOL) && !h.ri_contains(x, PROPERTY_TOL))
        .count();
    Ok(on_boundary >= 2)
}
