//! Planar convex geometry kernel.
//!
//! Points live in `R^p`. Hull geometry (the [`Polytope`] type) is planar;
//! lower-dimensional inputs produce segment or single-point polytopes
//! instead of errors. All tolerances are absolute, in world units.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two points closer than this are merged when building a [`PointSet`].
pub const DEDUP_TOL: f64 = 1e-9;

/// Default slack for containment queries.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Maximum distance from an affine subspace at which a point still counts
/// as lying in it.
pub const AFFINE_TOL: f64 = 1e-10;

pub type V2 = [f64; 2];

#[inline]
pub(crate) fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub(crate) fn scale(a: V2, s: f64) -> V2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub(crate) fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn cross(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn norm(a: V2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub(crate) fn dist(a: V2, b: V2) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub(crate) fn lerp(a: V2, b: V2, s: f64) -> V2 {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

/// A position in `R^p` with finite coordinates.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Point(coords))
        } else {
            Err(Error::NonFinite(coords))
        }
    }

    /// Planar point. Panics on non-finite input; use [`Point::new`] for
    /// untrusted data.
    pub fn xy(x: f64, y: f64) -> Self {
        Point::new(vec![x, y]).expect("finite planar point")
    }

    pub(crate) fn from_v2(v: V2) -> Self {
        Point(v.to_vec())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The first two coordinates. Callers check `dim() == 2` beforehand.
    pub(crate) fn v2(&self) -> V2 {
        [self.0[0], self.0[1]]
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Nonempty finite set of points of a common dimension, deduplicated
/// within [`DEDUP_TOL`]. Insertion order of first occurrences is kept.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: impl IntoIterator<Item = Point>) -> Result<Self> {
        let mut kept: Vec<Point> = Vec::new();
        for p in points {
            if let Some(first) = kept.first() {
                if first.dim() != p.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: first.dim(),
                        found: p.dim(),
                    });
                }
            }
            if kept.iter().all(|q| q.distance(&p) > DEDUP_TOL) {
                kept.push(p);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        Ok(PointSet { points: kept })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self> {
        let points = coords
            .iter()
            .map(|&(x, y)| Point::new(vec![x, y]))
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.points.len() == 1
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// True if some member lies within [`DEDUP_TOL`] of `x`.
    pub fn contains_point(&self, x: &Point) -> bool {
        self.points.iter().any(|p| p.distance(x) <= DEDUP_TOL)
    }

    fn v2s(&self) -> Result<Vec<V2>> {
        if self.dim() != 2 {
            return Err(Error::UnsupportedDimension {
                what: "polytope hull",
                p: self.dim(),
            });
        }
        Ok(self.points.iter().map(Point::v2).collect())
    }
}

/// Largest pairwise Euclidean distance.
pub fn euclidean_diameter(s: &PointSet) -> f64 {
    let pts = s.points();
    let mut best = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(a.distance(b));
        }
    }
    best
}

/// Affine dimension of the set, with residuals up to [`AFFINE_TOL`]
/// treated as zero.
pub fn affine_dim(s: &PointSet) -> usize {
    affine_dim_of(s.points().iter().map(Point::coords))
}

/// Gram-Schmidt with largest-residual pivoting, so that short difference
/// vectors never define a direction when longer ones are available.
fn affine_dim_of<'a>(points: impl Iterator<Item = &'a [f64]>) -> usize {
    let pts: Vec<&[f64]> = points.collect();
    let Some(base) = pts.first() else { return 0 };
    let mut residuals: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| p.iter().zip(base.iter()).map(|(a, b)| a - b).collect())
        .collect();
    let p = base.len();
    let mut dim = 0;
    while dim < p {
        let (idx, len) = residuals
            .iter()
            .enumerate()
            .map(|(i, r)| (i, r.iter().map(|c| c * c).sum::<f64>().sqrt()))
            .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if len <= AFFINE_TOL {
            break;
        }
        let dir: Vec<f64> = residuals[idx].iter().map(|c| c / len).collect();
        for r in residuals.iter_mut() {
            let proj: f64 = r.iter().zip(&dir).map(|(a, b)| a * b).sum();
            for (c, d) in r.iter_mut().zip(&dir) {
                *c -= proj * d;
            }
        }
        dim += 1;
    }
    dim
}

/// Planar convex polytope of affine dimension 0, 1 or 2.
///
/// Vertices are in strict convex position: a single point for `dim == 0`,
/// the two endpoints for `dim == 1`, counterclockwise for `dim == 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<V2>,
}

impl Polytope {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[V2] {
        &self.vertices
    }

    pub fn vertex_points(&self) -> Vec<Point> {
        self.vertices.iter().copied().map(Point::from_v2).collect()
    }

    /// Hull of raw planar coordinates. `pts` must be nonempty.
    pub(crate) fn hull_of(pts: &[V2]) -> Polytope {
        debug_assert!(!pts.is_empty());
        let mut uniq: Vec<V2> = Vec::with_capacity(pts.len());
        for &p in pts {
            if uniq.iter().all(|&q| dist(p, q) > DEDUP_TOL) {
                uniq.push(p);
            }
        }
        let dim = affine_dim_of(uniq.iter().map(|v| &v[..]));
        match dim {
            0 => Polytope {
                dim: 0,
                vertices: vec![uniq[0]],
            },
            1 => Self::segment_of(&uniq),
            _ => {
                let chain = monotone_chain(uniq.clone());
                if chain.len() < 3 {
                    Self::segment_of(&uniq)
                } else {
                    Polytope {
                        dim: 2,
                        vertices: chain,
                    }
                }
            }
        }
    }

    fn segment_of(pts: &[V2]) -> Polytope {
        let (mut a, mut b, mut best) = (pts[0], pts[0], -1.0);
        for (i, &p) in pts.iter().enumerate() {
            for &q in &pts[i + 1..] {
                let d = dist(p, q);
                if d > best {
                    best = d;
                    a = p;
                    b = q;
                }
            }
        }
        // Canonical order keeps idempotence checks exact.
        if (b[0], b[1]) < (a[0], a[1]) {
            std::mem::swap(&mut a, &mut b);
        }
        Polytope {
            dim: 1,
            vertices: vec![a, b],
        }
    }

    /// Boundary segments. A segment polytope is its own single edge and a
    /// point is a degenerate edge.
    pub(crate) fn edges(&self) -> Vec<(V2, V2)> {
        match self.dim {
            0 => vec![(self.vertices[0], self.vertices[0])],
            1 => vec![(self.vertices[0], self.vertices[1])],
            _ => {
                let n = self.vertices.len();
                (0..n)
                    .map(|i| (self.vertices[i], self.vertices[(i + 1) % n]))
                    .collect()
            }
        }
    }

    /// Unit outward normals and offsets `(n, c)` with the polygon equal to
    /// `{x : n.x <= c}` over all edges. Only meaningful for `dim == 2`.
    fn halfplanes(&self) -> impl Iterator<Item = (V2, f64)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let e = sub(b, a);
            let len = norm(e);
            let nrm = [e[1] / len, -e[0] / len];
            (nrm, dot(nrm, a))
        })
    }

    /// Euclidean distance from `x` to the polytope (zero inside).
    pub fn distance_to(&self, x: V2) -> f64 {
        match self.dim {
            0 => dist(x, self.vertices[0]),
            1 => segment_distance(x, self.vertices[0], self.vertices[1]),
            _ => {
                if self.halfplanes().all(|(n, c)| dot(n, x) <= c) {
                    0.0
                } else {
                    self.edges()
                        .into_iter()
                        .map(|(a, b)| segment_distance(x, a, b))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn contains(&self, x: V2, tol: f64) -> bool {
        if self.dim == 2 {
            // Cheap rejection: any edge line farther than tol.
            if self.halfplanes().any(|(n, c)| dot(n, x) - c > tol) {
                return false;
            }
        }
        self.distance_to(x) <= tol
    }

    /// Distance from `x` to the relative boundary, measured inside the
    /// affine hull. `None` if `x` is not in the relative interior's closure
    /// within [`AFFINE_TOL`] of the affine hull.
    pub(crate) fn relative_depth(&self, x: V2) -> Option<f64> {
        match self.dim {
            0 => None,
            1 => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                let e = sub(b, a);
                let len = norm(e);
                let u = scale(e, 1.0 / len);
                if cross(u, sub(x, a)).abs() > AFFINE_TOL {
                    return None;
                }
                let s = dot(u, sub(x, a));
                Some(s.min(len - s))
            }
            _ => Some(
                self.halfplanes()
                    .map(|(n, c)| c - dot(n, x))
                    .fold(f64::INFINITY, f64::min),
            ),
        }
    }

    /// Strict relative-interior membership with margin `tol`.
    pub fn ri_contains(&self, x: V2, tol: f64) -> bool {
        matches!(self.relative_depth(x), Some(d) if d > tol)
    }

    /// Largest `t` with `origin + t * dir` in the polytope; zero when the
    /// direction leaves the affine hull.
    pub(crate) fn ray_exit(&self, origin: V2, dir: V2) -> f64 {
        match self.dim {
            0 => 0.0,
            1 => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                let e = sub(b, a);
                let len = norm(e);
                let u = scale(e, 1.0 / len);
                if cross(u, dir).abs() > AFFINE_TOL * norm(dir) {
                    return 0.0;
                }
                let s0 = dot(u, sub(origin, a));
                let dp = dot(u, dir);
                if dp > 0.0 {
                    (len - s0) / dp
                } else if dp < 0.0 {
                    -s0 / dp
                } else {
                    0.0
                }
            }
            _ => {
                let par = AFFINE_TOL * norm(dir);
                self.halfplanes()
                    .filter_map(|(n, c)| {
                        let nd = dot(n, dir);
                        (nd > par).then(|| (c - dot(n, origin)) / nd)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Vertex average; lies in the relative interior for `dim >= 1`.
    pub fn centroid(&self) -> V2 {
        let k = self.vertices.len() as f64;
        let s = self.vertices.iter().fold([0.0, 0.0], |acc, &v| add(acc, v));
        scale(s, 1.0 / k)
    }

    /// Depth of the centroid; the length scale used for interior margins.
    pub fn ri_scale(&self) -> f64 {
        self.relative_depth(self.centroid()).unwrap_or(0.0)
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, &a) in self.vertices.iter().enumerate() {
            for &b in &self.vertices[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        best
    }

    pub fn area(&self) -> f64 {
        if self.dim < 2 {
            return 0.0;
        }
        let v0 = self.vertices[0];
        self.vertices
            .windows(2)
            .map(|w| cross(sub(w[0], v0), sub(w[1], v0)))
            .sum::<f64>()
            * 0.5
    }

    /// `per_edge` equispaced samples on every edge, starting at each edge's
    /// first vertex. Segments are sampled along their length.
    pub fn boundary_samples(&self, per_edge: usize) -> Vec<V2> {
        let m = per_edge.max(1);
        match self.dim {
            0 => vec![self.vertices[0]],
            1 => (0..=m)
                .map(|i| lerp(self.vertices[0], self.vertices[1], i as f64 / m as f64))
                .collect(),
            _ => self
                .edges()
                .into_iter()
                .flat_map(|(a, b)| (0..m).map(move |i| lerp(a, b, i as f64 / m as f64)))
                .collect(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.dim {
            0 => 0.0,
            1 => dist(self.vertices[0], self.vertices[1]),
            _ => self.edges().into_iter().map(|(a, b)| dist(a, b)).sum(),
        }
    }

    /// Point at arclength `s` (taken modulo the perimeter) along the
    /// closed boundary. Segments are traversed forth and back.
    pub(crate) fn boundary_point(&self, s: f64) -> V2 {
        match self.dim {
            0 => self.vertices[0],
            1 => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                let len = dist(a, b);
                let u = s.rem_euclid(2.0 * len);
                if u <= len {
                    lerp(a, b, u / len)
                } else {
                    lerp(b, a, (u - len) / len)
                }
            }
            _ => {
                let total = self.perimeter();
                let mut u = s.rem_euclid(total);
                for (a, b) in self.edges() {
                    let len = dist(a, b);
                    if u <= len {
                        return lerp(a, b, u / len);
                    }
                    u -= len;
                }
                self.vertices[0]
            }
        }
    }

    /// Uniform sample from the polytope (area measure for polygons,
    /// length measure for segments).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> V2 {
        match self.dim {
            0 => self.vertices[0],
            1 => lerp(self.vertices[0], self.vertices[1], rng.gen::<f64>()),
            _ => {
                let v0 = self.vertices[0];
                let areas: Vec<f64> = self
                    .vertices
                    .windows(2)
                    .skip(1)
                    .map(|w| 0.5 * cross(sub(w[0], v0), sub(w[1], v0)))
                    .collect();
                let total: f64 = areas.iter().sum();
                let mut pick = rng.gen::<f64>() * total;
                let mut tri = areas.len() - 1;
                for (i, a) in areas.iter().enumerate() {
                    if pick < *a {
                        tri = i;
                        break;
                    }
                    pick -= a;
                }
                let (b, c) = (self.vertices[tri + 1], self.vertices[tri + 2]);
                let (mut r1, mut r2) = (rng.gen::<f64>(), rng.gen::<f64>());
                if r1 + r2 > 1.0 {
                    r1 = 1.0 - r1;
                    r2 = 1.0 - r2;
                }
                add(v0, add(scale(sub(b, v0), r1), scale(sub(c, v0), r2)))
            }
        }
    }

    /// Convex intersection, or `None` when empty (beyond [`DEFAULT_TOL`]).
    pub fn intersection(&self, other: &Polytope) -> Option<Polytope> {
        let mut cand: Vec<V2> = Vec::new();
        cand.extend(
            self.vertices
                .iter()
                .copied()
                .filter(|&v| other.contains(v, DEFAULT_TOL)),
        );
        cand.extend(
            other
                .vertices
                .iter()
                .copied()
                .filter(|&v| self.contains(v, DEFAULT_TOL)),
        );
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                if let Some(x) = segment_crossing(a, b, c, d) {
                    cand.push(x);
                }
            }
        }
        (!cand.is_empty()).then(|| Polytope::hull_of(&cand))
    }

    /// Hausdorff distance between two polytopes (attained at vertices).
    pub fn hausdorff(&self, other: &Polytope) -> f64 {
        let a = self
            .vertices
            .iter()
            .map(|&v| other.distance_to(v))
            .fold(0.0, f64::max);
        let b = other
            .vertices
            .iter()
            .map(|&v| self.distance_to(v))
            .fold(0.0, f64::max);
        a.max(b)
    }
}

fn monotone_chain(mut pts: Vec<V2>) -> Vec<V2> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut lower: Vec<V2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2
            && cross(
                sub(lower[lower.len() - 1], lower[lower.len() - 2]),
                sub(p, lower[lower.len() - 2]),
            ) <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<V2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && cross(
                sub(upper[upper.len() - 1], upper[upper.len() - 2]),
                sub(p, upper[upper.len() - 2]),
            ) <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub(crate) fn segment_distance(x: V2, a: V2, b: V2) -> f64 {
    let e = sub(b, a);
    let l2 = dot(e, e);
    if l2 == 0.0 {
        return dist(x, a);
    }
    let s = (dot(sub(x, a), e) / l2).clamp(0.0, 1.0);
    dist(x, lerp(a, b, s))
}

/// Proper crossing point of two non-parallel segments.
fn segment_crossing(a: V2, b: V2, c: V2, d: V2) -> Option<V2> {
    let r = sub(b, a);
    let q = sub(d, c);
    let denom = cross(r, q);
    if denom.abs() <= f64::EPSILON * norm(r) * norm(q) || denom == 0.0 {
        return None;
    }
    let w = sub(c, a);
    let s = cross(w, q) / denom;
    let t = cross(w, r) / denom;
    let eps = 1e-12;
    ((-eps..=1.0 + eps).contains(&s) && (-eps..=1.0 + eps).contains(&t)).then(|| lerp(a, b, s))
}

/// Minimal convex polytope containing a planar point set.
pub fn convex_hull(s: &PointSet) -> Result<Polytope> {
    Ok(Polytope::hull_of(&s.v2s()?))
}

/// True iff `x` is within Euclidean distance `tol` of `p`.
pub fn contains(p: &Polytope, x: &Point, tol: f64) -> bool {
    x.dim() == 2 && p.contains(x.v2(), tol)
}

/// True iff `x` is in the relative interior of `p` at depth greater than
/// `tol`. Always false for single-point polytopes.
pub fn ri_contains(p: &Polytope, x: &Point, tol: f64) -> bool {
    x.dim() == 2 && p.ri_contains(x.v2(), tol)
}
