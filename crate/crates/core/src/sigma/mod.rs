//! The family of hull maps `sigma` and the queries the stability analysis
//! needs: membership, relative interior, intrinsic distance `d_S`, the
//! geodesic diameter `mu`, and critical boundary sets `Sigma_x`.
//!
//! Every hull is stored as a convex set (the *core*) in warped
//! coordinates together with the chain of warps mapping world points into
//! it. Unwarped kinds have an empty chain. All queries are conjugated
//! through the chain, so convexity-based reasoning stays exact.

mod measure;
mod region;
mod warp;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cross, dot, Point, PointSet, Polytope, V2};

pub use measure::{d_s, d_s_set, mu, mu_with, MuSettings, DEFAULT_BOUNDARY_SAMPLES, DEFAULT_PATH_SAMPLES};
pub use region::{ConvexCore, OrientedBox};
pub use warp::WarpMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `{x : e_j.x <= max_S e_j.x}`
    Max,
    /// `{x : e_j.x >= min_S e_j.x}`
    Min,
}

/// Which hull map to apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SigmaKind {
    ConvexHull,
    /// Componentwise hull in an orthonormal frame (rows of `basis`).
    AxisBox { basis: Vec<Vec<f64>> },
    /// Polytope with faces normal to `p + 1` positively spanning directions.
    DirectionalPolytope { normals: Vec<[f64; 2]>, side: Side },
    /// `warp^-1(inner(warp(S)))`.
    Warped { warp: WarpMap, inner: Box<SigmaKind> },
    Intersection {
        left: Box<SigmaKind>,
        right: Box<SigmaKind>,
    },
}

impl SigmaKind {
    pub fn axis_box(p: usize) -> Self {
        let basis = (0..p)
            .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        SigmaKind::AxisBox { basis }
    }

    /// Normals `(1,0), (0,1), (-1,-1)`: triangles with one horizontal, one
    /// vertical and one diagonal face.
    pub fn right_triangles(side: Side) -> Self {
        SigmaKind::DirectionalPolytope {
            normals: vec![[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]],
            side,
        }
    }

    pub fn norm_rotation(alpha: f64, inner: SigmaKind) -> Self {
        SigmaKind::Warped {
            warp: WarpMap::NormRotation { alpha },
            inner: Box::new(inner),
        }
    }

    pub fn intersection(left: SigmaKind, right: SigmaKind) -> Self {
        SigmaKind::Intersection {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Uses a non-identity warp somewhere.
    pub fn is_warped(&self) -> bool {
        match self {
            SigmaKind::Warped { warp, inner } => !warp.is_identity() || inner.is_warped(),
            SigmaKind::Intersection { left, right } => left.is_warped() || right.is_warped(),
            _ => false,
        }
    }

    /// Short tag for reports.
    pub fn label(&self) -> String {
        match self {
            SigmaKind::ConvexHull => "convex-hull".into(),
            SigmaKind::AxisBox { .. } => "axis-box".into(),
            SigmaKind::DirectionalPolytope { .. } => "directional-polytope".into(),
            SigmaKind::Warped { inner, .. } => format!("warped({})", inner.label()),
            SigmaKind::Intersection { left, right } => {
                format!("intersection({}, {})", left.label(), right.label())
            }
        }
    }

    /// Structural checks for ambient dimension `p`.
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            SigmaKind::ConvexHull => require_planar("convex hull", p),
            SigmaKind::AxisBox { basis } => region::check_orthonormal(basis, p),
            SigmaKind::DirectionalPolytope { normals, .. } => {
                require_planar("directional polytope", p)?;
                check_positive_span(normals)
            }
            SigmaKind::Warped { warp, inner } => {
                warp.validate()?;
                if !warp.is_identity() {
                    require_planar("warped hull", p)?;
                }
                inner.validate(p)
            }
            SigmaKind::Intersection { left, right } => {
                require_planar("intersection", p)?;
                if !left.is_unwarped() || !right.is_unwarped() {
                    return Err(Error::WarpedIntersection);
                }
                left.validate(p)?;
                right.validate(p)
            }
        }
    }

    fn is_unwarped(&self) -> bool {
        match self {
            SigmaKind::Warped { warp, inner } => warp.is_identity() && inner.is_unwarped(),
            SigmaKind::Intersection { left, right } => left.is_unwarped() && right.is_unwarped(),
            _ => true,
        }
    }
}

fn require_planar(what: &'static str, p: usize) -> Result<()> {
    if p == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension { what, p })
    }
}

/// Three planar directions admit `lambda > 0` with `sum lambda_j e_j = 0`
/// iff the pairwise cross products share a strict sign; then
/// `lambda = (e2 x e3, e3 x e1, e1 x e2)` up to sign.
fn check_positive_span(normals: &[[f64; 2]]) -> Result<()> {
    if normals.len() != 3 || normals.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::NormalsNotPositivelySpanning);
    }
    let c = [
        cross(normals[0], normals[1]),
        cross(normals[1], normals[2]),
        cross(normals[2], normals[0]),
    ];
    let scale: f64 = normals.iter().map(|n| dot(*n, *n)).fold(0.0, f64::max);
    let eps = 1e-12 * scale;
    if c.iter().all(|&v| v > eps) || c.iter().all(|&v| v < -eps) {
        Ok(())
    } else {
        Err(Error::NormalsNotPositivelySpanning)
    }
}

/// A realized hull `sigma(S)`.
#[derive(Debug)]
pub struct HullSet {
    kind: SigmaKind,
    source: PointSet,
    core: ConvexCore,
    /// Applied first to last on the way into the core.
    warps: Vec<WarpMap>,
    mu: OnceLock<f64>,
}

impl Clone for HullSet {
    fn clone(&self) -> Self {
        HullSet {
            kind: self.kind.clone(),
            source: self.source.clone(),
            core: self.core.clone(),
            warps: self.warps.clone(),
            mu: self.mu.clone(),
        }
    }
}

fn build_core(kind: &SigmaKind, pts: &[Vec<f64>]) -> Result<(ConvexCore, Vec<WarpMap>)> {
    let planar = || -> Vec<V2> { pts.iter().map(|x| [x[0], x[1]]).collect() };
    match kind {
        SigmaKind::ConvexHull => Ok((ConvexCore::Polygon(Polytope::hull_of(&planar())), vec![])),
        SigmaKind::AxisBox { basis } => Ok((
            ConvexCore::Box(OrientedBox::around(basis.clone(), pts)),
            vec![],
        )),
        SigmaKind::DirectionalPolytope { normals, side } => {
            let sign = match side {
                Side::Max => 1.0,
                Side::Min => -1.0,
            };
            let e: Vec<V2> = normals.iter().map(|n| [sign * n[0], sign * n[1]]).collect();
            let pl = planar();
            let m: Vec<f64> = e
                .iter()
                .map(|&n| pl.iter().map(|&x| dot(n, x)).fold(f64::NEG_INFINITY, f64::max))
                .collect();
            // Vertex opposite face k is where the other two faces meet.
            let corners: Vec<V2> = (0..3)
                .map(|k| {
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    let det = cross(e[i], e[j]);
                    [
                        (m[i] * e[j][1] - m[j] * e[i][1]) / det,
                        (e[i][0] * m[j] - e[j][0] * m[i]) / det,
                    ]
                })
                .collect();
            Ok((ConvexCore::Polygon(Polytope::hull_of(&corners)), vec![]))
        }
        SigmaKind::Warped { warp, inner } => {
            let mapped: Vec<Vec<f64>> = if warp.is_identity() {
                pts.to_vec()
            } else {
                pts.iter()
                    .map(|x| warp.forward([x[0], x[1]]).to_vec())
                    .collect()
            };
            let (core, mut chain) = build_core(inner, &mapped)?;
            if !warp.is_identity() {
                chain.insert(0, *warp);
            }
            Ok((core, chain))
        }
        SigmaKind::Intersection { left, right } => {
            let (l, lw) = build_core(left, pts)?;
            let (r, rw) = build_core(right, pts)?;
            if !lw.is_empty() || !rw.is_empty() {
                return Err(Error::WarpedIntersection);
            }
            let core = l
                .as_polytope()?
                .intersection(&r.as_polytope()?)
                .ok_or_else(|| Error::Invariant("intersection of hulls is empty".into()))?;
            Ok((ConvexCore::Polygon(core), vec![]))
        }
    }
}

/// Builds `sigma(S)` for the given kind.
pub fn build_sigma(kind: &SigmaKind, s: &PointSet) -> Result<HullSet> {
    kind.validate(s.dim())?;
    let pts: Vec<Vec<f64>> = s.points().iter().map(|p| p.coords().to_vec()).collect();
    let (core, warps) = build_core(kind, &pts)?;
    Ok(HullSet {
        kind: kind.clone(),
        source: s.clone(),
        core,
        warps,
        mu: OnceLock::new(),
    })
}

impl HullSet {
    pub fn kind(&self) -> &SigmaKind {
        &self.kind
    }

    pub fn source(&self) -> &PointSet {
        &self.source
    }

    pub fn core(&self) -> &ConvexCore {
        &self.core
    }

    pub fn warps(&self) -> &[WarpMap] {
        &self.warps
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn is_identity_warp(&self) -> bool {
        self.warps.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.core.is_point()
    }

    /// World point to core coordinates.
    pub fn to_core(&self, x: &Point) -> Vec<f64> {
        let mut y = x.coords().to_vec();
        for w in &self.warps {
            let v = w.forward([y[0], y[1]]);
            y = v.to_vec();
        }
        y
    }

    /// Core coordinates back to a world point.
    pub fn from_core(&self, y: &[f64]) -> Point {
        let mut x = y.to_vec();
        for w in self.warps.iter().rev() {
            x = w.inverse([x[0], x[1]]).to_vec();
        }
        Point::new(x).expect("warps keep points finite")
    }

    pub(crate) fn inverse_with_tangent(&self, y: V2, dy: V2) -> (V2, V2) {
        self.warps
            .iter()
            .rev()
            .fold((y, dy), |(p, t), w| w.inverse_with_tangent(p, t))
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        x.dim() == self.dim() && self.core.contains(&self.to_core(x), tol)
    }

    pub fn ri_contains(&self, x: &Point, tol: f64) -> bool {
        x.dim() == self.dim() && self.core.ri_contains(&self.to_core(x), tol)
    }

    /// Depth of `x` below the relative boundary, in core coordinates.
    pub fn ri_depth(&self, x: &Point) -> Option<f64> {
        self.core.relative_depth(&self.to_core(x))
    }

    /// Interior length scale of the core (depth of its centroid).
    pub fn ri_scale(&self) -> f64 {
        self.core.ri_scale()
    }

    /// World image of the core centroid; in the relative interior whenever
    /// the hull is not a singleton.
    pub fn centroid(&self) -> Point {
        self.from_core(&self.core.centroid())
    }

    /// World images of the core's vertices.
    pub fn core_vertices(&self) -> Vec<Point> {
        self.core
            .vertices()
            .iter()
            .map(|v| self.from_core(v))
            .collect()
    }

    pub fn boundary_samples(&self, per_edge: usize) -> Vec<Point> {
        self.core
            .boundary_samples(per_edge)
            .iter()
            .map(|v| self.from_core(v))
            .collect()
    }

    /// Point at parameter `lambda` on the pullback of the core segment
    /// from `x0` to `x1`.
    pub fn pullback_point(&self, x0: &Point, x1: &Point, lambda: f64) -> Point {
        let a = self.to_core(x0);
        let b = self.to_core(x1);
        let y: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + lambda * (q - p)).collect();
        self.from_core(&y)
    }

    pub fn mu(&self) -> f64 {
        *self.mu.get_or_init(|| mu_with(self, &MuSettings::default()))
    }

    /// Ray-exit critical set test: `y` is on the far boundary as seen from
    /// `x`, i.e. the core ray from `x` through `y` leaves the core at `y`.
    pub fn sigma_x_contains(&self, x: &Point, y: &Point, tol: f64) -> Result<bool> {
        if !self.source.contains_point(x) {
            return Err(Error::NotInSource(x.coords().to_vec()));
        }
        if y.dim() != self.dim() {
            return Ok(false);
        }
        let xo = self.to_core(x);
        let yo = self.to_core(y);
        let d: Vec<f64> = yo.iter().zip(&xo).map(|(a, b)| a - b).collect();
        let len = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len <= tol || !self.core.contains(&yo, tol) {
            return Ok(false);
        }
        let t = self.core.ray_exit(&xo, &d);
        Ok((t - 1.0).abs() * len <= tol)
    }

    /// Upper bound on the world distance from `y` to the hull: exact for
    /// unwarped kinds, otherwise the nearest of the in-core test and the
    /// source points.
    pub fn world_gap(&self, y: &Point) -> f64 {
        let core = self.core.distance(&self.to_core(y));
        if self.warps.is_empty() || core == 0.0 {
            return core;
        }
        self.source
            .points()
            .iter()
            .map(|s| s.distance(y))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vertices of `self` farther than `tol` (world units) from `other`,
    /// with their distance bounds.
    pub fn excess_over(&self, other: &HullSet, tol: f64) -> Result<Vec<f64>> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch);
        }
        Ok(self
            .core
            .vertices()
            .iter()
            .filter(|v| !other.core.contains(v, tol))
            .map(|v| other.world_gap(&self.from_core(v)))
            .filter(|&g| g > tol)
            .collect())
    }

    /// `self` contained in `other` (same kind) up to `tol` in core
    /// coordinates.
    pub fn subset_of(&self, other: &HullSet, tol: f64) -> Result<bool> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch);
        }
        Ok(self
            .core
            .vertices()
            .iter()
            .all(|v| other.core.contains(v, tol)))
    }
}

pub fn hull_contains(h: &HullSet, x: &Point, tol: f64) -> bool {
    h.contains(x, tol)
}

pub fn ri_hull_contains(h: &HullSet, x: &Point, tol: f64) -> bool {
    h.ri_contains(x, tol)
}

pub fn sigma_x_contains(h: &HullSet, x: &Point, y: &Point, tol: f64) -> Result<bool> {
    h.sigma_x_contains(x, y, tol)
}

pub fn hull_subset(a: &HullSet, b: &HullSet, tol: f64) -> Result<bool> {
    a.subset_of(b, tol)
}
