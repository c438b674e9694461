//! Intrinsic distance `d_S` and geodesic diameter `mu`.
//!
//! Paths are pullbacks of straight core segments:
//! `psi(l) = warp^-1((1 - l) warp(x0) + l warp(x1))`. For unwarped hulls
//! this is the straight segment and the distance is exact. Otherwise the
//! polyline length of the sampled pullback is an upper bound on the true
//! intrinsic distance, and `mu` is approximated by maximizing it over
//! pairs of boundary points.

use crate::error::{Error, Result};
use crate::geometry::{dist, lerp, norm, sub, Point, PointSet, Polytope, DEFAULT_TOL, V2};

use super::HullSet;

pub const DEFAULT_BOUNDARY_SAMPLES: usize = 64;
pub const DEFAULT_PATH_SAMPLES: usize = 1000;

/// Resolution of the approximate `mu` for warped hulls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuSettings {
    /// Candidate endpoints per core edge.
    pub boundary_per_edge: usize,
    /// Polyline samples along the reported maximizing path.
    pub path_samples: usize,
}

impl Default for MuSettings {
    fn default() -> Self {
        MuSettings {
            boundary_per_edge: DEFAULT_BOUNDARY_SAMPLES,
            path_samples: DEFAULT_PATH_SAMPLES,
        }
    }
}

/// Polyline length of the pullback path between two core points.
fn pullback_polyline(h: &HullSet, a: &[f64], b: &[f64], n: usize) -> f64 {
    let n = n.max(1);
    let mut prev = h.from_core(a);
    let mut total = 0.0;
    for i in 1..=n {
        let l = i as f64 / n as f64;
        let y: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + l * (q - p)).collect();
        let cur = h.from_core(&y);
        total += prev.distance(&cur);
        prev = cur;
    }
    total
}

/// Intrinsic distance along the pullback path; exact for unwarped hulls.
pub fn d_s(h: &HullSet, x0: &Point, x1: &Point, n_samples: usize) -> Result<f64> {
    for x in [x0, x1] {
        if !h.contains(x, DEFAULT_TOL) {
            return Err(Error::OutsideHull(x.coords().to_vec()));
        }
    }
    if h.is_identity_warp() {
        return Ok(x0.distance(x1));
    }
    Ok(pullback_polyline(h, &h.to_core(x0), &h.to_core(x1), n_samples))
}

/// Smallest `d_S(a, s)` over `a` in `from` and `s` in a boundary sampling
/// of the hull (plus the source and `from` points) accepted by `target`.
/// `+inf` when no sampled point satisfies `target`.
pub fn d_s_set(
    h: &HullSet,
    from: &PointSet,
    target: impl Fn(&Point) -> bool,
    n_samples: usize,
) -> Result<f64> {
    let mut cands: Vec<Point> = h.boundary_samples(DEFAULT_BOUNDARY_SAMPLES);
    cands.extend(h.source().points().iter().cloned());
    cands.extend(from.points().iter().cloned());
    cands.retain(|p| target(p));
    let mut best = f64::INFINITY;
    for a in from.points() {
        for s in &cands {
            best = best.min(d_s(h, a, s, n_samples)?);
        }
    }
    Ok(best)
}

/// Gauss-Legendre nodes and weights on [0, 1].
const GL8: [(f64, f64); 8] = gl_unit([
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
]);

const fn gl_unit<const N: usize>(nodes: [(f64, f64); N]) -> [(f64, f64); N] {
    let mut out = [(0.0, 0.0); N];
    let mut i = 0;
    while i < N {
        out[i] = (0.5 * (nodes[i].0 + 1.0), 0.5 * nodes[i].1);
        i += 1;
    }
    out
}

/// Arc length of the pullback of the core segment `[a, b]`, by composite
/// Gauss-Legendre quadrature of the speed `|Dwarp^-1(y) (b - a)|`.
fn pullback_length(h: &HullSet, a: V2, b: V2, panels: usize) -> f64 {
    let d = sub(b, a);
    let w = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        for &(x, wt) in &GL8 {
            let l = (k as f64 + x) * w;
            let (_, t) = h.inverse_with_tangent(lerp(a, b, l), d);
            total += wt * w * norm(t);
        }
    }
    total
}

/// `mu(H)` with default resolution (cached on the hull).
pub fn mu(h: &HullSet) -> f64 {
    h.mu()
}

/// Geodesic diameter.
///
/// Unwarped hulls: the Euclidean diameter of the core vertices (exact).
/// Warped hulls: maximum pullback length over pairs of core boundary
/// samples, refined by a local pattern search on the boundary arclength
/// parameters and reported as the polyline length at `path_samples`.
/// Pullback paths between interior points extend to longer paths between
/// boundary points, so boundary pairs suffice.
pub fn mu_with(h: &HullSet, settings: &MuSettings) -> f64 {
    if h.is_singleton() {
        return 0.0;
    }
    if h.is_identity_warp() {
        return h.core().diameter();
    }
    let poly = match h.core().as_polytope() {
        Ok(p) => p,
        Err(_) => return h.core().diameter(),
    };
    if poly.dim() == 1 {
        let v = poly.vertices();
        return pullback_polyline(h, &v[0], &v[1], settings.path_samples);
    }
    let (sa, sb) = maximize_pair(h, &poly, settings.boundary_per_edge);
    let a = poly.boundary_point(sa);
    let b = poly.boundary_point(sb);
    pullback_polyline(h, &a, &b, settings.path_samples)
}

/// Arclength parameters of the (approximately) longest pullback path
/// between boundary points of a planar core polygon.
fn maximize_pair(h: &HullSet, poly: &Polytope, per_edge: usize) -> (f64, f64) {
    let per_edge = per_edge.max(1);
    let mut params = Vec::new();
    let mut acc = 0.0;
    for (a, b) in poly.edges() {
        let len = dist(a, b);
        for i in 0..per_edge {
            params.push(acc + len * i as f64 / per_edge as f64);
        }
        acc += len;
    }
    let perimeter = acc;
    let pts: Vec<V2> = params.iter().map(|&s| poly.boundary_point(s)).collect();

    let radius = poly.vertices().iter().map(|&v| norm(v)).fold(0.0, f64::max);
    let lip = lipschitz_bound(h, radius);

    // Vertex pairs seed the lower bound used for pruning.
    let mut lower = 0.0f64;
    let mut top: Vec<(f64, usize, usize)> = Vec::new();
    for i in (0..pts.len()).step_by(per_edge) {
        for j in (i + per_edge..pts.len()).step_by(per_edge) {
            lower = lower.max(pullback_length(h, pts[i], pts[j], 1));
        }
    }
    const KEEP: usize = 6;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let chord = dist(pts[i], pts[j]);
            if chord * lip < lower {
                continue;
            }
            let l = pullback_length(h, pts[i], pts[j], 1);
            lower = lower.max(l);
            if top.len() < KEEP || l > top[top.len() - 1].0 {
                top.push((l, i, j));
                top.sort_by(|x, y| y.0.total_cmp(&x.0));
                top.truncate(KEEP);
            }
        }
    }

    let f = |sa: f64, sb: f64| {
        pullback_length(h, poly.boundary_point(sa), poly.boundary_point(sb), 4)
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let step0 = perimeter / params.len() as f64;
    for &(_, i, j) in &top {
        let (mut sa, mut sb) = (params[i], params[j]);
        let mut val = f(sa, sb);
        let mut step = step0;
        while step > 1e-12 * perimeter {
            let mut moved = false;
            for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = f(sa + da, sb + db);
                if v > val {
                    val = v;
                    sa += da;
                    sb += db;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if val > best.0 {
            best = (val, sa, sb);
        }
    }
    (best.1, best.2)
}

fn lipschitz_bound(h: &HullSet, mut radius: f64) -> f64 {
    let mut k = 1.0;
    for w in h.warps().iter().rev() {
        k *= w.inverse_lipschitz_bound(radius);
        radius = w.inverse_radius(radius);
    }
    k
}
