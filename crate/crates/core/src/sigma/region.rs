//! Convex representation of a hull in warped coordinates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Polytope, AFFINE_TOL, V2};

/// Axis-aligned box in an orthonormal frame of `R^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedBox {
    basis: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn project(basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    basis
        .iter()
        .map(|e| e.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn unproject(basis: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let p = basis.len();
    let mut x = vec![0.0; p];
    for (e, &ui) in basis.iter().zip(u) {
        for (xi, ei) in x.iter_mut().zip(e) {
            *xi += ui * ei;
        }
    }
    x
}

pub(crate) fn check_orthonormal(basis: &[Vec<f64>], p: usize) -> Result<()> {
    if basis.len() != p || basis.iter().any(|e| e.len() != p) {
        return Err(Error::BasisNotOrthonormal);
    }
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if !d.is_finite() || (d - want).abs() > 1e-9 {
                return Err(Error::BasisNotOrthonormal);
            }
        }
    }
    Ok(())
}

impl OrientedBox {
    /// Tightest box around `pts` in the frame `basis` (assumed orthonormal).
    pub(crate) fn around(basis: Vec<Vec<f64>>, pts: &[Vec<f64>]) -> Self {
        let p = basis.len();
        let mut lo = vec![f64::INFINITY; p];
        let mut hi = vec![f64::NEG_INFINITY; p];
        for x in pts {
            for (i, u) in project(&basis, x).into_iter().enumerate() {
                lo[i] = lo[i].min(u);
                hi[i] = hi[i].max(u);
            }
        }
        OrientedBox { basis, lo, hi }
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    fn is_flat(&self, i: usize) -> bool {
        self.hi[i] - self.lo[i] <= AFFINE_TOL
    }

    fn dim(&self) -> usize {
        (0..self.lo.len()).filter(|&i| !self.is_flat(i)).count()
    }

    fn distance(&self, x: &[f64]) -> f64 {
        project(&self.basis, x)
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let e = (self.lo[i] - u).max(u - self.hi[i]).max(0.0);
                e * e
            })
            .sum::<f64>()
            .sqrt()
    }

    fn relative_depth(&self, x: &[f64]) -> Option<f64> {
        let u = project(&self.basis, x);
        let mut depth = f64::INFINITY;
        for (i, &ui) in u.iter().enumerate() {
            if self.is_flat(i) {
                if (ui - self.lo[i]).abs() > AFFINE_TOL {
                    return None;
                }
            } else {
                depth = depth.min((ui - self.lo[i]).min(self.hi[i] - ui));
            }
        }
        depth.is_finite().then_some(depth)
    }

    fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> f64 {
        let u = project(&self.basis, origin);
        let d = project(&self.basis, dir);
        let par = AFFINE_TOL * d.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut t = f64::INFINITY;
        for i in 0..u.len() {
            if self.is_flat(i) {
                if d[i].abs() > par {
                    return 0.0;
                }
            } else if d[i] > par {
                t = t.min((self.hi[i] - u[i]) / d[i]);
            } else if d[i] < -par {
                t = t.min((self.lo[i] - u[i]) / d[i]);
            }
        }
        if t.is_finite() {
            t
        } else {
            0.0
        }
    }

    fn corners(&self) -> Vec<Vec<f64>> {
        let p = self.lo.len();
        let free: Vec<usize> = (0..p).filter(|&i| !self.is_flat(i)).collect();
        (0..1usize << free.len())
            .map(|mask| {
                let u: Vec<f64> = (0..p)
                    .map(|i| match free.iter().position(|&f| f == i) {
                        Some(bit) if mask >> bit & 1 == 1 => self.hi[i],
                        _ => self.lo[i],
                    })
                    .collect();
                unproject(&self.basis, &u)
            })
            .collect()
    }

    fn center(&self) -> Vec<f64> {
        let u: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        unproject(&self.basis, &u)
    }

    /// Samples along the edges of the box's 1-skeleton.
    fn skeleton_samples(&self, per_edge: usize) -> Vec<Vec<f64>> {
        let p = self.lo.len();
        let m = per_edge.max(1);
        let free: Vec<usize> = (0..p).filter(|&i| !self.is_flat(i)).collect();
        if free.is_empty() {
            return vec![unproject(&self.basis, &self.lo)];
        }
        let mut out = Vec::new();
        for mask in 0..1usize << free.len() {
            let base: Vec<f64> = (0..p)
                .map(|i| match free.iter().position(|&f| f == i) {
                    Some(bit) if mask >> bit & 1 == 1 => self.hi[i],
                    _ => self.lo[i],
                })
                .collect();
            for (bit, &i) in free.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    continue;
                }
                for s in 0..m {
                    let mut u = base.clone();
                    u[i] = self.lo[i] + (self.hi[i] - self.lo[i]) * s as f64 / m as f64;
                    out.push(unproject(&self.basis, &u));
                }
            }
        }
        out
    }

    fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: Vec<f64> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| a + (b - a) * rng.gen::<f64>())
            .collect();
        unproject(&self.basis, &u)
    }

    /// Inward homothety about the center by factor `f`.
    fn shrink(&self, u: &[f64], c: &[f64], f: f64) -> Vec<f64> {
        u.iter().zip(c).map(|(a, b)| b + f * (a - b)).collect()
    }
}

/// Convex set in warped coordinates backing a [`super::HullSet`].
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexCore {
    Polygon(Polytope),
    Box(OrientedBox),
}

fn v2(x: &[f64]) -> V2 {
    [x[0], x[1]]
}

impl ConvexCore {
    pub fn dim(&self) -> usize {
        match self {
            ConvexCore::Polygon(p) => p.dim(),
            ConvexCore::Box(b) => b.dim(),
        }
    }

    pub fn is_point(&self) -> bool {
        self.dim() == 0
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ConvexCore::Polygon(p) => p.distance_to(v2(x)),
            ConvexCore::Box(b) => b.distance(x),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            ConvexCore::Polygon(p) => p.contains(v2(x), tol),
            ConvexCore::Box(b) => b.distance(x) <= tol,
        }
    }

    pub fn relative_depth(&self, x: &[f64]) -> Option<f64> {
        match self {
            ConvexCore::Polygon(p) => p.relative_depth(v2(x)),
            ConvexCore::Box(b) => b.relative_depth(x),
        }
    }

    pub fn ri_contains(&self, x: &[f64], tol: f64) -> bool {
        matches!(self.relative_depth(x), Some(d) if d > tol)
    }

    pub fn ray_exit(&self, origin: &[f64], dir: &[f64]) -> f64 {
        match self {
            ConvexCore::Polygon(p) => p.ray_exit(v2(origin), v2(dir)),
            ConvexCore::Box(b) => b.ray_exit(origin, dir),
        }
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            ConvexCore::Polygon(p) => p.vertices().iter().map(|v| v.to_vec()).collect(),
            ConvexCore::Box(b) => b.corners(),
        }
    }

    pub fn centroid(&self) -> Vec<f64> {
        match self {
            ConvexCore::Polygon(p) => p.centroid().to_vec(),
            ConvexCore::Box(b) => b.center(),
        }
    }

    /// Depth of the centroid below the relative boundary.
    pub fn ri_scale(&self) -> f64 {
        self.relative_depth(&self.centroid()).unwrap_or(0.0)
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexCore::Polygon(p) => p.diameter(),
            ConvexCore::Box(b) => b
                .lo
                .iter()
                .zip(&b.hi)
                .map(|(a, c)| (c - a) * (c - a))
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn boundary_samples(&self, per_edge: usize) -> Vec<Vec<f64>> {
        match self {
            ConvexCore::Polygon(p) => p
                .boundary_samples(per_edge)
                .into_iter()
                .map(|v| v.to_vec())
                .collect(),
            ConvexCore::Box(b) => b.skeleton_samples(per_edge),
        }
    }

    /// Planar polytope view. Boxes are converted through their corners.
    pub fn as_polytope(&self) -> Result<Polytope> {
        match self {
            ConvexCore::Polygon(p) => Ok(p.clone()),
            ConvexCore::Box(b) if b.lo.len() == 2 => {
                let corners: Vec<V2> = b.corners().iter().map(|c| v2(c)).collect();
                Ok(Polytope::hull_of(&corners))
            }
            ConvexCore::Box(b) => Err(Error::UnsupportedDimension {
                what: "planar view of a box",
                p: b.lo.len(),
            }),
        }
    }

    /// Uniform sample from the core shrunk about its centroid by `1 - eps`.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R, eps: f64) -> Vec<f64> {
        let c = self.centroid();
        let f = 1.0 - eps;
        match self {
            ConvexCore::Polygon(p) => {
                let u = p.sample_uniform(rng);
                vec![c[0] + f * (u[0] - c[0]), c[1] + f * (u[1] - c[1])]
            }
            ConvexCore::Box(b) => b.shrink(&b.sample_uniform(rng), &c, f),
        }
    }

    pub fn hausdorff(&self, other: &ConvexCore) -> f64 {
        let a = self
            .vertices()
            .iter()
            .map(|v| other.distance(v))
            .fold(0.0, f64::max);
        let b = other
            .vertices()
            .iter()
            .map(|v| self.distance(v))
            .fold(0.0, f64::max);
        a.max(b)
    }
}
