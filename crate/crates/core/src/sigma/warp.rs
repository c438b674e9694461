use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, V2};

/// Bi-Lipschitz bijection of the plane used to conjugate a convex hull
/// into a nonconvex one.
///
/// `NormRotation` rotates each point by an angle proportional to its
/// squared norm: `x -> R(alpha |x|^2) x` with
/// `R(a) = [[cos a, sin a], [-sin a, cos a]]`. Norms are preserved, so
/// the inverse is the opposite rotation evaluated at the image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum WarpMap {
    Identity,
    NormRotation { alpha: f64 },
}

impl WarpMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            WarpMap::Identity => Ok(()),
            WarpMap::NormRotation { alpha } if alpha.is_finite() => Ok(()),
            WarpMap::NormRotation { alpha } => {
                Err(Error::InvalidWarp(format!("alpha must be finite, got {alpha}")))
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, WarpMap::Identity | WarpMap::NormRotation { alpha: 0.0 })
    }

    pub fn forward(&self, x: V2) -> V2 {
        match *self {
            WarpMap::Identity => x,
            WarpMap::NormRotation { alpha } => {
                let (s, c) = (alpha * dot(x, x)).sin_cos();
                [c * x[0] + s * x[1], -s * x[0] + c * x[1]]
            }
        }
    }

    pub fn inverse(&self, y: V2) -> V2 {
        match *self {
            WarpMap::Identity => y,
            WarpMap::NormRotation { alpha } => {
                let (s, c) = (alpha * dot(y, y)).sin_cos();
                [c * y[0] - s * y[1], s * y[0] + c * y[1]]
            }
        }
    }

    /// Inverse image of `y` together with the pushed tangent `Dinv(y) dy`.
    pub fn inverse_with_tangent(&self, y: V2, dy: V2) -> (V2, V2) {
        match *self {
            WarpMap::Identity => (y, dy),
            WarpMap::NormRotation { alpha } => {
                let (s, c) = (alpha * dot(y, y)).sin_cos();
                let dtheta = 2.0 * alpha * dot(y, dy);
                // d/dy [R(theta) y] = R(theta) (dy + theta' J y), J = rot(+90deg).
                let v = [dy[0] - dtheta * y[1], dy[1] + dtheta * y[0]];
                (
                    [c * y[0] - s * y[1], s * y[0] + c * y[1]],
                    [c * v[0] - s * v[1], s * v[0] + c * v[1]],
                )
            }
        }
    }

    /// Upper bound on the Lipschitz constant of the inverse on the disc of
    /// radius `r` about the origin.
    pub fn inverse_lipschitz_bound(&self, r: f64) -> f64 {
        match *self {
            WarpMap::Identity => 1.0,
            WarpMap::NormRotation { alpha } => 1.0 + 2.0 * alpha.abs() * r * r,
        }
    }

    /// Upper bound on `|inverse(y)|` given `|y| <= r`.
    pub(crate) fn inverse_radius(&self, r: f64) -> f64 {
        match self {
            WarpMap::Identity | WarpMap::NormRotation { .. } => r,
        }
    }
}
