//! Points on the unit sphere and a few vector helpers shared by the
//! optimizer, the mesher and the nesting test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A unit vector in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalizes `coords` onto the sphere. Fails on the zero vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if coords.len() < 2 || r == 0.0 || !r.is_finite() {
            return Err(Error::InvalidInput("cannot normalize vector onto the sphere".into()));
        }
        Ok(Self { coords: coords.into_iter().map(|c| c / r).collect() })
    }

    /// Point `(cos φ, sin φ)` on S¹.
    pub fn from_angle(phi: f64) -> Self {
        Self { coords: vec![phi.cos(), phi.sin()] }
    }

    /// Point on S² from colatitude `θ` (measured from `e₂`) and longitude `φ`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        Self { coords: vec![s * phi.cos(), s * phi.sin(), theta.cos()] }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[i] = 1.0;
        Self { coords }
    }

    /// Sphere dimension `n` (the point lives in `R^{n+1}`).
    pub fn n(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Angle `φ ∈ [0, 2π)` of a point on S¹.
    pub fn angle(&self) -> f64 {
        let a = self.coords[1].atan2(self.coords[0]);
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }

    /// `(θ, φ)` colatitude and longitude of a point on S².
    pub fn spherical(&self) -> (f64, f64) {
        let [x, y, z] = [self.coords[0], self.coords[1], self.coords[2]];
        let theta = (x.hypot(y)).atan2(z);
        let phi = y.atan2(x);
        (theta, if phi < 0.0 { phi + std::f64::consts::TAU } else { phi })
    }

    /// Projection of `v` onto the tangent space at this point.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        project_tangent(&self.coords, v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn project_tangent(x: &[f64], v: &[f64]) -> Vec<f64> {
    let s = dot(x, v);
    v.iter().zip(x).map(|(vi, xi)| vi - s * xi).collect()
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let r = dot3(&a, &a).sqrt();
    [a[0] / r, a[1] / r, a[2] / r]
}

/// Great-circle distance between unit vectors.
pub(crate) fn arc_distance(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b);
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
    if c.abs() < 0.9 {
        c.clamp(-1.0, 1.0).acos()
    } else {
        2.0 * diff.atan2(sum)
    }
}

/// A 3×3 rotation matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(pub [[f64; 3]; 3]);

impl Rotation3 {
    /// Rotation by `angle` about the unit `axis` (Rodrigues).
    pub fn about_axis(axis: [f64; 3], angle: f64) -> Self {
        let [x, y, z] = normalize3(axis);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Self([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    pub fn apply(&self, v: &[f64]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn apply_transpose(&self, v: &[f64]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
            m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
            m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spherical_roundtrip() {
        let p = SpherePoint::from_spherical(1.1, 4.0);
        let (t, f) = p.spherical();
        assert!((t - 1.1).abs() < 1e-14 && (f - 4.0).abs() < 1e-14);
        assert!((norm(p.coords()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(SpherePoint::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let r = Rotation3::about_axis([1.0, 2.0, -0.5], 0.8);
        let v = [0.3, -0.2, 0.9];
        let back = r.apply_transpose(&r.apply(&v));
        for i in 0..3 {
            assert!((back[i] - v[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn arc_distance_small_and_large() {
        let a = SpherePoint::from_angle(0.0);
        let b = SpherePoint::from_angle(1e-9);
        assert!((arc_distance(a.coords(), b.coords()) - 1e-9).abs() < 1e-20);
        let c = SpherePoint::from_angle(2.0);
        assert!((arc_distance(a.coords(), c.coords()) - 2.0).abs() < 1e-14);
    }
}
