//! Functions on S¹/S² that can report their value, spherical gradient and
//! the Riemannian gradient of `‖∇p‖²`. The optimizer, the root finder and
//! the mesher only talk to this trait.

use crate::error::{Error, Result};
use crate::harmonics::{CircleSeries, HarmonicExpansion};
use crate::poly::HomogeneousPoly;
use crate::sphere::{dot, project_tangent, Rotation3};

/// First and second order data at a point of the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    /// spherical gradient `∇_S p`
    pub grad: Vec<f64>,
    /// Riemannian gradient of `θ ↦ ‖∇_S p(θ)‖²`
    pub grad_sq_grad: Vec<f64>,
}

pub trait SphereFunction: Send + Sync {
    /// Sphere dimension.
    fn n(&self) -> usize;

    /// Degree of the homogeneous polynomial this is the restriction of.
    fn degree(&self) -> usize;

    fn bw_norm(&self) -> f64;

    fn value(&self, x: &[f64]) -> f64;

    /// Value and spherical gradient.
    fn first_order(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn jet(&self, x: &[f64]) -> Jet;
}

impl SphereFunction for HomogeneousPoly {
    fn n(&self) -> usize {
        HomogeneousPoly::n(self)
    }

    fn degree(&self) -> usize {
        HomogeneousPoly::degree(self)
    }

    fn bw_norm(&self) -> f64 {
        HomogeneousPoly::bw_norm(self)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x).expect("point dimension matches")
    }

    fn first_order(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, g, _) = self.derivatives(x).expect("point dimension matches");
        (v, project_tangent(x, &g))
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let (value, g, h) = self.derivatives(x).expect("point dimension matches");
        let s = dot(x, &g);
        let v: Vec<f64> = g.iter().zip(x).map(|(gi, xi)| gi - s * xi).collect();
        let hv: Vec<f64> = h.iter().map(|row| dot(row, &v)).collect();
        let hv_t = project_tangent(x, &hv);
        let grad_sq_grad = hv_t.iter().zip(&v).map(|(a, b)| 2.0 * (a - s * b)).collect();
        Jet { value, grad: v, grad_sq_grad }
    }
}

/// A trigonometric polynomial on S¹ together with its homogeneous degree.
#[derive(Debug, Clone)]
pub struct CircleFunction {
    series: CircleSeries,
    degree: usize,
    bw: f64,
}

impl CircleFunction {
    pub fn series(&self) -> &CircleSeries {
        &self.series
    }
}

impl SphereFunction for CircleFunction {
    fn n(&self) -> usize {
        1
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn bw_norm(&self) -> f64 {
        self.bw
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.series.value(x[1].atan2(x[0]))
    }

    fn first_order(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, d1, _) = self.series.eval_derivs(x[1].atan2(x[0]));
        (v, vec![-d1 * x[1], d1 * x[0]])
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let (v, d1, d2) = self.series.eval_derivs(x[1].atan2(x[0]));
        let t = [-x[1], x[0]];
        Jet {
            value: v,
            grad: vec![d1 * t[0], d1 * t[1]],
            grad_sq_grad: vec![2.0 * d1 * d2 * t[0], 2.0 * d1 * d2 * t[1]],
        }
    }
}

/// Evaluation backend for a harmonic expansion: trigonometric on S¹,
/// homogeneous polynomial on S².
#[derive(Debug, Clone)]
pub enum Evaluator {
    Circle(CircleFunction),
    Poly(HomogeneousPoly),
}

impl Evaluator {
    pub fn from_expansion(e: &HarmonicExpansion) -> Result<Self> {
        let degree = e.effective_degree().unwrap_or(0);
        match e.n() {
            1 => Ok(Self::Circle(CircleFunction {
                series: e.circle_series()?,
                degree,
                bw: e.bw_norm(),
            })),
            2 => Ok(Self::Poly(e.to_homogeneous()?)),
            n => Err(Error::UnsupportedDimension(n)),
        }
    }
}

impl SphereFunction for Evaluator {
    fn n(&self) -> usize {
        match self {
            Self::Circle(c) => c.n(),
            Self::Poly(p) => SphereFunction::n(p),
        }
    }

    fn degree(&self) -> usize {
        match self {
            Self::Circle(c) => c.degree(),
            Self::Poly(p) => SphereFunction::degree(p),
        }
    }

    fn bw_norm(&self) -> f64 {
        match self {
            Self::Circle(c) => c.bw_norm(),
            Self::Poly(p) => SphereFunction::bw_norm(p),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Circle(c) => c.value(x),
            Self::Poly(p) => SphereFunction::value(p, x),
        }
    }

    fn first_order(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Self::Circle(c) => c.first_order(x),
            Self::Poly(p) => p.first_order(x),
        }
    }

    fn jet(&self, x: &[f64]) -> Jet {
        match self {
            Self::Circle(c) => c.jet(x),
            Self::Poly(p) => p.jet(x),
        }
    }
}

/// `θ ↦ f(Rθ)` on S².
#[derive(Debug, Clone)]
pub struct Rotated<F> {
    pub inner: F,
    pub rotation: Rotation3,
}

impl<F: SphereFunction> SphereFunction for Rotated<F> {
    fn n(&self) -> usize {
        2
    }

    fn degree(&self) -> usize {
        self.inner.degree()
    }

    fn bw_norm(&self) -> f64 {
        self.inner.bw_norm()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.rotation.apply(x))
    }

    fn first_order(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.inner.first_order(&self.rotation.apply(x));
        (v, self.rotation.apply_transpose(&g).to_vec())
    }

    fn jet(&self, x: &[f64]) -> Jet {
        let j = self.inner.jet(&self.rotation.apply(x));
        Jet {
            value: j.value,
            grad: self.rotation.apply_transpose(&j.grad).to_vec(),
            grad_sq_grad: self.rotation.apply_transpose(&j.grad_sq_grad).to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::decompose;
    use crate::poly::MultiIndex;
    use crate::sphere::{norm, SpherePoint};

    fn numeric_riemannian_grad(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        // central differences along an orthonormal tangent frame
        let n = x.len();
        let mut frame: Vec<Vec<f64>> = Vec::new();
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let mut t = project_tangent(x, &e);
            for f in &frame {
                let c = dot(&t, f);
                t.iter_mut().zip(f).for_each(|(a, b)| *a -= c * b);
            }
            let r = norm(&t);
            if r > 1e-6 {
                frame.push(t.iter().map(|v| v / r).collect());
            }
        }
        let h = 1e-6;
        let mut g = vec![0.0; n];
        for t in frame.iter().take(n - 1) {
            let step = |s: f64| -> Vec<f64> {
                let (c, sn) = (s.cos(), s.sin());
                x.iter().zip(t).map(|(a, b)| c * a + sn * b).collect()
            };
            let dfdt = (f(&step(h)) - f(&step(-h))) / (2.0 * h);
            g.iter_mut().zip(t).for_each(|(gi, ti)| *gi += dfdt * ti);
        }
        g
    }

    #[test]
    fn poly_jet_matches_finite_differences() {
        let p = HomogeneousPoly::from_terms(
            2,
            3,
            [
                (MultiIndex(vec![3, 0, 0]), 1.0),
                (MultiIndex(vec![1, 1, 1]), -2.0),
                (MultiIndex(vec![0, 1, 2]), 0.7),
                (MultiIndex(vec![0, 0, 3]), 0.4),
            ],
        )
        .unwrap();
        let x = SpherePoint::from_spherical(1.0, 0.4);
        let j = p.jet(x.coords());
        let num = numeric_riemannian_grad(|y| p.value(y), x.coords());
        for (a, b) in j.grad.iter().zip(&num) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let gsq = |y: &[f64]| {
            let g = p.first_order(y).1;
            dot(&g, &g)
        };
        let num = numeric_riemannian_grad(gsq, x.coords());
        for (a, b) in j.grad_sq_grad.iter().zip(&num) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn circle_evaluator_agrees_with_poly() {
        let p = HomogeneousPoly::from_terms(
            1,
            4,
            [(MultiIndex(vec![4, 0]), 1.0), (MultiIndex(vec![1, 3]), -3.0), (MultiIndex(vec![2, 2]), 0.5)],
        )
        .unwrap();
        let ev = Evaluator::from_expansion(&decompose(&p).unwrap()).unwrap();
        assert!((ev.bw_norm() - p.bw_norm()).abs() < 1e-12);
        for k in 0..7 {
            let x = SpherePoint::from_angle(0.9 * k as f64);
            let (a, b) = (p.jet(x.coords()), ev.jet(x.coords()));
            assert!((a.value - b.value).abs() < 1e-12);
            for i in 0..2 {
                assert!((a.grad[i] - b.grad[i]).abs() < 1e-11);
                assert!((a.grad_sq_grad[i] - b.grad_sq_grad[i]).abs() < 1e-10);
            }
        }
    }
}
