//! C¹ norm and discriminant distance, both by grid seeding followed by
//! Riemannian gradient refinement on the sphere.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Jet, SphereFunction};
use crate::sphere::{dot, SpherePoint};

/// Relative threshold below which `δ(p)` is reported as zero.
pub const SINGULAR_THRESHOLD: f64 = 1e-9;

/// Grid seeding and refinement controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Grid points per great circle, per unit of degree.
    pub points_per_degree: usize,
    /// Number of grid seeds refined.
    pub seeds: usize,
    /// Stationarity tolerance, relative to the objective's natural scale.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { points_per_degree: 8, seeds: 8, tolerance: 1e-10, max_iterations: 400 }
    }
}

impl SearchOptions {
    pub fn with_resolution_factor(mut self, factor: usize) -> Self {
        self.points_per_degree *= factor;
        self
    }
}

/// Result of a global extremum search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremumReport {
    pub value: f64,
    pub point: SpherePoint,
    /// grid points per great circle
    pub grid_resolution: usize,
    pub refinement_iterations: usize,
    /// best value seen on the grid, before refinement
    pub seed_value: f64,
    /// refinement reached the stationarity tolerance
    pub certified: bool,
    /// final Riemannian gradient norm at `point`
    pub stationarity: f64,
}

/// `‖p‖_{C¹} = max |p| + max ‖∇_S p‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    pub value: f64,
    pub sup: ExtremumReport,
    pub gradient_sup: ExtremumReport,
    pub certified: bool,
}

/// `δ(p)` with the minimizer of the Raffalli objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    /// `δ(p)`, set to 0 when `singular`
    pub value: f64,
    /// unclamped minimum of the objective
    pub raw_value: f64,
    pub singular: bool,
    pub degree: usize,
    pub extremum: ExtremumReport,
}

fn check_dim(f: &dyn SphereFunction) -> Result<()> {
    match f.n() {
        1 | 2 => Ok(()),
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// Seed grid: uniform angles on S¹, latitude rings on S².
fn grid(n: usize, per_circle: usize) -> Vec<[f64; 3]> {
    let per_circle = per_circle.max(16).div_ceil(4) * 4;
    if n == 1 {
        return (0..per_circle)
            .map(|k| {
                let phi = std::f64::consts::TAU * k as f64 / per_circle as f64;
                [phi.cos(), phi.sin(), 0.0]
            })
            .collect();
    }
    let nlat = per_circle / 2;
    let mut pts = Vec::new();
    for i in 0..nlat {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / nlat as f64;
        let nlon = ((per_circle as f64 * theta.sin()).ceil() as usize).max(4);
        for k in 0..nlon {
            let phi = std::f64::consts::TAU * (k as f64 + 0.5 * (i % 2) as f64) / nlon as f64;
            pts.push([theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]);
        }
    }
    pts
}

struct Refined {
    x: Vec<f64>,
    f: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

/// Riemannian gradient descent with Barzilai-Borwein steps and Armijo
/// backtracking; every accepted step strictly decreases `f`.
fn descend(
    obj: &dyn Fn(&[f64]) -> (f64, Vec<f64>),
    x0: &[f64],
    tol: f64,
    max_iter: usize,
    max_angle: f64,
) -> Refined {
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj(&x);
    let mut gn = dot(&g, &g).sqrt();
    let mut step = if gn > 0.0 { max_angle / gn } else { 0.0 };
    let mut iterations = 0;
    while iterations < max_iter && gn > tol {
        iterations += 1;
        let mut t = step.min(max_angle / gn);
        let mut accepted = None;
        for _ in 0..60 {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let r = dot(&y, &y).sqrt();
            y.iter_mut().for_each(|v| *v /= r);
            let (fy, gy) = obj(&y);
            if fy <= f - 1e-4 * t * gn * gn {
                accepted = Some((y, fy, gy));
                break;
            }
            t *= 0.5;
        }
        let Some((y, fy, gy)) = accepted else { break };
        let s: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &dg);
        step = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * t };
        x = y;
        f = fy;
        g = gy;
        gn = dot(&g, &g).sqrt();
    }
    Refined { x, f, grad_norm: gn, iterations, converged: gn <= tol }
}

/// Minimizes `obj` over the sphere: evaluates `grid_obj` on the seed grid,
/// refines the best separated seeds with `obj`.
fn minimize(
    n: usize,
    degree: usize,
    opts: &SearchOptions,
    grid_obj: &(dyn Fn(&[f64]) -> f64 + Sync),
    obj: &(dyn Fn(&[f64]) -> (f64, Vec<f64>) + Sync),
) -> (ExtremumReport, f64) {
    let per_circle = opts.points_per_degree * degree.max(1);
    let pts = grid(n, per_circle);
    let dim = n + 1;
    let vals: Vec<f64> = pts.iter().map(|p| grid_obj(&p[..dim])).collect();
    let spacing = std::f64::consts::TAU / per_circle.max(16) as f64;
    let seeds = select_seeds(n, &pts, &vals, opts.seeds, spacing);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = opts.tolerance * scale.max(f64::MIN_POSITIVE) * degree.max(1) as f64;
    let max_angle = 0.5 * spacing;
    let mut best: Option<(Refined, f64)> = None;
    for i in seeds {
        let r = descend(obj, &pts[i][..dim], tol, opts.max_iterations, max_angle);
        let better = match &best {
            None => true,
            Some((b, _)) => r.f < b.f,
        };
        if better {
            best = Some((r, vals[i]));
        }
    }
    let (r, seed_value) = best.expect("at least one seed");
    let report = ExtremumReport {
        value: r.f,
        point: SpherePoint::new(r.x).expect("unit"),
        grid_resolution: per_circle.max(16).div_ceil(4) * 4,
        refinement_iterations: r.iterations,
        seed_value,
        certified: r.converged,
        stationarity: r.grad_norm,
    };
    (report, scale)
}

fn select_seeds(n: usize, pts: &[[f64; 3]], vals: &[f64], k: usize, spacing: f64) -> Vec<usize> {
    let len = vals.len();
    let mut cands: Vec<usize> = if n == 1 {
        // local minima of the cyclic sequence
        (0..len)
            .filter(|&i| vals[i] <= vals[(i + len - 1) % len] && vals[i] <= vals[(i + 1) % len])
            .collect()
    } else {
        (0..len).collect()
    };
    cands.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let min_sep = (3.0 * spacing).cos();
    let mut out: Vec<usize> = Vec::with_capacity(k);
    for i in cands {
        if out.len() == k {
            break;
        }
        if n == 2 && out.iter().any(|&j| {
            pts[i][0] * pts[j][0] + pts[i][1] * pts[j][1] + pts[i][2] * pts[j][2] > min_sep
        }) {
            continue;
        }
        out.push(i);
    }
    if out.is_empty() {
        out.push(0);
    }
    out
}

fn negate(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| -x).collect()
}

/// `max_θ |p(θ)|`.
pub fn sup_norm(f: &dyn SphereFunction, opts: &SearchOptions) -> Result<ExtremumReport> {
    check_dim(f)?;
    let (mut r, _) = minimize(
        f.n(),
        f.degree(),
        opts,
        &|x| -f.value(x).powi(2),
        &|x| {
            let (v, g) = f.first_order(x);
            (-v * v, negate(g.iter().map(|gi| 2.0 * v * gi).collect()))
        },
    );
    r.value = (-r.value).max(0.0).sqrt();
    r.seed_value = (-r.seed_value).max(0.0).sqrt();
    Ok(r)
}

/// `max_θ ‖∇_S p(θ)‖`.
pub fn gradient_sup_norm(f: &dyn SphereFunction, opts: &SearchOptions) -> Result<ExtremumReport> {
    check_dim(f)?;
    let (mut r, _) = minimize(
        f.n(),
        f.degree(),
        opts,
        &|x| {
            let g = f.first_order(x).1;
            -dot(&g, &g)
        },
        &|x| {
            let Jet { grad, grad_sq_grad, .. } = f.jet(x);
            (-dot(&grad, &grad), negate(grad_sq_grad))
        },
    );
    r.value = (-r.value).max(0.0).sqrt();
    r.seed_value = (-r.seed_value).max(0.0).sqrt();
    Ok(r)
}

/// `‖p‖_{C¹} = max|p| + max‖∇_S p‖`.
pub fn c1_norm(f: &dyn SphereFunction, opts: &SearchOptions) -> Result<C1Report> {
    let sup = sup_norm(f, opts)?;
    let gradient_sup = gradient_sup_norm(f, opts)?;
    Ok(C1Report {
        value: sup.value + gradient_sup.value,
        certified: sup.certified && gradient_sup.certified,
        sup,
        gradient_sup,
    })
}

/// Pointwise Raffalli objective `(p² + ‖∇_S p‖²/d)^{1/2}`.
pub fn raffalli_objective(f: &dyn SphereFunction, x: &[f64]) -> f64 {
    let d = f.degree().max(1) as f64;
    let (v, g) = f.first_order(x);
    (v * v + dot(&g, &g) / d).sqrt()
}

/// Distance to the discriminant,
/// `δ(p) = min_θ (p(θ)² + ‖∇_S p(θ)‖²/d)^{1/2}`.
pub fn delta(f: &dyn SphereFunction, opts: &SearchOptions) -> Result<DeltaReport> {
    check_dim(f)?;
    let degree = f.degree();
    let d = degree.max(1) as f64;
    let (mut r, _) = minimize(
        f.n(),
        degree,
        opts,
        &|x| {
            let (v, g) = f.first_order(x);
            v * v + dot(&g, &g) / d
        },
        &|x| {
            let Jet { value, grad, grad_sq_grad } = f.jet(x);
            let obj = value * value + dot(&grad, &grad) / d;
            let g = grad.iter().zip(&grad_sq_grad).map(|(a, b)| 2.0 * value * a + b / d).collect();
            (obj, g)
        },
    );
    r.value = r.value.max(0.0).sqrt();
    r.seed_value = r.seed_value.max(0.0).sqrt();
    let bw = f.bw_norm();
    let singular = r.value <= SINGULAR_THRESHOLD * bw || bw == 0.0;
    Ok(DeltaReport {
        value: if singular { 0.0 } else { r.value },
        raw_value: r.value,
        singular,
        degree,
        extremum: r,
    })
}
