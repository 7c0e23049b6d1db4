use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::function::SphereFunction;

/// Relative size below which `|p|` and `|p'|` together flag a tangency.
pub const TANGENCY_THRESHOLD: f64 = 1e-9;

fn scan(f: &dyn SphereFunction, m: usize, tol: f64) -> Result<Vec<(f64, f64)>> {
    let h = TAU / m as f64;
    let vals: Vec<f64> = (0..m)
        .map(|k| {
            let phi = h * k as f64;
            f.value(&[phi.cos(), phi.sin()])
        })
        .collect();
    for (k, v) in vals.iter().enumerate() {
        if v.abs() < tol {
            let phi = h * k as f64;
            let g = f.first_order(&[phi.cos(), phi.sin()]).1;
            if g[0].hypot(g[1]) < tol {
                return Err(Error::Degenerate(format!(
                    "near-tangent zero at phi = {phi:.6} (|p| = {:.3e}, |p'| = {:.3e})",
                    v.abs(),
                    g[0].hypot(g[1])
                )));
            }
        }
    }
    Ok((0..m)
        .filter(|&k| (vals[k] >= 0.0) != (vals[(k + 1) % m] >= 0.0))
        .map(|k| (h * k as f64, h * (k + 1) as f64))
        .collect())
}

fn bisect(f: &dyn SphereFunction, mut a: f64, mut b: f64) -> f64 {
    let eval = |phi: f64| f.value(&[phi.cos(), phi.sin()]) >= 0.0;
    let sa = eval(a);
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        if eval(mid) == sa {
            a = mid;
        } else {
            b = mid;
        }
    }
    let r = 0.5 * (a + b);
    if r >= TAU {
        r - TAU
    } else {
        r
    }
}

/// Zeros of `p` on S¹, sorted by angle in `[0, 2π)`.
///
/// Sign changes are located on a uniform grid of `max(16d, 1024)` angles
/// and bisected to `1e-12`. With `delta_hint` set the grid is halved
/// until the count agrees across two consecutive refinements.
pub fn roots_on_circle(f: &dyn SphereFunction, delta_hint: Option<f64>) -> Result<Vec<f64>> {
    if f.n() != 1 {
        return Err(Error::UnsupportedDimension(f.n()));
    }
    let bw = f.bw_norm();
    if bw == 0.0 {
        return Err(Error::Degenerate("identically zero function".into()));
    }
    let tol = TANGENCY_THRESHOLD * bw;
    let mut m = (16 * f.degree()).max(1024);
    let mut cells = scan(f, m, tol)?;
    if delta_hint.is_some() {
        let mut stable = false;
        for _ in 0..6 {
            m *= 2;
            let finer = scan(f, m, tol)?;
            let same = finer.len() == cells.len();
            cells = finer;
            if same {
                stable = true;
                break;
            }
        }
        if !stable {
            return Err(Error::Resolution(format!(
                "root count did not stabilize up to {m} grid angles"
            )));
        }
    }
    let mut roots: Vec<f64> = cells.into_iter().map(|(a, b)| bisect(f, a, b)).collect();
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}
