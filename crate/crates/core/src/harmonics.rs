//! Real spherical harmonics on S¹ and S², exact quadrature, the harmonic
//! decomposition of restricted polynomials and the norms built on it.
//!
//! Basis ordering inside a degree-`ℓ` block:
//! * `n = 1`: `[1/√(2π)]` for `ℓ = 0`, otherwise `[cos(ℓφ)/√π, sin(ℓφ)/√π]`;
//! * `n = 2`: `m = -ℓ..=ℓ`, with `m < 0` the `sin(|m|φ)` functions, `m = 0`
//!   the zonal one and `m > 0` the `cos(mφ)` functions.
//!
//! All bases are orthonormal for the un-normalized surface measure.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{for_each_monomial, monomial_count, HomogeneousPoly};
use crate::special::{
    gauss_legendre, ln_binomial, ln_factorial_table, ln_gamma_half, sphere_volume, LegendreTable,
};
use crate::sphere::SpherePoint;

fn check_dim(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// `dim V_{n,ℓ}` for `n ∈ {1, 2}`.
pub fn basis_dim(n: usize, ell: usize) -> usize {
    match n {
        1 if ell == 0 => 1,
        1 => 2,
        _ => 2 * ell + 1,
    }
}

/// Harmonic degrees `ℓ ≤ d` with `d - ℓ` even.
pub fn admissible_degrees(d: usize) -> impl Iterator<Item = usize> {
    (d % 2..=d).step_by(2)
}

/// Appends the values of every basis function of degree `ℓ ≤ lmax` at `θ`,
/// degree blocks in ascending order.
pub fn basis_eval_all(n: usize, lmax: usize, theta: &SpherePoint, out: &mut Vec<f64>) -> Result<()> {
    check_dim(n)?;
    if theta.n() != n {
        return Err(Error::DimensionMismatch { expected: n + 1, got: theta.n() + 1 });
    }
    out.clear();
    let x = theta.coords();
    if n == 1 {
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        out.push(1.0 / TAU.sqrt());
        // cos(ℓφ), sin(ℓφ) by repeated rotation
        let (c1, s1) = (x[0], x[1]);
        let (mut c, mut s) = (1.0, 0.0);
        for _ in 1..=lmax {
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            out.push(c * inv_sqrt_pi);
            out.push(s * inv_sqrt_pi);
        }
        return Ok(());
    }
    let rho = x[0].hypot(x[1]);
    let table = LegendreTable::new(lmax, x[2], rho);
    let (c1, s1) = if rho > 0.0 { (x[0] / rho, x[1] / rho) } else { (1.0, 0.0) };
    let mut cos_m = Vec::with_capacity(lmax + 1);
    let mut sin_m = Vec::with_capacity(lmax + 1);
    let (mut c, mut s) = (1.0, 0.0);
    for _ in 0..=lmax {
        cos_m.push(c);
        sin_m.push(s);
        (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
    }
    let r2 = std::f64::consts::SQRT_2;
    for l in 0..=lmax {
        for m in (1..=l).rev() {
            out.push(r2 * table.get(l, m) * sin_m[m]);
        }
        out.push(table.get(l, 0));
        for m in 1..=l {
            out.push(r2 * table.get(l, m) * cos_m[m]);
        }
    }
    Ok(())
}

/// Offset of the degree-`ℓ` block inside [`basis_eval_all`] output.
pub fn block_offset(n: usize, ell: usize) -> usize {
    match n {
        1 if ell == 0 => 0,
        1 => 2 * ell - 1,
        _ => ell * ell,
    }
}

/// Single basis function `y_{ℓ,j}(θ)`.
pub fn basis_eval(n: usize, ell: usize, j: usize, theta: &SpherePoint) -> Result<f64> {
    check_dim(n)?;
    let dim = basis_dim(n, ell);
    if j >= dim {
        return Err(Error::IndexOutOfRange { ell, index: j, dim });
    }
    let mut buf = Vec::new();
    basis_eval_all(n, ell, theta, &mut buf)?;
    Ok(buf[block_offset(n, ell) + j])
}

/// Reproducing kernel `Z_ℓ(θ₁, θ₂) = Σ_j y_{ℓ,j}(θ₁) y_{ℓ,j}(θ₂)`.
pub fn zonal(n: usize, ell: usize, a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
    let (mut ya, mut yb) = (Vec::new(), Vec::new());
    basis_eval_all(n, ell, a, &mut ya)?;
    basis_eval_all(n, ell, b, &mut yb)?;
    let off = block_offset(n, ell);
    let dim = basis_dim(n, ell);
    Ok((off..off + dim).map(|i| ya[i] * yb[i]).sum())
}

#[derive(Debug, Clone)]
enum Layout {
    Circle { count: usize },
    Sphere { cos_theta: Vec<f64>, lat_weights: Vec<f64>, nphi: usize },
}

/// Tensor quadrature on S¹ (equispaced) or S² (Gauss-Legendre in `cos θ`
/// times equispaced longitude).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    exact_degree: usize,
    layout: Layout,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn integrate(&self, f: impl Fn(&SpherePoint) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Quadrature exact for restrictions of polynomials of degree `≤ exact_degree`.
pub fn quadrature(n: usize, exact_degree: usize) -> Result<QuadratureRule> {
    check_dim(n)?;
    let dd = exact_degree;
    if n == 1 {
        let count = dd + 1;
        let nodes = (0..count).map(|k| SpherePoint::from_angle(TAU * k as f64 / count as f64)).collect();
        let weights = vec![TAU / count as f64; count];
        return Ok(QuadratureRule { nodes, weights, exact_degree: dd, layout: Layout::Circle { count } });
    }
    let nlat = dd / 2 + 1;
    let nphi = dd + 1;
    let (cos_theta, lat_w) = gauss_legendre(nlat);
    let mut nodes = Vec::with_capacity(nlat * nphi);
    let mut weights = Vec::with_capacity(nlat * nphi);
    for (z, w) in cos_theta.iter().zip(&lat_w) {
        let rho = (1.0 - z * z).max(0.0).sqrt();
        for k in 0..nphi {
            let phi = TAU * k as f64 / nphi as f64;
            nodes.push(SpherePoint::new(vec![rho * phi.cos(), rho * phi.sin(), *z]).expect("unit"));
            weights.push(w * TAU / nphi as f64);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exact_degree: dd,
        layout: Layout::Sphere { cos_theta, lat_weights: lat_w, nphi },
    })
}

/// Rescaling weight `w_{n,d}(ℓ)` with `‖h‖_{L²} = w_{n,d}(ℓ) ‖h‖_BW` on `V_{n,ℓ}`.
pub fn weight(n: usize, d: usize, ell: usize) -> Result<f64> {
    if ell > d || (d - ell) % 2 != 0 {
        return Err(Error::Parity { d, ell });
    }
    if n == 0 {
        return Err(Error::UnsupportedDimension(n));
    }
    // Gamma arguments as multiples of 1/2: (n+1)/2, (d+ℓ)/2 + 1, (n+1)/2 + (d+ℓ)/2
    let ln_w2 = sphere_volume(n).ln() + ln_gamma_half(n + 1) + ln_gamma_half(d + ell + 2)
        - ln_gamma_half(n + 1 + d + ell)
        - d as f64 * std::f64::consts::LN_2
        + ln_binomial(d, (d - ell) / 2);
    Ok((0.5 * ln_w2).exp())
}

/// All weights `w_{n,d}(ℓ)` for admissible `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub n: usize,
    pub d: usize,
    weights: BTreeMap<usize, f64>,
}

impl WeightTable {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        let weights = admissible_degrees(d).map(|l| Ok((l, weight(n, d, l)?))).collect::<Result<_>>()?;
        Ok(Self { n, d, weights })
    }

    pub fn get(&self, ell: usize) -> Option<f64> {
        self.weights.get(&ell).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().map(|(l, w)| (*l, *w))
    }
}

/// Coefficients of a function on S¹ or S² in the orthonormal harmonic basis.
///
/// `d` is the nominal degree; `parity` is the parity shared by every stored
/// `ℓ` (it equals `d mod 2` except after truncating to a cutoff of the other
/// parity).
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicExpansion {
    n: usize,
    d: usize,
    parity: usize,
    components: BTreeMap<usize, Vec<f64>>,
}

impl HarmonicExpansion {
    /// Expansion with no components at nominal degree `d`.
    pub fn zero(n: usize, d: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self { n, d, parity: d % 2, components: BTreeMap::new() })
    }

    /// Builds an expansion, validating degrees, parity and block sizes.
    pub fn new(n: usize, d: usize, parity: usize, components: BTreeMap<usize, Vec<f64>>) -> Result<Self> {
        check_dim(n)?;
        if parity > 1 {
            return Err(Error::InvalidInput(format!("parity must be 0 or 1, got {parity}")));
        }
        for (&ell, c) in &components {
            if ell > d || ell % 2 != parity {
                return Err(Error::Parity { d, ell });
            }
            let dim = basis_dim(n, ell);
            if c.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
            }
        }
        Ok(Self { n, d, parity, components })
    }

    /// Builds an expansion from a flat coefficient vector covering every
    /// admissible degree of `d` in ascending order.
    pub fn from_flat(n: usize, d: usize, flat: &[f64]) -> Result<Self> {
        check_dim(n)?;
        let expected: usize = admissible_degrees(d).map(|l| basis_dim(n, l)).sum();
        if flat.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: flat.len() });
        }
        let mut components = BTreeMap::new();
        let mut at = 0;
        for l in admissible_degrees(d) {
            let dim = basis_dim(n, l);
            components.insert(l, flat[at..at + dim].to_vec());
            at += dim;
        }
        Ok(Self { n, d, parity: d % 2, components })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn parity(&self) -> usize {
        self.parity
    }

    /// Degree of the homogeneous polynomial this function is the restriction
    /// of: `d`, or `d - 1` when the stored parity differs from `d`'s.
    pub fn effective_degree(&self) -> Option<usize> {
        if self.d % 2 == self.parity {
            Some(self.d)
        } else {
            self.d.checked_sub(1)
        }
    }

    pub fn components(&self) -> &BTreeMap<usize, Vec<f64>> {
        &self.components
    }

    pub fn component(&self, ell: usize) -> Option<&[f64]> {
        self.components.get(&ell).map(Vec::as_slice)
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.components.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(|c| c.iter().all(|v| *v == 0.0))
    }

    /// Flat coefficient vector in ascending `ℓ` (missing blocks as zeros),
    /// over every `ℓ ≤ d` with the stored parity.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in (self.parity..=self.d).step_by(2) {
            match self.components.get(&l) {
                Some(c) => out.extend_from_slice(c),
                None => out.extend(std::iter::repeat_n(0.0, basis_dim(self.n, l))),
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut e = self.clone();
        e.components.values_mut().flatten().for_each(|c| *c *= s);
        e
    }

    /// Componentwise difference; both sides must share `n` and parity. The
    /// nominal degree of the result is the larger of the two.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.parity != other.parity {
            return Err(Error::InvalidInput("expansions live in different spaces".into()));
        }
        let mut out = self.clone();
        out.d = self.d.max(other.d);
        for (l, c) in &other.components {
            let entry = out.components.entry(*l).or_insert_with(|| vec![0.0; c.len()]);
            entry.iter_mut().zip(c).for_each(|(a, b)| *a -= b);
        }
        Ok(out)
    }

    /// `p|_L = Σ_{ℓ ≤ L} p_ℓ`, recorded at nominal degree `L`.
    pub fn truncate(&self, cutoff: usize) -> Self {
        let cutoff = cutoff.min(self.d);
        let components = self.components.range(..=cutoff).map(|(l, c)| (*l, c.clone())).collect();
        Self { n: self.n, d: cutoff, parity: self.parity, components }
    }

    /// `p - p|_L = Σ_{ℓ > L} p_ℓ`, kept at the nominal degree of `p`.
    pub fn residual(&self, cutoff: usize) -> Self {
        let components = self
            .components
            .range(cutoff.saturating_add(1)..)
            .map(|(l, c)| (*l, c.clone()))
            .collect();
        Self { n: self.n, d: self.d, parity: self.parity, components }
    }

    /// `Σ_ℓ Σ_j c_{ℓ,j} y_{ℓ,j}(θ)`.
    pub fn reconstruct(&self, theta: &SpherePoint) -> Result<f64> {
        let Some(lmax) = self.max_degree() else { return Ok(0.0) };
        let mut buf = Vec::new();
        basis_eval_all(self.n, lmax, theta, &mut buf)?;
        Ok(self
            .components
            .iter()
            .map(|(l, c)| {
                let off = block_offset(self.n, *l);
                c.iter().zip(&buf[off..]).map(|(a, y)| a * y).sum::<f64>()
            })
            .sum())
    }

    /// `‖p_ℓ‖_{L²}` by Parseval.
    pub fn component_l2(&self, ell: usize) -> f64 {
        self.components.get(&ell).map_or(0.0, |c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `(Σ_ℓ ℓ^{2q} ‖p_ℓ‖²_{L²})^{1/2}` with `0⁰ = 1`.
    pub fn sobolev_norm(&self, q: f64) -> f64 {
        self.components
            .iter()
            .map(|(l, c)| {
                let w = if q == 0.0 { 1.0 } else { (*l as f64).powf(2.0 * q) };
                w * c.iter().map(|v| v * v).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// Bombieri-Weil norm at the effective homogeneous degree:
    /// `Σ (c_{ℓ,j} / w_{n,d}(ℓ))²`.
    pub fn bw_norm(&self) -> f64 {
        let Some(d) = self.effective_degree() else { return 0.0 };
        self.components
            .iter()
            .map(|(l, c)| {
                let w = weight(self.n, d, *l).expect("admissible by construction");
                c.iter().map(|v| (v / w) * (v / w)).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Trigonometric coefficients `p(φ) = Σ a_k cos kφ + b_k sin kφ` (n = 1).
    pub fn circle_series(&self) -> Result<CircleSeries> {
        if self.n != 1 {
            return Err(Error::UnsupportedDimension(self.n));
        }
        let deg = self.max_degree().unwrap_or(0);
        let mut a = vec![0.0; deg + 1];
        let mut b = vec![0.0; deg + 1];
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        for (l, c) in &self.components {
            if *l == 0 {
                a[0] = c[0] / TAU.sqrt();
            } else {
                a[*l] = c[0] * inv_sqrt_pi;
                b[*l] = c[1] * inv_sqrt_pi;
            }
        }
        Ok(CircleSeries { a, b })
    }

    /// The homogeneous polynomial of effective degree whose restriction is
    /// this function.
    pub fn to_homogeneous(&self) -> Result<HomogeneousPoly> {
        let Some(d) = self.effective_degree() else { return Ok(HomogeneousPoly::zeros(self.n, 0)) };
        let change = basis_change(self.n, d)?;
        let weights = WeightTable::new(self.n, d)?;
        let mut rhs = Vec::with_capacity(change.size);
        for l in admissible_degrees(d) {
            let w = weights.get(l).expect("admissible");
            match self.components.get(&l) {
                Some(c) => rhs.extend(c.iter().map(|v| v / w)),
                None => rhs.extend(std::iter::repeat_n(0.0, basis_dim(self.n, l))),
            }
        }
        // scaled-monomial coordinates = Qᵀ (c / w)
        let size = change.size;
        let mut scaled = vec![0.0; size];
        for (row, r) in rhs.iter().enumerate() {
            if *r == 0.0 {
                continue;
            }
            let q_row = &change.q[row * size..(row + 1) * size];
            scaled.iter_mut().zip(q_row).for_each(|(s, q)| *s += q * r);
        }
        let coeffs = scaled.iter().zip(&change.scale).map(|(s, f)| s * f).collect();
        HomogeneousPoly::from_dense(self.n, d, coeffs)
    }
}

/// Samples of a band-limited function at the nodes of a quadrature rule,
/// projected onto the harmonic basis of degrees `ℓ ≤ d`, `ℓ ≡ parity`.
fn project_values(rule: &QuadratureRule, values: &[f64], d: usize, parity: usize) -> BTreeMap<usize, Vec<f64>> {
    let mut out = BTreeMap::new();
    match &rule.layout {
        Layout::Circle { count } => {
            let count = *count;
            let h = TAU / count as f64;
            for l in (parity..=d).step_by(2) {
                if l == 0 {
                    let s: f64 = values.iter().sum();
                    out.insert(0, vec![s * h / TAU.sqrt()]);
                    continue;
                }
                let (mut sc, mut ss) = (0.0, 0.0);
                for (k, v) in values.iter().enumerate() {
                    // reduce the angle index before the trig call to keep it exact
                    let phi = TAU * ((l * k) % count) as f64 / count as f64;
                    sc += v * phi.cos();
                    ss += v * phi.sin();
                }
                out.insert(l, vec![sc * h / PI.sqrt(), ss * h / PI.sqrt()]);
            }
        }
        Layout::Sphere { cos_theta, lat_weights, nphi } => {
            let nphi = *nphi;
            let h = TAU / nphi as f64;
            let trig: Vec<(f64, f64)> = (0..nphi * (d + 1))
                .map(|i| {
                    let (m, k) = (i / nphi, i % nphi);
                    let phi = TAU * ((m * k) % nphi) as f64 / nphi as f64;
                    (phi.cos(), phi.sin())
                })
                .collect();
            for l in (parity..=d).step_by(2) {
                out.insert(l, vec![0.0; 2 * l + 1]);
            }
            let r2 = std::f64::consts::SQRT_2;
            for (i, (z, wlat)) in cos_theta.iter().zip(lat_weights).enumerate() {
                let ring = &values[i * nphi..(i + 1) * nphi];
                let mut am = vec![0.0; d + 1];
                let mut bm = vec![0.0; d + 1];
                for m in 0..=d {
                    let t = &trig[m * nphi..(m + 1) * nphi];
                    let (mut sa, mut sb) = (0.0, 0.0);
                    for (v, (c, s)) in ring.iter().zip(t) {
                        sa += v * c;
                        sb += v * s;
                    }
                    am[m] = sa * h;
                    bm[m] = sb * h;
                }
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let table = LegendreTable::new(d, *z, rho);
                for (l, c) in out.iter_mut() {
                    let l = *l;
                    c[l] += wlat * table.get(l, 0) * am[0];
                    for m in 1..=l {
                        let q = wlat * r2 * table.get(l, m);
                        c[l + m] += q * am[m];
                        c[l - m] += q * bm[m];
                    }
                }
            }
        }
    }
    out
}

/// Projects `f` (assumed a restriction of degree `≤ d` with parity `parity`)
/// onto the harmonic basis using a rule of exact degree `2d`.
pub fn project(n: usize, d: usize, parity: usize, f: impl Fn(&SpherePoint) -> f64) -> Result<HarmonicExpansion> {
    check_dim(n)?;
    let rule = quadrature(n, 2 * d + 1)?;
    let values: Vec<f64> = rule.nodes.iter().map(f).collect();
    let components = project_values(&rule, &values, d, parity);
    HarmonicExpansion::new(n, d, parity, components)
}

/// Harmonic decomposition `p = Σ p_ℓ` of the restriction of `P`.
pub fn decompose(p: &HomogeneousPoly) -> Result<HarmonicExpansion> {
    check_dim(p.n())?;
    let d = p.degree();
    let rule = quadrature(p.n(), 2 * d + 1)?;
    let values: Vec<f64> =
        rule.nodes.iter().map(|x| p.evaluate(x.coords()).expect("dimension checked")).collect();
    let components = project_values(&rule, &values, d, d % 2);
    HarmonicExpansion::new(p.n(), d, d % 2, components)
}

/// Orthogonal matrix from scaled-monomial to weighted harmonic coordinates.
#[derive(Debug)]
struct BasisChange {
    size: usize,
    /// row-major `size × size`, rows indexed by harmonic coordinate
    q: Vec<f64>,
    /// `√(d!/α!)` per monomial, in storage order
    scale: Vec<f64>,
}

fn basis_change(n: usize, d: usize) -> Result<Arc<BasisChange>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<BasisChange>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("poisoned").get(&(n, d)) {
        return Ok(hit.clone());
    }
    let built = Arc::new(build_basis_change(n, d)?);
    cache.lock().expect("poisoned").insert((n, d), built.clone());
    Ok(built)
}

fn build_basis_change(n: usize, d: usize) -> Result<BasisChange> {
    let size = monomial_count(n, d);
    let lf = ln_factorial_table(d);
    let mut scale = vec![0.0; size];
    let mut exps: Vec<Vec<u32>> = Vec::with_capacity(size);
    for_each_monomial(n, d, |pos, a| {
        let ln = lf[d] - a.iter().map(|&ai| lf[ai as usize]).sum::<f64>();
        scale[pos] = (0.5 * ln).exp();
        exps.push(a.to_vec());
    });
    let rule = quadrature(n, 2 * d + 1)?;
    let weights = WeightTable::new(n, d)?;
    let mut q = vec![0.0; size * size];
    let mut pows = vec![vec![0.0; d + 1]; n + 1];
    let node_pows: Vec<Vec<Vec<f64>>> = rule
        .nodes
        .iter()
        .map(|x| {
            for (i, xi) in x.coords().iter().enumerate() {
                let mut acc = 1.0;
                for k in 0..=d {
                    pows[i][k] = acc;
                    acc *= xi;
                }
            }
            pows.clone()
        })
        .collect();
    for (col, a) in exps.iter().enumerate() {
        let values: Vec<f64> = node_pows
            .iter()
            .map(|pw| scale[col] * a.iter().enumerate().map(|(i, &e)| pw[i][e as usize]).product::<f64>())
            .collect();
        let comps = project_values(&rule, &values, d, d % 2);
        let mut row = 0;
        for (l, c) in &comps {
            let w = weights.get(*l).expect("admissible");
            for v in c {
                q[row * size + col] = v / w;
                row += 1;
            }
        }
        debug_assert_eq!(row, size);
    }
    Ok(BasisChange { size, q, scale })
}

/// Trigonometric polynomial on S¹ with value and derivative evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleSeries {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl CircleSeries {
    pub fn degree(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    /// `(p, p', p'')` at angle `φ`.
    pub fn eval_derivs(&self, phi: f64) -> (f64, f64, f64) {
        let (s1, c1) = phi.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let (mut v, mut d1, mut d2) = (self.a[0], 0.0, 0.0);
        for k in 1..self.a.len() {
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            let kf = k as f64;
            let (ak, bk) = (self.a[k], self.b[k]);
            v += ak * c + bk * s;
            d1 += kf * (bk * c - ak * s);
            d2 -= kf * kf * (ak * c + bk * s);
        }
        (v, d1, d2)
    }

    pub fn value(&self, phi: f64) -> f64 {
        self.eval_derivs(phi).0
    }
}

/// JSON interchange form of an expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionJson {
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<usize>,
    pub components: Vec<ComponentJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub ell: usize,
    pub coeffs: Vec<f64>,
}

impl From<&HarmonicExpansion> for ExpansionJson {
    fn from(e: &HarmonicExpansion) -> Self {
        Self {
            n: e.n,
            d: e.d,
            parity: (e.parity != e.d % 2).then_some(e.parity),
            components: e
                .components
                .iter()
                .map(|(l, c)| ComponentJson { ell: *l, coeffs: c.clone() })
                .collect(),
        }
    }
}

impl TryFrom<ExpansionJson> for HarmonicExpansion {
    type Error = Error;

    fn try_from(j: ExpansionJson) -> Result<Self> {
        let mut components = BTreeMap::new();
        for c in j.components {
            if components.insert(c.ell, c.coeffs).is_some() {
                return Err(Error::InvalidInput(format!("duplicate component ell = {}", c.ell)));
            }
        }
        HarmonicExpansion::new(j.n, j.d, j.parity.unwrap_or(j.d % 2), components)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::MultiIndex;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn basis_examples() {
        let th = SpherePoint::from_angle(0.37);
        assert!(close(basis_eval(1, 0, 0, &th).unwrap(), 1.0 / TAU.sqrt(), 1e-15));
        let zero = SpherePoint::from_angle(0.0);
        assert!(close(basis_eval(1, 2, 0, &zero).unwrap(), 1.0 / PI.sqrt(), 1e-15));
        let pole = SpherePoint::basis(2, 2);
        assert!(close(basis_eval(2, 1, 1, &pole).unwrap(), (3.0 / (4.0 * PI)).sqrt(), 1e-15));
        assert!(matches!(basis_eval(3, 1, 0, &pole), Err(Error::UnsupportedDimension(3))));
        assert!(matches!(basis_eval(1, 2, 2, &zero), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn quadrature_examples() {
        let r = quadrature(1, 4).unwrap();
        let v = r.integrate(|x| (2.0 * x.angle()).cos().powi(2));
        assert!(close(v, PI, 1e-14));
        let r = quadrature(2, 0).unwrap();
        assert!(close(r.integrate(|_| 1.0), 4.0 * PI, 1e-14));
        let r = quadrature(2, 2).unwrap();
        assert!(close(r.integrate(|x| x.coords()[0].powi(2)), 4.0 * PI / 3.0, 1e-14));
    }

    #[test]
    fn quadrature_weights_sum_to_volume() {
        for dd in [0, 3, 10, 41, 200] {
            assert!(close(quadrature(1, dd).unwrap().weights().iter().sum(), TAU, 1e-13));
            assert!(close(quadrature(2, dd).unwrap().weights().iter().sum(), 4.0 * PI, 1e-13));
        }
    }

    #[test]
    fn weight_examples() {
        assert!(close(weight(1, 1, 1).unwrap(), PI.sqrt(), 1e-14));
        for d in [1, 4, 17, 60] {
            let want = TAU.sqrt() * 2f64.powf(-(d as f64) / 2.0);
            assert!(close(weight(1, d, d).unwrap(), want, 1e-13));
        }
        assert!(matches!(weight(1, 2, 1), Err(Error::Parity { .. })));
        assert!(matches!(weight(1, 2, 4), Err(Error::Parity { .. })));
        for l in admissible_degrees(1000) {
            let w = weight(2, 1000, l).unwrap();
            assert!(w.is_finite() && w > 0.0);
        }
    }

    #[test]
    fn weight_matches_l2_over_bw_for_coordinate_functions() {
        // ‖x₀‖_BW = 1, ‖x₀|_S‖_{L²}² = vol(Sⁿ)/(n+1)
        assert!(close(weight(2, 1, 1).unwrap(), (4.0 * PI / 3.0).sqrt(), 1e-14));
    }

    #[test]
    fn decompose_examples() {
        let x0sq = HomogeneousPoly::coordinate_power(1, 2, 0);
        let e = decompose(&x0sq).unwrap();
        assert!(close(e.component(0).unwrap()[0], 0.5 * TAU.sqrt(), 1e-14));
        let c2 = e.component(2).unwrap();
        assert!(close(c2[0], 0.5 * PI.sqrt(), 1e-14) && c2[1].abs() < 1e-14);
        assert!(e.component(1).is_none());
        let x0 = HomogeneousPoly::coordinate_power(1, 1, 0);
        let e = decompose(&x0).unwrap();
        assert_eq!(e.components().len(), 1);
        let c1 = e.component(1).unwrap();
        assert!(close(c1[0], PI.sqrt(), 1e-14) && c1[1].abs() < 1e-14);
    }

    #[test]
    fn pure_harmonic_stays_in_one_block() {
        // x₀² − x₁² and x₀x₁ on S², x₀² + x₁² − 2x₂² : all in H_{2,2}
        let terms = [
            (MultiIndex(vec![2, 0, 0]), 1.0),
            (MultiIndex(vec![0, 2, 0]), 1.0),
            (MultiIndex(vec![0, 0, 2]), -2.0),
            (MultiIndex(vec![1, 1, 0]), 0.7),
        ];
        let p = HomogeneousPoly::from_terms(2, 2, terms).unwrap();
        let e = decompose(&p).unwrap();
        assert!(e.component_l2(0) < 1e-14);
        assert!(e.component_l2(2) > 1.0);
    }

    #[test]
    fn reconstruct_and_truncate_examples() {
        let e = decompose(&HomogeneousPoly::coordinate_power(1, 2, 0)).unwrap();
        assert!(close(e.reconstruct(&SpherePoint::from_angle(0.0)).unwrap(), 1.0, 1e-14));
        let empty = HarmonicExpansion::zero(2, 3).unwrap();
        assert_eq!(empty.reconstruct(&SpherePoint::basis(2, 0)).unwrap(), 0.0);
        assert_eq!(e.truncate(2), e);
        let t = e.truncate(1);
        assert_eq!(t.degree(), 1);
        assert_eq!(t.components().len(), 1);
        assert!(close(t.reconstruct(&SpherePoint::from_angle(1.3)).unwrap(), 0.5, 1e-14));
        let t0 = e.truncate(0);
        assert_eq!(t0.components().keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn sobolev_examples() {
        let mut comps = BTreeMap::new();
        comps.insert(1, vec![PI.sqrt(), 0.0]);
        let e = HarmonicExpansion::new(1, 1, 1, comps).unwrap();
        assert!(close(e.sobolev_norm(2.0), PI.sqrt(), 1e-15));
        assert_eq!(HarmonicExpansion::zero(1, 4).unwrap().sobolev_norm(1.0), 0.0);
        // q = 0 keeps the constant term
        let c = decompose(&HomogeneousPoly::coordinate_power(1, 2, 0)).unwrap();
        let l2_quad = quadrature(1, 8).unwrap().integrate(|x| x.coords()[0].powi(4)).sqrt();
        assert!(close(c.sobolev_norm(0.0), l2_quad, 1e-14));
    }

    #[test]
    fn zonal_examples() {
        let a = SpherePoint::from_angle(0.4);
        assert!(close(zonal(1, 1, &a, &a).unwrap(), 1.0 / PI, 1e-15));
        let b = SpherePoint::from_angle(0.4 + PI / 2.0);
        assert!(zonal(1, 1, &a, &b).unwrap().abs() < 1e-15);
        let p = SpherePoint::from_spherical(0.9, 2.2);
        for l in [0, 1, 5, 30] {
            let z = zonal(2, l, &p, &p).unwrap();
            assert!(close(z, (2 * l + 1) as f64 / (4.0 * PI), 1e-12));
        }
    }

    #[test]
    fn homogeneous_roundtrip_via_basis_change() {
        let terms = [
            (MultiIndex(vec![3, 0, 1]), 1.5),
            (MultiIndex(vec![0, 2, 2]), -0.5),
            (MultiIndex(vec![1, 1, 2]), 2.0),
            (MultiIndex(vec![0, 0, 4]), 0.25),
        ];
        let p = HomogeneousPoly::from_terms(2, 4, terms).unwrap();
        let back = decompose(&p).unwrap().to_homogeneous().unwrap();
        for (a, b) in p.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let q = HomogeneousPoly::from_terms(1, 5, [(MultiIndex(vec![2, 3]), 1.0)]).unwrap();
        let back = decompose(&q).unwrap().to_homogeneous().unwrap();
        for (a, b) in q.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_with_other_parity_lowers_effective_degree() {
        let e = decompose(&HomogeneousPoly::coordinate_power(1, 4, 0)).unwrap();
        let t = e.truncate(3);
        assert_eq!(t.effective_degree(), Some(2));
        let h = t.to_homogeneous().unwrap();
        assert_eq!(h.degree(), 2);
        let x = SpherePoint::from_angle(0.3);
        assert!(close(h.evaluate(x.coords()).unwrap(), t.reconstruct(&x).unwrap(), 1e-13));
    }

    #[test]
    fn json_roundtrip_keeps_parity() {
        let e = decompose(&HomogeneousPoly::coordinate_power(2, 3, 1)).unwrap().truncate(2);
        let j = ExpansionJson::from(&e);
        assert_eq!(j.parity, Some(1));
        let back = HarmonicExpansion::try_from(j).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn circle_series_derivatives() {
        let e = decompose(&HomogeneousPoly::coordinate_power(1, 3, 0)).unwrap();
        let s = e.circle_series().unwrap();
        let phi: f64 = 0.8;
        let (v, d1, d2) = s.eval_derivs(phi);
        let c = phi.cos();
        let sn = phi.sin();
        assert!(close(v, c.powi(3), 1e-14));
        assert!(close(d1, -3.0 * c * c * sn, 1e-14));
        assert!(close(d2, 6.0 * c * sn * sn - 3.0 * c.powi(3), 1e-13));
    }
}
