//! Dense homogeneous polynomials in `n + 1` variables.
//!
//! Coefficients are stored in graded-lexicographic order (descending in
//! `α₀`, then `α₁`, ...). For `n = 2, d = 2` the order is
//! `x₀², x₀x₁, x₀x₂, x₁², x₁x₂, x₂²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_factorial_table;
use crate::sphere::SpherePoint;

/// Exponent vector `(α₀, …, α_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }
}

/// Number of monomials of degree `d` in `n + 1` variables, `C(n + d, d)`.
pub fn monomial_count(n: usize, d: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (d as u128 + i) / i;
    }
    c as usize
}

/// Calls `f(position, α)` for every multi-index of degree `d` in storage order.
pub fn for_each_monomial(n: usize, d: usize, mut f: impl FnMut(usize, &[u32])) {
    let mut alpha = vec![0u32; n + 1];
    alpha[0] = d as u32;
    let mut pos = 0;
    loop {
        f(pos, &alpha);
        pos += 1;
        // rightmost nonzero entry strictly before the last slot
        let Some(i) = (0..n).rev().find(|&i| alpha[i] > 0) else { break };
        let tail: u32 = alpha[i + 1..].iter().sum();
        alpha[i] -= 1;
        alpha[i + 1..].iter_mut().for_each(|a| *a = 0);
        alpha[i + 1] = tail + 1;
    }
}

/// All multi-indices of degree `d`, in storage order.
pub fn monomials(n: usize, d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(monomial_count(n, d));
    for_each_monomial(n, d, |_, a| out.push(MultiIndex(a.to_vec())));
    out
}

/// Storage position of `alpha` among the degree-`|alpha|` monomials.
pub fn monomial_position(alpha: &[u32]) -> usize {
    let n = alpha.len() - 1;
    let mut remaining: usize = alpha.iter().map(|&a| a as usize).sum();
    let mut pos = 0;
    for (i, &a) in alpha.iter().enumerate().take(n) {
        let a = a as usize;
        let vars_after = n - i;
        // all multi-indices with a larger entry at slot i come first
        for larger in a + 1..=remaining {
            pos += monomial_count(vars_after - 1, remaining - larger);
        }
        remaining -= a;
    }
    pos
}

/// A homogeneous polynomial `P ∈ P_{n,d}` with dense coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly {
    n: usize,
    d: usize,
    coeffs: Vec<f64>,
}

impl HomogeneousPoly {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self { n, d, coeffs: vec![0.0; monomial_count(n, d)] }
    }

    /// Builds a polynomial from dense coefficients in storage order.
    pub fn from_dense(n: usize, d: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = monomial_count(n, d);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: coeffs.len() });
        }
        Ok(Self { n, d, coeffs })
    }

    /// Builds a polynomial from `(α, γ_α)` pairs; repeated indices accumulate.
    pub fn from_terms<I>(n: usize, d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Self::zeros(n, d);
        for (alpha, gamma) in terms {
            if alpha.0.len() != n + 1 {
                return Err(Error::DimensionMismatch { expected: n + 1, got: alpha.0.len() });
            }
            if alpha.degree() != d {
                return Err(Error::InvalidInput(format!(
                    "multi-index {:?} has degree {} but the polynomial has degree {d}",
                    alpha.0,
                    alpha.degree()
                )));
            }
            p.coeffs[monomial_position(&alpha.0)] += gamma;
        }
        Ok(p)
    }

    /// The monomial `x_i^d`.
    pub fn coordinate_power(n: usize, d: usize, i: usize) -> Self {
        let mut alpha = vec![0; n + 1];
        alpha[i] = d as u32;
        let mut p = Self::zeros(n, d);
        p.coeffs[monomial_position(&alpha)] = 1.0;
        p
    }

    /// `‖x‖^{2k} = (x₀² + … + x_n²)^k`.
    pub fn norm_squared_power(n: usize, k: usize) -> Self {
        let mut q = Self::zeros(n, 2);
        for i in 0..=n {
            let mut alpha = vec![0; n + 1];
            alpha[i] = 2;
            q.coeffs[monomial_position(&alpha)] = 1.0;
        }
        let mut acc = Self::zeros(n, 0);
        acc.coeffs[0] = 1.0;
        for _ in 0..k {
            acc = acc.mul(&q);
        }
        acc
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coefficient(&self, alpha: &[u32]) -> f64 {
        self.coeffs[monomial_position(alpha)]
    }

    /// Nonzero `(α, γ_α)` pairs in storage order.
    pub fn terms(&self) -> Vec<(MultiIndex, f64)> {
        let mut out = Vec::new();
        for_each_monomial(self.n, self.d, |pos, a| {
            if self.coeffs[pos] != 0.0 {
                out.push((MultiIndex(a.to_vec()), self.coeffs[pos]));
            }
        });
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, d: self.d, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d != other.d {
            return Err(Error::InvalidInput(format!(
                "polynomials live in different spaces: (n={}, d={}) vs (n={}, d={})",
                self.n, self.d, other.n, other.d
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, d: self.d, coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Product of two polynomials in the same variables.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "variable count mismatch");
        let mut out = Self::zeros(self.n, self.d + other.d);
        let mut sum = vec![0u32; self.n + 1];
        for_each_monomial(self.n, self.d, |i, a| {
            let ca = self.coeffs[i];
            if ca == 0.0 {
                return;
            }
            for_each_monomial(other.n, other.d, |j, b| {
                let cb = other.coeffs[j];
                if cb == 0.0 {
                    return;
                }
                for k in 0..sum.len() {
                    sum[k] = a[k] + b[k];
                }
                out.coeffs[monomial_position(&sum)] += ca * cb;
            });
        });
        out
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n + 1 {
            return Err(Error::DimensionMismatch { expected: self.n + 1, got: x.len() });
        }
        Ok(())
    }

    /// `P(x) = Σ γ_α x^α`, by nested Horner over the graded blocks.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(horner(&self.coeffs, self.d, x))
    }

    /// Value, Euclidean gradient and Hessian at `x`.
    pub fn derivatives(&self, x: &[f64]) -> Result<(f64, Vec<f64>, Vec<Vec<f64>>)> {
        self.check_point(x)?;
        let m = self.n + 1;
        let d = self.d;
        // pows[i][k] = x_i^k
        let pows: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| {
                let mut v = Vec::with_capacity(d + 1);
                let mut acc = 1.0;
                for _ in 0..=d {
                    v.push(acc);
                    acc *= xi;
                }
                v
            })
            .collect();
        let pw = |i: usize, e: u32| -> f64 { pows[i][e as usize] };
        let mut value = 0.0;
        let mut grad = vec![0.0; m];
        let mut hess = vec![vec![0.0; m]; m];
        for_each_monomial(self.n, d, |pos, a| {
            let g = self.coeffs[pos];
            if g == 0.0 {
                return;
            }
            value += g * (0..m).map(|i| pw(i, a[i])).product::<f64>();
            for j in 0..m {
                if a[j] == 0 {
                    continue;
                }
                let rest: f64 = (0..m).filter(|&i| i != j).map(|i| pw(i, a[i])).product();
                grad[j] += g * a[j] as f64 * pw(j, a[j] - 1) * rest;
                if a[j] >= 2 {
                    hess[j][j] += g * (a[j] * (a[j] - 1)) as f64 * pw(j, a[j] - 2) * rest;
                }
                for k in j + 1..m {
                    if a[k] == 0 {
                        continue;
                    }
                    let rest2: f64 =
                        (0..m).filter(|&i| i != j && i != k).map(|i| pw(i, a[i])).product();
                    let h = g
                        * (a[j] * a[k]) as f64
                        * pw(j, a[j] - 1)
                        * pw(k, a[k] - 1)
                        * rest2;
                    hess[j][k] += h;
                    hess[k][j] += h;
                }
            }
        });
        Ok((value, grad, hess))
    }

    /// Euclidean gradient `∇P(x)`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.derivatives(x)?.1)
    }

    /// `∇P(θ) − ⟨∇P(θ), θ⟩ θ`.
    pub fn spherical_gradient(&self, theta: &SpherePoint) -> Result<Vec<f64>> {
        let g = self.gradient(theta.coords())?;
        Ok(theta.project_tangent(&g))
    }

    /// Bombieri-Weil inner product `Σ γ_α η_α α!/d!`.
    pub fn bw_inner(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        let lf = ln_factorial_table(self.d);
        let mut acc = 0.0;
        for_each_monomial(self.n, self.d, |pos, a| {
            let (g, h) = (self.coeffs[pos], other.coeffs[pos]);
            if g != 0.0 && h != 0.0 {
                let ln_ratio: f64 = a.iter().map(|&ai| lf[ai as usize]).sum::<f64>() - lf[self.d];
                acc += g * h * ln_ratio.exp();
            }
        });
        Ok(acc)
    }

    /// Bombieri-Weil norm `(Σ γ_α² α!/d!)^{1/2}`.
    pub fn bw_norm(&self) -> f64 {
        self.bw_inner(self).expect("same space").sqrt()
    }

    /// `P(Rx)` for a 3×3 rotation (n = 2 only).
    pub fn rotate(&self, rot: &crate::sphere::Rotation3) -> Result<Self> {
        if self.n != 2 {
            return Err(Error::UnsupportedDimension(self.n));
        }
        let linear: Vec<Self> = (0..3)
            .map(|i| {
                Self::from_dense(2, 1, vec![rot.0[i][0], rot.0[i][1], rot.0[i][2]]).expect("len 3")
            })
            .collect();
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(3);
        for l in &linear {
            let mut v = vec![Self::from_dense(2, 0, vec![1.0]).expect("len 1")];
            for k in 1..=self.d {
                let next = v[k - 1].mul(l);
                v.push(next);
            }
            powers.push(v);
        }
        let mut out = Self::zeros(2, self.d);
        for_each_monomial(2, self.d, |pos, a| {
            let g = self.coeffs[pos];
            if g == 0.0 {
                return;
            }
            let term = powers[0][a[0] as usize]
                .mul(&powers[1][a[1] as usize])
                .mul(&powers[2][a[2] as usize]);
            out.coeffs.iter_mut().zip(&term.coeffs).for_each(|(o, t)| *o += g * t);
        });
        Ok(out)
    }
}

/// Horner over the leading variable; each block is a polynomial in the rest.
fn horner(coeffs: &[f64], deg: usize, x: &[f64]) -> f64 {
    match x.len() {
        1 => coeffs[0] * x[0].powi(deg as i32),
        2 => {
            // position k holds x0^(deg-k) x1^k
            let (x0, x1) = (x[0], x[1]);
            let mut acc = 0.0;
            let mut p1 = 1.0;
            for c in coeffs {
                acc = acc * x0 + c * p1;
                p1 *= x1;
            }
            acc
        }
        m => {
            let mut acc = 0.0;
            let mut start = 0;
            for k in (0..=deg).rev() {
                let rest = deg - k;
                let len = monomial_count(m - 2, rest);
                let block = &coeffs[start..start + len];
                acc = acc * x[0] + horner(block, rest, &x[1..]);
                start += len;
            }
            debug_assert_eq!(start, coeffs.len());
            acc
        }
    }
}

/// JSON interchange form of a polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub d: usize,
    pub coeffs: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub gamma: f64,
}

impl From<&HomogeneousPoly> for PolyJson {
    fn from(p: &HomogeneousPoly) -> Self {
        let coeffs = p
            .terms()
            .into_iter()
            .map(|(alpha, gamma)| TermJson { alpha: alpha.0, gamma })
            .collect();
        Self { n: p.n, d: p.d, coeffs }
    }
}

impl TryFrom<PolyJson> for HomogeneousPoly {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        if j.d == 0 {
            return Err(Error::InvalidInput("degree must be at least 1".into()));
        }
        HomogeneousPoly::from_terms(
            j.n,
            j.d,
            j.coeffs.into_iter().map(|t| (MultiIndex(t.alpha), t.gamma)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::dot;
    use proptest::prelude::*;

    fn euler_residual(p: &HomogeneousPoly, x: &[f64]) -> f64 {
        let (v, g, _) = p.derivatives(x).expect("dimension checked");
        dot(&g, x) - p.d as f64 * v
    }

    fn poly(n: usize, d: usize, terms: &[(&[u32], f64)]) -> HomogeneousPoly {
        HomogeneousPoly::from_terms(n, d, terms.iter().map(|(a, g)| (MultiIndex(a.to_vec()), *g)))
            .unwrap()
    }

    #[test]
    fn storage_order_and_positions() {
        let m = monomials(2, 2);
        let expect: Vec<Vec<u32>> =
            vec![vec![2, 0, 0], vec![1, 1, 0], vec![1, 0, 1], vec![0, 2, 0], vec![0, 1, 1], vec![0, 0, 2]];
        assert_eq!(m.iter().map(|a| a.0.clone()).collect::<Vec<_>>(), expect);
        for n in 0..4 {
            for d in 0..9 {
                let all = monomials(n, d);
                assert_eq!(all.len(), monomial_count(n, d));
                for (i, a) in all.iter().enumerate() {
                    assert_eq!(monomial_position(&a.0), i);
                }
            }
        }
    }

    #[test]
    fn bw_norm_examples() {
        for (n, d) in [(1, 3), (2, 7), (3, 2)] {
            assert!((HomogeneousPoly::coordinate_power(n, d, 0).bw_norm() - 1.0).abs() < 1e-15);
        }
        let p = poly(1, 2, &[(&[1, 1], 1.0)]);
        assert!((p.bw_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        let q = poly(1, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)]);
        assert!((q.bw_norm() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(HomogeneousPoly::zeros(2, 4).bw_norm(), 0.0);
    }

    #[test]
    fn bw_norm_large_degree_is_finite() {
        let p = poly(1, 600, &[(&[300, 300], 1.0)]);
        let v = p.bw_norm();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(poly(1, 3, &[(&[3, 0], 1.0)]).evaluate(&[2.0, 0.0]).unwrap(), 8.0);
        assert_eq!(poly(1, 2, &[(&[1, 1], 1.0)]).evaluate(&[1.0, 1.0]).unwrap(), 1.0);
        let q = poly(1, 2, &[(&[2, 0], 1.0), (&[0, 2], 1.0)]);
        assert_eq!(q.evaluate(&[3.0, 4.0]).unwrap(), 25.0);
        assert!(matches!(q.evaluate(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn horner_matches_power_products() {
        let p = poly(2, 3, &[(&[3, 0, 0], 1.0), (&[1, 2, 0], -2.0), (&[0, 1, 2], 0.5), (&[0, 0, 3], 3.0)]);
        let x = [0.3, -1.2, 0.7];
        let direct = 0.3f64.powi(3) - 2.0 * 0.3 * 1.44 + 0.5 * -1.2 * 0.49 + 3.0 * 0.343;
        assert!((p.evaluate(&x).unwrap() - direct).abs() < 1e-14);
        let (v, _, _) = p.derivatives(&x).unwrap();
        assert!((v - direct).abs() < 1e-14);
        let p1 = poly(1, 3, &[(&[2, 1], 2.0), (&[0, 3], -1.0)]);
        assert!((p1.evaluate(&[0.5, 2.0]).unwrap() - (2.0 * 0.25 * 2.0 - 8.0)).abs() < 1e-14);
    }

    #[test]
    fn spherical_gradient_examples() {
        let x0 = HomogeneousPoly::coordinate_power(1, 1, 0);
        let g = x0.spherical_gradient(&SpherePoint::basis(1, 0)).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
        let g = x0.spherical_gradient(&SpherePoint::basis(1, 1)).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15 && g[1].abs() < 1e-15);
        let x0sq = HomogeneousPoly::coordinate_power(1, 2, 0);
        let s = 0.5f64.sqrt();
        // ∇P = (√2, 0); its tangential part at (s, s) is (s, -s)
        let g = x0sq.spherical_gradient(&SpherePoint::new(vec![s, s]).unwrap()).unwrap();
        assert!((g[0] - s).abs() < 1e-15 && (g[1] + s).abs() < 1e-15);
    }

    #[test]
    fn product_and_norm_powers() {
        let r4 = HomogeneousPoly::norm_squared_power(2, 2);
        assert!((r4.evaluate(&[1.0, 2.0, 3.0]).unwrap() - 196.0).abs() < 1e-12);
        assert_eq!(r4.coefficient(&[2, 2, 0]), 2.0);
    }

    #[test]
    fn rotation_composes() {
        let p = poly(2, 2, &[(&[2, 0, 0], 1.0), (&[0, 1, 1], -3.0)]);
        let rot = crate::sphere::Rotation3::about_axis([0.2, 1.0, 0.4], 1.3);
        let q = p.rotate(&rot).unwrap();
        let x = [0.3, -0.4, 0.8];
        let rx = rot.apply(&x);
        assert!((q.evaluate(&x).unwrap() - p.evaluate(&rx).unwrap()).abs() < 1e-14);
    }

    fn arb_poly(n: usize, d: usize) -> impl Strategy<Value = HomogeneousPoly> {
        prop::collection::vec(-1.0f64..1.0, monomial_count(n, d))
            .prop_map(move |c| HomogeneousPoly::from_dense(n, d, c).unwrap())
    }

    fn arb_unit(n: usize) -> impl Strategy<Value = SpherePoint> {
        prop::collection::vec(-1.0f64..1.0, n + 1)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
            .prop_map(|v| SpherePoint::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn homogeneity(p in arb_poly(2, 7), x in arb_unit(2), lambda in 0.5f64..2.0) {
            let lx: Vec<f64> = x.coords().iter().map(|c| c * lambda).collect();
            let a = p.evaluate(&lx).unwrap();
            let b = lambda.powi(7) * p.evaluate(x.coords()).unwrap();
            let scale = lambda.powi(7) * p.coeffs().iter().map(|c| c.abs()).sum::<f64>();
            prop_assert!((a - b).abs() <= 1e-11 * b.abs().max(1e-3 * scale));
        }

        #[test]
        fn tangency_and_euler(p in arb_poly(2, 6), x in arb_unit(2)) {
            let g = p.spherical_gradient(&x).unwrap();
            prop_assert!(dot(&g, x.coords()).abs() < 1e-12 * (1.0 + g.iter().map(|v| v.abs()).sum::<f64>()));
            prop_assert!(euler_residual(&p, x.coords()).abs() < 1e-12 * 6.0 * p.coeffs().iter().map(|c| c.abs()).sum::<f64>());
        }
    }

    #[test]
    fn rescaled_monomials_are_bw_orthonormal() {
        use crate::special::ln_factorial;
        for n in 1..=3 {
            for d in [1, 2, 5, 11, 20] {
                let basis: Vec<HomogeneousPoly> = monomials(n, d)
                    .iter()
                    .map(|a| {
                        let ln_multinom = ln_factorial(d)
                            - a.0.iter().map(|&ai| ln_factorial(ai as usize)).sum::<f64>();
                        let mut p = HomogeneousPoly::zeros(n, d);
                        p.coeffs[monomial_position(&a.0)] = (0.5 * ln_multinom).exp();
                        p
                    })
                    .collect();
                // BW is diagonal in the monomial basis, so a sample of pairs suffices
                for (i, bi) in basis.iter().enumerate().step_by(7) {
                    for (j, bj) in basis.iter().enumerate().step_by(5) {
                        let ip = bi.bw_inner(bj).unwrap();
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((ip - want).abs() < 1e-12, "n={n} d={d} i={i} j={j}: {ip}");
                    }
                }
            }
        }
    }
}
