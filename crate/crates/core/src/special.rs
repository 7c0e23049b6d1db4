//! Special functions: log-Gamma at half-integers, Gauss-Legendre nodes and
//! fully normalized associated Legendre functions.

use std::f64::consts::PI;

/// `ln Γ(k/2)` for a positive integer `k`, accumulated as a sum of logs.
///
/// Every Gamma value appearing in the harmonic weights has a half-integer
/// argument, so no general-purpose approximation is needed.
pub fn ln_gamma_half(k: usize) -> f64 {
    assert!(k > 0, "Gamma has a pole at 0");
    if k % 2 == 0 {
        ln_factorial(k / 2 - 1)
    } else {
        // Γ(1/2) = √π, Γ(j + 1/2) = (j - 1/2) Γ(j - 1/2)
        let mut acc = 0.5 * PI.ln();
        for j in 1..=(k - 1) / 2 {
            acc += (j as f64 - 0.5).ln();
        }
        acc
    }
}

/// `ln(m!)`.
pub fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|j| (j as f64).ln()).sum()
}

/// Table of `ln(j!)` for `j = 0..=m`.
pub fn ln_factorial_table(m: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    t.push(0.0);
    for j in 1..=m {
        acc += (j as f64).ln();
        t.push(acc);
    }
    t
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Volume of the unit sphere `S^n ⊂ R^{n+1}`: `2 π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        _ => 2.0 * (0.5 * (n + 1) as f64 * PI.ln() - ln_gamma_half(n + 1)).exp(),
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes in decreasing order.
///
/// Newton iteration on the three-term recurrence from the Tricomi initial
/// guess; converged nodes are exact for polynomials of degree `2m - 1`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                let (_, d) = legendre_with_derivative(m, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[m - 1 - i] = -x;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fully normalized associated Legendre functions on the unit sphere.
///
/// `table.get(l, m)` holds `q_l^m(θ) = N_lm P_l^m(cos θ)` with
/// `N_lm = sqrt((2l+1)/(4π) (l-m)!/(l+m)!)` and no Condon-Shortley phase.
/// With this convention `q_l^0` is the zonal harmonic `Y_l0` and
/// `√2 q_l^m cos(mφ)`, `√2 q_l^m sin(mφ)` are L²-orthonormal on S².
#[derive(Debug, Clone)]
pub struct LegendreTable {
    lmax: usize,
    values: Vec<f64>,
}

impl LegendreTable {
    pub fn new(lmax: usize, cos_theta: f64, sin_theta: f64) -> Self {
        let mut values = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
        let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
        let mut diag = (1.0 / (4.0 * PI)).sqrt();
        for m in 0..=lmax {
            if m > 0 {
                let mf = m as f64;
                diag *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta;
            }
            values[idx(m, m)] = diag;
            if m == lmax {
                break;
            }
            let mf = m as f64;
            let mut prev2 = diag;
            let mut prev1 = (2.0 * mf + 3.0).sqrt() * cos_theta * diag;
            values[idx(m + 1, m)] = prev1;
            for l in m + 2..=lmax {
                let lf = l as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                let cur = a * (cos_theta * prev1 - b * prev2);
                values[idx(l, m)] = cur;
                prev2 = prev1;
                prev1 = cur;
            }
        }
        Self { lmax, values }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    #[inline]
    pub fn get(&self, l: usize, m: usize) -> f64 {
        debug_assert!(m <= l && l <= self.lmax);
        self.values[l * (l + 1) / 2 + m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_gamma() {
        assert!((ln_gamma_half(1) - PI.sqrt().ln()).abs() < 1e-15);
        assert!((ln_gamma_half(2)).abs() < 1e-15);
        assert!((ln_gamma_half(5) - (0.75 * PI.sqrt()).ln()).abs() < 1e-14);
        assert!((ln_gamma_half(12) - 120f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-15);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_exactness() {
        for m in 1..40 {
            let (x, w) = gauss_legendre(m);
            for k in 0..(2 * m) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "m={m} k={k}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn legendre_low_degree_closed_forms() {
        let th: f64 = 0.7;
        let (c, s) = (th.cos(), th.sin());
        let t = LegendreTable::new(3, c, s);
        let k = |l: f64| ((2.0 * l + 1.0) / (4.0 * PI)).sqrt();
        assert!((t.get(0, 0) - k(0.0)).abs() < 1e-15);
        assert!((t.get(1, 0) - k(1.0) * c).abs() < 1e-15);
        assert!((t.get(1, 1) - k(1.0) * (0.5f64).sqrt() * s).abs() < 1e-15);
        assert!((t.get(2, 0) - k(2.0) * 0.5 * (3.0 * c * c - 1.0)).abs() < 1e-15);
        assert!((t.get(2, 2) - k(2.0) * (1.0 / 24.0f64).sqrt() * 3.0 * s * s).abs() < 1e-15);
    }
}
