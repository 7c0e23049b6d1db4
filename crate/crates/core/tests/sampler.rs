use kostlan_core::sampler::{sample_harmonic, sample_monomial, SeedSpec};
use kostlan_core::SpherePoint;

const TRIALS: u64 = 10_000;

/// Two-sample Kolmogorov–Smirnov distance.
fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut worst) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    worst
}

/// 1% critical value for equal sample sizes `m`.
fn critical(m: usize) -> f64 {
    1.628 * (2.0 / m as f64).sqrt()
}

fn monomial_values(n: usize, d: usize, master: u64, x: &SpherePoint) -> Vec<f64> {
    (0..TRIALS).map(|s| sample_monomial(n, d, SeedSpec::new(master, s)).evaluate(x.coords()).unwrap()).collect()
}

fn harmonic_values(n: usize, d: usize, master: u64, x: &SpherePoint) -> Vec<f64> {
    (0..TRIALS).map(|s| sample_harmonic(n, d, SeedSpec::new(master, s)).unwrap().reconstruct(x).unwrap()).collect()
}

/// Five independent replicate pairs at the 1% level; under equal laws two
/// or more rejections happen with probability about 0.1%.
fn assert_same_law(draw_a: impl Fn(u64) -> Vec<f64>, draw_b: impl Fn(u64) -> Vec<f64>, master: u64) {
    let distances: Vec<f64> = (0..5).map(|r| ks_distance(draw_a(master + 2 * r), draw_b(master + 2 * r + 1))).collect();
    let rejected = distances.iter().filter(|&&k| k >= critical(TRIALS as usize)).count();
    assert!(rejected <= 1, "{distances:?}");
}

#[test]
fn both_routes_agree_in_law_on_the_circle() {
    let x = SpherePoint::from_angle(0.7);
    assert_same_law(|m| monomial_values(1, 9, m, &x), |m| harmonic_values(1, 9, m, &x), 101);
}

#[test]
fn both_routes_agree_in_law_on_the_sphere() {
    let x = SpherePoint::from_spherical(1.1, 2.3);
    assert_same_law(|m| monomial_values(2, 6, m, &x), |m| harmonic_values(2, 6, m, &x), 301);
}

#[test]
fn law_at_a_point_is_rotation_invariant() {
    let a = SpherePoint::basis(2, 2);
    let b = SpherePoint::from_spherical(2.0, -0.4);
    assert_same_law(|m| monomial_values(2, 7, m, &a), |m| monomial_values(2, 7, m, &b), 501);
    let c = SpherePoint::basis(1, 0);
    let e = SpherePoint::from_angle(2.5);
    assert_same_law(|m| monomial_values(1, 8, m, &c), |m| monomial_values(1, 8, m, &e), 701);
}

#[test]
fn pointwise_variance_is_one() {
    // E p(x)² = ‖x‖^{2d} for the Kostlan ensemble
    let x = SpherePoint::from_spherical(0.4, 1.9);
    let v = monomial_values(2, 5, 909, &x);
    let var = v.iter().map(|t| t * t).sum::<f64>() / v.len() as f64;
    // chi-square mean with 10⁴ dof: sd ≈ √(2/10⁴)
    assert!((var - 1.0).abs() < 5.0 * (2.0 / TRIALS as f64).sqrt(), "{var}");
}
