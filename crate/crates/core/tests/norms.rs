use proptest::prelude::*;

use kostlan_core::norms::{c1_norm, delta, SearchOptions};
use kostlan_core::sampler::{sample_monomial, SeedSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn scale_equivariance(n in 1usize..3, d in 1usize..7, stream in 0u64..100_000, lambda in -20.0f64..20.0) {
        prop_assume!(lambda.abs() > 1e-2);
        let p = sample_monomial(n, d, SeedSpec::new(31, stream));
        let q = p.scale(lambda);
        let opts = SearchOptions::default();
        let (dp, dq) = (delta(&p, &opts).unwrap(), delta(&q, &opts).unwrap());
        prop_assert!((dq.value - lambda.abs() * dp.value).abs() <= 1e-8 * lambda.abs() * p.bw_norm());
        let (cp, cq) = (c1_norm(&p, &opts).unwrap(), c1_norm(&q, &opts).unwrap());
        prop_assert!((cq.value - lambda.abs() * cp.value).abs() <= 1e-8 * lambda.abs() * cp.value);
    }

    #[test]
    fn refinement_never_loses_to_the_grid(n in 1usize..3, d in 1usize..9, stream in 0u64..100_000) {
        let p = sample_monomial(n, d, SeedSpec::new(37, stream));
        let c = c1_norm(&p, &SearchOptions::default()).unwrap();
        prop_assert!(c.sup.value >= c.sup.seed_value);
        prop_assert!(c.gradient_sup.value >= c.gradient_sup.seed_value);
        let dl = delta(&p, &SearchOptions::default()).unwrap();
        prop_assert!(dl.raw_value >= 0.0);
    }
}

#[test]
fn random_samples_are_not_singular() {
    for s in 0..100u64 {
        let n = 1 + (s % 2) as usize;
        let d = 2 + (s as usize % 11);
        let p = sample_monomial(n, d, SeedSpec::new(41, s));
        let r = delta(&p, &SearchOptions::default()).unwrap();
        assert!(!r.singular && r.value > 0.0, "stream {s}");
    }
}
