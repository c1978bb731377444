mod common;

use common::{harmonic_kernel_dim, rel};
use proptest::prelude::*;
use steklov_core::analytic::*;
use steklov_core::Spectrum;

#[test]
fn ball_multiplicities_match_harmonic_polynomial_counts() {
    for n in 2..=4 {
        let dims: Vec<usize> = (0..=5).map(|k| harmonic_kernel_dim(n, k)).collect();
        let count: usize = dims.iter().sum();
        let s = ball_spectrum(n, count).unwrap();
        assert_eq!(s.multiplicities, dims, "n = {n}");
        for (k, (v, m)) in s.distinct().into_iter().enumerate() {
            assert_eq!(v, k as f64);
            assert_eq!(m, harmonic_dimension(n, k));
        }
    }
}

#[test]
fn annulus_degree_zero_value() {
    let [small, big] = annulus_block(3, 0, 0.1).unwrap();
    assert_eq!(small, 0.0);
    assert!((big - 101.0 / 9.0).abs() < 1e-12, "{big}");
}

#[test]
fn annulus_spectrum_tends_to_the_ball() {
    let ball = ball_spectrum(3, 9).unwrap();
    let shell = annulus_spectrum(3, 1e-3, 9).unwrap();
    for (a, b) in shell.values.iter().zip(&ball.values) {
        assert!((a - b).abs() < 1e-2);
    }
}

#[test]
fn ball_beating_failures_are_the_perfect_squares() {
    let fails: Vec<usize> = (2..=100).filter(|&j| !ball_beating_predicate(3, j).unwrap()).collect();
    let squares: Vec<usize> = (2..=10).map(|k| k * k).collect();
    assert_eq!(fails, squares);
    // j = 1 is the equality case 1 = σ_1(B³)
    assert!(!ball_beating_predicate(3, 1).unwrap());
}

#[test]
fn necklace_limits() {
    assert!(rel(necklace_limit_value(3, 2, 2).unwrap(), (8.0 * std::f64::consts::PI).sqrt()) < 1e-15);
    assert!(rel(necklace_limit_value(2, 2, 2).unwrap(), 4.0 * std::f64::consts::PI) < 1e-15);
    assert_eq!(necklace_limit_value(3, 1, 2).unwrap(), 0.0);
}

fn spectrum_strategy() -> impl Strategy<Value = Spectrum> {
    prop::collection::vec(0.01f64..10.0, 6..12).prop_map(|mut v| {
        v.push(0.0);
        v.sort_by(f64::total_cmp);
        Spectrum::new(3, v, 1, Some(1.0)).unwrap()
    })
}

proptest! {
    #[test]
    fn disjoint_union_is_the_sorted_multiset(parts in prop::collection::vec(spectrum_strategy(), 1..4)) {
        let count = parts.iter().map(|p| p.len()).min().unwrap();
        let merged = disjoint_union_spectrum(&parts, count).unwrap();
        let mut brute: Vec<f64> = parts.iter().flat_map(|p| p.values.clone()).collect();
        brute.sort_by(|a, b| a.partial_cmp(b).unwrap());
        brute.truncate(count);
        prop_assert_eq!(merged.values, brute);
        prop_assert_eq!(merged.components, parts.len());
    }

    #[test]
    fn normalization_is_dilation_invariant(sigma in 0.01f64..50.0, area in 0.1f64..100.0, t in 0.05f64..20.0, n in 2usize..6) {
        let a = normalize(sigma, area, n).unwrap();
        let b = normalize(sigma / t, area * t.powi(n as i32 - 1), n).unwrap();
        prop_assert!(rel(b, a) < 1e-12);
    }

    #[test]
    fn annulus_blocks_are_ordered_and_monotone(n in 2usize..6, k in 0usize..8, eps in 0.01f64..0.9) {
        let [lo, hi] = annulus_block(n, k, eps).unwrap();
        prop_assert!(lo >= 0.0 && lo <= hi);
        let next = annulus_block(n, k + 1, eps).unwrap();
        prop_assert!(next[0] >= lo);
    }

    #[test]
    fn surgery_cutoff_matches_quadrature(n in 3usize..7, t in 1.0f64..30.0) {
        for m in 0..=n - 2 {
            let spec = CutoffSpec { n, m, delta: (-t).exp(), r0: 1.0, sigma_measure: 2.5 };
            let closed = cutoff_energy_surgery(&spec).unwrap();
            let quad = steklov_core::experiments::cutoff::surgery_energy_quadrature(&spec).unwrap();
            prop_assert!(rel(closed, quad) < 1e-8, "n={} m={} closed={} quad={}", n, m, closed, quad);
        }
    }
}
