//! Brute-force oracle checks for the metric building blocks.

use fnn_forge_core::metrics::{dtw_distance, wasserstein};
use fnn_forge_oracles::{dtw_exhaustive, wasserstein_exhaustive};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn dtw_matches_exhaustive_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..40 {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(2..=10);
        let d = rng.gen_range(1..=3);
        let a = Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0));
        let b = Array2::from_shape_fn((m, d), |_| rng.gen_range(-2.0..2.0));
        let fast = dtw_distance(&a, &b).unwrap();
        let slow = dtw_exhaustive(&a, &b);
        assert!(
            (fast - slow).abs() <= 1e-10 * (1.0 + slow),
            "case {case}: dp {fast} vs exhaustive {slow}"
        );
    }
}

fn random_diagram(rng: &mut ChaCha8Rng, max_points: usize) -> Vec<(f64, f64)> {
    let n = rng.gen_range(0..=max_points);
    (0..n)
        .map(|_| {
            let birth = rng.gen_range(0.0..2.0);
            let death = birth + rng.gen_range(0.0..2.0);
            (birth, death)
        })
        .collect()
}

#[test]
fn hungarian_matching_equals_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..60 {
        let a = random_diagram(&mut rng, 6);
        let b = random_diagram(&mut rng, 6);
        let fast = wasserstein(&a, &b);
        let slow = wasserstein_exhaustive(&a, &b);
        assert!(
            (fast - slow).abs() <= 1e-9 * (1.0 + slow),
            "case {case}: hungarian {fast} vs brute force {slow} (a {a:?}, b {b:?})"
        );
    }
}

#[test]
fn wasserstein_metric_axioms_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let a = random_diagram(&mut rng, 5);
        let b = random_diagram(&mut rng, 5);
        let c = random_diagram(&mut rng, 5);
        let dab = wasserstein(&a, &b);
        let dba = wasserstein(&b, &a);
        let dac = wasserstein(&a, &c);
        let dcb = wasserstein(&c, &b);
        assert!((dab - dba).abs() <= 1e-9, "symmetry violated");
        assert!(dab <= dac + dcb + 1e-9, "triangle inequality violated");
        assert_eq!(wasserstein(&a, &a), 0.0, "identity violated");
        assert!(dab >= 0.0);
    }
}
