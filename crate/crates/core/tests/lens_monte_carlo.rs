use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streamviz::euler::lens_area;

/// Hit-or-miss estimate over the bounding box of the first circle.
fn monte_carlo(r1: f64, r2: f64, d: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let box_area = 4.0 * r1 * r1;
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = rng.random_range(-r1..r1);
        let y = rng.random_range(-r1..r1);
        if x * x + y * y <= r1 * r1 && (x - d) * (x - d) + y * y <= r2 * r2 {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = box_area * (p * (1.0 - p) / samples as f64).sqrt();
    (box_area * p, se)
}

#[test]
fn lens_matches_sampling() {
    let cases = [
        (40.0, 40.0, 10.0),
        (40.0, 40.0, 52.0),
        (40.0, 25.0, 30.0),
        (20.0, 35.0, 50.0),
    ];
    for (i, &(r1, r2, d)) in cases.iter().enumerate() {
        let (estimate, se) = monte_carlo(r1, r2, d, 1_000_000, i as u64);
        let exact = lens_area(r1, r2, d);
        assert!(
            (exact - estimate).abs() <= 3.0 * se,
            "r1={r1} r2={r2} d={d}: exact {exact}, sampled {estimate} +- {se}"
        );
    }
}

#[test]
fn lens_limits() {
    let pi = std::f64::consts::PI;
    assert_eq!(lens_area(10.0, 10.0, 20.0), 0.0);
    assert_eq!(lens_area(10.0, 10.0, 25.0), 0.0);
    assert!((lens_area(10.0, 4.0, 3.0) - pi * 16.0).abs() < 1e-9);
    assert!((lens_area(10.0, 10.0, 0.0) - pi * 100.0).abs() < 1e-9);
}
