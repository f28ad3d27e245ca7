use estent_core::{covering_number, grid_cover, Hyperbox};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn boxes(max_dim: usize) -> impl Strategy<Value = Hyperbox<f64>> {
    (1..=max_dim).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(0.0f64..3.0, n),
        )
            .prop_map(|(c, w)| Hyperbox::new(c, w).unwrap())
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Exhaustive nearest-point search, independent of the index arithmetic.
fn brute_nearest(points: &[Vec<f64>], x: &[f64]) -> f64 {
    points.iter().map(|p| dist(p, x)).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_sample_is_within_delta(b in boxes(3), delta in 0.05f64..2.0, seed in any::<u64>()) {
        let c = grid_cover(&b, delta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let x = b.sample(&mut rng);
            let (_, d) = c.nearest_index(&x).unwrap();
            prop_assert!(d <= delta * (1.0 + 1e-12), "{d} > {delta}");
        }
        for v in b.grid(2) {
            prop_assert!(c.nearest_index(&v).unwrap().1 <= delta * (1.0 + 1e-12));
        }
    }

    #[test]
    fn nearest_index_matches_brute_force(b in boxes(3), delta in 0.2f64..2.0, seed in any::<u64>()) {
        let c = grid_cover(&b, delta).unwrap();
        prop_assume!(c.cardinality() <= 4000);
        let points: Vec<_> = c.points().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let x = b.sample(&mut rng);
            let (idx, d) = c.nearest_index(&x).unwrap();
            prop_assert!((dist(&points[idx as usize], &x) - d).abs() < 1e-12);
            prop_assert!(d <= brute_nearest(&points, &x) + 1e-12);
        }
    }

    #[test]
    fn point_index_round_trip(b in boxes(4), delta in 0.1f64..2.0) {
        let c = grid_cover(&b, delta).unwrap();
        prop_assume!(c.cardinality() <= 20_000);
        for i in 0..c.cardinality() {
            let p = c.point(i).unwrap();
            prop_assert_eq!(c.nearest_index(&p).unwrap().0, i);
            prop_assert_eq!(&p, &c.point(i).unwrap());
        }
    }

    #[test]
    fn finer_radius_never_fewer_points(b in boxes(3), d1 in 0.05f64..2.0, d2 in 0.05f64..2.0) {
        let (fine, coarse) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(covering_number(&b, fine).unwrap() >= covering_number(&b, coarse).unwrap());
    }

    #[test]
    fn cardinality_is_product_of_axis_counts(b in boxes(4), delta in 0.05f64..2.0) {
        let c = grid_cover(&b, delta).unwrap();
        let expected: u64 = b.half_widths().iter().map(|w| ((2.0 * w) / (2.0 * delta)).ceil().max(1.0) as u64).product();
        prop_assert_eq!(c.cardinality(), expected);
    }
}

#[test]
fn unit_cube_count_scales_with_dimension() {
    for n in 1..=5 {
        let b = Hyperbox::from_bounds(&vec![0.0; n], &vec![1.0; n]).unwrap();
        for k in [1u64, 2, 5, 10] {
            let delta = 0.5 / k as f64;
            assert_eq!(covering_number(&b, delta).unwrap(), k.pow(n as u32));
        }
    }
}
