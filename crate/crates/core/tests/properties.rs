use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use hyperreflect::experiments::ensemble::random_orthogonal;
use hyperreflect::linalg::solve::solve_direct;
use hyperreflect::linalg::svd::singular_values;
use hyperreflect::linalg::vector::{distance, dot, norm};
use hyperreflect::reflection::{kaczmarz_step, reflect_step, run_reflections};
use hyperreflect::sphere::{center_via_average, center_via_thales, PointCloud};
use hyperreflect::{DenseMatrix, LinearSystem, RngStream};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 96,
        rng_seed: RngSeed::Fixed(0x5EED_0001),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

/// A nonzero row together with a point and a second point lying on its
/// hyperplane.
fn row_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..12)
        .prop_flat_map(|n| (vec_of(n), vec_of(n), vec_of(n)))
        .prop_filter("row must not vanish", |(a, _, _)| norm(a) > 1e-2)
}

/// Diagonally dominant, hence invertible, square matrix with a solution.
fn system_case() -> impl Strategy<Value = (DenseMatrix, Vec<f64>, Vec<f64>)> {
    (2usize..8).prop_flat_map(|n| {
        (
            prop::collection::vec(-1.0..1.0f64, n * n),
            vec_of(n),
            vec_of(n),
        )
            .prop_map(move |(mut e, xs, x1)| {
                for i in 0..n {
                    e[i * n + i] += if e[i * n + i] >= 0.0 {
                        n as f64
                    } else {
                        -(n as f64)
                    };
                }
                (DenseMatrix::new(n, n, e).unwrap(), xs, x1)
            })
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn reflection_is_isometry_about_hyperplane_points((a, x, y0) in row_case()) {
        // project y0 onto the hyperplane <a, y> = 1.5 to get a fixed point
        let b = 1.5;
        let y = kaczmarz_step(&y0, &a, b).unwrap();
        let r = reflect_step(&x, &a, b).unwrap();
        let scale = 1.0 + norm(&x) + norm(&y) + b.abs() / norm(&a);
        prop_assert!((distance(&r, &y) - distance(&x, &y)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn reflection_is_involution((a, x, _y) in row_case(), b in -5.0..5.0f64) {
        let twice = reflect_step(&reflect_step(&x, &a, b).unwrap(), &a, b).unwrap();
        let scale = 1.0 + norm(&x) + b.abs() / norm(&a);
        prop_assert!(distance(&twice, &x) <= 1e-12 * scale);
    }

    #[test]
    fn kaczmarz_lands_on_row_hyperplane((a, x, _y) in row_case(), b in -5.0..5.0f64) {
        let p = kaczmarz_step(&x, &a, b).unwrap();
        prop_assert!((dot(&p, &a) - b).abs() <= 1e-12 * (norm(&a) * norm(&x) + b.abs()) + 1e-15);
    }

    #[test]
    fn translation_invariance((a, xs, x1) in system_case(), seed in any::<u64>()) {
        let s = LinearSystem::with_planted_solution(a, xs.clone()).unwrap();
        let h = s.homogeneous();
        let shifted: Vec<f64> = x1.iter().zip(&xs).map(|(p, q)| p - q).collect();
        let t1 = run_reflections(&s, &x1, 300, 1, &mut RngStream::new(seed)).unwrap();
        let t2 = run_reflections(&h, &shifted, 300, 1, &mut RngStream::new(seed)).unwrap();
        let scale = 1.0 + norm(&xs) + norm(&x1);
        for (p, q) in t1.points.iter().zip(&t2.points) {
            let back: Vec<f64> = q.iter().zip(&xs).map(|(u, v)| u + v).collect();
            prop_assert!(distance(p, &back) <= 1e-10 * scale);
        }
    }

    #[test]
    fn homogeneous_walk_preserves_norm((a, _xs, x1) in system_case(), seed in any::<u64>()) {
        let n = a.rows();
        let h = LinearSystem::with_planted_solution(a, vec![0.0; n]).unwrap();
        let t = run_reflections(&h, &x1, 2000, 7, &mut RngStream::new(seed)).unwrap();
        prop_assert!(t.max_relative_drift(&vec![0.0; n]) <= 1e-10);
    }

    #[test]
    fn frobenius_equals_singular_value_energy((a, _xs, _x1) in system_case()) {
        let svd = singular_values(&a).unwrap();
        let energy: f64 = svd.singular_values.iter().map(|s| s * s).sum();
        let fro_sq = a.frobenius_norm().powi(2);
        prop_assert!((energy - fro_sq).abs() <= 1e-10 * fro_sq);
    }

    #[test]
    fn direct_solve_inverts_matvec((a, xs, _x1) in system_case()) {
        let b = a.matvec(&xs).unwrap();
        let x = solve_direct(&a, &b).unwrap();
        let back = a.matvec(&x).unwrap();
        prop_assert!(distance(&back, &b) <= 1e-9 * norm(&b).max(1e-300));
    }

    #[test]
    fn thales_recovers_center_and_is_equivariant(
        n in 2usize..10,
        extra in 0usize..20,
        radius in 0.5..5.0f64,
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::new(seed);
        let center: Vec<f64> = rng.gaussian_vector(n).iter().map(|v| 3.0 * v).collect();
        let pts: Vec<Vec<f64>> = (0..2 * n + 1 + extra)
            .map(|_| {
                rng.unit_vector(n)
                    .iter()
                    .zip(&center)
                    .map(|(u, c)| c + radius * u)
                    .collect()
            })
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let got = center_via_thales(&cloud).unwrap();
        let scale = radius + norm(&center);
        prop_assert!(distance(&got, &center) <= 1e-8 * scale);

        let q = random_orthogonal(n, &mut rng);
        let t = rng.gaussian_vector(n);
        let moved = cloud.map(|p| {
            q.matvec(p).unwrap().iter().zip(&t).map(|(u, v)| u + v).collect()
        });
        let expect: Vec<f64> = q.matvec(&got).unwrap().iter().zip(&t).map(|(u, v)| u + v).collect();
        let tol = 1e-9 * (scale + norm(&t));
        prop_assert!(distance(&center_via_thales(&moved).unwrap(), &expect) <= tol);
        let avg_expect: Vec<f64> = q
            .matvec(&center_via_average(&cloud).unwrap())
            .unwrap()
            .iter()
            .zip(&t)
            .map(|(u, v)| u + v)
            .collect();
        prop_assert!(distance(&center_via_average(&moved).unwrap(), &avg_expect) <= tol);
    }
}
