//! Randomized invariants, checked over generated inputs.

use ndarray::Array2;
use proptest::prelude::*;

use frugal_al::display::update_mu;
use frugal_al::net::ActivationSpec;
use frugal_al::numerics::{column_normalize, pairwise_sq_dists};
use frugal_al::skeleton::{chunk_descriptor, SkeletonSequence};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    proptest::collection::vec(-50.0f64..50.0, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn positive_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Array2<f64>> {
    proptest::collection::vec(1e-3f64..10.0, rows * cols)
        .prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

proptest! {
    #[test]
    fn column_normalize_is_stochastic_and_idempotent(m in positive_matrix(5, 4)) {
        let once = column_normalize(&m, 0.0).unwrap();
        for col in once.columns() {
            prop_assert!((col.sum() - 1.0).abs() <= 1e-12);
        }
        let twice = column_normalize(&once, 0.0).unwrap();
        for (a, b) in once.iter().zip(twice.iter()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn pairwise_distances_match_brute_force(a in matrix(3, 6), b in matrix(3, 4)) {
        let d = pairwise_sq_dists(&a, &b).unwrap();
        for i in 0..6 {
            for k in 0..4 {
                let mut expect = 0.0;
                for r in 0..3 {
                    let diff = a[(r, i)] - b[(r, k)];
                    expect += diff * diff;
                }
                prop_assert!((d[(i, k)] - expect).abs() <= 1e-9 * expect.max(1.0));
            }
        }
    }

    #[test]
    fn activation_inverts(x in -100.0f64..100.0) {
        let act = ActivationSpec::default();
        let err = (act.invert(act.apply(x)) - x).abs();
        prop_assert!(err <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn softmin_memberships_are_column_stochastic(
        pool in matrix(3, 8),
        v in matrix(3, 2),
        gamma in 1e-3f64..1e3,
    ) {
        let mu = update_mu(&pool, &v, gamma).unwrap();
        for col in mu.columns() {
            prop_assert!((col.sum() - 1.0).abs() <= 1e-9);
            // far entries may underflow to exactly 0 at tiny gamma
            prop_assert!(col.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!(col.iter().any(|&x| x > 0.0));
        }
    }

    #[test]
    fn chunk_descriptor_survives_frame_duplication(
        frames in proptest::collection::vec(
            proptest::collection::vec(-10.0f64..10.0, 3), 8usize..=24
        ).prop_filter("multiple of 4", |f| f.len() % 4 == 0)
    ) {
        let t = frames.len();
        let coords: Vec<Vec<[f64; 3]>> = frames
            .iter()
            .map(|f| vec![[f[0], f[1], f[2]]])
            .collect();
        let seq = SkeletonSequence { joints: 1, frames: t, coords: coords.clone(), label: None, split: None };
        let doubled = SkeletonSequence {
            joints: 1,
            frames: 2 * t,
            coords: coords.iter().flat_map(|f| [f.clone(), f.clone()]).collect(),
            label: None,
            split: None,
        };
        let a = chunk_descriptor(&seq, 0, 4).unwrap();
        let b = chunk_descriptor(&doubled, 0, 4).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
