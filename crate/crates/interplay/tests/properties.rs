//! Randomized invariants of the update maps, balance tests, and classifiers.

use interplay::analysis::{
    classify_equilibrium, is_socially_balanced_rows, is_socially_balanced_triads,
    modulus_consensus, modulus_sign_consensus,
};
use interplay::dynamics::{
    appraisal_update, composite_map, equilibrium_matrix, simulate, step, verify_reconstruction,
    SimulationConfig,
};
use interplay::types::{
    sign_of, AppraisalMatrix, OpinionMatrix, SignVector, DEFAULT_ROW_TOLERANCE,
};
use ndarray::Array2;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

/// Opinion matrices with entries in [-3, 3] and every row bounded away from
/// zero, so update maps stay well defined for a few iterations.
fn opinion_matrix(max_n: usize, max_m: usize) -> impl Strategy<Value = OpinionMatrix> {
    (2..=max_n, 1..=max_m)
        .prop_flat_map(|(n, m)| {
            proptest::collection::vec(
                proptest::collection::vec(-3.0f64..3.0, m..=m),
                n..=n,
            )
        })
        .prop_filter_map("rows must be non-negligible", |rows| {
            OpinionMatrix::from_rows(&rows, 1e-3).ok()
        })
}

fn sign_matrix(max_n: usize) -> impl Strategy<Value = AppraisalMatrix> {
    (2..=max_n)
        .prop_flat_map(|n| {
            proptest::collection::vec(prop_oneof![Just(-1.0f64), Just(1.0)], n * n)
                .prop_map(move |flat| {
                    AppraisalMatrix::new(Array2::from_shape_vec((n, n), flat).unwrap()).unwrap()
                })
        })
}

fn equilibrium(max_n: usize, max_m: usize) -> impl Strategy<Value = OpinionMatrix> {
    (2..=max_n, 1..=max_m)
        .prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(0.2f64..3.0, m..=m),
                proptest::collection::vec(prop_oneof![Just(-1i8), Just(1)], n..=n),
            )
        })
        .prop_map(|(coeffs, signs)| {
            let rho = SignVector::new(signs).unwrap();
            equilibrium_matrix(&coeffs, &rho).unwrap()
        })
}

proptest! {
    #[test]
    fn sign_of_is_odd(v in -10.0f64..10.0, tol in 0.0f64..1.0) {
        prop_assert_eq!(sign_of(v, tol), -sign_of(-v, tol));
    }

    #[test]
    fn influence_rows_sum_to_unit_modulus(y in opinion_matrix(8, 5)) {
        let sr = step(&y, DEFAULT_ROW_TOLERANCE).unwrap();
        for i in 0..y.n() {
            let sum: f64 = (0..y.n()).map(|j| sr.influence.get(i, j).abs()).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn appraisals_are_sign_symmetric_with_positive_diagonal(y in opinion_matrix(8, 5)) {
        let x = appraisal_update(&y, DEFAULT_ROW_TOLERANCE).unwrap();
        for i in 0..y.n() {
            prop_assert!(x.get(i, i) > 0.0);
            for j in 0..y.n() {
                // X_ij and X_ji share the numerator Y_i . Y_j
                prop_assert!(x.get(i, j) * x.get(j, i) >= 0.0);
                let same_zero = (x.get(i, j) == 0.0) == (x.get(j, i) == 0.0);
                prop_assert!(same_zero);
            }
        }
    }

    #[test]
    fn max_norm_never_increases(y in opinion_matrix(8, 5)) {
        let sr = step(&y, DEFAULT_ROW_TOLERANCE).unwrap();
        prop_assert!(sr.opinion.max_abs() <= y.max_abs() + 1e-12);
        prop_assert!(sr.appraisal.max_abs() <= y.max_abs() + 1e-12);
    }

    #[test]
    fn composite_map_matches_staged_step(y in opinion_matrix(8, 5)) {
        let staged = step(&y, DEFAULT_ROW_TOLERANCE).unwrap().opinion;
        let direct = composite_map(&y, DEFAULT_ROW_TOLERANCE).unwrap();
        prop_assert!(staged.max_abs_diff(&direct) <= TOL);
    }

    #[test]
    fn balance_tests_agree(x in sign_matrix(6)) {
        let a = is_socially_balanced_triads(&x, 1e-9);
        let b = is_socially_balanced_rows(&x, 1e-9);
        prop_assert_eq!(a.balanced, b.balanced);
        prop_assert_eq!(
            a.partition.map(|p| p.labels().entries().to_vec()),
            b.partition.map(|p| p.labels().entries().to_vec())
        );
    }

    #[test]
    fn modulus_consensus_implies_sign_consensus(y in opinion_matrix(6, 4)) {
        if modulus_consensus(&y, 1e-9).is_some() {
            prop_assert!(modulus_sign_consensus(&y, 1e-9).is_some());
        }
    }

    #[test]
    fn rank_one_signed_matrices_are_fixed_points(y in equilibrium(6, 4)) {
        let next = step(&y, DEFAULT_ROW_TOLERANCE).unwrap().opinion;
        prop_assert!(next.max_abs_diff(&y) <= TOL);
        let desc = classify_equilibrium(&y, 1e-9).unwrap();
        prop_assert!(desc.residual <= TOL);
    }

    #[test]
    fn classified_fixed_points_reconstruct(y in equilibrium(6, 4)) {
        let desc = classify_equilibrium(&y, 1e-9).unwrap();
        let rebuilt = equilibrium_matrix(&desc.coefficients, desc.rho.labels()).unwrap();
        prop_assert!(rebuilt.max_abs_diff(&y) <= 1e-9);
    }

    #[test]
    fn signs_freeze_and_minimum_modulus_grows(y in equilibrium(6, 4)) {
        // perturb a fixed point slightly; once every appraisal is bounded away
        // from zero, opinion signs persist and the smallest modulus cannot shrink
        let perturbed = OpinionMatrix::new(
            y.entries() + 0.01 * y.min_abs(),
            DEFAULT_ROW_TOLERANCE,
        );
        prop_assume!(perturbed.is_ok());
        let mut current = perturbed.unwrap();
        prop_assume!(current.entries().iter().all(|v| v.abs() > 1e-6));
        for _ in 0..20 {
            let sr = step(&current, DEFAULT_ROW_TOLERANCE).unwrap();
            if sr.appraisal.min_abs() > 1e-9 {
                for i in 0..current.n() {
                    prop_assert_eq!(
                        sr.opinion.row_signs(i, 0.0),
                        current.row_signs(i, 0.0)
                    );
                }
                prop_assert!(sr.opinion.min_abs() >= current.min_abs() - 1e-12);
            }
            current = sr.opinion;
        }
    }

    #[test]
    fn trajectories_scale_equivariantly(y in opinion_matrix(6, 4), c in prop_oneof![Just(0.5f64), Just(3.0)]) {
        let config = SimulationConfig {
            max_steps: 20,
            convergence_tolerance: 0.0,
            ..SimulationConfig::default()
        };
        let base = simulate(&y, &config);
        let scaled_y0 = OpinionMatrix::new(y.entries() * c, DEFAULT_ROW_TOLERANCE).unwrap();
        let scaled = simulate(&scaled_y0, &config);
        prop_assume!(!base.termination.is_domain_violation());
        prop_assume!(!scaled.termination.is_domain_violation());
        for (a, b) in base.snapshots.iter().zip(&scaled.snapshots) {
            prop_assert_eq!(a.t, b.t);
            let rescaled = OpinionMatrix::new(a.opinion.entries() * c, DEFAULT_ROW_TOLERANCE).unwrap();
            prop_assert!(rescaled.max_abs_diff(&b.opinion) <= 1e-9 * c.max(1.0));
        }
    }

    #[test]
    fn strided_recordings_replay_exactly(y in opinion_matrix(6, 4), stride in 2usize..5) {
        let config = SimulationConfig {
            max_steps: 15,
            convergence_tolerance: 0.0,
            record_every: stride,
            ..SimulationConfig::default()
        };
        let traj = simulate(&y, &config);
        prop_assume!(!traj.termination.is_domain_violation());
        prop_assert!(verify_reconstruction(&traj, DEFAULT_ROW_TOLERANCE, TOL).is_ok());
    }
}
