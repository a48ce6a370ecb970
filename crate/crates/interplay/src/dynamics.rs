//! The coupled update maps and the simulation loop.
//!
//! One iteration reads the current opinions `Y` and produces, in order:
//! appraisals `X' = Dg(|Y| 1)^{-1} Y Y^T` (homophily), influences
//! `W' = Dg(|X'| 1)^{-1} X'` (signed row normalization), and new opinions
//! `Y' = W' Y` (Altafini-style averaging). The composition equals the single
//! map `Y' = Dg(|Y Y^T| 1)^{-1} Y Y^T Y`, implemented independently in
//! [`composite_map`] as a cross-check.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::types::{
    AppraisalMatrix, InfluenceMatrix, OpinionMatrix, SignVector, Snapshot, Termination,
    Trajectory, DEFAULT_ROW_TOLERANCE,
};

/// Output of one full update: the chain `X' -> W' -> Y'`.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub appraisal: AppraisalMatrix,
    pub influence: InfluenceMatrix,
    pub opinion: OpinionMatrix,
}

/// Knobs for [`simulate`].
#[derive(Clone, Copy, Debug)]
pub struct SimulationConfig {
    pub max_steps: usize,
    /// Stop when the max-norm change of `Y` between consecutive steps falls
    /// below this.
    pub convergence_tolerance: f64,
    pub row_tolerance: f64,
    /// Snapshot stride; the first and last steps are always recorded.
    pub record_every: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            max_steps: 1000,
            convergence_tolerance: 1e-9,
            row_tolerance: DEFAULT_ROW_TOLERANCE,
            record_every: 1,
        }
    }
}

fn row_l1_norms(entries: &Array2<f64>, row_tolerance: f64) -> Result<Vec<f64>> {
    entries
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let norm: f64 = row.iter().map(|v| v.abs()).sum();
            if norm <= row_tolerance {
                Err(Error::ZeroRow { row: i })
            } else {
                Ok(norm)
            }
        })
        .collect()
}

fn scale_rows(mut entries: Array2<f64>, norms: &[f64]) -> Array2<f64> {
    for (mut row, &norm) in entries.rows_mut().into_iter().zip(norms) {
        row.mapv_inplace(|v| v / norm);
    }
    entries
}

/// Homophily update: `X'_ij = (Y_i* . Y_j*) / ||Y_i*||_1`.
///
/// The result has a strictly positive diagonal and is sign-symmetric, with
/// every `|X'_ij|` bounded by the largest opinion magnitude in row `j`.
pub fn appraisal_update(y: &OpinionMatrix, row_tolerance: f64) -> Result<AppraisalMatrix> {
    let norms = row_l1_norms(y.entries(), row_tolerance)?;
    let gram = y.entries().dot(&y.entries().t());
    Ok(AppraisalMatrix::from_raw(scale_rows(gram, &norms)))
}

/// Signed row normalization: `W_ij = X_ij / ||X_i*||_1`, so `|W|` is
/// row-stochastic and `W` carries the signs of `X`.
///
/// Fails with [`Error::ZeroRow`] when a row of `X` has vanished.
pub fn influence_from_appraisal(
    x: &AppraisalMatrix,
    row_tolerance: f64,
) -> Result<InfluenceMatrix> {
    let norms = row_l1_norms(x.entries(), row_tolerance)?;
    Ok(InfluenceMatrix::from_raw(scale_rows(
        x.entries().clone(),
        &norms,
    )))
}

/// Opinion averaging `Y' = W Y`. Fails if the product has an (effectively)
/// zero row, i.e. the trajectory has left the model's domain.
pub fn opinion_update(
    w: &InfluenceMatrix,
    y: &OpinionMatrix,
    row_tolerance: f64,
) -> Result<OpinionMatrix> {
    OpinionMatrix::new(w.entries().dot(y.entries()), row_tolerance)
}

/// One full iteration of the coupled dynamics.
pub fn step(y: &OpinionMatrix, row_tolerance: f64) -> Result<StepResult> {
    let appraisal = appraisal_update(y, row_tolerance)?;
    let influence = influence_from_appraisal(&appraisal, row_tolerance)?;
    let opinion = opinion_update(&influence, y, row_tolerance)?;
    Ok(StepResult {
        appraisal,
        influence,
        opinion,
    })
}

/// Direct evaluation of the composed map `Y' = Dg(|Y Y^T| 1)^{-1} Y Y^T Y`,
/// without materializing `X` and `W`. Independent route used to cross-check
/// [`step`].
pub fn composite_map(y: &OpinionMatrix, row_tolerance: f64) -> Result<OpinionMatrix> {
    let gram = y.entries().dot(&y.entries().t());
    let norms = row_l1_norms(&gram, row_tolerance)?;
    let scaled = scale_rows(gram, &norms);
    OpinionMatrix::new(scaled.dot(y.entries()), row_tolerance)
}

/// Iterates [`step`] from `y0` until convergence, `max_steps`, or a domain
/// violation. Snapshots are recorded at the configured stride plus always the
/// initial and final steps; a domain violation keeps the last valid state as
/// the final snapshot.
pub fn simulate(y0: &OpinionMatrix, config: &SimulationConfig) -> Trajectory {
    assert!(config.max_steps >= 1, "max_steps must be >= 1");
    assert!(config.record_every >= 1, "record_every must be >= 1");

    let mut snapshots = vec![Snapshot {
        t: 0,
        opinion: y0.clone(),
        appraisal: None,
        influence: None,
    }];
    let mut current = y0.clone();
    // Step result that produced `current`; kept so a skipped step can still
    // be recorded as the final snapshot.
    let mut pending: Option<(usize, StepResult)> = None;

    let record_pending = |snapshots: &mut Vec<Snapshot>, pending: &mut Option<(usize, StepResult)>| {
        if let Some((t, sr)) = pending.take() {
            snapshots.push(Snapshot {
                t,
                opinion: sr.opinion,
                appraisal: Some(sr.appraisal),
                influence: Some(sr.influence),
            });
        }
    };

    let mut termination = Termination::MaxStepsReached {
        step: config.max_steps,
    };
    for t in 1..=config.max_steps {
        match step(&current, config.row_tolerance) {
            Err(Error::ZeroRow { row }) => {
                record_pending(&mut snapshots, &mut pending);
                termination = Termination::DomainViolation { step: t, row };
                break;
            }
            Err(_) => unreachable!("step only fails with ZeroRow"),
            Ok(sr) => {
                let delta = sr.opinion.max_abs_diff(&current);
                current = sr.opinion.clone();
                let done = delta < config.convergence_tolerance || t == config.max_steps;
                if t % config.record_every == 0 || done {
                    pending = None;
                    snapshots.push(Snapshot {
                        t,
                        opinion: sr.opinion,
                        appraisal: Some(sr.appraisal),
                        influence: Some(sr.influence),
                    });
                } else {
                    pending = Some((t, sr));
                }
                if delta < config.convergence_tolerance {
                    termination = Termination::Converged { step: t };
                    break;
                }
            }
        }
    }

    Trajectory {
        snapshots,
        termination,
    }
}

/// Replays the dynamics between consecutive recorded snapshots and checks the
/// stored matrices are reproduced within `tolerance`.
pub fn verify_reconstruction(
    traj: &Trajectory,
    row_tolerance: f64,
    tolerance: f64,
) -> Result<()> {
    for pair in traj.snapshots.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let mut y = prev.opinion.clone();
        let mut last: Option<StepResult> = None;
        for _ in prev.t..next.t {
            let sr = step(&y, row_tolerance)?;
            y = sr.opinion.clone();
            last = Some(sr);
        }
        let sr = last.expect("snapshots strictly increasing in t");
        let x = next.appraisal.as_ref().expect("X present for t >= 1");
        let w = next.influence.as_ref().expect("W present for t >= 1");
        if sr.opinion.max_abs_diff(&next.opinion) > tolerance
            || sr.appraisal.max_abs_diff(x) > tolerance
            || crate::types::max_abs_diff(sr.influence.entries(), w.entries()) > tolerance
        {
            return Err(Error::InvalidParameter(format!(
                "snapshot at t = {} does not replay from t = {}",
                next.t, prev.t
            )));
        }
    }
    Ok(())
}

/// One-step limit for the single-issue case: the dynamics sends any
/// all-non-zero opinion vector `y` to `(||y||_2^2 / ||y||_1) sgn(y)` in a
/// single step and stays there.
pub fn single_issue_closed_form(y0: &[f64]) -> Result<Vec<f64>> {
    if y0.is_empty() {
        return Err(Error::InvalidParameter("empty opinion vector".into()));
    }
    for (i, &v) in y0.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        if v == 0.0 {
            return Err(Error::ZeroRow { row: i });
        }
    }
    let l2_sq: f64 = y0.iter().map(|v| v * v).sum();
    let l1: f64 = y0.iter().map(|v| v.abs()).sum();
    let magnitude = l2_sq / l1;
    Ok(y0.iter().map(|&v| magnitude * v.signum()).collect())
}

/// Limit appraisal matrix `X* = (sum a_k^2 / sum |a_k|) rho rho^T` reached
/// when the opinions converge to `[a_1 rho, ..., a_m rho]`.
pub fn predicted_limit_appraisal(
    coefficients: &[f64],
    rho: &SignVector,
) -> Result<AppraisalMatrix> {
    if rho.has_zero() || rho.is_empty() {
        return Err(Error::InvalidParameter(
            "faction vector must have entries in {-1, +1}".into(),
        ));
    }
    let sum_sq: f64 = coefficients.iter().map(|a| a * a).sum();
    if sum_sq <= 0.0 {
        return Err(Error::InvalidParameter(
            "coefficients must not be all zero".into(),
        ));
    }
    let sum_abs: f64 = coefficients.iter().map(|a| a.abs()).sum();
    let scale = sum_sq / sum_abs;
    let n = rho.len();
    let entries = Array2::from_shape_fn((n, n), |(i, j)| {
        scale * f64::from(rho.entries()[i]) * f64::from(rho.entries()[j])
    });
    Ok(AppraisalMatrix::from_raw(entries))
}

/// Builds the equilibrium `Y* = [a_1 rho, ..., a_m rho]`.
pub fn equilibrium_matrix(coefficients: &[f64], rho: &SignVector) -> Result<OpinionMatrix> {
    if rho.has_zero() || rho.is_empty() {
        return Err(Error::InvalidParameter(
            "faction vector must have entries in {-1, +1}".into(),
        ));
    }
    if coefficients.iter().map(|a| a * a).sum::<f64>() <= 0.0 {
        return Err(Error::InvalidParameter(
            "coefficients must not be all zero".into(),
        ));
    }
    let entries = Array2::from_shape_fn((rho.len(), coefficients.len()), |(i, j)| {
        coefficients[j] * f64::from(rho.entries()[i])
    });
    OpinionMatrix::new(entries, DEFAULT_ROW_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn y(rows: &[Vec<f64>]) -> OpinionMatrix {
        OpinionMatrix::from_rows(rows, DEFAULT_ROW_TOLERANCE).unwrap()
    }

    fn two_camp_initial() -> OpinionMatrix {
        y(&[
            vec![1.0, 2.0, 5.0],
            vec![-1.0, -2.0, 5.0],
            vec![-1.0, -2.0, 5.0],
            vec![1.0, 2.0, 5.0],
        ])
    }

    /// Independent entry-wise evaluation of the homophily update, used as the
    /// oracle for the matrix-product implementation.
    fn appraisal_oracle(y: &OpinionMatrix) -> Vec<Vec<f64>> {
        let (n, m) = (y.n(), y.m());
        (0..n)
            .map(|i| {
                let norm: f64 = (0..m).map(|k| y.get(i, k).abs()).sum();
                (0..n)
                    .map(|j| (0..m).map(|k| y.get(i, k) * y.get(j, k)).sum::<f64>() / norm)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn appraisal_two_agent_example() {
        let x = appraisal_update(&y(&[vec![1.0], vec![-2.0]]), 1e-12).unwrap();
        let expected = arr2(&[[1.0, -2.0], [-1.0, 2.0]]);
        assert_eq!(crate::types::max_abs_diff(x.entries(), &expected), 0.0);
    }

    #[test]
    fn appraisal_consensus_all_ones() {
        let x = appraisal_update(&y(&vec![vec![1.0]; 3]), 1e-12).unwrap();
        assert!(x.entries().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn appraisal_matches_entrywise_oracle() {
        let y0 = two_camp_initial();
        let x = appraisal_update(&y0, 1e-12).unwrap();
        assert_eq!(x.get(0, 0), 30.0 / 8.0);
        assert_eq!(x.get(0, 1), 20.0 / 8.0);
        let oracle = appraisal_oracle(&y0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((x.get(i, j) - oracle[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn influence_divides_rows_by_l1_norm() {
        let x = AppraisalMatrix::new(arr2(&[[1.0, -2.0], [-1.0, 2.0]])).unwrap();
        let w = influence_from_appraisal(&x, 1e-12).unwrap();
        let expected = arr2(&[[1.0 / 3.0, -2.0 / 3.0], [-1.0 / 3.0, 2.0 / 3.0]]);
        assert!(crate::types::max_abs_diff(w.entries(), &expected) < 1e-15);
    }

    #[test]
    fn influence_identity_is_fixed() {
        let x = AppraisalMatrix::new(Array2::<f64>::eye(3)).unwrap();
        let w = influence_from_appraisal(&x, 1e-12).unwrap();
        assert_eq!(w.entries(), &Array2::<f64>::eye(3));
    }

    #[test]
    fn influence_normalizes_constant_matrix() {
        let x = AppraisalMatrix::new(Array2::from_elem((4, 4), 5.0)).unwrap();
        let w = influence_from_appraisal(&x, 1e-12).unwrap();
        assert!(w.entries().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn influence_reports_vanished_row() {
        let x = AppraisalMatrix::new(arr2(&[[1.0, 1.0], [0.0, 0.0]])).unwrap();
        let err = influence_from_appraisal(&x, 1e-12).unwrap_err();
        assert_eq!(err, Error::ZeroRow { row: 1 });
    }

    #[test]
    fn opinion_update_identity_and_consensus() {
        let y0 = two_camp_initial();
        let w = InfluenceMatrix::new(Array2::<f64>::eye(4)).unwrap();
        let next = opinion_update(&w, &y0, 1e-12).unwrap();
        assert_eq!(next.entries(), y0.entries());

        let consensus = y(&vec![vec![0.0, 0.0, 5.0]; 4]);
        let w = InfluenceMatrix::new(Array2::from_elem((4, 4), 0.25)).unwrap();
        let next = opinion_update(&w, &consensus, 1e-12).unwrap();
        assert!(next.max_abs_diff(&consensus) < 1e-15);
    }

    #[test]
    fn step_two_agent_single_issue() {
        let result = step(&y(&[vec![1.0], vec![-2.0]]), 1e-12).unwrap();
        let expected = arr2(&[[5.0 / 3.0], [-5.0 / 3.0]]);
        assert!(crate::types::max_abs_diff(result.opinion.entries(), &expected) < 1e-15);
    }

    #[test]
    fn step_fixes_rank_one_signed_matrices() {
        let rho = SignVector::new(vec![1, -1, 1]).unwrap();
        let y_star = equilibrium_matrix(&[2.0, -3.0], &rho).unwrap();
        let next = step(&y_star, DEFAULT_ROW_TOLERANCE).unwrap().opinion;
        assert!(next.max_abs_diff(&y_star) <= 1e-12);
    }

    #[test]
    fn step_two_camp_initial_first_iteration() {
        let y0 = two_camp_initial();
        let next = step(&y0, 1e-12).unwrap().opinion;
        for i in 0..4 {
            assert!((next.get(i, 2) - 5.0).abs() < 1e-12);
        }
        // brute-force chain through the entry-wise forms
        let x = appraisal_oracle(&y0);
        let n = 4;
        let mut expected = vec![vec![0.0; 3]; n];
        for i in 0..n {
            let norm: f64 = (0..n).map(|k| x[i][k].abs()).sum();
            for j in 0..3 {
                expected[i][j] =
                    (0..n).map(|k| x[i][k] / norm * y0.get(k, j)).sum::<f64>();
            }
        }
        for i in 0..n {
            for j in 0..3 {
                assert!((next.get(i, j) - expected[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composite_map_agrees_with_staged_chain() {
        let y0 = two_camp_initial();
        let staged = step(&y0, 1e-12).unwrap().opinion;
        let direct = composite_map(&y0, 1e-12).unwrap();
        assert!(staged.max_abs_diff(&direct) <= 1e-12);
    }

    #[test]
    fn simulate_two_camp_reaches_consensus_equilibrium() {
        let traj = simulate(&two_camp_initial(), &SimulationConfig::default());
        assert!(matches!(traj.termination, Termination::Converged { .. }));
        let last = traj.last();
        let y_star = y(&vec![vec![0.0, 0.0, 5.0]; 4]);
        assert!(last.opinion.max_abs_diff(&y_star) < 1e-6);
        let x_star = Array2::from_elem((4, 4), 5.0);
        let x = last.appraisal.as_ref().unwrap();
        assert!(crate::types::max_abs_diff(x.entries(), &x_star) < 1e-6);
    }

    #[test]
    fn simulate_single_issue_settles_in_one_step() {
        let y0 = y(&[vec![1.0], vec![-2.0], vec![0.5]]);
        let traj = simulate(&y0, &SimulationConfig::default());
        let closed = single_issue_closed_form(&[1.0, -2.0, 0.5]).unwrap();
        let after_one = traj.snapshot_at(1).unwrap();
        for (i, &v) in closed.iter().enumerate() {
            assert!((after_one.opinion.get(i, 0) - v).abs() <= 1e-12);
        }
        // fixed from step 1 on; detection fires one step later
        assert!(matches!(traj.termination, Termination::Converged { step } if step <= 2));
        assert!(traj.last().opinion.max_abs_diff(&after_one.opinion) <= 1e-12);
    }

    #[test]
    fn simulate_is_scale_equivariant() {
        let y0 = two_camp_initial();
        let scaled = y(&[
            vec![3.0, 6.0, 15.0],
            vec![-3.0, -6.0, 15.0],
            vec![-3.0, -6.0, 15.0],
            vec![3.0, 6.0, 15.0],
        ]);
        let config = SimulationConfig {
            max_steps: 50,
            convergence_tolerance: 0.0,
            ..SimulationConfig::default()
        };
        let base = simulate(&y0, &config);
        let big = simulate(&scaled, &config);
        assert_eq!(base.snapshots.len(), big.snapshots.len());
        for (a, b) in base.snapshots.iter().zip(&big.snapshots) {
            for ((i, j), &v) in a.opinion.entries().indexed_iter() {
                assert!((3.0 * v - b.opinion.get(i, j)).abs() < 1e-9);
            }
            if let (Some(xa), Some(xb)) = (&a.appraisal, &b.appraisal) {
                for ((i, j), &v) in xa.entries().indexed_iter() {
                    assert!((3.0 * v - xb.get(i, j)).abs() < 1e-9);
                }
            }
            if let (Some(wa), Some(wb)) = (&a.influence, &b.influence) {
                assert!(crate::types::max_abs_diff(wa.entries(), wb.entries()) < 1e-9);
            }
        }
    }

    #[test]
    fn simulate_records_stride_and_endpoints() {
        let config = SimulationConfig {
            max_steps: 10,
            convergence_tolerance: 0.0,
            record_every: 4,
            ..SimulationConfig::default()
        };
        let traj = simulate(&two_camp_initial(), &config);
        let steps: Vec<usize> = traj.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(steps, vec![0, 4, 8, 10]);
        verify_reconstruction(&traj, DEFAULT_ROW_TOLERANCE, 1e-12).unwrap();
    }

    #[test]
    fn simulate_records_domain_violation() {
        // a row tolerance above the actual row norms trips the domain guard
        // on the first step; the run must end cleanly, not panic
        let y0 = y(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let config = SimulationConfig {
            row_tolerance: 1.5,
            ..SimulationConfig::default()
        };
        let traj = simulate(&y0, &config);
        assert_eq!(
            traj.termination,
            Termination::DomainViolation { step: 1, row: 0 }
        );
        assert_eq!(traj.last().t, 0);
    }

    #[test]
    fn closed_form_examples() {
        let out = single_issue_closed_form(&[1.0, -2.0]).unwrap();
        assert!((out[0] - 5.0 / 3.0).abs() < 1e-15);
        assert!((out[1] + 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(single_issue_closed_form(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0; 3]);
        // single agent: magnitude 16/4, sign preserved
        assert_eq!(single_issue_closed_form(&[-4.0]).unwrap(), vec![-4.0]);
        assert!(single_issue_closed_form(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn closed_form_matches_step() {
        let values = [0.3, -1.7, 2.5, -0.2, 1.1];
        let closed = single_issue_closed_form(&values).unwrap();
        let next = step(&OpinionMatrix::from_column(&values, 1e-12).unwrap(), 1e-12)
            .unwrap()
            .opinion;
        for (i, &v) in closed.iter().enumerate() {
            assert!((next.get(i, 0) - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn limit_appraisal_examples() {
        let rho = SignVector::new(vec![1, 1, 1, 1]).unwrap();
        let x = predicted_limit_appraisal(&[0.0, 0.0, 5.0], &rho).unwrap();
        assert!(x.entries().iter().all(|&v| (v - 5.0).abs() < 1e-15));

        let rho = SignVector::new(vec![1, -1]).unwrap();
        let x = predicted_limit_appraisal(&[1.0], &rho).unwrap();
        let expected = arr2(&[[1.0, -1.0], [-1.0, 1.0]]);
        assert_eq!(crate::types::max_abs_diff(x.entries(), &expected), 0.0);

        let rho = SignVector::new(vec![1, -1, 1]).unwrap();
        let x = predicted_limit_appraisal(&[2.0, -3.0], &rho).unwrap();
        assert!((x.get(0, 0) - 13.0 / 5.0).abs() < 1e-15);
        assert!((x.get(0, 1) + 13.0 / 5.0).abs() < 1e-15);

        assert!(predicted_limit_appraisal(&[0.0, 0.0], &rho).is_err());
    }
}
