//! Monte Carlo validation of the non-vanishing appraisal condition.
//!
//! Each run samples a generic initial condition (entries i.i.d. uniform on
//! `[-a, a]`), iterates the dynamics to the end of the observation window, and
//! scores the indicator `Z = 1` iff `min_{i,j} |X_ij(t)| >= threshold` for all
//! `t` in `[window_start, window_end]`. The estimate `p_hat = sum Z_i / N`
//! approximates the probability of non-vanishing appraisals; the Chernoff
//! bound gives the sample size needed for a target accuracy and confidence.

use ndarray::Array2;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics;
use crate::error::{Error, Result};
use crate::types::{OpinionMatrix, DEFAULT_ROW_TOLERANCE};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-run seed derivation; parallel execution order cannot
/// change which stream a run sees.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Parameters of one validation experiment. Defaults follow the protocol:
/// 9 agents, 4 issues, support `[-1, 1]`, window `[100, 1000]`, threshold
/// `0.001`, accuracy and confidence parameters both `0.01`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub n: usize,
    pub m: usize,
    /// Half-width `a` of the uniform sampling support.
    pub support: f64,
    pub runs: usize,
    pub master_seed: u64,
    pub window_start: usize,
    pub window_end: usize,
    pub threshold: f64,
    pub epsilon: f64,
    pub xi: f64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            n: 9,
            m: 4,
            support: 1.0,
            runs: 1000,
            master_seed: 0,
            window_start: 100,
            window_end: 1000,
            threshold: 0.001,
            epsilon: 0.01,
            xi: 0.01,
        }
    }
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < 1 {
            return Err(Error::InvalidParameter("n and m must be >= 1".into()));
        }
        if !(self.support > 0.0) {
            return Err(Error::InvalidParameter("support must be positive".into()));
        }
        if self.runs < 1 {
            return Err(Error::InvalidParameter("runs must be >= 1".into()));
        }
        if self.window_start < 1 || self.window_start >= self.window_end {
            return Err(Error::InvalidParameter(
                "window must satisfy 1 <= start < end".into(),
            ));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidParameter("threshold must be positive".into()));
        }
        for (name, v) in [("epsilon", self.epsilon), ("xi", self.xi)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must be in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Generic initial condition: entries i.i.d. uniform on `[-a, a]` from a
/// deterministic stream. Rows that come out effectively zero (a measure-zero
/// event) are redrawn; the count of redraws is returned alongside.
pub fn generic_initial(n: usize, m: usize, a: f64, seed: u64) -> (OpinionMatrix, usize) {
    assert!(n >= 1 && m >= 1 && a > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-a, a);
    let mut entries = Array2::from_shape_fn((n, m), |_| dist.sample(&mut rng));
    let mut resamples = 0;
    loop {
        let bad = (0..n).find(|&i| {
            entries.row(i).iter().map(|v| v.abs()).sum::<f64>() <= DEFAULT_ROW_TOLERANCE
        });
        match bad {
            None => break,
            Some(i) => {
                resamples += 1;
                for v in entries.row_mut(i) {
                    *v = dist.sample(&mut rng);
                }
            }
        }
    }
    let matrix = OpinionMatrix::new(entries, DEFAULT_ROW_TOLERANCE)
        .expect("rows redrawn until non-zero");
    (matrix, resamples)
}

/// Minimum sample size `ceil(ln(2/xi) / (2 eps^2))` for accuracy `eps` at
/// confidence `1 - xi`.
pub fn chernoff_sample_size(epsilon: f64, xi: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParameter(
            "epsilon and xi must be in (0, 1)".into(),
        ));
    }
    Ok(((2.0 / xi).ln() / (2.0 * epsilon * epsilon)).ceil() as u64)
}

/// How a single Monte Carlo run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunOutcome {
    /// Simulated through the full window.
    CompletedHorizon,
    /// Hit an exact fixed point at `step`; the frozen appraisals stand in for
    /// the remaining window.
    Frozen { step: usize },
    DomainViolation { step: usize, row: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub z: bool,
    pub outcome: RunOutcome,
    /// `min_{i,j,t} |X_ij(t)|` over the observation window (infinity when the
    /// run violated the domain before the window opened).
    pub min_abs_appraisal: f64,
    pub resamples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub params: ExperimentParams,
    pub n_requested: usize,
    pub n_completed: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub chernoff_minimum: u64,
    pub runs: Vec<RunRecord>,
}

/// Simulates one seeded run, tracking only the running window minimum of
/// `min |X_ij|`; memory stays constant regardless of the horizon.
pub fn single_run(params: &ExperimentParams, run: usize) -> RunRecord {
    let seed = derive_seed(params.master_seed, run as u64);
    let (y0, resamples) = generic_initial(params.n, params.m, params.support, seed);
    let mut y = y0;
    let mut min_x = f64::INFINITY;
    let mut outcome = RunOutcome::CompletedHorizon;
    for t in 1..=params.window_end {
        match dynamics::step(&y, DEFAULT_ROW_TOLERANCE) {
            Err(Error::ZeroRow { row }) => {
                outcome = RunOutcome::DomainViolation { step: t, row };
                break;
            }
            Err(_) => unreachable!("step only fails with ZeroRow"),
            Ok(sr) => {
                let frozen = sr.opinion.max_abs_diff(&y) == 0.0;
                if t >= params.window_start || frozen {
                    // A fixed point before the window opens contributes its
                    // (constant) appraisals to the whole window.
                    min_x = min_x.min(sr.appraisal.min_abs());
                }
                y = sr.opinion;
                if frozen {
                    outcome = RunOutcome::Frozen { step: t };
                    break;
                }
            }
        }
    }
    let z = !matches!(outcome, RunOutcome::DomainViolation { .. }) && min_x >= params.threshold;
    RunRecord {
        run,
        seed,
        z,
        outcome,
        min_abs_appraisal: min_x,
        resamples,
    }
}

/// Runs the full experiment. Runs execute in parallel; the report is ordered
/// by run index and is identical across re-runs with the same parameters.
pub fn run_experiment(params: &ExperimentParams) -> Result<MonteCarloReport> {
    params.validate()?;
    let runs: Vec<RunRecord> = (1..=params.runs)
        .into_par_iter()
        .map(|i| single_run(params, i))
        .collect();
    let successes = runs.iter().filter(|r| r.z).count();
    Ok(MonteCarloReport {
        params: params.clone(),
        n_requested: params.runs,
        n_completed: runs.len(),
        successes,
        p_hat: successes as f64 / params.runs as f64,
        chernoff_minimum: chernoff_sample_size(params.epsilon, params.xi)?,
        runs,
    })
}
