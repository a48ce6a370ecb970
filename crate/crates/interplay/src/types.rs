//! Validated matrix types and the trajectory container.
//!
//! An [`OpinionMatrix`] is an `n x m` matrix `Y` of `n` agents' opinions on
//! `m` issues; the model requires every row to be non-zero. Appraisals `X`
//! (`n x n`, sign-symmetric when produced by the homophily update) and
//! influences `W` (entry-wise absolute value row-stochastic) are derived from
//! it. All types are immutable values after construction.

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Default threshold below which a row 1-norm counts as zero.
pub const DEFAULT_ROW_TOLERANCE: f64 = 1e-12;

/// Tolerance-aware sign: 0 if `|value| <= tolerance`, else the arithmetic sign.
pub fn sign_of(value: f64, tolerance: f64) -> i8 {
    debug_assert!(tolerance >= 0.0);
    if value.abs() <= tolerance {
        0
    } else if value > 0.0 {
        1
    } else {
        -1
    }
}

fn check_finite(entries: &Array2<f64>) -> Result<()> {
    for ((i, j), &v) in entries.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }
    Ok(())
}

fn row_l1(row: ArrayView1<'_, f64>) -> f64 {
    row.iter().map(|v| v.abs()).sum()
}

/// Opinion matrix `Y`: entry `(i, j)` is agent `i`'s opinion on issue `j`.
/// Every row has 1-norm strictly greater than the row tolerance used at
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct OpinionMatrix {
    entries: Array2<f64>,
}

impl OpinionMatrix {
    pub fn new(entries: Array2<f64>, row_tolerance: f64) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "opinion matrix must have at least one agent and one issue".into(),
            ));
        }
        check_finite(&entries)?;
        for (i, row) in entries.rows().into_iter().enumerate() {
            if row_l1(row) <= row_tolerance {
                return Err(Error::ZeroRow { row: i });
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>], row_tolerance: f64) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidParameter("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let entries = Array2::from_shape_vec((n, m), flat)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::new(entries, row_tolerance)
    }

    /// Single-column matrix from an opinion vector (the `m = 1` case).
    pub fn from_column(column: &[f64], row_tolerance: f64) -> Result<Self> {
        let entries = Array2::from_shape_vec((column.len(), 1), column.to_vec())
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::new(entries, row_tolerance)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn m(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// `|Y|_max`.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    /// `|Y|_min`.
    pub fn min_abs(&self) -> f64 {
        self.entries
            .iter()
            .fold(f64::INFINITY, |a: f64, v| a.min(v.abs()))
    }

    /// Max-norm distance to another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }

    /// Entry-wise sign pattern of row `i`.
    pub fn row_signs(&self, i: usize, tolerance: f64) -> Vec<i8> {
        self.entries
            .row(i)
            .iter()
            .map(|&v| sign_of(v, tolerance))
            .collect()
    }
}

pub(crate) fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc: f64, (x, y)| acc.max((x - y).abs()))
}

/// Appraisal matrix `X`: entry `(i, j)` is agent `i`'s appraisal of agent `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct AppraisalMatrix {
    entries: Array2<f64>,
}

impl AppraisalMatrix {
    /// Validates shape and finiteness only; sign-symmetry and positive
    /// diagonal hold for matrices produced by the homophily update but are
    /// not required of externally supplied matrices fed to the analysis
    /// predicates.
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::InvalidParameter(
                "appraisal matrix must be square and non-empty".into(),
            ));
        }
        check_finite(&entries)?;
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix must be square".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let entries = Array2::from_shape_vec((n, n), flat)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::new(entries)
    }

    pub(crate) fn from_raw(entries: Array2<f64>) -> Self {
        Self { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// `min_{i,j} |X_ij|`, the quantity watched by the non-vanishing check.
    pub fn min_abs(&self) -> f64 {
        self.entries
            .iter()
            .fold(f64::INFINITY, |a: f64, v| a.min(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.entries, &other.entries)
    }
}

/// Signed influence matrix `W`; `|W|` is row-stochastic.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceMatrix {
    entries: Array2<f64>,
}

impl InfluenceMatrix {
    /// Absolute tolerance on `sum_j |W_ij| = 1`.
    pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::InvalidParameter(
                "influence matrix must be square and non-empty".into(),
            ));
        }
        check_finite(&entries)?;
        for (i, row) in entries.rows().into_iter().enumerate() {
            if (row_l1(row) - 1.0).abs() > Self::ROW_SUM_TOLERANCE {
                return Err(Error::InvalidParameter(format!(
                    "row {i} of |W| does not sum to 1"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_raw(entries: Array2<f64>) -> Self {
        Self { entries }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// Vector with entries in {-1, 0, +1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(entries: Vec<i8>) -> Result<Self> {
        if entries.iter().any(|&s| !(-1..=1).contains(&s)) {
            return Err(Error::InvalidParameter(
                "sign vector entries must be in {-1, 0, +1}".into(),
            ));
        }
        Ok(Self(entries))
    }

    pub fn from_values(values: &[f64], tolerance: f64) -> Self {
        Self(values.iter().map(|&v| sign_of(v, tolerance)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn has_zero(&self) -> bool {
        self.0.iter().any(|&s| s == 0)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }
}

/// How a simulation run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Max-norm change of `Y` fell below the convergence tolerance at `step`.
    Converged { step: usize },
    MaxStepsReached { step: usize },
    /// The opinion matrix left the non-zero-row domain while producing `step`;
    /// `row` is the offending agent. A recorded outcome, not a crash.
    DomainViolation { step: usize, row: usize },
}

impl Termination {
    pub fn step(&self) -> usize {
        match *self {
            Termination::Converged { step }
            | Termination::MaxStepsReached { step }
            | Termination::DomainViolation { step, .. } => step,
        }
    }

    pub fn is_domain_violation(&self) -> bool {
        matches!(self, Termination::DomainViolation { .. })
    }
}

/// State recorded at one time step. `appraisal`/`influence` are the matrices
/// that produced `opinion` and are absent at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub opinion: OpinionMatrix,
    pub appraisal: Option<AppraisalMatrix>,
    pub influence: Option<InfluenceMatrix>,
}

/// Recorded solution sequence of a simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    pub fn snapshot_at(&self, t: usize) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }

    /// Appraisal matrix at step `t`, falling back to the frozen final matrix
    /// when the run converged before `t` (the dynamics is constant past a
    /// fixed point).
    pub fn appraisal_at_or_frozen(&self, t: usize) -> Option<&AppraisalMatrix> {
        if let Some(s) = self.snapshot_at(t) {
            return s.appraisal.as_ref();
        }
        match self.termination {
            Termination::Converged { step } if t > step => self.last().appraisal.as_ref(),
            _ => None,
        }
    }
}
