//! Coupled homophily-based appraisal dynamics and influence-based opinion
//! dynamics on signed social networks.
//!
//! `n` agents hold opinions on `m` issues. Each step, appraisals form from
//! opinion similarity, a signed row-normalized influence network forms from
//! the appraisals, and opinions are averaged over it. The crate provides the
//! update maps and simulation loop ([`dynamics`]), structural-balance and
//! consensus analysis ([`analysis`]), a seeded Monte Carlo harness for the
//! non-vanishing appraisal condition ([`montecarlo`]), trajectory persistence
//! ([`io`]), and heatmap rendering ([`render`]).
//!
//! See the crate examples for end-to-end usage of each capability; the
//! `interplay` binary exposes the same operations as subcommands.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod montecarlo;
pub mod render;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    sign_of, AppraisalMatrix, InfluenceMatrix, OpinionMatrix, SignVector, Snapshot, Termination,
    Trajectory, DEFAULT_ROW_TOLERANCE,
};
