//! The attack engine.
//!
//! A stage guesses the initial state `u` of its target LFSRs (`m1` bits).
//! Keystream relations come from shifting weight-4 multiples of the
//! feedback polynomials of the still-unknown registers, so their input
//! contribution cancels at the four positions. For each relation `i` and
//! target-wired input `j`, the four-position sum of that input is the dot
//! product `u·G_j(i)` with a column `G_j(i)` of the stage's generator
//! matrix. The statistic for `u` counts relations with every `u·G_j(i) = 0`,
//! split by the keystream parity `z(i)`.
//!
//! Counting for all `2^{m1}` guesses at once uses
//! `Σ_{y ∈ F_2^{n1}} (-1)^{y·(u·G(i))} = 2^{n1}·[u·G_j(i) = 0 ∀ j]`: every
//! relation adds one count at each of the `2^{n1}` combinations
//! `Σ_{j∈y} G_j(i)` (including `y = 0`), and one Walsh-Hadamard transform
//! of the count table yields `2^{n1}` times the statistic for every `u`.

mod columns;
mod equations;
mod plan;
mod recovery;
mod scoring;

pub use columns::{build_g_columns, build_g_columns_with, GColumns};
pub use equations::{filter_known, harvest_equations, Equation, EquationSet};
pub use plan::{plan, AttackPlan, StagePlan, MAX_EQUATIONS};
pub use recovery::{
    final_direct_search, final_direct_search_with, precompute_multiples, run_attack, AttackConfig,
    AttackOutcome, StageAttempt,
};
pub use scoring::{
    accumulate_tables, accumulate_tables_with, score_candidates, score_candidates_naive,
    score_candidates_tradeoff, score_candidates_tradeoff_with, top_k_tradeoff, CandidateScore,
    ScoreTable, MAX_NAIVE_M1, MAX_TABLE_M1,
};

use thiserror::Error;

use crate::gf2::Gf2Error;
use crate::multiples::MultipleError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("invalid attack order: {0}")]
    Order(String),
    #[error("plan: {0}")]
    Plan(String),
    #[error("keystream too short: no relation of degree {max_degree} fits in {len} bits")]
    NoEquations { max_degree: u64, len: usize },
    #[error("stage {stage}: every relation was filtered out by the known registers; supply more keystream or more multiples")]
    AllFiltered { stage: usize },
    #[error("stage {stage}: no weight-4 multiples supplied for modulus {modulus}")]
    MissingMultiples { stage: usize, modulus: String },
    #[error("stage {stage} has no target inputs wired to the filtering function")]
    NoTargetInputs { stage: usize },
    #[error("{what}: m1 = {m1} exceeds the limit {max}")]
    TooLarge {
        what: &'static str,
        m1: usize,
        max: usize,
    },
    #[error("internal invariant breach: {0}")]
    Invariant(String),
    #[error("final search: no candidate matches the keystream window")]
    NoSurvivor,
    #[error("final search: {} candidates match the keystream window", .0.len())]
    Ambiguous(Vec<u64>),
    #[error("candidate beams exhausted without a consistent state")]
    Exhausted,
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error(transparent)]
    Multiple(#[from] MultipleError),
}
