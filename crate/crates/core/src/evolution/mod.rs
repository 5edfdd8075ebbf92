//! Population-based search: MAP-Elites grid, island model with ring
//! migration, a global elite archive and pluggable mutators.
//!
//! Out-of-sample fitness never enters [`Candidate`]; it lives only in the
//! [`RunRecord`], so selection cannot see it.

mod archive;
mod budget;
mod candidate;
mod engine;
mod grid;
mod islands;
mod mutator;
mod telemetry;

pub use archive::EliteArchive;
pub use budget::{check_budget, count_genome_params, count_text_params, BudgetCheck, BudgetConfig};
pub use candidate::{Candidate, Descriptor};
pub use engine::{evolve, sample_inspirations, Evaluator, EvolutionConfig, RunEntry, RunRecord};
pub use grid::{GridConfig, InsertOutcome, MapElitesGrid};
pub use islands::{IslandSet, MigrationEvent};
pub use mutator::{ExternalMutator, Mutator, MutatorError, PerturbMutator, Proposal};
pub use telemetry::{lineage, mutator_stats, MutatorStats};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvolutionError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid evolution config: {0}")]
    Config(String),
    #[error("no mutators configured")]
    NoMutators,
    #[error("run record: {0}")]
    Record(String),
}
