//! Explainable categorization of weighted bipartite transaction data.
//!
//! The pipeline: journal entries become a financial statements network
//! ([`ledger::ManyValuedContext`]), interval scaling turns the network
//! into a binary [`context::FormalContext`], agendas select the features
//! that matter ([`agendas`]), and concept lattices categorize the
//! processes. Non-crisp agendas are Dempster-Shafer masses
//! ([`evidential`]); their categorizations collapse into one lattice via
//! the stability index ([`stability`]) or into flat importance-weighted
//! clusterings ([`transforms`]).

pub mod agendas;
pub mod context;
pub mod error;
pub mod evidential;
pub mod ledger;
pub mod stability;
pub mod transforms;

pub use agendas::{
    crisp_deliberate, expand_agenda, Agenda, AgendaConfig, CoalitionMode, DeliberationRule,
    InducedMode, RelevanceModel, SubstitutionModel,
};
pub use context::{Concept, ConceptLattice, ContextDoc, FormalContext};
pub use error::{Error, Result};
pub use evidential::{
    belief_table, mass_from_belief, mass_order, MassDoc, MassFunction, OrderCheck, OrderKind,
    OrderWitness, SubstitutionRule,
};
pub use ledger::{
    extract_processes, interval_scale, parse_journal, JournalLine, ManyValuedContext, NetworkDoc,
    ScaledSchema, ScalingSpec,
};
pub use stability::{BetaCategorization, ContextDistribution, StabilityClass};
pub use transforms::{
    account_importance, agglomerative_cluster, pignistic, plausibility_transform,
    weighted_dissimilarity, FlatClustering, ImportanceTable, Level, TransformMethod,
};
