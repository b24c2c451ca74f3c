//! Coordination of cognitive network-automation functions that share
//! configuration parameters.
//!
//! * [`model`]: parameters, functions, scenarios and their evaluation.
//! * [`reference`]: the two-function Gaussian reference scenario.
//! * [`conflict`]: structural conflict detection (A1, A2, B, C1, C2).
//! * [`game`]: 2x2 T/G conflict games and the Prisoner's Dilemma test.
//! * [`nbs`]: Nash-bargaining coordinator (sequential, ascent, brute force).
//! * [`schema`]: JSON scenario files.

pub mod conflict;
pub mod evaluator;
pub mod game;
pub mod graph;
pub mod model;
pub mod nbs;
pub mod reference;
pub mod schema;

pub use conflict::{conflict_summary, detect_conflicts, ConflictCategory, ConflictRecord};
pub use evaluator::{EvaluatorRegistry, EvaluatorSpec};
pub use game::{analyze, derive_payoffs, GameAnalysis, PayoffMatrix, Strategy};
pub use model::{
    build_scenario, Configuration, Direction, Evaluation, FunctionSpec, ModelError, ObjectiveSpec,
    ParameterSpec, Scenario,
};
pub use nbs::{
    brute_force_nbs, candidate_set, coordinate_ascent, nash_product, optimize_parameter,
    sequential_nbs, BargainError, BargainOutcome, CandidateSet, DisagreementPoint,
};
pub use reference::paper_scenario;
