//! Incentive analysis for single-decision causal influence diagrams.
//!
//! Graphs are read from a small line-oriented text format (`.cid`), models
//! add domains and conditional probability tables (`.cidm`). The graphical
//! criteria in [`criteria`] can be checked against the exact solver in
//! [`solver`] on small models.

pub mod construct;
pub mod corpus;
pub mod criteria;
pub mod dot;
pub mod dsep;
pub mod error;
pub mod graph;
pub mod model;
pub mod random;
pub mod report;
pub mod solver;
mod text;

pub use construct::{completeness_construction, control_construction};
pub use corpus::{builtin_example, builtin_graph, mdp_theta, EXAMPLE_NAMES};
pub use criteria::{
    analyze, intervention_incentive, observation_incentive, reduced_graph,
    requisite_observations,
};
pub use dot::serialize_dot;
pub use dsep::{d_separated, find_supporting_pair, Orientation, SupportingPair, UndirectedPath};
pub use error::{Error, Result};
pub use graph::{is_valid_id, CidGraph, Issue, Node, NodeKind, Relation, ValidationReport};
pub use model::{parse_model, parse_model_with_cap, serialize_model, CidModel, Cpt, Domain, Value};
pub use random::{random_graph, random_model};
pub use report::{IncentiveClass, IncentiveReport, InterventionVerdict, NodeIncentives, Verdict};
pub use solver::{
    joint_query, optimal_value, policy_value, stochastic_policy_value, value_of_control,
    value_of_information, Intervention, Policy,
};
pub use text::{parse_cid, serialize_cid};
