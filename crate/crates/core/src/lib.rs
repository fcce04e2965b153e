//! Exact probabilistic abductive explanations for decision trees.
//!
//! Given a decision tree over finite discrete domains and an instance, the
//! crate computes sets of features whose fixed values make the predicted
//! class hold with probability at least δ under the uniform distribution,
//! with all probabilities computed exactly from per-path model counts:
//!
//! * [`compute_axp`]: one subset-minimal set that fully entails the prediction;
//! * [`compute_approx_paxp`]: greedy deletion under a precision-loss order;
//! * [`Oracle::compute_min_paxp`]: a minimum-size set via size-bounded
//!   decision queries, answered either by the built-in search or by an
//!   external SMT solver fed one of two encodings ([`smt`]).
//!
//! The [`brute`] module recomputes everything by enumerating feature space
//! and is the reference the rest is tested against.

pub mod brute;
pub mod count;
pub mod explain;
pub mod fixture;
pub mod gen;
pub mod instance;
pub mod precision;
pub mod report;
pub mod set;
pub mod smt;
pub mod solver;
pub mod tree;

pub use count::{
    class_probability, conditional_precision, feature_factor, is_weak_paxp, path_model_count,
    path_probability, Counter,
};
pub use explain::{
    compute_approx_paxp, compute_approx_paxp_with, compute_axp, compute_axp_with_order,
    is_deletion_minimal, order_features, ExplainError, Explanation, ExplanationKind, FeatureOrder,
    GreedyConfig,
};
pub use instance::{parse_instances, Instance, InstanceError};
pub use precision::{Precision, Threshold, ThresholdError};
pub use set::FeatureSet;
pub use solver::{Backend, DecisionQuery, Oracle, OracleAnswer, OracleError};
pub use tree::{ClassId, DecisionTree, FeatureId, FeatureSpace, Path, TreeError, ValueId};
