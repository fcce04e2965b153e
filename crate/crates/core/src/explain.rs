//! Polynomial-time explainers.
//!
//! Both explainers start from the features tested on the consistent path
//! (which fix the prediction, precision 1) and try to drop features one at
//! a time in a given order. The AXp variant keeps a drop when every path to
//! another class stays blocked; the approximate variant keeps a drop when
//! the precision of the remaining set still reaches δ.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::count::Counter;
use crate::instance::Instance;
use crate::precision::{Precision, Threshold};
use crate::set::FeatureSet;
use crate::tree::{DecisionTree, FeatureId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExplainError {
    #[error("deletion order is not a permutation of the consistent path's features")]
    InvalidOrder,
    #[error("feature set {0} does not reach the threshold")]
    NotWeakPaxp(FeatureSet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ExplanationKind {
    #[serde(rename = "AXp")]
    Axp,
    #[serde(rename = "ApproxPAXp")]
    ApproxPaxp,
    #[serde(rename = "MinPAXp")]
    MinPaxp,
}

impl fmt::Display for ExplanationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExplanationKind::Axp => "AXp",
            ExplanationKind::ApproxPaxp => "ApproxPAXp",
            ExplanationKind::MinPaxp => "MinPAXp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub kind: ExplanationKind,
    pub features: FeatureSet,
    pub precision: Precision,
    pub delta: Threshold,
    /// Precision reaches δ. Always true for emitted explanations.
    pub weak_paxp: bool,
    /// `None` when subset-minimality has not been decided.
    pub subset_minimal: Option<bool>,
}

impl Explanation {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Order in which features are tried for removal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureOrder(Vec<FeatureId>);

impl FeatureOrder {
    /// Wraps an explicit order; duplicates are rejected.
    pub fn new(order: Vec<FeatureId>) -> Result<Self, ExplainError> {
        let set = FeatureSet::new(order.iter().copied());
        if set.len() != order.len() {
            return Err(ExplainError::InvalidOrder);
        }
        Ok(FeatureOrder(order))
    }

    pub fn as_slice(&self) -> &[FeatureId] {
        &self.0
    }

    fn covers(&self, set: &FeatureSet) -> bool {
        self.0.len() == set.len() && self.0.iter().all(|i| set.contains(*i))
    }
}

/// Sorts the features of `start` from least to most important.
///
/// Importance is the precision lost when the feature alone is released from
/// `start`: higher remaining precision comes first. Ties go to the larger
/// feature index first.
pub fn order_features(
    tree: &DecisionTree,
    instance: &Instance,
    start: &FeatureSet,
) -> FeatureOrder {
    order_with(&Counter::new(tree, instance), start, start.iter())
}

fn order_with(
    counter: &Counter<'_>,
    current: &FeatureSet,
    candidates: impl Iterator<Item = FeatureId>,
) -> FeatureOrder {
    let mut keyed: Vec<(FeatureId, Precision)> = candidates
        .map(|j| (j, counter.precision(&current.without(j))))
        .collect();
    keyed.sort_by(|(a, pa), (b, pb)| match pb.cmp(pa) {
        Ordering::Equal => b.cmp(a),
        other => other,
    });
    FeatureOrder(keyed.into_iter().map(|(j, _)| j).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GreedyConfig {
    /// Re-rank the untried features after every successful removal.
    pub resort: bool,
}

/// One AXp, using the precision-loss order over the consistent path.
pub fn compute_axp(tree: &DecisionTree, instance: &Instance) -> Explanation {
    let start = FeatureSet::new(instance.path(tree).tested());
    let order = order_features(tree, instance, &start);
    compute_axp_with_order(tree, instance, &order).expect("order derived from the path")
}

/// One AXp, dropping features in the given order.
pub fn compute_axp_with_order(
    tree: &DecisionTree,
    instance: &Instance,
    order: &FeatureOrder,
) -> Result<Explanation, ExplainError> {
    let path = instance.path(tree);
    let mut current = FeatureSet::new(path.tested());
    if !order.covers(&current) {
        return Err(ExplainError::InvalidOrder);
    }
    // For each path to another class, the fixed features that block it.
    let blockers: Vec<Vec<FeatureId>> = tree
        .paths()
        .iter()
        .filter(|q| q.class() != instance.class())
        .map(|q| {
            (0..tree.space().len())
                .filter(|&i| {
                    q.literal(i)
                        .is_some_and(|set| !set.contains(instance.value(i)))
                })
                .collect()
        })
        .collect();
    for &j in order.as_slice() {
        let candidate = current.without(j);
        let still_blocked = blockers
            .iter()
            .all(|b| b.iter().any(|i| candidate.contains(*i)));
        if still_blocked {
            current = candidate;
        }
    }
    let precision = Counter::new(tree, instance).precision(&current);
    debug_assert!(precision.is_one());
    Ok(Explanation {
        kind: ExplanationKind::Axp,
        features: current,
        precision,
        delta: Threshold::one(),
        weak_paxp: true,
        subset_minimal: Some(true),
    })
}

/// Greedy deletion: removes each feature in order while the rest reaches δ,
/// until no single removal keeps δ.
pub fn compute_approx_paxp(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    order: &FeatureOrder,
) -> Result<Explanation, ExplainError> {
    compute_approx_paxp_with(tree, instance, delta, order, GreedyConfig::default())
}

pub fn compute_approx_paxp_with(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    order: &FeatureOrder,
    config: GreedyConfig,
) -> Result<Explanation, ExplainError> {
    let counter = Counter::new(tree, instance);
    let mut current = FeatureSet::new(instance.path(tree).tested());
    if !order.covers(&current) {
        return Err(ExplainError::InvalidOrder);
    }
    let mut precision = counter.precision(&current);
    // Passes repeat until one removes nothing.
    loop {
        let mut pending: Vec<FeatureId> = order
            .as_slice()
            .iter()
            .copied()
            .filter(|j| current.contains(*j))
            .collect();
        let mut removed = false;
        while !pending.is_empty() {
            let j = pending.remove(0);
            let candidate = current.without(j);
            let p = counter.precision(&candidate);
            if p.meets(delta) {
                current = candidate;
                precision = p;
                removed = true;
                if config.resort && !pending.is_empty() {
                    pending = order_with(&counter, &current, pending.into_iter()).0;
                }
            }
        }
        if !removed {
            break;
        }
    }
    Ok(Explanation {
        kind: ExplanationKind::ApproxPaxp,
        features: current,
        precision,
        delta: delta.clone(),
        weak_paxp: true,
        // At δ = 1 deletion-minimal coincides with subset-minimal.
        subset_minimal: delta.is_one().then_some(true),
    })
}

/// True iff no single-feature removal from `fixed` still reaches δ.
pub fn is_deletion_minimal(
    tree: &DecisionTree,
    instance: &Instance,
    fixed: &FeatureSet,
    delta: &Threshold,
) -> Result<bool, ExplainError> {
    let counter = Counter::new(tree, instance);
    if !counter.is_weak_paxp(fixed, delta) {
        return Err(ExplainError::NotWeakPaxp(fixed.clone()));
    }
    Ok(fixed
        .iter()
        .all(|j| !counter.is_weak_paxp(&fixed.without(j), delta)))
}
