//! Exact model counting over tree paths.
//!
//! For an instance v and a fixed set X, each path R_k contributes
//! #(R_k; v, X) = Π_i n_ik points consistent with x_X = v_X, where n_ik is
//! the number of values of feature i admitted both by the path and by the
//! fixing. The conditional precision is the sum of the counts of the paths
//! predicting v's class over the sum for all paths.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::instance::Instance;
use crate::precision::{Precision, Threshold};
use crate::set::FeatureSet;
use crate::tree::{ClassId, DecisionTree, FeatureId, Path};

/// n_ik for a fixed and for a universal feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorPair {
    pub fixed: u64,
    pub universal: u64,
}

/// The two possible values of n_ik for a feature, independent of X.
pub fn factor_pair(
    tree: &DecisionTree,
    path: &Path,
    i: FeatureId,
    instance: &Instance,
) -> FactorPair {
    match path.literal(i) {
        Some(set) => FactorPair {
            fixed: u64::from(set.contains(instance.value(i))),
            universal: set.len() as u64,
        },
        None => FactorPair {
            fixed: 1,
            universal: tree.space().domain_size(i) as u64,
        },
    }
}

/// n_ik: values of feature i consistent with path k once X is fixed to v_X.
pub fn feature_factor(
    tree: &DecisionTree,
    k: usize,
    i: FeatureId,
    instance: &Instance,
    fixed: &FeatureSet,
) -> u64 {
    let pair = factor_pair(tree, tree.path(k), i, instance);
    if fixed.contains(i) {
        pair.fixed
    } else {
        pair.universal
    }
}

/// #(R_k; v, X) = Π_i n_ik.
pub fn path_model_count(
    tree: &DecisionTree,
    k: usize,
    instance: &Instance,
    fixed: &FeatureSet,
) -> BigUint {
    Counter::new(tree, instance).path_count(k, &fixed.mask(tree.space().len()))
}

/// Fraction of feature space covered by path k.
pub fn path_probability(tree: &DecisionTree, k: usize) -> Precision {
    let path = tree.path(k);
    let count = (0..tree.space().len()).fold(BigUint::one(), |acc, i| {
        acc * path
            .literal(i)
            .map_or(tree.space().domain_size(i), |set| set.len())
    });
    Precision::new(count, tree.space().total_points())
}

/// Probability that a uniformly drawn point is classified as `class`.
pub fn class_probability(
    tree: &DecisionTree,
    class: ClassId,
) -> Result<Precision, crate::TreeError> {
    let (p, _) = tree.path_sets(class)?;
    let favorable = p.iter().fold(BigUint::zero(), |acc, &k| {
        acc + path_probability(tree, k).numerator()
    });
    Ok(Precision::new(favorable, tree.space().total_points()))
}

/// Prob(κ(x) = c | x_X = v_X) as an exact ratio of model counts.
pub fn conditional_precision(
    tree: &DecisionTree,
    instance: &Instance,
    fixed: &FeatureSet,
) -> Precision {
    Counter::new(tree, instance).precision(fixed)
}

/// True iff the precision of X reaches δ.
pub fn is_weak_paxp(
    tree: &DecisionTree,
    instance: &Instance,
    fixed: &FeatureSet,
    delta: &Threshold,
) -> bool {
    conditional_precision(tree, instance, fixed).meets(delta)
}

/// Precomputed factor table for one instance, reused across many fixed sets.
#[derive(Clone, Debug)]
pub struct Counter<'t> {
    tree: &'t DecisionTree,
    factors: Vec<Vec<FactorPair>>,
    favorable: Vec<bool>,
}

impl<'t> Counter<'t> {
    pub fn new(tree: &'t DecisionTree, instance: &Instance) -> Self {
        let m = tree.space().len();
        let factors = tree
            .paths()
            .iter()
            .map(|p| (0..m).map(|i| factor_pair(tree, p, i, instance)).collect())
            .collect();
        let favorable = tree
            .paths()
            .iter()
            .map(|p| p.class() == instance.class())
            .collect();
        Counter {
            tree,
            factors,
            favorable,
        }
    }

    pub fn tree(&self) -> &'t DecisionTree {
        self.tree
    }

    pub fn factors(&self, k: usize) -> &[FactorPair] {
        &self.factors[k]
    }

    /// Whether path k predicts the instance's class (k ∈ P).
    pub fn is_favorable(&self, k: usize) -> bool {
        self.favorable[k]
    }

    /// #(R_k; v, X) for X given as a membership mask.
    pub fn path_count(&self, k: usize, fixed: &[bool]) -> BigUint {
        let mut count = BigUint::one();
        for (pair, is_fixed) in self.factors[k].iter().zip(fixed) {
            let n = if *is_fixed {
                pair.fixed
            } else {
                pair.universal
            };
            if n == 0 {
                return BigUint::zero();
            }
            count *= n;
        }
        count
    }

    /// Counts of every path, in tree order.
    pub fn path_counts(&self, fixed: &FeatureSet) -> Vec<BigUint> {
        let mask = fixed.mask(self.tree.space().len());
        (0..self.factors.len())
            .map(|k| self.path_count(k, &mask))
            .collect()
    }

    pub fn precision(&self, fixed: &FeatureSet) -> Precision {
        let mask = fixed.mask(self.tree.space().len());
        let mut favorable = BigUint::zero();
        let mut total = BigUint::zero();
        for k in 0..self.factors.len() {
            let count = self.path_count(k, &mask);
            if self.favorable[k] {
                favorable += &count;
            }
            total += count;
        }
        Precision::new(favorable, total)
    }

    pub fn is_weak_paxp(&self, fixed: &FeatureSet, delta: &Threshold) -> bool {
        self.precision(fixed).meets(delta)
    }
}
