//! Ground truth by exhaustive enumeration of feature space.
//!
//! Nothing here touches the path literals or the counting code: points are
//! generated with an odometer and classified by walking the tree.

use num_bigint::BigUint;
use thiserror::Error;

use crate::instance::Instance;
use crate::precision::{Precision, Threshold};
use crate::set::FeatureSet;
use crate::tree::{ClassId, DecisionTree, ValueId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BudgetError {
    #[error("feature space has {points} points, over the enumeration budget of {budget}")]
    Points { points: BigUint, budget: u64 },
    #[error("{0} candidate features exceed the subset enumeration limit of 20")]
    Subsets(usize),
}

/// Upper bound on the number of points the oracle agrees to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_points: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_points: 1_000_000,
        }
    }
}

impl EnumerationBudget {
    pub fn new(max_points: u64) -> Self {
        EnumerationBudget { max_points }
    }

    pub fn check(&self, tree: &DecisionTree) -> Result<(), BudgetError> {
        let points = tree.space().total_points();
        if points > BigUint::from(self.max_points) {
            return Err(BudgetError::Points {
                points,
                budget: self.max_points,
            });
        }
        Ok(())
    }
}

/// Prob(κ(x) = c | x_X = v_X) by enumerating every completion of v_X.
pub fn bf_conditional_precision(
    tree: &DecisionTree,
    instance: &Instance,
    fixed: &FeatureSet,
    budget: EnumerationBudget,
) -> Result<Precision, BudgetError> {
    budget.check(tree)?;
    let m = tree.space().len();
    let free: Vec<usize> = (0..m).filter(|i| !fixed.contains(*i)).collect();
    let mut point = instance.values().to_vec();
    for &i in &free {
        point[i] = 0;
    }
    let target = tree.classify(instance.values());
    let mut favorable = 0u64;
    let mut total = 0u64;
    loop {
        total += 1;
        if tree.classify(&point) == target {
            favorable += 1;
        }
        // Odometer step, last free feature fastest.
        let mut carry = true;
        for &i in free.iter().rev() {
            point[i] += 1;
            if point[i] < tree.space().domain_size(i) {
                carry = false;
                break;
            }
            point[i] = 0;
        }
        if carry {
            break;
        }
    }
    Ok(Precision::new(favorable.into(), total.into()))
}

/// Every subset of the consistent path's features, with its precision.
fn all_subsets(
    tree: &DecisionTree,
    instance: &Instance,
    budget: EnumerationBudget,
) -> Result<Vec<(FeatureSet, Precision)>, BudgetError> {
    budget.check(tree)?;
    let ground = instance.path(tree).tested();
    if ground.len() > 20 {
        return Err(BudgetError::Subsets(ground.len()));
    }
    (0u32..1 << ground.len())
        .map(|bits| {
            let set: FeatureSet = ground
                .iter()
                .enumerate()
                .filter(|(n, _)| bits & (1 << n) != 0)
                .map(|(_, i)| *i)
                .collect();
            let p = bf_conditional_precision(tree, instance, &set, budget)?;
            Ok((set, p))
        })
        .collect()
}

/// Subsets of the consistent path's features reaching δ (weak PAXps).
pub fn bf_weak_paxps(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    budget: EnumerationBudget,
) -> Result<Vec<FeatureSet>, BudgetError> {
    let mut sets: Vec<FeatureSet> = all_subsets(tree, instance, budget)?
        .into_iter()
        .filter(|(_, p)| p.meets(delta))
        .map(|(s, _)| s)
        .collect();
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(sets)
}

/// All subset-minimal weak PAXps, sorted by (size, lexicographic).
pub fn bf_all_paxps(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    budget: EnumerationBudget,
) -> Result<Vec<FeatureSet>, BudgetError> {
    let weak = bf_weak_paxps(tree, instance, delta, budget)?;
    Ok(weak
        .iter()
        .filter(|s| !weak.iter().any(|t| t.len() < s.len() && t.is_subset(s)))
        .cloned()
        .collect())
}

/// Smallest size of a weak PAXp over the consistent path's features.
pub fn bf_min_size(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    budget: EnumerationBudget,
) -> Result<usize, BudgetError> {
    let weak = bf_weak_paxps(tree, instance, delta, budget)?;
    Ok(weak
        .first()
        .map(FeatureSet::len)
        .expect("the full path always qualifies"))
}

/// True iff no proper subset of `fixed` reaches δ, by direct enumeration.
pub fn bf_is_subset_minimal(
    tree: &DecisionTree,
    instance: &Instance,
    fixed: &FeatureSet,
    delta: &Threshold,
    budget: EnumerationBudget,
) -> Result<bool, BudgetError> {
    let ids = fixed.as_slice();
    if ids.len() > 20 {
        return Err(BudgetError::Subsets(ids.len()));
    }
    let full = (1u32 << ids.len()) - 1;
    for bits in 0..full {
        let subset: FeatureSet = ids
            .iter()
            .enumerate()
            .filter(|(n, _)| bits & (1 << n) != 0)
            .map(|(_, i)| *i)
            .collect();
        if bf_conditional_precision(tree, instance, &subset, budget)?.meets(delta) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every point of feature space with the class the tree assigns it.
#[derive(Clone, Debug)]
pub struct LabeledSpace {
    points: Vec<Vec<ValueId>>,
    classes: Vec<ClassId>,
}

impl LabeledSpace {
    pub fn new(tree: &DecisionTree, budget: EnumerationBudget) -> Result<Self, BudgetError> {
        budget.check(tree)?;
        let points: Vec<Vec<ValueId>> = crate::instance::all_points(tree).collect();
        let classes = points.iter().map(|p| tree.classify(p)).collect();
        Ok(LabeledSpace { points, classes })
    }

    pub fn points(&self) -> &[Vec<ValueId>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Precision of every subset of features for one instance, from a single
/// sweep over feature space.
///
/// Each point is classified and filed under the set of features on which it
/// agrees with the instance; the points compatible with fixing X are exactly
/// those filed under a superset of X, so a superset-sum over the masks gives
/// every conditional precision at once.
#[derive(Clone, Debug)]
pub struct PrecisionTable {
    features: usize,
    favorable: Vec<u64>,
    total: Vec<u64>,
}

impl PrecisionTable {
    pub fn new(
        tree: &DecisionTree,
        instance: &Instance,
        budget: EnumerationBudget,
    ) -> Result<Self, BudgetError> {
        if tree.space().len() > 20 {
            return Err(BudgetError::Subsets(tree.space().len()));
        }
        Ok(Self::from_space(
            tree,
            &LabeledSpace::new(tree, budget)?,
            instance,
        ))
    }

    /// Reuses a space already classified point by point.
    pub fn from_space(tree: &DecisionTree, space: &LabeledSpace, instance: &Instance) -> Self {
        let m = tree.space().len();
        assert!(m <= 20, "too many features for a mask table");
        let target = tree.classify(instance.values());
        let mut favorable = vec![0u64; 1 << m];
        let mut total = vec![0u64; 1 << m];
        for (point, &class) in space.points.iter().zip(&space.classes) {
            let mask = (0..m)
                .filter(|&i| point[i] == instance.value(i))
                .fold(0usize, |acc, i| acc | 1 << i);
            total[mask] += 1;
            if class == target {
                favorable[mask] += 1;
            }
        }
        for i in 0..m {
            for mask in 0..1usize << m {
                if mask & (1 << i) == 0 {
                    favorable[mask] += favorable[mask | 1 << i];
                    total[mask] += total[mask | 1 << i];
                }
            }
        }
        PrecisionTable {
            features: m,
            favorable,
            total,
        }
    }

    fn mask(&self, fixed: &FeatureSet) -> usize {
        fixed.iter().fold(0usize, |acc, i| {
            assert!(i < self.features, "feature {i} out of range");
            acc | 1 << i
        })
    }

    pub fn precision(&self, fixed: &FeatureSet) -> Precision {
        let mask = self.mask(fixed);
        Precision::new(self.favorable[mask].into(), self.total[mask].into())
    }

    /// Smallest weak PAXp size among subsets of `ground`.
    pub fn min_size(&self, ground: &FeatureSet, delta: &Threshold) -> usize {
        let ids = ground.as_slice();
        (0usize..1 << ids.len())
            .filter_map(|bits| {
                let set: FeatureSet = ids
                    .iter()
                    .enumerate()
                    .filter(|(n, _)| bits & (1 << n) != 0)
                    .map(|(_, i)| *i)
                    .collect();
                self.precision(&set).meets(delta).then_some(set.len())
            })
            .min()
            .expect("the full ground set qualifies when it covers the path")
    }
}

/// Sum over all points, used to sanity-check path counts: Π_{i∉X} |D_i|.
pub fn bf_completions(tree: &DecisionTree, fixed: &FeatureSet) -> BigUint {
    (0..tree.space().len())
        .filter(|i| !fixed.contains(*i))
        .fold(BigUint::from(1u32), |acc, i| {
            acc * tree.space().domain_size(i)
        })
}
