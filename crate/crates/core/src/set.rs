use std::fmt;

use serde::Serialize;

use crate::tree::{DecisionTree, FeatureId};

/// A set of features, kept sorted and duplicate-free.
///
/// Used both for the fixed set X of an explanation and for ground sets
/// searched by the oracles. Ordering is lexicographic on the sorted ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FeatureSet(Vec<FeatureId>);

impl FeatureSet {
    pub fn new(ids: impl IntoIterator<Item = FeatureId>) -> Self {
        let mut v: Vec<_> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        FeatureSet(v)
    }

    pub fn empty() -> Self {
        FeatureSet(Vec::new())
    }

    /// Every feature of the tree.
    pub fn all(tree: &DecisionTree) -> Self {
        FeatureSet((0..tree.space().len()).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: FeatureId) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = FeatureId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[FeatureId] {
        &self.0
    }

    pub fn without(&self, i: FeatureId) -> Self {
        FeatureSet(self.0.iter().copied().filter(|&j| j != i).collect())
    }

    pub fn with(&self, i: FeatureId) -> Self {
        let mut next = self.0.clone();
        if let Err(pos) = next.binary_search(&i) {
            next.insert(pos, i);
        }
        FeatureSet(next)
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.0.iter().all(|i| other.contains(*i))
    }

    /// Membership mask over `m` features.
    pub fn mask(&self, m: usize) -> Vec<bool> {
        let mut mask = vec![false; m];
        for &i in &self.0 {
            mask[i] = true;
        }
        mask
    }

    /// Feature names, in id order.
    pub fn names(&self, tree: &DecisionTree) -> Vec<String> {
        self.0
            .iter()
            .map(|&i| tree.space().name(i).to_string())
            .collect()
    }
}

impl FromIterator<FeatureId> for FeatureSet {
    fn from_iter<T: IntoIterator<Item = FeatureId>>(iter: T) -> Self {
        FeatureSet::new(iter)
    }
}

/// Renders one-based ids, `{1,3}`.
impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, i) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}
