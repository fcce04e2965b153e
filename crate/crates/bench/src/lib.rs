//! Shared inputs for the criterion benchmarks.

use paxp_core::gen::{random_tree, RandomTreeConfig};
use paxp_core::instance::all_points;
use paxp_core::{DecisionTree, Instance};

/// A large random tree and a handful of instances drawn from deep paths.
pub fn large_workload(seed: u64, instances: usize) -> (DecisionTree, Vec<Instance>) {
    let tree = random_tree(&RandomTreeConfig::large(), seed);
    let mut paths: Vec<_> = tree.paths().iter().collect();
    paths.sort_by_key(|p| std::cmp::Reverse(p.depth()));
    let picked = paths
        .iter()
        .take(instances)
        .map(|p| Instance::new(&tree, witness(&tree, p)))
        .collect();
    (tree, picked)
}

/// A small random tree with every point as an instance.
pub fn small_workload(seed: u64) -> (DecisionTree, Vec<Instance>) {
    let tree = random_tree(&RandomTreeConfig::small(), seed);
    let points = all_points(&tree).map(|p| Instance::new(&tree, p)).collect();
    (tree, points)
}

/// The smallest point admitted by `path`.
pub fn witness(tree: &DecisionTree, path: &paxp_core::Path) -> Vec<usize> {
    (0..tree.space().len())
        .map(|i| match path.literal(i) {
            Some(set) => set.iter().next().expect("live path"),
            None => 0,
        })
        .collect()
}
