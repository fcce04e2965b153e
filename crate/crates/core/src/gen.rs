//! Random valid decision trees for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tree::{
    DecisionTree, EdgeDoc, FeatureDoc, FeatureRef, NodeDoc, TreeDocument, Value, ValuesDoc,
};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomTreeConfig {
    pub features: usize,
    pub min_domain: usize,
    pub max_domain: usize,
    pub classes: usize,
    pub max_depth: usize,
    /// Probability of splitting a node during the initial recursive growth.
    pub split_probability: f64,
    /// Keep splitting random shallow leaves until this many internal nodes exist.
    pub min_internal: usize,
    /// Grow one chain of this depth before anything else.
    pub chain_depth: usize,
    pub max_branching: usize,
}

impl RandomTreeConfig {
    /// ≤ 6 features, domains of 2 to 4 values, depth ≤ 6.
    pub fn small() -> Self {
        RandomTreeConfig {
            features: 6,
            min_domain: 2,
            max_domain: 4,
            classes: 2,
            max_depth: 6,
            split_probability: 0.7,
            min_internal: 1,
            chain_depth: 0,
            max_branching: 3,
        }
    }

    /// Depth-16 trees over 20+ features with a few hundred nodes.
    pub fn large() -> Self {
        RandomTreeConfig {
            features: 24,
            min_domain: 2,
            max_domain: 6,
            classes: 2,
            max_depth: 16,
            split_probability: 0.0,
            min_internal: 130,
            chain_depth: 16,
            max_branching: 2,
        }
    }
}

struct Grow {
    feature: Option<usize>,
    edges: Vec<(Vec<usize>, usize)>,
    depth: usize,
    /// Effective value set per feature on the way to this node.
    allowed: Vec<Vec<usize>>,
}

/// Draws a tree from `config` with a seeded ChaCha generator.
pub fn random_tree(config: &RandomTreeConfig, seed: u64) -> DecisionTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree_with(config, &mut rng)
}

pub fn random_tree_with(config: &RandomTreeConfig, rng: &mut impl Rng) -> DecisionTree {
    assert!(config.features >= 1 && config.min_domain >= 2 && config.classes >= 2);
    let sizes: Vec<usize> = (0..config.features)
        .map(|_| rng.gen_range(config.min_domain..=config.max_domain))
        .collect();
    let mut nodes = vec![Grow {
        feature: None,
        edges: Vec::new(),
        depth: 0,
        allowed: sizes.iter().map(|&s| (0..s).collect()).collect(),
    }];

    // The root always splits.
    split(&mut nodes, 0, &sizes, config, rng);

    let mut tip = nodes[0].edges[0].1;
    while nodes[tip].depth < config.chain_depth.min(config.max_depth) {
        if !split(&mut nodes, tip, &sizes, config, rng) {
            break;
        }
        let edges = &nodes[tip].edges;
        tip = edges[rng.gen_range(0..edges.len())].1;
    }

    let mut frontier: Vec<usize> = (0..nodes.len())
        .filter(|&n| nodes[n].feature.is_none())
        .collect();
    while let Some(n) = frontier.pop() {
        if nodes[n].depth < config.max_depth
            && rng.gen_bool(config.split_probability)
            && split(&mut nodes, n, &sizes, config, rng)
        {
            frontier.extend(nodes[n].edges.iter().map(|e| e.1));
        }
    }

    let internal = |nodes: &[Grow]| nodes.iter().filter(|n| n.feature.is_some()).count();
    let mut stuck = 0;
    while internal(&nodes) < config.min_internal && stuck < 10_000 {
        let leaves: Vec<usize> = (0..nodes.len())
            .filter(|&n| nodes[n].feature.is_none() && nodes[n].depth < config.max_depth)
            .collect();
        let Some(&n) = leaves.choose(rng) else { break };
        if !split(&mut nodes, n, &sizes, config, rng) {
            stuck += 1;
        }
    }

    let leaves: Vec<usize> = (0..nodes.len())
        .filter(|&n| nodes[n].feature.is_none())
        .collect();
    let mut classes: Vec<usize> = leaves
        .iter()
        .map(|_| rng.gen_range(0..config.classes))
        .collect();
    if classes.iter().all(|c| *c == classes[0]) {
        classes[0] = (classes[0] + 1) % config.classes;
    }

    let doc = TreeDocument {
        features: sizes
            .iter()
            .enumerate()
            .map(|(i, &s)| FeatureDoc {
                name: format!("f{}", i + 1),
                domain: ValuesDoc::List((1..=s as i64).map(Value::Int).collect()),
            })
            .collect(),
        classes: (0..config.classes)
            .map(|c| Value::Label(c.to_string()))
            .collect(),
        nodes: nodes
            .iter()
            .enumerate()
            .map(|(id, n)| match n.feature {
                Some(f) => NodeDoc {
                    id: id as i64,
                    feature: Some(FeatureRef::Index(f)),
                    edges: Some(
                        n.edges
                            .iter()
                            .map(|(values, child)| EdgeDoc {
                                values: ValuesDoc::List(
                                    values.iter().map(|v| Value::Int(*v as i64 + 1)).collect(),
                                ),
                                child: *child as i64,
                            })
                            .collect(),
                    ),
                    leaf: None,
                },
                None => {
                    let pos = leaves.iter().position(|l| *l == id).unwrap();
                    NodeDoc {
                        id: id as i64,
                        feature: None,
                        edges: None,
                        leaf: Some(Value::Label(classes[pos].to_string())),
                    }
                }
            })
            .collect(),
        root: 0,
    };
    DecisionTree::from_document(&doc).expect("generated trees are valid")
}

/// Turns leaf `n` into a test on a random feature that still has ≥ 2
/// admissible values. Returns false when no such feature exists.
fn split(
    nodes: &mut Vec<Grow>,
    n: usize,
    sizes: &[usize],
    config: &RandomTreeConfig,
    rng: &mut impl Rng,
) -> bool {
    let candidates: Vec<usize> = (0..sizes.len())
        .filter(|&i| nodes[n].allowed[i].len() >= 2)
        .collect();
    let Some(&feature) = candidates.choose(rng) else {
        return false;
    };
    let mut admissible = nodes[n].allowed[feature].clone();
    admissible.shuffle(rng);
    let parts = rng.gen_range(2..=config.max_branching.max(2).min(admissible.len()));
    let mut cuts: Vec<usize> = (1..admissible.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts[..parts - 1].to_vec();
    cuts.sort_unstable();
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(parts);
    let mut start = 0;
    for c in cuts.into_iter().chain(std::iter::once(admissible.len())) {
        let mut g = admissible[start..c].to_vec();
        g.sort_unstable();
        groups.push(g);
        start = c;
    }
    // Values already excluded on this path go to arbitrary edges.
    let mut edge_values = groups.clone();
    for v in 0..sizes[feature] {
        if !nodes[n].allowed[feature].contains(&v) {
            let g = rng.gen_range(0..edge_values.len());
            edge_values[g].push(v);
        }
    }
    let depth = nodes[n].depth + 1;
    let mut edges = Vec::with_capacity(parts);
    for (group, mut values) in groups.into_iter().zip(edge_values) {
        values.sort_unstable();
        let mut allowed = nodes[n].allowed.clone();
        allowed[feature] = group;
        nodes.push(Grow {
            feature: None,
            edges: Vec::new(),
            depth,
            allowed,
        });
        edges.push((values, nodes.len() - 1));
    }
    nodes[n].feature = Some(feature);
    nodes[n].edges = edges;
    true
}
