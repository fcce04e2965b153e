//! Decision-tree and feature-space data model.
//!
//! Trees are loaded from a JSON interchange document, validated once, and
//! are immutable afterwards. Every internal node partitions the full domain
//! of the feature it tests, and each point of feature space reaches exactly
//! one leaf. Root-to-leaf paths are extracted at load time together with
//! their literal map (repeated tests of a feature are intersected).

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense, zero-based index of a feature.
pub type FeatureId = usize;
/// Dense, zero-based index of a class label.
pub type ClassId = usize;
/// Dense, zero-based index of a value inside a feature domain.
pub type ValueId = usize;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{reason} at node {node}")]
    Node { node: i64, reason: String },
    #[error("{0}")]
    Invalid(String),
}

impl TreeError {
    fn node(node: i64, reason: impl Into<String>) -> Self {
        TreeError::Node {
            node,
            reason: reason.into(),
        }
    }
}

/// A domain value as written in the interchange document.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Label(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub name: String,
    pub domain: Vec<Value>,
}

/// Ordered list of features with finite domains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureSpace {
    features: Vec<FeatureSpec>,
    lookup: Vec<HashMap<String, ValueId>>,
}

impl FeatureSpace {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self, TreeError> {
        if features.is_empty() {
            return Err(TreeError::Invalid("feature space has no features".into()));
        }
        let mut names = HashSet::new();
        let mut lookup = Vec::with_capacity(features.len());
        for spec in &features {
            if !names.insert(spec.name.as_str()) {
                return Err(TreeError::Invalid(format!(
                    "duplicate feature name {:?}",
                    spec.name
                )));
            }
            if spec.domain.is_empty() {
                return Err(TreeError::Invalid(format!(
                    "empty domain for feature {:?}",
                    spec.name
                )));
            }
            let mut map = HashMap::with_capacity(spec.domain.len());
            for (id, value) in spec.domain.iter().enumerate() {
                if map.insert(value.to_string(), id).is_some() {
                    return Err(TreeError::Invalid(format!(
                        "duplicate value {value} in domain of feature {:?}",
                        spec.name
                    )));
                }
            }
            lookup.push(map);
        }
        Ok(FeatureSpace { features, lookup })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature(&self, i: FeatureId) -> &FeatureSpec {
        &self.features[i]
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn name(&self, i: FeatureId) -> &str {
        &self.features[i].name
    }

    pub fn domain_size(&self, i: FeatureId) -> usize {
        self.features[i].domain.len()
    }

    pub fn index_of(&self, name: &str) -> Option<FeatureId> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Interned id of the value whose textual form is `text`.
    pub fn value_id(&self, i: FeatureId, text: &str) -> Option<ValueId> {
        self.lookup[i].get(text).copied()
    }

    pub fn value(&self, i: FeatureId, id: ValueId) -> &Value {
        &self.features[i].domain[id]
    }

    /// |𝔽|, the number of points in feature space.
    pub fn total_points(&self) -> BigUint {
        self.features
            .iter()
            .fold(BigUint::from(1u32), |acc, f| acc * f.domain.len())
    }
}

/// Subset of a feature domain, stored as a membership mask over value ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueSet {
    bits: Vec<bool>,
}

impl ValueSet {
    pub fn empty(domain_size: usize) -> Self {
        ValueSet {
            bits: vec![false; domain_size],
        }
    }

    pub fn full(domain_size: usize) -> Self {
        ValueSet {
            bits: vec![true; domain_size],
        }
    }

    pub fn from_ids(domain_size: usize, ids: impl IntoIterator<Item = ValueId>) -> Self {
        let mut set = Self::empty(domain_size);
        for id in ids {
            set.bits[id] = true;
        }
        set
    }

    pub fn contains(&self, id: ValueId) -> bool {
        self.bits.get(id).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, id: ValueId) -> bool {
        !std::mem::replace(&mut self.bits[id], true)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn domain_size(&self) -> usize {
        self.bits.len()
    }

    pub fn intersect(&self, other: &ValueSet) -> ValueSet {
        ValueSet {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| *a && *b)
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ValueId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub values: ValueSet,
    pub child: usize,
}

#[derive(Clone, Debug)]
pub enum NodeKind {
    Internal {
        feature: FeatureId,
        edges: Vec<Edge>,
    },
    Leaf {
        class: ClassId,
    },
}

#[derive(Clone, Debug)]
pub struct Node {
    /// Identifier used in the interchange document.
    pub id: i64,
    pub kind: NodeKind,
}

/// A root-to-leaf path with its folded literals.
#[derive(Clone, Debug)]
pub struct Path {
    index: usize,
    nodes: Vec<i64>,
    class: ClassId,
    literals: Vec<Option<ValueSet>>,
}

impl Path {
    /// Position of the path in tree order (depth-first, edges in document order).
    pub fn index(&self) -> usize {
        self.index
    }

    /// Document ids of the nodes from root to leaf.
    pub fn nodes(&self) -> &[i64] {
        &self.nodes
    }

    pub fn class(&self) -> ClassId {
        self.class
    }

    /// Number of internal nodes on the path.
    pub fn depth(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Effective value set of a tested feature, `None` when untested.
    pub fn literal(&self, i: FeatureId) -> Option<&ValueSet> {
        self.literals[i].as_ref()
    }

    pub fn tests(&self, i: FeatureId) -> bool {
        self.literals[i].is_some()
    }

    /// Φ(R): features tested along the path, ascending.
    pub fn tested(&self) -> Vec<FeatureId> {
        (0..self.literals.len())
            .filter(|&i| self.tests(i))
            .collect()
    }

    /// Ψ(R): features not tested along the path, ascending.
    pub fn untested(&self) -> Vec<FeatureId> {
        (0..self.literals.len())
            .filter(|&i| !self.tests(i))
            .collect()
    }

    /// True iff every literal of the path admits the point.
    pub fn admits(&self, point: &[ValueId]) -> bool {
        self.literals
            .iter()
            .zip(point)
            .all(|(lit, v)| lit.as_ref().is_none_or(|set| set.contains(*v)))
    }
}

/// Validated decision tree over a finite feature space.
#[derive(Clone, Debug)]
pub struct DecisionTree {
    space: FeatureSpace,
    classes: Vec<String>,
    nodes: Vec<Node>,
    root: usize,
    paths: Vec<Path>,
}

impl DecisionTree {
    /// Parses and validates an interchange document.
    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let doc: TreeDocument =
            serde_json::from_str(text).map_err(|e| TreeError::Schema(e.to_string()))?;
        Self::from_document(&doc)
    }

    pub fn from_document(doc: &TreeDocument) -> Result<Self, TreeError> {
        build(doc)
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_id(&self, label: &str) -> Option<ClassId> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn class_label(&self, c: ClassId) -> &str {
        &self.classes[c]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[self.root]
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, k: usize) -> &Path {
        &self.paths[k]
    }

    /// Classifies a point by walking the node structure from the root.
    pub fn classify(&self, point: &[ValueId]) -> ClassId {
        let mut at = self.root;
        loop {
            match &self.nodes[at].kind {
                NodeKind::Leaf { class } => return *class,
                NodeKind::Internal { feature, edges } => {
                    let v = point[*feature];
                    at = edges
                        .iter()
                        .find(|e| e.values.contains(v))
                        .expect("edges partition the domain")
                        .child;
                }
            }
        }
    }

    /// The unique path whose literals are satisfied by `point`.
    pub fn consistent_path(&self, point: &[ValueId]) -> &Path {
        assert_eq!(point.len(), self.space.len(), "point arity");
        self.paths
            .iter()
            .find(|p| p.admits(point))
            .expect("paths partition feature space")
    }

    /// Splits the paths into those predicting `class` (P) and the rest (Q).
    pub fn path_sets(&self, class: ClassId) -> Result<(Vec<usize>, Vec<usize>), TreeError> {
        if class >= self.classes.len() {
            return Err(TreeError::Invalid(format!("unknown class id {class}")));
        }
        Ok(self
            .paths
            .iter()
            .map(|p| p.index)
            .partition(|&k| self.paths[k].class == class))
    }

    /// Converts back to an interchange document (domains written as value lists).
    pub fn to_document(&self) -> TreeDocument {
        let features = self
            .space
            .features()
            .iter()
            .map(|f| FeatureDoc {
                name: f.name.clone(),
                domain: ValuesDoc::List(f.domain.clone()),
            })
            .collect();
        let nodes = self
            .nodes
            .iter()
            .map(|n| match &n.kind {
                NodeKind::Leaf { class } => NodeDoc {
                    id: n.id,
                    feature: None,
                    edges: None,
                    leaf: Some(Value::Label(self.classes[*class].clone())),
                },
                NodeKind::Internal { feature, edges } => NodeDoc {
                    id: n.id,
                    feature: Some(FeatureRef::Index(*feature)),
                    edges: Some(
                        edges
                            .iter()
                            .map(|e| EdgeDoc {
                                values: ValuesDoc::List(
                                    e.values
                                        .iter()
                                        .map(|v| self.space.value(*feature, v).clone())
                                        .collect(),
                                ),
                                child: self.nodes[e.child].id,
                            })
                            .collect(),
                    ),
                    leaf: None,
                },
            })
            .collect();
        TreeDocument {
            features,
            classes: self.classes.iter().cloned().map(Value::Label).collect(),
            nodes,
            root: self.nodes[self.root].id,
        }
    }
}

// ---------------------------------------------------------------------------
// Interchange document

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub features: Vec<FeatureDoc>,
    pub classes: Vec<Value>,
    pub nodes: Vec<NodeDoc>,
    pub root: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDoc {
    pub name: String,
    pub domain: ValuesDoc,
}

/// Either an explicit value list or an inclusive integer interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValuesDoc {
    List(Vec<Value>),
    Range { range: [i64; 2] },
}

impl ValuesDoc {
    fn expand(&self) -> Result<Vec<Value>, String> {
        match self {
            ValuesDoc::List(values) => Ok(values.clone()),
            ValuesDoc::Range { range: [lo, hi] } => {
                if lo > hi {
                    return Err(format!("empty range [{lo}, {hi}]"));
                }
                if hi - lo >= 1 << 20 {
                    return Err(format!("range [{lo}, {hi}] is too large"));
                }
                Ok((*lo..=*hi).map(Value::Int).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureRef {
    Index(usize),
    Name(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature: Option<FeatureRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf: Option<Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub values: ValuesDoc,
    pub child: i64,
}

fn build(doc: &TreeDocument) -> Result<DecisionTree, TreeError> {
    let specs = doc
        .features
        .iter()
        .map(|f| {
            let domain = f
                .domain
                .expand()
                .map_err(|e| TreeError::Invalid(format!("feature {:?}: {e}", f.name)))?;
            Ok(FeatureSpec {
                name: f.name.clone(),
                domain,
            })
        })
        .collect::<Result<Vec<_>, TreeError>>()?;
    let space = FeatureSpace::new(specs)?;

    let classes: Vec<String> = doc.classes.iter().map(|c| c.to_string()).collect();
    if classes.len() < 2 {
        return Err(TreeError::Invalid(
            "at least two classes are required".into(),
        ));
    }
    if classes.iter().collect::<HashSet<_>>().len() != classes.len() {
        return Err(TreeError::Invalid("duplicate class label".into()));
    }

    let mut index = HashMap::with_capacity(doc.nodes.len());
    for (pos, node) in doc.nodes.iter().enumerate() {
        if index.insert(node.id, pos).is_some() {
            return Err(TreeError::node(node.id, "duplicate node id"));
        }
    }
    let root = *index
        .get(&doc.root)
        .ok_or_else(|| TreeError::Invalid(format!("root {} is not a node", doc.root)))?;

    let mut nodes = Vec::with_capacity(doc.nodes.len());
    let mut incoming = vec![0usize; doc.nodes.len()];
    for node in &doc.nodes {
        let kind = match (&node.feature, &node.edges, &node.leaf) {
            (None, None, Some(label)) => {
                let label = label.to_string();
                let class = classes
                    .iter()
                    .position(|c| *c == label)
                    .ok_or_else(|| TreeError::node(node.id, format!("unknown class {label:?}")))?;
                NodeKind::Leaf { class }
            }
            (Some(feature), Some(edges), None) => {
                let feature = match feature {
                    FeatureRef::Index(i) if *i < space.len() => *i,
                    FeatureRef::Name(name) => space.index_of(name).ok_or_else(|| {
                        TreeError::node(node.id, format!("unknown feature {name:?}"))
                    })?,
                    FeatureRef::Index(i) => {
                        return Err(TreeError::node(node.id, format!("unknown feature {i}")))
                    }
                };
                let size = space.domain_size(feature);
                if edges.is_empty() {
                    return Err(TreeError::node(node.id, "internal node without edges"));
                }
                let mut covered = ValueSet::empty(size);
                let mut out = Vec::with_capacity(edges.len());
                for edge in edges {
                    let values = edge
                        .values
                        .expand()
                        .map_err(|e| TreeError::node(node.id, e))?;
                    if values.is_empty() {
                        return Err(TreeError::node(node.id, "edge with empty value set"));
                    }
                    let mut set = ValueSet::empty(size);
                    for value in &values {
                        let id = space.value_id(feature, &value.to_string()).ok_or_else(|| {
                            TreeError::node(
                                node.id,
                                format!(
                                    "value {value} is not in the domain of {}",
                                    space.name(feature)
                                ),
                            )
                        })?;
                        set.insert(id);
                        if !covered.insert(id) {
                            return Err(TreeError::node(
                                node.id,
                                format!("edges overlap on value {value}"),
                            ));
                        }
                    }
                    let child = *index.get(&edge.child).ok_or_else(|| {
                        TreeError::node(node.id, format!("unknown child {}", edge.child))
                    })?;
                    incoming[child] += 1;
                    out.push(Edge { values: set, child });
                }
                if covered.len() != size {
                    return Err(TreeError::node(node.id, "edges do not cover domain"));
                }
                NodeKind::Internal {
                    feature,
                    edges: out,
                }
            }
            _ => {
                return Err(TreeError::node(
                    node.id,
                    "node must be either a leaf or a feature test with edges",
                ))
            }
        };
        nodes.push(Node { id: node.id, kind });
    }

    if incoming[root] != 0 {
        return Err(TreeError::node(doc.root, "root has an incoming edge"));
    }
    for (pos, count) in incoming.iter().enumerate() {
        if pos != root && *count != 1 {
            return Err(TreeError::node(
                nodes[pos].id,
                format!("expected exactly one incoming edge, found {count}"),
            ));
        }
    }

    // With in-degrees checked, unreachable nodes are the only way left to
    // smuggle in a cycle.
    let seen = reachable_set(&nodes, root);
    if let Some(stray) = nodes.iter().zip(&seen).find(|(_, s)| !**s) {
        return Err(TreeError::node(
            stray.0.id,
            "node is unreachable from the root",
        ));
    }
    let paths = extract_paths(&space, &nodes, root)?;
    let first = paths[0].class;
    if paths.iter().all(|p| p.class == first) {
        return Err(TreeError::Invalid("classifier is constant".into()));
    }

    Ok(DecisionTree {
        space,
        classes,
        nodes,
        root,
        paths,
    })
}

fn reachable_set(nodes: &[Node], root: usize) -> Vec<bool> {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![root];
    while let Some(at) = stack.pop() {
        if std::mem::replace(&mut seen[at], true) {
            continue;
        }
        if let NodeKind::Internal { edges, .. } = &nodes[at].kind {
            stack.extend(edges.iter().map(|e| e.child));
        }
    }
    seen
}

fn extract_paths(
    space: &FeatureSpace,
    nodes: &[Node],
    root: usize,
) -> Result<Vec<Path>, TreeError> {
    struct Frame {
        node: usize,
        trail: Vec<i64>,
        literals: Vec<Option<ValueSet>>,
    }
    let mut paths = Vec::new();
    let mut stack = vec![Frame {
        node: root,
        trail: vec![nodes[root].id],
        literals: vec![None; space.len()],
    }];
    let mut visited = vec![false; nodes.len()];
    while let Some(frame) = stack.pop() {
        if std::mem::replace(&mut visited[frame.node], true) {
            return Err(TreeError::node(nodes[frame.node].id, "cycle detected"));
        }
        match &nodes[frame.node].kind {
            NodeKind::Leaf { class } => paths.push(Path {
                index: paths.len(),
                nodes: frame.trail,
                class: *class,
                literals: frame.literals,
            }),
            NodeKind::Internal { feature, edges } => {
                // Reversed: the first edge is explored first.
                for edge in edges.iter().rev() {
                    let folded = match &frame.literals[*feature] {
                        Some(prev) => prev.intersect(&edge.values),
                        None => edge.values.clone(),
                    };
                    let child_id = nodes[edge.child].id;
                    if folded.is_empty() {
                        return Err(TreeError::node(
                            child_id,
                            format!(
                                "dead path: empty value set for feature {}",
                                space.name(*feature)
                            ),
                        ));
                    }
                    let mut literals = frame.literals.clone();
                    literals[*feature] = Some(folded);
                    let mut trail = frame.trail.clone();
                    trail.push(child_id);
                    stack.push(Frame {
                        node: edge.child,
                        trail,
                        literals,
                    });
                }
            }
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn replace_node(text: &str, from: &str, to: &str) -> String {
        assert!(text.contains(from), "fixture text changed");
        text.replacen(from, to, 1)
    }

    #[test]
    fn fixture_shape() {
        let tree = fixture::tree();
        assert_eq!(tree.nodes().len(), 9);
        assert_eq!(tree.paths().len(), 5);
        assert_eq!(tree.space().total_points(), BigUint::from(32u32));
    }

    #[test]
    fn consistent_paths_on_fixture() {
        let tree = fixture::tree();
        let point = |v: [usize; 3]| -> Vec<ValueId> {
            v.iter()
                .enumerate()
                .map(|(i, x)| tree.space().value_id(i, &x.to_string()).unwrap())
                .collect()
        };
        let p3 = tree.consistent_path(&point([4, 4, 2]));
        assert_eq!(p3.nodes(), &[1, 3, 7, 9]);
        assert_eq!(tree.class_label(p3.class()), "1");
        assert_eq!(p3.tested(), vec![0, 1, 2]);

        let q1 = tree.consistent_path(&point([1, 1, 1]));
        assert_eq!(q1.nodes(), &[1, 2, 4]);
        assert_eq!(tree.class_label(q1.class()), "0");

        let q2 = tree.consistent_path(&point([4, 4, 1]));
        assert_eq!(q2.nodes(), &[1, 3, 7, 8]);
        assert_eq!(tree.class_label(q2.class()), "0");
    }

    #[test]
    fn path_sets_split_by_class() {
        let tree = fixture::tree();
        let one = tree.class_id("1").unwrap();
        let zero = tree.class_id("0").unwrap();
        let (p, q) = tree.path_sets(one).unwrap();
        let leaves = |ks: &[usize]| -> Vec<i64> {
            ks.iter()
                .map(|&k| *tree.path(k).nodes().last().unwrap())
                .collect()
        };
        assert_eq!(leaves(&p), vec![5, 6, 9]);
        assert_eq!(leaves(&q), vec![4, 8]);
        let (p0, q0) = tree.path_sets(zero).unwrap();
        assert_eq!(p0, q);
        assert_eq!(q0, p);
        assert!(tree.path_sets(2).is_err());
    }

    #[test]
    fn rejects_uncovered_domain() {
        let text = replace_node(
            fixture::JSON,
            r#"{"values": [2, 3, 4], "child": 3}"#,
            r#"{"values": [2, 3], "child": 3}"#,
        );
        let err = DecisionTree::from_json(&text).unwrap_err();
        assert_eq!(err.to_string(), "edges do not cover domain at node 1");
    }

    #[test]
    fn rejects_overlapping_edges() {
        let text = replace_node(
            fixture::JSON,
            r#"{"values": [2, 3, 4], "child": 3}"#,
            r#"{"values": [1, 2, 3, 4], "child": 3}"#,
        );
        let err = DecisionTree::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn rejects_constant_classifier() {
        let text = r#"{"features":[{"name":"f1","domain":[1,2]}],"classes":["0","1"],
                       "nodes":[{"id":1,"leaf":"1"}],"root":1}"#;
        let err = DecisionTree::from_json(text).unwrap_err();
        assert_eq!(err.to_string(), "classifier is constant");

        let text = r#"{"features":[{"name":"f1","domain":[1,2]}],"classes":["0","1"],
                       "nodes":[{"id":1,"feature":0,"edges":[{"values":[1],"child":2},{"values":[2],"child":3}]},
                                {"id":2,"leaf":"1"},{"id":3,"leaf":"1"}],"root":1}"#;
        let err = DecisionTree::from_json(text).unwrap_err();
        assert_eq!(err.to_string(), "classifier is constant");
    }

    #[test]
    fn rejects_schema_errors() {
        let err = DecisionTree::from_json(r#"{"features":[]}"#).unwrap_err();
        assert!(matches!(err, TreeError::Schema(_)));
        let err = DecisionTree::from_json(r#"{"features":3,"classes":[],"nodes":[],"root":1}"#)
            .unwrap_err();
        assert!(matches!(err, TreeError::Schema(_)));
    }

    #[test]
    fn rejects_dead_paths() {
        let text = r#"{"features":[{"name":"a","domain":[1,2,3]},{"name":"b","domain":[0,1]}],
            "classes":["x","y"],
            "nodes":[
              {"id":1,"feature":0,"edges":[{"values":[1],"child":2},{"values":[2,3],"child":3}]},
              {"id":2,"feature":0,"edges":[{"values":[1,2],"child":4},{"values":[3],"child":5}]},
              {"id":3,"leaf":"x"},{"id":4,"leaf":"y"},{"id":5,"leaf":"x"}],
            "root":1}"#;
        let err = DecisionTree::from_json(text).unwrap_err();
        assert!(err.to_string().starts_with("dead path"), "{err}");
        assert!(err.to_string().ends_with("at node 5"), "{err}");
    }

    #[test]
    fn rejects_bad_structure() {
        // Child shared by two parents.
        let text = r#"{"features":[{"name":"a","domain":[1,2]}],"classes":["x","y"],
            "nodes":[{"id":1,"feature":0,"edges":[{"values":[1],"child":2},{"values":[2],"child":2}]},
                     {"id":2,"leaf":"x"},{"id":3,"leaf":"y"}],"root":1}"#;
        let err = DecisionTree::from_json(text).unwrap_err();
        assert!(err.to_string().contains("incoming edge"), "{err}");

        // Root with a parent.
        let text = r#"{"features":[{"name":"a","domain":[1,2]}],"classes":["x","y"],
            "nodes":[{"id":1,"feature":0,"edges":[{"values":[1],"child":2},{"values":[2],"child":1}]},
                     {"id":2,"leaf":"x"}],"root":1}"#;
        let err = DecisionTree::from_json(text).unwrap_err();
        assert!(err.to_string().contains("root"), "{err}");

        // Unknown class on a leaf.
        let text = fixture::JSON.replacen(r#""leaf": "0""#, r#""leaf": "2""#, 1);
        let err = DecisionTree::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("unknown class"), "{err}");
    }

    #[test]
    fn repeated_tests_fold_by_intersection() {
        // a ∈ {1,2} then a ∈ {2,3} is the same as a single test a ∈ {2}.
        let text = r#"{"features":[{"name":"a","domain":{"range":[1,4]}}],"classes":["x","y"],
            "nodes":[
              {"id":1,"feature":"a","edges":[{"values":[1,2],"child":2},{"values":{"range":[3,4]},"child":3}]},
              {"id":2,"feature":0,"edges":[{"values":[2,3],"child":4},{"values":[1,4],"child":5}]},
              {"id":3,"leaf":"x"},{"id":4,"leaf":"y"},{"id":5,"leaf":"x"}],
            "root":1}"#;
        let tree = DecisionTree::from_json(text).unwrap();
        let path = tree
            .paths()
            .iter()
            .find(|p| p.nodes() == [1, 2, 4])
            .unwrap();
        let lit: Vec<_> = path.literal(0).unwrap().iter().collect();
        assert_eq!(lit, vec![1]);
        for v in 0..4 {
            assert_eq!(path.admits(&[v]), v == 1);
        }
    }

    #[test]
    fn document_round_trip() {
        let tree = fixture::tree();
        let doc = tree.to_document();
        let text = serde_json::to_string(&doc).unwrap();
        let again = DecisionTree::from_json(&text).unwrap();
        assert_eq!(again.paths().len(), tree.paths().len());
        for (a, b) in tree.paths().iter().zip(again.paths()) {
            assert_eq!(a.nodes(), b.nodes());
            assert_eq!(a.class(), b.class());
        }
    }
}
