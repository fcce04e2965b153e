//! Canonical fixture tree shared by the tests.
//!
//! Three features with domains {1,2,3,4}, {1,2,3,4} and {1,2}; two classes.
//! The instance of interest is v = (4,4,2), predicted class 1.

use crate::instance::Instance;
use crate::tree::DecisionTree;

pub const JSON: &str = r#"{
  "features": [
    {"name": "f1", "domain": [1, 2, 3, 4]},
    {"name": "f2", "domain": [1, 2, 3, 4]},
    {"name": "f3", "domain": [1, 2]}
  ],
  "classes": ["0", "1"],
  "nodes": [
    {"id": 1, "feature": 0, "edges": [{"values": [1], "child": 2}, {"values": [2, 3, 4], "child": 3}]},
    {"id": 2, "feature": 1, "edges": [{"values": [1], "child": 4}, {"values": [2, 3, 4], "child": 5}]},
    {"id": 3, "feature": 1, "edges": [{"values": [1], "child": 6}, {"values": [2, 3, 4], "child": 7}]},
    {"id": 4, "leaf": "0"},
    {"id": 5, "leaf": "1"},
    {"id": 6, "leaf": "1"},
    {"id": 7, "feature": 2, "edges": [{"values": [1], "child": 8}, {"values": [2], "child": 9}]},
    {"id": 8, "leaf": "0"},
    {"id": 9, "leaf": "1"}
  ],
  "root": 1
}
"#;

pub fn tree() -> DecisionTree {
    DecisionTree::from_json(JSON).expect("fixture is valid")
}

/// Instance from comma-separated values, e.g. `"4,4,2"`.
pub fn instance(tree: &DecisionTree, row: &str) -> Instance {
    Instance::parse(tree, row).expect("fixture instance")
}
