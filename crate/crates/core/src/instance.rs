use thiserror::Error;

use crate::tree::{ClassId, DecisionTree, FeatureId, Path, ValueId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: expected {expected} values, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: value {value:?} is not in the domain of {feature}")]
    Domain {
        line: usize,
        feature: String,
        value: String,
    },
    #[error("line {line}: unknown class {class:?}")]
    UnknownClass { line: usize, class: String },
    #[error("line {line}: expected class {expected:?} but the tree predicts {predicted:?}")]
    ClassMismatch {
        line: usize,
        expected: String,
        predicted: String,
    },
    #[error("no instances given")]
    Empty,
}

/// A point of feature space together with the class the tree assigns to it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    values: Vec<ValueId>,
    class: ClassId,
    path: usize,
}

impl Instance {
    /// Builds an instance from interned value ids. Panics on out-of-domain ids.
    pub fn new(tree: &DecisionTree, values: Vec<ValueId>) -> Self {
        assert_eq!(values.len(), tree.space().len(), "instance arity");
        for (i, v) in values.iter().enumerate() {
            assert!(*v < tree.space().domain_size(i), "value out of domain");
        }
        let path = tree.consistent_path(&values);
        Instance {
            class: path.class(),
            path: path.index(),
            values,
        }
    }

    /// Parses one comma-separated row, with an optional trailing expected class.
    pub fn parse(tree: &DecisionTree, row: &str) -> Result<Self, InstanceError> {
        Self::parse_line(tree, row, 1)
    }

    fn parse_line(tree: &DecisionTree, row: &str, line: usize) -> Result<Self, InstanceError> {
        let space = tree.space();
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        let m = space.len();
        if fields.len() != m && fields.len() != m + 1 {
            return Err(InstanceError::Arity {
                line,
                expected: m,
                found: fields.len(),
            });
        }
        let values = fields[..m]
            .iter()
            .enumerate()
            .map(|(i, text)| {
                space
                    .value_id(i, text)
                    .ok_or_else(|| InstanceError::Domain {
                        line,
                        feature: space.name(i).to_string(),
                        value: text.to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let instance = Instance::new(tree, values);
        if let Some(expected) = fields.get(m) {
            let class = tree
                .class_id(expected)
                .ok_or_else(|| InstanceError::UnknownClass {
                    line,
                    class: expected.to_string(),
                })?;
            if class != instance.class {
                return Err(InstanceError::ClassMismatch {
                    line,
                    expected: expected.to_string(),
                    predicted: tree.class_label(instance.class).to_string(),
                });
            }
        }
        Ok(instance)
    }

    pub fn values(&self) -> &[ValueId] {
        &self.values
    }

    pub fn value(&self, i: FeatureId) -> ValueId {
        self.values[i]
    }

    pub fn class(&self) -> ClassId {
        self.class
    }

    pub fn path<'t>(&self, tree: &'t DecisionTree) -> &'t Path {
        tree.path(self.path)
    }

    pub fn path_index(&self) -> usize {
        self.path
    }

    /// Values rendered as in the interchange document.
    pub fn labels(&self, tree: &DecisionTree) -> Vec<String> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| tree.space().value(i, *v).to_string())
            .collect()
    }
}

/// Parses an instances file: one row per line, `#` comments and blank lines skipped.
pub fn parse_instances(tree: &DecisionTree, text: &str) -> Result<Vec<Instance>, InstanceError> {
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| Instance::parse_line(tree, l, n + 1))
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(InstanceError::Empty);
    }
    Ok(rows)
}

/// Every point of feature space in row-major order (last feature fastest).
pub fn all_points(tree: &DecisionTree) -> impl Iterator<Item = Vec<ValueId>> + '_ {
    let sizes: Vec<usize> = (0..tree.space().len())
        .map(|i| tree.space().domain_size(i))
        .collect();
    let mut next = Some(vec![0; sizes.len()]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut odo = current.clone();
        for i in (0..sizes.len()).rev() {
            odo[i] += 1;
            if odo[i] < sizes[i] {
                next = Some(odo);
                break;
            }
            odo[i] = 0;
        }
        Some(current)
    })
}
