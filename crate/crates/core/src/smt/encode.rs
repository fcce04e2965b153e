//! Builders for the multiplication-based and addition-based encodings.
//!
//! Solver variables are one boolean `u_j` per feature (true = universal).
//! All per-feature counts are integer constants computed here, and δ = p/q
//! enters only through cross-multiplication.

use crate::count::factor_pair;
use crate::instance::Instance;
use crate::precision::Threshold;
use crate::set::FeatureSet;
use crate::tree::DecisionTree;

use super::problem::{universal_var, Definition, Encoding, Problem, Sort, Term};

/// Extra constraints layered on top of the counting model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncodeOptions {
    /// At most this many fixed features.
    pub bound: Option<usize>,
    /// Subset-minimality query for this fixed set: features outside it stay
    /// universal and at least one of its features must become universal.
    pub release: Option<FeatureSet>,
}

impl EncodeOptions {
    pub fn bounded(k: usize) -> Self {
        EncodeOptions {
            bound: Some(k),
            release: None,
        }
    }

    pub fn release(fixed: FeatureSet) -> Self {
        EncodeOptions {
            bound: None,
            release: Some(fixed),
        }
    }
}

pub fn encode(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    encoding: Encoding,
    options: &EncodeOptions,
) -> Problem {
    let m = tree.space().len();
    let mut definitions = Vec::new();
    match encoding {
        Encoding::Mult => mult_counts(tree, instance, &mut definitions),
        Encoding::Add => add_counts(tree, instance, &mut definitions),
    }
    let mut problem = Problem {
        encoding,
        features: m,
        paths: tree.paths().len(),
        definitions,
        assertions: Vec::new(),
    };

    let universal: Vec<usize> = match &options.release {
        Some(fixed) => (0..m).filter(|j| !fixed.contains(*j)).collect(),
        None => instance.path(tree).untested(),
    };
    for j in universal {
        problem.assertions.push(Term::sym(universal_var(j)));
    }

    let (favorable, other): (Vec<usize>, Vec<usize>) =
        (0..tree.paths().len()).partition(|&k| tree.path(k).class() == instance.class());
    let sum_of = |ks: &[usize]| {
        Term::sum(
            ks.iter()
                .map(|&k| Term::sym(problem.path_count_name(k)))
                .collect(),
        )
    };
    let (sp, sq) = (sum_of(&favorable), sum_of(&other));
    let p = Term::Int(delta.numerator().clone());
    let q = Term::Int(delta.denominator().clone());
    let threshold = Term::ge(
        Term::product(vec![q, sp.clone()]),
        Term::sum(vec![
            Term::product(vec![p.clone(), sp]),
            Term::product(vec![p, sq]),
        ]),
    );
    problem.assertions.push(threshold);

    if let Some(k) = options.bound {
        let fixed_count = Term::sum(
            (0..m)
                .map(|j| {
                    Term::ite(
                        Term::sym(universal_var(j)),
                        Term::int(0u32),
                        Term::int(1u32),
                    )
                })
                .collect(),
        );
        problem
            .assertions
            .push(Term::le(fixed_count, Term::int(k as u64)));
    }
    if let Some(fixed) = &options.release {
        problem.assertions.push(Term::any(
            fixed.iter().map(|j| Term::sym(universal_var(j))).collect(),
        ));
    }
    problem
}

/// n_j_k = ite(u_j, universal count, fixed count); eta_k = Π_j n_j_k.
fn mult_counts(tree: &DecisionTree, instance: &Instance, defs: &mut Vec<Definition>) {
    let m = tree.space().len();
    for (k, path) in tree.paths().iter().enumerate() {
        let mut factors = Vec::with_capacity(m);
        for j in 0..m {
            let pair = factor_pair(tree, path, j, instance);
            let name = format!("n_{}_{}", j + 1, k + 1);
            defs.push(Definition {
                name: name.clone(),
                sort: Sort::Int,
                body: Term::ite(
                    Term::sym(universal_var(j)),
                    Term::int(pair.universal),
                    Term::int(pair.fixed),
                ),
            });
            factors.push(Term::sym(name));
        }
        defs.push(Definition {
            name: format!("eta_{}", k + 1),
            sort: Sort::Int,
            body: Term::product(factors),
        });
    }
}

/// eta_j_k accumulates, value by value over D_j, the models of path k
/// restricted to features 1..j; eta_0_k = 1 and s_j_0_k = 0.
fn add_counts(tree: &DecisionTree, instance: &Instance, defs: &mut Vec<Definition>) {
    let m = tree.space().len();
    for (k, path) in tree.paths().iter().enumerate() {
        let k1 = k + 1;
        defs.push(Definition {
            name: format!("eta_0_{k1}"),
            sort: Sort::Int,
            body: Term::int(1u32),
        });
        for j in 0..m {
            let j1 = j + 1;
            let prev_eta = Term::sym(format!("eta_{}_{k1}", j));
            let optional = Term::ite(
                Term::sym(universal_var(j)),
                prev_eta.clone(),
                Term::int(0u32),
            );
            defs.push(Definition {
                name: format!("s_{j1}_0_{k1}"),
                sort: Sort::Int,
                body: Term::int(0u32),
            });
            let r = tree.space().domain_size(j);
            for l in 0..r {
                let prev = Term::sym(format!("s_{j1}_{l}_{k1}"));
                let matches_v = l == instance.value(j);
                let body = match path.literal(j) {
                    Some(set) if !set.contains(l) => prev,
                    _ if matches_v => Term::sum(vec![prev, prev_eta.clone()]),
                    _ => Term::sum(vec![prev, optional.clone()]),
                };
                defs.push(Definition {
                    name: format!("s_{j1}_{}_{k1}", l + 1),
                    sort: Sort::Int,
                    body,
                });
            }
            defs.push(Definition {
                name: format!("eta_{j1}_{k1}"),
                sort: Sort::Int,
                body: Term::sym(format!("s_{j1}_{r}_{k1}")),
            });
        }
    }
}

/// SMT-LIB2 text of the multiplication-based encoding with |X| ≤ k.
pub fn emit_mult_encoding(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    k: usize,
) -> String {
    encode(
        tree,
        instance,
        delta,
        Encoding::Mult,
        &EncodeOptions::bounded(k),
    )
    .to_smtlib()
}

/// SMT-LIB2 text of the addition-based encoding with |X| ≤ k.
pub fn emit_add_encoding(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    k: usize,
) -> String {
    encode(
        tree,
        instance,
        delta,
        Encoding::Add,
        &EncodeOptions::bounded(k),
    )
    .to_smtlib()
}
