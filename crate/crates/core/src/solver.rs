//! Minimum-size PAXps through size-bounded decision queries.
//!
//! The query "is there a fixed set X ⊆ Φ(consistent path) with |X| ≤ k whose
//! precision reaches δ?" is monotone in k, and binary search over k finds the
//! minimum size. The oracle is either the built-in exhaustive search or an
//! external SMT solver fed one of the encodings. Every witness is re-checked
//! with exact counting before it is returned.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::count::factor_pair;
use crate::explain::{Explanation, ExplanationKind};
use crate::instance::Instance;
use crate::precision::{Precision, Threshold};
use crate::set::FeatureSet;
use crate::smt::{self, EncodeOptions, Encoding, SolverConfig, SolverError, Verdict};
use crate::tree::{DecisionTree, FeatureId};
use crate::Counter;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Backend {
    #[default]
    Builtin,
    SmtMult,
    SmtAdd,
}

impl Backend {
    pub fn encoding(self) -> Option<Encoding> {
        match self {
            Backend::Builtin => None,
            Backend::SmtMult => Some(Encoding::Mult),
            Backend::SmtAdd => Some(Encoding::Add),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Builtin => "builtin",
            Backend::SmtMult => "smt-mult",
            Backend::SmtAdd => "smt-add",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(Backend::Builtin),
            "smt-mult" => Ok(Backend::SmtMult),
            "smt-add" => Ok(Backend::SmtAdd),
            other => Err(format!(
                "unknown backend {other:?} (expected builtin, smt-mult or smt-add)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("size bound {bound} exceeds the {available} features of the consistent path")]
    Bound { bound: usize, available: usize },
    #[error("no SMT solver configured (set {})", smt::SOLVER_ENV)]
    NoSolver,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("backend returned an invalid witness {0}")]
    InvalidWitness(FeatureSet),
    #[error("feature set {0} does not reach the threshold")]
    NotWeakPaxp(FeatureSet),
}

impl OracleError {
    /// Failures of the backend itself, as opposed to misuse by the caller.
    pub fn is_backend_failure(&self) -> bool {
        matches!(
            self,
            OracleError::NoSolver | OracleError::Solver(_) | OracleError::InvalidWitness(_)
        )
    }
}

/// "Is there a weak PAXp with at most `bound` fixed features?"
#[derive(Clone, Copy, Debug)]
pub struct DecisionQuery<'a> {
    pub tree: &'a DecisionTree,
    pub instance: &'a Instance,
    pub delta: &'a Threshold,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleAnswer {
    /// Present iff the query is satisfiable.
    pub witness: Option<FeatureSet>,
}

impl OracleAnswer {
    pub fn is_sat(&self) -> bool {
        self.witness.is_some()
    }
}

/// Decision oracle plus the searches built on top of it.
#[derive(Debug)]
pub struct Oracle {
    backend: Backend,
    solver: Option<SolverConfig>,
    calls: AtomicUsize,
}

impl Oracle {
    pub fn builtin() -> Self {
        Oracle::new(Backend::Builtin, None)
    }

    pub fn new(backend: Backend, solver: Option<SolverConfig>) -> Self {
        Oracle {
            backend,
            solver,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Number of decision queries answered so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn solver(&self) -> Result<&SolverConfig, OracleError> {
        self.solver.as_ref().ok_or(OracleError::NoSolver)
    }

    pub fn exists_weak_paxp_of_size(
        &self,
        query: &DecisionQuery<'_>,
    ) -> Result<OracleAnswer, OracleError> {
        let DecisionQuery {
            tree,
            instance,
            delta,
            bound,
        } = *query;
        let ground = FeatureSet::new(instance.path(tree).tested());
        if bound > ground.len() {
            return Err(OracleError::Bound {
                bound,
                available: ground.len(),
            });
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let witness = match self.backend.encoding() {
            None => SubsetSearch::new(tree, instance, delta, &ground).find(bound),
            Some(encoding) => {
                let problem = smt::encode(
                    tree,
                    instance,
                    delta,
                    encoding,
                    &EncodeOptions::bounded(bound),
                );
                match smt::solve_external(&problem, self.solver()?)? {
                    Verdict::Unsat => None,
                    Verdict::Sat(universal) => {
                        let w: FeatureSet =
                            (0..universal.len()).filter(|j| !universal[*j]).collect();
                        let valid = w.len() <= bound
                            && w.is_subset(&ground)
                            && Counter::new(tree, instance).is_weak_paxp(&w, delta);
                        if !valid {
                            return Err(OracleError::InvalidWitness(w));
                        }
                        Some(w)
                    }
                }
            }
        };
        Ok(OracleAnswer { witness })
    }

    /// A minimum-cardinality PAXp by binary search on the size bound.
    ///
    /// With the builtin backend the result is the lexicographically smallest
    /// set among those of minimum size.
    pub fn compute_min_paxp(
        &self,
        tree: &DecisionTree,
        instance: &Instance,
        delta: &Threshold,
    ) -> Result<Explanation, OracleError> {
        let path = FeatureSet::new(instance.path(tree).tested());
        // sat(hi) holds: the whole path has precision 1.
        let (mut lo, mut hi) = (0, path.len());
        let mut best = path;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let answer = self.exists_weak_paxp_of_size(&DecisionQuery {
                tree,
                instance,
                delta,
                bound: mid,
            })?;
            match answer.witness {
                Some(w) => {
                    hi = w.len();
                    best = w;
                }
                None => lo = mid + 1,
            }
        }
        let precision = Counter::new(tree, instance).precision(&best);
        debug_assert!(precision.meets(delta));
        Ok(Explanation {
            kind: ExplanationKind::MinPaxp,
            features: best,
            precision,
            delta: delta.clone(),
            weak_paxp: true,
            subset_minimal: Some(true),
        })
    }

    /// True iff no proper subset of `fixed` reaches δ.
    pub fn is_paxp(
        &self,
        tree: &DecisionTree,
        instance: &Instance,
        fixed: &FeatureSet,
        delta: &Threshold,
    ) -> Result<bool, OracleError> {
        let counter = Counter::new(tree, instance);
        if !counter.is_weak_paxp(fixed, delta) {
            return Err(OracleError::NotWeakPaxp(fixed.clone()));
        }
        if fixed.is_empty() {
            return Ok(true);
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        match self.backend.encoding() {
            None => Ok(SubsetSearch::new(tree, instance, delta, fixed)
                .find(fixed.len() - 1)
                .is_none()),
            Some(encoding) => {
                let options = EncodeOptions::release(fixed.clone());
                let problem = smt::encode(tree, instance, delta, encoding, &options);
                match smt::solve_external(&problem, self.solver()?)? {
                    Verdict::Unsat => Ok(true),
                    Verdict::Sat(universal) => {
                        let w: FeatureSet =
                            (0..universal.len()).filter(|j| !universal[*j]).collect();
                        if w.len() < fixed.len()
                            && w.is_subset(fixed)
                            && counter.is_weak_paxp(&w, delta)
                        {
                            Ok(false)
                        } else {
                            Err(OracleError::InvalidWitness(w))
                        }
                    }
                }
            }
        }
    }
}

/// Exhaustive search over subsets of a ground set, by size then
/// lexicographically, with per-path prefix products shared between
/// subsets that agree on their smallest features.
///
/// No pruning on precision: it is not monotone under set inclusion.
struct SubsetSearch<'a> {
    ground: Vec<FeatureId>,
    favorable: Vec<bool>,
    /// Per path: product of the universal factors of features outside the ground set.
    base: Vec<BigUint>,
    fixed: Vec<Vec<u64>>,
    universal: Vec<Vec<u64>>,
    /// Per path: suffix[t] = Π_{t' ≥ t} universal[t'].
    suffix: Vec<Vec<BigUint>>,
    delta: &'a Threshold,
}

impl<'a> SubsetSearch<'a> {
    fn new(
        tree: &DecisionTree,
        instance: &Instance,
        delta: &'a Threshold,
        ground: &FeatureSet,
    ) -> Self {
        let ground: Vec<FeatureId> = ground.iter().collect();
        let m = tree.space().len();
        let d = ground.len();
        let mut search = SubsetSearch {
            ground,
            favorable: Vec::new(),
            base: Vec::new(),
            fixed: Vec::new(),
            universal: Vec::new(),
            suffix: Vec::new(),
            delta,
        };
        let in_ground = FeatureSet::new(search.ground.iter().copied()).mask(m);
        for path in tree.paths() {
            let base = (0..m)
                .filter(|i| !in_ground[*i])
                .fold(BigUint::one(), |acc, i| {
                    acc * factor_pair(tree, path, i, instance).universal
                });
            if base.is_zero() {
                continue;
            }
            let pairs: Vec<_> = search
                .ground
                .iter()
                .map(|&i| factor_pair(tree, path, i, instance))
                .collect();
            let mut suffix = vec![BigUint::one(); d + 1];
            for t in (0..d).rev() {
                suffix[t] = &suffix[t + 1] * pairs[t].universal;
            }
            search.favorable.push(path.class() == instance.class());
            search.base.push(base);
            search.fixed.push(pairs.iter().map(|p| p.fixed).collect());
            search
                .universal
                .push(pairs.iter().map(|p| p.universal).collect());
            search.suffix.push(suffix);
        }
        search
    }

    /// Smallest, then lexicographically first, subset of size ≤ `max_size` reaching δ.
    fn find(&self, max_size: usize) -> Option<FeatureSet> {
        let mut chosen = Vec::new();
        for size in 0..=max_size.min(self.ground.len()) {
            if self.extend(0, size, self.base.clone(), &mut chosen) {
                return Some(chosen.iter().map(|&t| self.ground[t]).collect());
            }
        }
        None
    }

    /// `prefix[k]` covers the path-k factors of ground positions < `start`.
    fn extend(
        &self,
        start: usize,
        remaining: usize,
        prefix: Vec<BigUint>,
        chosen: &mut Vec<usize>,
    ) -> bool {
        let d = self.ground.len();
        if remaining == 0 {
            let mut favorable = BigUint::zero();
            let mut total = BigUint::zero();
            for (k, p) in prefix.iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let count = p * &self.suffix[k][start];
                if self.favorable[k] {
                    favorable += &count;
                }
                total += count;
            }
            return Precision::new(favorable, total).meets(self.delta);
        }
        let mut run = prefix;
        for t in start..=d - remaining {
            let next: Vec<BigUint> = run
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    if r.is_zero() {
                        BigUint::zero()
                    } else {
                        r * self.fixed[k][t]
                    }
                })
                .collect();
            chosen.push(t);
            if self.extend(t + 1, remaining - 1, next, chosen) {
                return true;
            }
            chosen.pop();
            for (k, r) in run.iter_mut().enumerate() {
                *r *= self.universal[k][t];
            }
        }
        false
    }
}
