//! Term graph of an encoding, its SMT-LIB2 rendering, the inverse parser,
//! and a concrete evaluator.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use super::sexp::{self, Sexp, SexpError};

/// Which counting scheme a problem uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// Per-path products of ite-selected factors (nonlinear).
    Mult,
    /// Per-path running sums over domain values (linear).
    Add,
}

impl Encoding {
    pub fn logic(self) -> &'static str {
        match self {
            Encoding::Mult => "QF_NIA",
            Encoding::Add => "QF_LIA",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Mult => "mult",
            Encoding::Add => "add",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mult" => Ok(Encoding::Mult),
            "add" => Ok(Encoding::Add),
            other => Err(format!("unknown encoding {other:?} (expected mult or add)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Int(BigUint),
    Bool(bool),
    Sym(String),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Add(Vec<Term>),
    Mul(Vec<Term>),
    Ge(Box<Term>, Box<Term>),
    Le(Box<Term>, Box<Term>),
    Or(Vec<Term>),
}

impl Term {
    pub fn int(n: impl Into<BigUint>) -> Term {
        Term::Int(n.into())
    }

    pub fn sym(name: impl Into<String>) -> Term {
        Term::Sym(name.into())
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::Ite(Box::new(c), Box::new(t), Box::new(e))
    }

    /// n-ary sum; `0` when empty, the term itself when singleton.
    pub fn sum(mut terms: Vec<Term>) -> Term {
        match terms.len() {
            0 => Term::int(0u32),
            1 => terms.pop().unwrap(),
            _ => Term::Add(terms),
        }
    }

    /// n-ary product; `1` when empty, the term itself when singleton.
    pub fn product(mut terms: Vec<Term>) -> Term {
        match terms.len() {
            0 => Term::int(1u32),
            1 => terms.pop().unwrap(),
            _ => Term::Mul(terms),
        }
    }

    /// n-ary disjunction; `false` when empty, the term itself when singleton.
    pub fn any(mut terms: Vec<Term>) -> Term {
        match terms.len() {
            0 => Term::Bool(false),
            1 => terms.pop().unwrap(),
            _ => Term::Or(terms),
        }
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::Ge(Box::new(a), Box::new(b))
    }

    pub fn le(a: Term, b: Term) -> Term {
        Term::Le(Box::new(a), Box::new(b))
    }

    fn write(&self, out: &mut String) {
        let list = |out: &mut String, head: &str, items: &[&Term]| {
            out.push('(');
            out.push_str(head);
            for item in items {
                out.push(' ');
                item.write(out);
            }
            out.push(')');
        };
        match self {
            Term::Int(n) => write!(out, "{n}").unwrap(),
            Term::Bool(b) => write!(out, "{b}").unwrap(),
            Term::Sym(s) => out.push_str(s),
            Term::Ite(c, t, e) => list(out, "ite", &[c, t, e]),
            Term::Add(ts) => list(out, "+", &ts.iter().collect::<Vec<_>>()),
            Term::Mul(ts) => list(out, "*", &ts.iter().collect::<Vec<_>>()),
            Term::Or(ts) => list(out, "or", &ts.iter().collect::<Vec<_>>()),
            Term::Ge(a, b) => list(out, ">=", &[a, b]),
            Term::Le(a, b) => list(out, "<=", &[a, b]),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Int,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub sort: Sort,
    pub body: Term,
}

/// What an assertion constrains, recovered from its shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// `u_j`: feature j must stay universal.
    Universal(usize),
    /// The δ threshold over path counts.
    Threshold,
    /// At most k fixed features.
    Cardinality,
    /// At least one of the listed fixed features becomes universal.
    Release,
}

impl Role {
    pub fn of(term: &Term) -> Option<Role> {
        match term {
            Term::Sym(s) => universal_index(s).map(Role::Universal),
            Term::Ge(..) => Some(Role::Threshold),
            Term::Le(..) => Some(Role::Cardinality),
            // An empty release list degenerates to `false`.
            Term::Or(..) | Term::Bool(false) => Some(Role::Release),
            _ => None,
        }
    }
}

/// Solver variable for feature `j` (zero-based): `u_<j+1>`.
pub fn universal_var(j: usize) -> String {
    format!("u_{}", j + 1)
}

fn universal_index(name: &str) -> Option<usize> {
    name.strip_prefix("u_")?
        .parse::<usize>()
        .ok()
        .filter(|j| *j >= 1)
        .map(|j| j - 1)
}

/// A complete SMT problem over the solver variables u_1..u_m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub encoding: Encoding,
    pub features: usize,
    pub paths: usize,
    pub definitions: Vec<Definition>,
    pub assertions: Vec<Term>,
}

impl Problem {
    /// Name of the term holding the model count of path `k` (zero-based).
    pub fn path_count_name(&self, k: usize) -> String {
        match self.encoding {
            Encoding::Mult => format!("eta_{}", k + 1),
            Encoding::Add => format!("eta_{}_{}", self.features, k + 1),
        }
    }

    /// SMT-LIB2 text. Deterministic for identical problems.
    pub fn to_smtlib(&self) -> String {
        let mut out = String::new();
        out.push_str("(set-option :produce-models true)\n");
        writeln!(out, "(set-logic {})", self.encoding.logic()).unwrap();
        for j in 0..self.features {
            writeln!(out, "(declare-fun {} () Bool)", universal_var(j)).unwrap();
        }
        for def in &self.definitions {
            let sort = match def.sort {
                Sort::Bool => "Bool",
                Sort::Int => "Int",
            };
            write!(out, "(define-fun {} () {sort} ", def.name).unwrap();
            def.body.write(&mut out);
            out.push_str(")\n");
        }
        for a in &self.assertions {
            out.push_str("(assert ");
            a.write(&mut out);
            out.push_str(")\n");
        }
        out.push_str("(check-sat)\n(get-model)\n");
        out
    }

    /// Reads back text produced by [`Problem::to_smtlib`].
    pub fn from_smtlib(text: &str) -> Result<Problem, ProblemError> {
        let mut encoding = None;
        let mut features = 0;
        let mut definitions = Vec::new();
        let mut assertions = Vec::new();
        for cmd in sexp::parse_all(text)? {
            let items = cmd
                .list()
                .ok_or_else(|| ProblemError::Malformed(cmd.to_string()))?;
            let head = items.first().and_then(Sexp::atom).unwrap_or("");
            match (head, items.len()) {
                ("set-option", _) | ("check-sat", 1) | ("get-model", 1) => {}
                ("set-logic", 2) => {
                    encoding = Some(match items[1].atom() {
                        Some("QF_NIA") => Encoding::Mult,
                        Some("QF_LIA") => Encoding::Add,
                        _ => return Err(ProblemError::Malformed(cmd.to_string())),
                    })
                }
                ("declare-fun", 4) => {
                    let name = items[1].atom().unwrap_or("");
                    if universal_index(name) != Some(features)
                        || items[2] != Sexp::List(vec![])
                        || items[3].atom() != Some("Bool")
                    {
                        return Err(ProblemError::Malformed(cmd.to_string()));
                    }
                    features += 1;
                }
                ("define-fun", 5) => {
                    let name = items[1]
                        .atom()
                        .ok_or_else(|| ProblemError::Malformed(cmd.to_string()))?;
                    let sort = match items[3].atom() {
                        Some("Int") => Sort::Int,
                        Some("Bool") => Sort::Bool,
                        _ => return Err(ProblemError::Malformed(cmd.to_string())),
                    };
                    definitions.push(Definition {
                        name: name.to_string(),
                        sort,
                        body: term_of(&items[4])?,
                    });
                }
                ("assert", 2) => assertions.push(term_of(&items[1])?),
                _ => return Err(ProblemError::Malformed(cmd.to_string())),
            }
        }
        let encoding =
            encoding.ok_or_else(|| ProblemError::Malformed("missing set-logic".into()))?;
        let mut problem = Problem {
            encoding,
            features,
            paths: 0,
            definitions,
            assertions,
        };
        let names: std::collections::HashSet<&str> = problem
            .definitions
            .iter()
            .map(|d| d.name.as_str())
            .collect();
        let mut paths = 0;
        while names.contains(problem.path_count_name(paths).as_str()) {
            paths += 1;
        }
        problem.paths = paths;
        Ok(problem)
    }

    /// Evaluates every definition and assertion under a full assignment of
    /// the u variables (`true` = universal).
    pub fn evaluate(&self, universal: &[bool]) -> Result<Evaluation, ProblemError> {
        if universal.len() != self.features {
            return Err(ProblemError::Assignment {
                expected: self.features,
                found: universal.len(),
            });
        }
        let mut env: HashMap<String, Val> = HashMap::new();
        for (j, u) in universal.iter().enumerate() {
            env.insert(universal_var(j), Val::Bool(*u));
        }
        for def in &self.definitions {
            let value = eval(&def.body, &env)?;
            match (&value, def.sort) {
                (Val::Int(_), Sort::Int) | (Val::Bool(_), Sort::Bool) => {}
                _ => return Err(ProblemError::Sort(def.name.clone())),
            }
            if env.insert(def.name.clone(), value).is_some() {
                return Err(ProblemError::Malformed(format!(
                    "{} defined twice",
                    def.name
                )));
            }
        }
        let path_counts = (0..self.paths)
            .map(|k| match env.get(&self.path_count_name(k)) {
                Some(Val::Int(n)) => Ok(n.clone()),
                _ => Err(ProblemError::Unknown(self.path_count_name(k))),
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut result = Evaluation {
            path_counts,
            threshold: true,
            cardinality: None,
            universal: true,
            release: None,
            fixed: universal.iter().filter(|u| !**u).count(),
        };
        for a in &self.assertions {
            let holds = match eval(a, &env)? {
                Val::Bool(b) => b,
                Val::Int(_) => return Err(ProblemError::Sort(a.to_string())),
            };
            match Role::of(a) {
                Some(Role::Threshold) => result.threshold &= holds,
                Some(Role::Cardinality) => {
                    result.cardinality = Some(result.cardinality.unwrap_or(true) && holds)
                }
                Some(Role::Universal(_)) => result.universal &= holds,
                Some(Role::Release) => {
                    result.release = Some(result.release.unwrap_or(true) && holds)
                }
                None => return Err(ProblemError::Malformed(a.to_string())),
            }
        }
        Ok(result)
    }
}

/// Outcome of evaluating a problem under one assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    /// Model count of every path, in tree order.
    pub path_counts: Vec<BigUint>,
    pub threshold: bool,
    /// `None` when the problem has no cardinality bound.
    pub cardinality: Option<bool>,
    /// All `u_j` unit assertions hold.
    pub universal: bool,
    /// `None` when the problem has no release constraint.
    pub release: Option<bool>,
    /// Number of features assigned fixed.
    pub fixed: usize,
}

impl Evaluation {
    /// Every assertion holds.
    pub fn satisfied(&self) -> bool {
        self.threshold
            && self.universal
            && self.cardinality.unwrap_or(true)
            && self.release.unwrap_or(true)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error(transparent)]
    Syntax(#[from] SexpError),
    #[error("malformed problem near {0}")]
    Malformed(String),
    #[error("unknown symbol {0}")]
    Unknown(String),
    #[error("sort mismatch in {0}")]
    Sort(String),
    #[error("assignment has {found} values, problem has {expected} features")]
    Assignment { expected: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Val {
    Int(BigUint),
    Bool(bool),
}

fn eval(term: &Term, env: &HashMap<String, Val>) -> Result<Val, ProblemError> {
    let int = |t: &Term| match eval(t, env)? {
        Val::Int(n) => Ok(n),
        Val::Bool(_) => Err(ProblemError::Sort(t.to_string())),
    };
    let boolean = |t: &Term| match eval(t, env)? {
        Val::Bool(b) => Ok(b),
        Val::Int(_) => Err(ProblemError::Sort(t.to_string())),
    };
    Ok(match term {
        Term::Int(n) => Val::Int(n.clone()),
        Term::Bool(b) => Val::Bool(*b),
        Term::Sym(s) => env
            .get(s)
            .cloned()
            .ok_or_else(|| ProblemError::Unknown(s.clone()))?,
        Term::Ite(c, t, e) => {
            if boolean(c)? {
                eval(t, env)?
            } else {
                eval(e, env)?
            }
        }
        Term::Add(ts) => {
            let mut acc = BigUint::zero();
            for t in ts {
                acc += int(t)?;
            }
            Val::Int(acc)
        }
        Term::Mul(ts) => {
            let mut acc = BigUint::one();
            for t in ts {
                acc *= int(t)?;
            }
            Val::Int(acc)
        }
        Term::Ge(a, b) => Val::Bool(int(a)? >= int(b)?),
        Term::Le(a, b) => Val::Bool(int(a)? <= int(b)?),
        Term::Or(ts) => {
            let mut any = false;
            for t in ts {
                any |= boolean(t)?;
            }
            Val::Bool(any)
        }
    })
}

fn term_of(s: &Sexp) -> Result<Term, ProblemError> {
    let bad = || ProblemError::Malformed(s.to_string());
    match s {
        Sexp::Atom(a) => {
            if a == "true" || a == "false" {
                Ok(Term::Bool(a == "true"))
            } else if a.bytes().all(|b| b.is_ascii_digit()) {
                Ok(Term::Int(a.parse().map_err(|_| bad())?))
            } else {
                Ok(Term::Sym(a.clone()))
            }
        }
        Sexp::List(items) => {
            let head = items.first().and_then(Sexp::atom).ok_or_else(bad)?;
            let mut args = items[1..]
                .iter()
                .map(term_of)
                .collect::<Result<Vec<_>, _>>()?;
            match (head, args.len()) {
                ("ite", 3) => {
                    let e = args.pop().unwrap();
                    let t = args.pop().unwrap();
                    Ok(Term::ite(args.pop().unwrap(), t, e))
                }
                (">=", 2) => {
                    let b = args.pop().unwrap();
                    Ok(Term::ge(args.pop().unwrap(), b))
                }
                ("<=", 2) => {
                    let b = args.pop().unwrap();
                    Ok(Term::le(args.pop().unwrap(), b))
                }
                ("+", n) if n > 1 => Ok(Term::Add(args)),
                ("*", n) if n > 1 => Ok(Term::Mul(args)),
                ("or", n) if n > 1 => Ok(Term::Or(args)),
                _ => Err(bad()),
            }
        }
    }
}
