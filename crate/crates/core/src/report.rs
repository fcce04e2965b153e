//! Machine-readable run reports and per-threshold aggregates.

use std::str::FromStr;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::explain::{
    compute_approx_paxp_with, compute_axp, order_features, Explanation, ExplanationKind,
    GreedyConfig,
};
use crate::instance::Instance;
use crate::precision::{decimal, Threshold};
use crate::set::FeatureSet;
use crate::solver::{Oracle, OracleError};
use crate::tree::DecisionTree;

/// Which explainers to run per instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Axp,
    Approx,
    Min,
    All,
}

impl Mode {
    pub fn kinds(self) -> &'static [ExplanationKind] {
        match self {
            Mode::Axp => &[ExplanationKind::Axp],
            Mode::Approx => &[ExplanationKind::ApproxPaxp],
            Mode::Min => &[ExplanationKind::MinPaxp],
            Mode::All => &[
                ExplanationKind::Axp,
                ExplanationKind::ApproxPaxp,
                ExplanationKind::MinPaxp,
            ],
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "axp" => Ok(Mode::Axp),
            "approx" => Ok(Mode::Approx),
            "min" => Ok(Mode::Min),
            "all" => Ok(Mode::All),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// One explanation of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub instance: Vec<String>,
    pub class: String,
    pub path_depth: usize,
    pub kind: String,
    pub features: Vec<String>,
    pub size: usize,
    /// Exact, reduced `num/den`. Authoritative.
    pub precision: String,
    /// Six-place rendering of `precision`.
    pub precision_decimal: String,
    pub delta: String,
    pub is_subset_minimal: Option<bool>,
    pub time_secs: f64,
}

impl Record {
    pub fn new(
        tree: &DecisionTree,
        instance: &Instance,
        e: &Explanation,
        elapsed: Duration,
    ) -> Self {
        Record {
            instance: instance.labels(tree),
            class: tree.class_label(instance.class()).to_string(),
            path_depth: instance.path(tree).depth(),
            kind: e.kind.to_string(),
            features: e.features.names(tree),
            size: e.len(),
            precision: e.precision.to_string(),
            precision_decimal: e.precision.decimal(6),
            delta: e.delta.to_string(),
            is_subset_minimal: e.subset_minimal,
            time_secs: elapsed.as_secs_f64(),
        }
    }

    fn precision_ratio(&self) -> Option<BigRational> {
        let (n, d) = self.precision.split_once('/')?;
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        (!d.is_zero()).then(|| BigRational::new(n, d))
    }
}

/// Summary over the records of one explainer at one δ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub kind: String,
    pub delta: String,
    pub count: usize,
    pub length_max: usize,
    pub length_min: usize,
    pub length_avg: f64,
    /// Exact mean precision as `num/den`.
    pub precision_avg: String,
    pub precision_avg_decimal: String,
    /// Records certified subset-minimal, over records where it was decided.
    pub subset_minimal: usize,
    pub subset_minimal_decided: usize,
    /// m⊆ = subset_minimal / subset_minimal_decided, absent when nothing was decided.
    pub subset_minimal_fraction: Option<f64>,
    pub time_avg_secs: f64,
}

impl Aggregate {
    /// Recomputes the summary from records. `None` for an empty slice.
    pub fn from_records(records: &[Record]) -> Option<Aggregate> {
        let first = records.first()?;
        let n = records.len();
        let mut sum = BigRational::zero();
        for r in records {
            sum += r.precision_ratio().expect("record precision is num/den");
        }
        let avg = sum / BigRational::from_integer(BigInt::from(n));
        let to_u = |x: &BigInt| BigUint::try_from(x.clone()).expect("nonnegative");
        let (num, den) = (to_u(avg.numer()), to_u(avg.denom()));
        let decided: Vec<bool> = records.iter().filter_map(|r| r.is_subset_minimal).collect();
        let minimal = decided.iter().filter(|b| **b).count();
        Some(Aggregate {
            kind: first.kind.clone(),
            delta: first.delta.clone(),
            count: n,
            length_max: records.iter().map(|r| r.size).max().unwrap(),
            length_min: records.iter().map(|r| r.size).min().unwrap(),
            length_avg: records.iter().map(|r| r.size).sum::<usize>() as f64 / n as f64,
            precision_avg: format!("{num}/{den}"),
            precision_avg_decimal: decimal(&num, &den, 6),
            subset_minimal: minimal,
            subset_minimal_decided: decided.len(),
            subset_minimal_fraction: (!decided.is_empty())
                .then(|| minimal as f64 / decided.len() as f64),
            time_avg_secs: records.iter().map(|r| r.time_secs).sum::<f64>() / n as f64,
        })
    }

    pub fn precision_avg_ratio(&self) -> Option<BigRational> {
        let (n, d) = self.precision_avg.split_once('/')?;
        Some(BigRational::new(n.parse().ok()?, d.parse().ok()?))
    }

    pub fn precision_avg_f64(&self) -> f64 {
        self.precision_avg_ratio()
            .and_then(|r| r.to_f64())
            .unwrap_or(f64::NAN)
    }
}

/// Outcome of one verification check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub instance: Vec<String>,
    pub check: String,
    /// `pass`, `fail` or `skipped: budget`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default)]
    pub records: Vec<Record>,
    #[serde(default)]
    pub aggregates: Vec<Aggregate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Report::default()
        }
    }

    /// One aggregate per (δ, kind), in first-appearance order.
    pub fn aggregate(&mut self) {
        let mut keys: Vec<(String, String)> = Vec::new();
        for r in &self.records {
            let key = (r.delta.clone(), r.kind.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        self.aggregates = keys
            .iter()
            .filter_map(|(delta, kind)| {
                let group: Vec<Record> = self
                    .records
                    .iter()
                    .filter(|r| &r.delta == delta && &r.kind == kind)
                    .cloned()
                    .collect();
                Aggregate::from_records(&group)
            })
            .collect();
    }
}

/// Runs the selected explainers on one instance, in AXp, ApproxPAXp, MinPAXp order.
///
/// ApproxPAXp results are certified with [`Oracle::is_paxp`]; with
/// [`Mode::All`] the size ordering |MinPAXp| ≤ |ApproxPAXp| is checked and a
/// violation is reported as an error message.
pub fn explain_instance(
    tree: &DecisionTree,
    instance: &Instance,
    delta: &Threshold,
    kinds: &[ExplanationKind],
    oracle: &Oracle,
) -> Result<Vec<Record>, ExplainFailure> {
    let mut records = Vec::new();
    let mut approx_size = None;
    let mut min_size = None;
    if kinds.contains(&ExplanationKind::Axp) {
        let start = Instant::now();
        let e = compute_axp(tree, instance);
        records.push(Record::new(tree, instance, &e, start.elapsed()));
    }
    if kinds.contains(&ExplanationKind::ApproxPaxp) {
        let start = Instant::now();
        let ground = FeatureSet::new(instance.path(tree).tested());
        let order = order_features(tree, instance, &ground);
        let mut e =
            compute_approx_paxp_with(tree, instance, delta, &order, GreedyConfig::default())
                .expect("order derived from the path");
        let elapsed = start.elapsed();
        if e.subset_minimal.is_none() {
            e.subset_minimal = Some(oracle.is_paxp(tree, instance, &e.features, delta)?);
        }
        approx_size = Some(e.len());
        records.push(Record::new(tree, instance, &e, elapsed));
    }
    if kinds.contains(&ExplanationKind::MinPaxp) {
        let start = Instant::now();
        let e = oracle.compute_min_paxp(tree, instance, delta)?;
        min_size = Some(e.len());
        records.push(Record::new(tree, instance, &e, start.elapsed()));
    }
    if let (Some(a), Some(m)) = (approx_size, min_size) {
        if m > a {
            return Err(ExplainFailure::SizeOrder { min: m, approx: a });
        }
    }
    Ok(records)
}

#[derive(Debug, thiserror::Error)]
pub enum ExplainFailure {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("MinPAXp of size {min} is larger than ApproxPAXp of size {approx}")]
    SizeOrder { min: usize, approx: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::instance::all_points;

    #[test]
    fn fixture_records() {
        let tree = fixture::tree();
        let v = fixture::instance(&tree, "4,4,2");
        let d: Threshold = "0.93".parse().unwrap();
        let recs = explain_instance(&tree, &v, &d, Mode::All.kinds(), &Oracle::builtin()).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0].kind, "AXp");
        assert_eq!(recs[0].features, vec!["f1", "f3"]);
        assert_eq!(recs[0].precision, "1/1");
        assert_eq!(recs[1].kind, "ApproxPAXp");
        assert_eq!(recs[1].is_subset_minimal, Some(true));
        assert_eq!(recs[2].kind, "MinPAXp");
        assert_eq!(recs[2].features, vec!["f3"]);
        assert_eq!(recs[2].precision, "15/16");
        assert_eq!(recs[2].precision_decimal, "0.937500");
        assert_eq!(recs[2].delta, "0.93");
        assert_eq!(recs[2].path_depth, 3);
    }

    #[test]
    fn aggregates_recompute_from_records() {
        let tree = fixture::tree();
        let d: Threshold = "0.93".parse().unwrap();
        let mut report = Report::new("stats");
        for point in all_points(&tree) {
            let v = Instance::new(&tree, point);
            report.records.extend(
                explain_instance(&tree, &v, &d, Mode::All.kinds(), &Oracle::builtin()).unwrap(),
            );
        }
        report.aggregate();
        assert_eq!(report.aggregates.len(), 3);
        let approx = &report.aggregates[1];
        assert_eq!(approx.kind, "ApproxPAXp");
        assert_eq!(approx.count, 32);
        assert_eq!(approx.subset_minimal_fraction, Some(1.0));
        let axp = &report.aggregates[0];
        assert_eq!(axp.precision_avg, "1/1");

        let text = serde_json::to_string(&report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        for agg in &back.aggregates {
            let group: Vec<Record> = back
                .records
                .iter()
                .filter(|r| r.kind == agg.kind && r.delta == agg.delta)
                .cloned()
                .collect();
            let mut again = Aggregate::from_records(&group).unwrap();
            assert!((again.time_avg_secs - agg.time_avg_secs).abs() < 1e-12);
            again.time_avg_secs = agg.time_avg_secs;
            assert_eq!(&again, agg);
        }
    }

    #[test]
    fn empty_records_have_no_aggregate() {
        assert_eq!(Aggregate::from_records(&[]), None);
    }
}
