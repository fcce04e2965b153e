//! Randomized checks of counting, encodings and explainers against enumeration.

use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::sample::Index;

use paxp_core::brute::{
    bf_all_paxps, bf_completions, bf_conditional_precision, bf_is_subset_minimal,
    EnumerationBudget, PrecisionTable,
};
use paxp_core::gen::{random_tree, RandomTreeConfig};
use paxp_core::instance::all_points;
use paxp_core::smt::{self, evaluate_encoding, EncodeOptions, Encoding, SolverConfig};
use paxp_core::{
    compute_approx_paxp, compute_approx_paxp_with, compute_axp, is_deletion_minimal,
    order_features, path_model_count, Backend, Counter, DecisionTree, FeatureSet, GreedyConfig,
    Instance, Oracle, Threshold,
};

fn pick_instance(tree: &DecisionTree, at: &Index) -> Instance {
    let points: Vec<Vec<usize>> = all_points(tree).collect();
    Instance::new(tree, at.get(&points).clone())
}

fn subset(ids: &[usize], bits: u64) -> FeatureSet {
    ids.iter()
        .enumerate()
        .filter(|(n, _)| bits & (1 << n) != 0)
        .map(|(_, i)| *i)
        .collect()
}

fn threshold() -> impl Strategy<Value = Threshold> {
    prop_oneof![
        Just("0.85"),
        Just("0.93"),
        Just("0.95"),
        Just("1.0"),
        Just("0"),
        Just("0.5"),
        Just("0.75"),
    ]
    .prop_map(|s| s.parse().unwrap())
}

fn path_ground(tree: &DecisionTree, v: &Instance) -> FeatureSet {
    FeatureSet::new(v.path(tree).tested())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_matches_enumeration(seed in any::<u64>(), at in any::<Index>(), bits in any::<u64>()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let all: Vec<usize> = (0..tree.space().len()).collect();
        let fixed = subset(&all, bits);
        let counted = Counter::new(&tree, &v).precision(&fixed);
        let brute = bf_conditional_precision(&tree, &v, &fixed, EnumerationBudget::default()).unwrap();
        prop_assert_eq!(counted.numerator(), brute.numerator());
        prop_assert_eq!(counted.denominator(), brute.denominator());
    }

    #[test]
    fn path_counts_partition_the_completions(seed in any::<u64>(), at in any::<Index>(), bits in any::<u64>()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let all: Vec<usize> = (0..tree.space().len()).collect();
        let fixed = subset(&all, bits);
        let total: BigUint = (0..tree.paths().len()).map(|k| path_model_count(&tree, k, &v, &fixed)).sum();
        prop_assert_eq!(total, bf_completions(&tree, &fixed));
    }

    #[test]
    fn fixing_more_features_never_adds_models(seed in any::<u64>(), at in any::<Index>(), a in any::<u64>(), b in any::<u64>()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let all: Vec<usize> = (0..tree.space().len()).collect();
        let small = subset(&all, a);
        let large = subset(&all, a | b);
        for k in 0..tree.paths().len() {
            prop_assert!(path_model_count(&tree, k, &v, &large) <= path_model_count(&tree, k, &v, &small));
        }
    }

    #[test]
    fn path_literals_are_edge_intersections(seed in any::<u64>()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        for point in all_points(&tree) {
            let admitting: Vec<usize> = tree.paths().iter().filter(|p| p.admits(&point)).map(|p| p.index()).collect();
            prop_assert_eq!(admitting.len(), 1);
            let path = tree.consistent_path(&point);
            prop_assert_eq!(admitting[0], path.index());
            prop_assert_eq!(path.class(), tree.classify(&point));
        }
    }

    #[test]
    fn encodings_agree_with_counting(seed in any::<u64>(), at in any::<Index>(), delta in threshold(), bits in any::<u64>()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let m = tree.space().len();
        let universal: Vec<bool> = (0..m).map(|j| bits & (1 << j) != 0).collect();
        let fixed: FeatureSet = (0..m).filter(|j| !universal[*j]).collect();
        let counter = Counter::new(&tree, &v);
        for encoding in [Encoding::Mult, Encoding::Add] {
            let problem = smt::encode(&tree, &v, &delta, encoding, &EncodeOptions::default());
            let eval = evaluate_encoding(&problem, &universal).unwrap();
            for k in 0..tree.paths().len() {
                prop_assert_eq!(&eval.path_counts[k], &path_model_count(&tree, k, &v, &fixed));
            }
            prop_assert_eq!(eval.threshold, counter.is_weak_paxp(&fixed, &delta));
            let text = problem.to_smtlib();
            let reparsed = smt::Problem::from_smtlib(&text).unwrap();
            prop_assert_eq!(reparsed.to_smtlib(), text);
        }
    }

    #[test]
    fn explainer_sizes_are_ordered(seed in any::<u64>(), at in any::<Index>(), delta in threshold()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let ground = path_ground(&tree, &v);
        let approx = compute_approx_paxp(&tree, &v, &delta, &order_features(&tree, &v, &ground)).unwrap();
        let min = Oracle::builtin().compute_min_paxp(&tree, &v, &delta).unwrap();
        prop_assert!(min.len() <= approx.len());
        prop_assert!(approx.len() <= ground.len());
        prop_assert!(approx.features.is_subset(&ground));
    }

    #[test]
    fn approx_is_a_deletion_minimal_weak_paxp(seed in any::<u64>(), at in any::<Index>(), delta in threshold(), resort in any::<bool>()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let order = order_features(&tree, &v, &path_ground(&tree, &v));
        let e = compute_approx_paxp_with(&tree, &v, &delta, &order, GreedyConfig { resort }).unwrap();
        let brute = bf_conditional_precision(&tree, &v, &e.features, EnumerationBudget::default()).unwrap();
        prop_assert!(brute.meets(&delta));
        prop_assert_eq!(&e.precision, &brute);
        prop_assert!(is_deletion_minimal(&tree, &v, &e.features, &delta).unwrap());
    }

    #[test]
    fn axp_is_subset_minimal_by_enumeration(seed in any::<u64>(), at in any::<Index>()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let e = compute_axp(&tree, &v);
        let one = Threshold::one();
        let budget = EnumerationBudget::default();
        prop_assert!(bf_conditional_precision(&tree, &v, &e.features, budget).unwrap().is_one());
        prop_assert!(bf_is_subset_minimal(&tree, &v, &e.features, &one, budget).unwrap());
    }

    #[test]
    fn is_paxp_agrees_with_enumerated_paxps(seed in any::<u64>(), at in any::<Index>(), delta in threshold()) {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let budget = EnumerationBudget::default();
        let paxps = bf_all_paxps(&tree, &v, &delta, budget).unwrap();
        let table = PrecisionTable::new(&tree, &v, budget).unwrap();
        let oracle = Oracle::builtin();
        let ground = path_ground(&tree, &v);
        for bits in 0u64..1 << ground.len() {
            let set = subset(ground.as_slice(), bits);
            if !table.precision(&set).meets(&delta) {
                continue;
            }
            prop_assert_eq!(oracle.is_paxp(&tree, &v, &set, &delta).unwrap(), paxps.contains(&set), "{}", set);
        }
        let min = oracle.compute_min_paxp(&tree, &v, &delta).unwrap();
        prop_assert_eq!(Some(min.len()), paxps.iter().map(FeatureSet::len).min());
        prop_assert!(paxps.contains(&min.features));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn external_solver_agrees_with_builtin(seed in any::<u64>(), at in any::<Index>(), delta in threshold()) {
        let Some(config) = SolverConfig::from_env() else {
            return Ok(());
        };
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = pick_instance(&tree, &at);
        let builtin = Oracle::builtin().compute_min_paxp(&tree, &v, &delta).unwrap();
        for backend in [Backend::SmtMult, Backend::SmtAdd] {
            let oracle = Oracle::new(backend, Some(config.clone()));
            let e = oracle.compute_min_paxp(&tree, &v, &delta).unwrap();
            prop_assert_eq!(e.len(), builtin.len());
            if !e.is_empty() {
                prop_assert!(oracle.is_paxp(&tree, &v, &e.features, &delta).unwrap());
            }
        }
    }
}

/// Randomized search for X ⊂ X' with precision(X') < precision(X).
#[test]
fn precision_is_not_monotone() {
    let budget = EnumerationBudget::default();
    let found = (0..200u64).find_map(|seed| {
        let tree = random_tree(&RandomTreeConfig::small(), seed);
        let v = Instance::new(&tree, all_points(&tree).next().unwrap());
        let table = PrecisionTable::new(&tree, &v, budget).unwrap();
        let ground = path_ground(&tree, &v);
        for bits in 0u64..1 << ground.len() {
            let small = subset(ground.as_slice(), bits);
            for j in ground.iter().filter(|j| !small.contains(*j)) {
                let large = small.with(j);
                if table.precision(&large) < table.precision(&small) {
                    return Some((seed, small, large));
                }
            }
        }
        None
    });
    let (seed, small, large) = found.expect("a non-monotone pair among 200 random trees");
    let tree = random_tree(&RandomTreeConfig::small(), seed);
    let v = Instance::new(&tree, all_points(&tree).next().unwrap());
    let counter = Counter::new(&tree, &v);
    let (ps, pl) = (counter.precision(&small), counter.precision(&large));
    assert!(pl < ps);
    // A threshold between the two precisions separates them.
    let mid = (ps.to_f64() + pl.to_f64()) / 2.0;
    let delta: Threshold = format!("{mid:.12}").parse().unwrap();
    assert!(counter.is_weak_paxp(&small, &delta));
    assert!(!counter.is_weak_paxp(&large, &delta));
}
