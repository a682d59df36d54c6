mod common;

use common::{grid_dataset, rng};
use proptest::prelude::*;
use rand::Rng;
use sparse_isotonic::algorithms::subsets::Combinations;
use sparse_isotonic::algorithms::*;
use sparse_isotonic::exact::{brute_force_binary, solve_fixed};
use sparse_isotonic::lp::{solve_lp, LpStatus};
use sparse_isotonic::model::{ActiveSet, Dataset, NoiseModel};
use sparse_isotonic::synthetic::{gen_anchor_instance, gen_noisy_input_instance};
use sparse_isotonic::Error;

fn exhaustive(ds: &Dataset, s: usize) -> (f64, ActiveSet) {
    let mut best: Option<(f64, ActiveSet)> = None;
    for c in Combinations::new(ds.d(), s) {
        let a = ActiveSet::new(c, ds.d()).unwrap();
        let obj = match ds.noise_model() {
            NoiseModel::NoisyInput => brute_force_binary(ds, &a).unwrap().objective,
            NoiseModel::NoisyOutput => solve_fixed(ds, &a).unwrap().objective,
        };
        if best.as_ref().is_none_or(|(b, _)| obj < b - 1e-9) {
            best = Some((obj, a));
        }
    }
    best.unwrap()
}

#[test]
fn full_sparsity_reduces_to_the_fixed_solver() {
    let mut r = rng(1);
    for model in [NoiseModel::NoisyInput, NoiseModel::NoisyOutput] {
        let ds = grid_dataset(&mut r, 15, 3, 4, model);
        let fit = ipir_fit(&ds, 3, Rule::Min).unwrap();
        let fixed = solve_fixed(&ds, &ActiveSet::full(3)).unwrap();
        assert_eq!(fit.fitted(), fixed.fitted.as_slice());
        assert_eq!(fit.objective(), fixed.objective);
    }
}

#[test]
fn single_coordinate_search_matches_brute_force() {
    let mut r = rng(2);
    for _ in 0..20 {
        let ds = grid_dataset(&mut r, 10, 3, 3, NoiseModel::NoisyInput);
        let fit = ipir_fit(&ds, 1, Rule::Min).unwrap();
        let best = (0..3)
            .map(|k| brute_force_binary(&ds, &ActiveSet::new(vec![k], 3).unwrap()).unwrap().objective)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(fit.objective(), best);
    }
}

#[test]
fn search_is_globally_optimal_on_small_instances() {
    let mut r = rng(3);
    for case in 0..120 {
        let model = if case % 2 == 0 { NoiseModel::NoisyInput } else { NoiseModel::NoisyOutput };
        let n = r.random_range(2..=12);
        let d = r.random_range(1..=4);
        let s = r.random_range(1..=d);
        let ds = grid_dataset(&mut r, n, d, 3, model);
        let outcome = ipir_search(&ds, s, &IpirOptions::default()).unwrap();
        let (obj, active) = exhaustive(&ds, s);
        assert!((outcome.fit.objective - obj).abs() <= 1e-9, "case {case}");
        assert_eq!(outcome.fit.active, active, "case {case}: tie-break must pick the first subset");
    }
}

#[test]
fn pruned_search_equals_full_enumeration() {
    let mut r = rng(4);
    let full = IpirOptions { prune: false, ..IpirOptions::default() };
    for case in 0..40 {
        let model = if case % 2 == 0 { NoiseModel::NoisyInput } else { NoiseModel::NoisyOutput };
        let ds = grid_dataset(&mut r, 30, 6, 4, model);
        let a = ipir_search(&ds, 2, &IpirOptions::default()).unwrap();
        let b = ipir_search(&ds, 2, &full).unwrap();
        assert_eq!(a.fit, b.fit, "case {case}");
        assert!(a.exact_solves <= b.exact_solves);
    }
    let (ds, _) = gen_anchor_instance(120, 12, 3, 10, 0.1f64.sqrt(), 5).unwrap();
    let a = ipir_search(&ds, 3, &IpirOptions::default()).unwrap();
    let b = ipir_search(&ds, 3, &full).unwrap();
    assert_eq!(a.fit, b.fit);
    assert!(a.exact_solves < b.exact_solves / 4, "{} vs {}", a.exact_solves, b.exact_solves);
}

#[test]
fn exclusions_and_guards() {
    let mut r = rng(5);
    let ds = grid_dataset(&mut r, 20, 4, 3, NoiseModel::NoisyInput);
    let options = IpirOptions { exclusions: vec![(0, 1), (2, 3)], ..IpirOptions::default() };
    let out = ipir_search(&ds, 2, &options).unwrap();
    let a = out.fit.active.indices();
    assert!(!(a.contains(&0) && a.contains(&1)) && !(a.contains(&2) && a.contains(&3)));
    assert_eq!(out.subsets, 4);
    let all_blocked = IpirOptions { exclusions: vec![(0, 1)], ..IpirOptions::default() };
    let tiny = grid_dataset(&mut r, 5, 2, 3, NoiseModel::NoisyInput);
    assert!(matches!(ipir_search(&tiny, 2, &all_blocked), Err(Error::Argument(_))));
    assert!(matches!(ipir_fit(&tiny, 0, Rule::Min), Err(Error::Argument(_))));
    assert!(matches!(ipir_fit(&tiny, 3, Rule::Min), Err(Error::Argument(_))));
    let wide = grid_dataset(&mut r, 3, 200, 3, NoiseModel::NoisyInput);
    assert!(matches!(ipir_fit(&wide, 4, Rule::Min), Err(Error::SizeGuard(_))));
}

#[test]
fn lpsr_finds_a_noiseless_threshold() {
    let mut r = rng(6);
    let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..5).map(|_| r.random()).collect()).collect();
    let labels = rows.iter().map(|x| if x[0] >= 0.5 { 1.0 } else { 0.0 }).collect();
    let ds = Dataset::new(rows, labels, NoiseModel::NoisyInput).unwrap();
    assert_eq!(lpsr(&ds, 1).unwrap().indices(), &[0]);
    assert_eq!(slpsr(&ds, 1, &RecoveryConfig::new(RecoveryMethod::Slpsr)).unwrap().indices(), &[0]);
}

#[test]
fn lpsr_without_pairs_takes_the_first_coordinates() {
    let mut r = rng(7);
    let rows: Vec<Vec<f64>> = (0..10).map(|_| (0..4).map(|_| r.random()).collect()).collect();
    let ds = Dataset::new(rows, vec![1.0; 10], NoiseModel::NoisyInput).unwrap();
    let out = lpsr_detailed(&ds, 2).unwrap();
    assert_eq!(out.active.indices(), &[0, 1]);
    assert_eq!(out.pairs, 0);
    assert_eq!(out.objective, 0.0);
}

#[test]
fn lpsr_matches_the_full_linear_program() {
    let mut r = rng(8);
    for case in 0..40 {
        let model = if case % 2 == 0 { NoiseModel::NoisyInput } else { NoiseModel::NoisyOutput };
        let n = r.random_range(4..=9);
        let d = r.random_range(2..=5);
        let s = r.random_range(1..=d);
        let ds = grid_dataset(&mut r, n, d, 4, model);
        let out = lpsr_detailed(&ds, s).unwrap();
        let full = solve_lp(&lpsr_full_problem(&ds, s).unwrap()).unwrap();
        assert_eq!(full.status, LpStatus::Optimal);
        assert!((out.objective - full.objective).abs() <= 1e-7, "case {case}: {} vs {}", out.objective, full.objective);
        assert!((lpsr_objective(&ds, &out.v).unwrap() - full.objective).abs() <= 1e-7);
        assert!((out.v.iter().sum::<f64>() - s as f64).abs() <= 1e-7);
        assert!(out.v.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(out.active.len(), s);
    }
}

#[test]
fn sequential_and_simultaneous_agree_for_one_coordinate() {
    let mut r = rng(9);
    let config = RecoveryConfig::new(RecoveryMethod::Slpsr);
    for case in 0..60 {
        let model = if case % 2 == 0 { NoiseModel::NoisyInput } else { NoiseModel::NoisyOutput };
        let ds = grid_dataset(&mut r, 25, 5, 4, model);
        assert_eq!(lpsr(&ds, 1).unwrap(), slpsr(&ds, 1, &config).unwrap(), "case {case}");
    }
}

#[test]
fn sequential_recovery_respects_exclusions() {
    for seed in 0..10 {
        let (ds, _) = gen_noisy_input_instance(80, 4, 1, 3, 0.05, seed).unwrap();
        let config = RecoveryConfig::new(RecoveryMethod::Slpsr).with_exclusions(vec![(0, 1)]);
        let found = slpsr(&ds, 2, &config).unwrap();
        assert!(!(found.contains(0) && found.contains(1)), "seed {seed}: {found}");
    }
    let (ds, _) = gen_noisy_input_instance(30, 2, 1, 3, 0.05, 1).unwrap();
    let config = RecoveryConfig::new(RecoveryMethod::Slpsr).with_exclusions(vec![(0, 1)]);
    assert!(matches!(slpsr(&ds, 2, &config), Err(Error::Argument(_))));
    let bad = RecoveryConfig::new(RecoveryMethod::Slpsr).with_exclusions(vec![(0, 7)]);
    assert!(slpsr(&ds, 1, &bad).is_err());
    let lp = RecoveryConfig::new(RecoveryMethod::Lpsr).with_exclusions(vec![(0, 1)]);
    assert!(recover_support(&ds, 1, &lp).is_err());
}

#[test]
fn fresh_fold_mode_uses_disjoint_samples() {
    let (ds, model) = gen_noisy_input_instance(300, 6, 2, 5, 0.0, 3).unwrap();
    let config = RecoveryConfig::new(RecoveryMethod::Slpsr).with_fresh_folds(true);
    let found = slpsr(&ds, 2, &config).unwrap();
    assert_eq!(found, *model.active());
    assert!(slpsr(&ds.select(&[0]).unwrap(), 2, &config).is_err());
}

#[test]
fn two_stage_fit_solves_stage_two_exactly() {
    for seed in 0..15 {
        let (ds, _) = gen_noisy_input_instance(14, 4, 2, 3, 0.1, seed).unwrap();
        let config = RecoveryConfig::new(RecoveryMethod::Slpsr);
        let fit = tsir_fit(&ds, 2, &config, Rule::Min).unwrap();
        let oracle = brute_force_binary(&ds, fit.active()).unwrap();
        assert_eq!(fit.objective(), oracle.objective);
        let best = ipir_fit(&ds, 2, Rule::Min).unwrap();
        assert!(fit.objective() >= best.objective());
        if best.active() == fit.active() {
            assert_eq!(best.fit(), fit.fit());
        }
        let via_ipir = tsir_fit(&ds, 2, &RecoveryConfig::new(RecoveryMethod::Ipir), Rule::Min).unwrap();
        assert_eq!(via_ipir.fit(), best.fit());
    }
}

fn two_point_fit(rule: Rule) -> SparseFit {
    let ds = Dataset::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.2, 0.7], NoiseModel::NoisyOutput).unwrap();
    let fit = solve_fixed(&ds, &ActiveSet::full(2)).unwrap();
    SparseFit::new(&ds, fit, rule)
}

#[test]
fn interpolation_rules() {
    let min = two_point_fit(Rule::Min);
    let max = two_point_fit(Rule::Max);
    assert_eq!(min.predict(&[0.5, 0.5]).unwrap(), 0.2);
    assert_eq!(max.predict(&[0.5, 0.5]).unwrap(), 0.7);
    assert_eq!(min.predict(&[-1.0, -1.0]).unwrap(), 0.0);
    assert_eq!(max.predict(&[2.0, 2.0]).unwrap(), 1.0);
    for (x, f) in [([0.0, 0.0], 0.2), ([1.0, 1.0], 0.7)] {
        assert_eq!(min.predict(&x).unwrap(), f);
        assert_eq!(max.predict(&x).unwrap(), f);
    }
    assert!(matches!(min.predict(&[0.0]), Err(Error::Argument(_))));
}

#[test]
fn fit_json_round_trip() {
    let (ds, _) = gen_anchor_instance(40, 4, 2, 5, 0.2, 2).unwrap();
    let fit = ipir_fit(&ds, 2, Rule::Max).unwrap();
    let mut buf = Vec::new();
    fit.to_json(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    for key in ["active_indices", "fitted_values", "rule", "objective", "features"] {
        assert!(text.contains(key));
    }
    let back = SparseFit::from_json(buf.as_slice()).unwrap();
    assert_eq!(back, fit);

    let broken = text.replacen("\"max\"", "\"median\"", 1);
    assert!(SparseFit::from_json(broken.as_bytes()).is_err());
    let json =
        r#"{"active_indices":[1],"fitted_values":[1.0,0.0],"rule":"min","objective":0,"features":[[0.0],[1.0]]}"#;
    assert!(matches!(SparseFit::from_json(json.as_bytes()), Err(Error::Contract(_))));
}

fn random_fit(seed: u64) -> (SparseFit, SparseFit) {
    let mut r = rng(seed);
    let model = if seed.is_multiple_of(2) { NoiseModel::NoisyInput } else { NoiseModel::NoisyOutput };
    let ds = grid_dataset(&mut r, 25, 3, 5, model);
    let k = r.random_range(1..=3);
    let active = ActiveSet::new((0..3).filter(|_| r.random_bool(0.6)).take(k).collect::<Vec<_>>(), 3)
        .unwrap_or_else(|_| ActiveSet::full(3));
    let fit = solve_fixed(&ds, &active).unwrap();
    (SparseFit::new(&ds, fit.clone(), Rule::Min), SparseFit::new(&ds, fit, Rule::Max))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn predictions_are_monotone_and_ordered(
        seed in 0u64..40,
        x in proptest::collection::vec(-1.0f64..6.0, 3),
        bump in proptest::collection::vec(0.0f64..3.0, 3),
    ) {
        let (min, max) = random_fit(seed);
        let y: Vec<f64> = x.iter().zip(&bump).map(|(a, b)| a + b).collect();
        for fit in [&min, &max] {
            prop_assert!(fit.predict(&x).unwrap() <= fit.predict(&y).unwrap());
        }
        prop_assert!(min.predict(&x).unwrap() <= max.predict(&x).unwrap());
    }
}
