use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_isotonic::exact::brute_force_binary;
use sparse_isotonic::lp::{
    check_integrality, solve_lp, LpProblem, LpStatus, PricingRule, Relation, SimplexOptions, FEAS_TOL,
};
use sparse_isotonic::model::{ActiveSet, Dataset, NoiseModel};

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let m = rng.random_range(1..=6);
    let rows = rng.random_range(0..=8);
    let small = |rng: &mut ChaCha8Rng| f64::from(rng.random_range(-4i32..=4));
    let mut lp = LpProblem::new((0..m).map(|_| small(rng)).collect());
    for j in 0..m {
        let lo = f64::from(rng.random_range(-3i32..=0));
        let hi = lo + f64::from(rng.random_range(0i32..=4));
        lp.set_bounds(j, lo, hi).unwrap();
    }
    for _ in 0..rows {
        let coeffs = (0..m).map(|_| small(rng)).collect();
        let rel = match rng.random_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        lp.add_constraint(coeffs, rel, small(rng)).unwrap();
    }
    lp
}

/// Minimum over all basic feasible solutions, or `None` when there is none.
fn vertex_oracle(lp: &LpProblem) -> Option<f64> {
    let m = lp.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = lp.constraints.iter().map(|c| (c.coeffs.clone(), c.rhs)).collect();
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..m).collect();
    loop {
        let a = DMatrix::from_fn(m, m, |r, c| planes[pick[r]].0[c]);
        let b = DVector::from_fn(m, |r, _| planes[pick[r]].1);
        if let Some(x) = a.lu().solve(&b) {
            let x: Vec<f64> = x.iter().copied().collect();
            if x.iter().all(|v| v.is_finite()) && lp.max_violation(&x) <= 1e-9 {
                let z = lp.objective_value(&x);
                best = Some(best.map_or(z, |b: f64| b.min(z)));
            }
        }
        // next combination
        let n = planes.len();
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < n - m + i {
                pick[i] += 1;
                for k in i + 1..m {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Lagrangian bound `b.y + sum_j min_{x_j in [lo, hi]} (c - A^T y)_j x_j`,
/// valid for any sign-feasible `y`.
fn lagrangian_bound(lp: &LpProblem, y: &[f64]) -> f64 {
    let m = lp.num_vars();
    let mut reduced = lp.objective.clone();
    let mut bound = 0.0;
    for (c, &yi) in lp.constraints.iter().zip(y) {
        bound += c.rhs * yi;
        for j in 0..m {
            reduced[j] -= c.coeffs[j] * yi;
        }
    }
    for j in 0..m {
        bound += if reduced[j] >= 0.0 { reduced[j] * lp.lower[j] } else { reduced[j] * lp.upper[j] };
    }
    bound
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut optimal, mut infeasible) = (0, 0);
    for case in 0..300 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp).unwrap();
        match vertex_oracle(&lp) {
            Some(z) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!((sol.objective - z).abs() <= 1e-7, "case {case}: {} vs {z}", sol.objective);
                assert!(lp.max_violation(&sol.x) <= FEAS_TOL, "case {case}");
                optimal += 1;
            }
            None => {
                assert_eq!(sol.status, LpStatus::Infeasible, "case {case}");
                infeasible += 1;
            }
        }
    }
    assert!(optimal > 100 && infeasible > 10, "{optimal} optimal, {infeasible} infeasible");
}

#[test]
fn bland_pricing_agrees_with_default() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let bland = SimplexOptions { pricing: PricingRule::Bland, ..Default::default() };
    for _ in 0..200 {
        let lp = random_lp(&mut rng);
        let a = solve_lp(&lp).unwrap();
        let b = sparse_isotonic::lp::solve_lp_with(&lp, &bland).unwrap();
        assert_eq!(a.status, b.status);
        if a.status == LpStatus::Optimal {
            assert!((a.objective - b.objective).abs() <= 1e-7);
        }
    }
}

#[test]
fn perturbed_solves_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let options = SimplexOptions { perturb: true, ..Default::default() };
    for case in 0..300 {
        let lp = random_lp(&mut rng);
        let sol = sparse_isotonic::lp::solve_lp_with(&lp, &options).unwrap();
        match vertex_oracle(&lp) {
            Some(z) => {
                assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
                assert!((sol.objective - z).abs() <= 1e-7, "case {case}: {} vs {z}", sol.objective);
                assert!(lp.max_violation(&sol.x) <= FEAS_TOL, "case {case}");
            }
            None => assert_eq!(sol.status, LpStatus::Infeasible, "case {case}"),
        }
    }
}

#[test]
fn duals_certify_optimality_and_bound_weakly() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    for _ in 0..300 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp).unwrap();
        if sol.status != LpStatus::Optimal {
            continue;
        }
        checked += 1;
        // the reported duals are sign-feasible and close the gap
        for (c, &y) in lp.constraints.iter().zip(&sol.duals) {
            match c.relation {
                Relation::Le => assert!(y <= 1e-9),
                Relation::Ge => assert!(y >= -1e-9),
                Relation::Eq => {}
            }
        }
        assert!((lagrangian_bound(&lp, &sol.duals) - sol.objective).abs() <= 1e-7);
        // any other sign-feasible multiplier only bounds from below
        for _ in 0..5 {
            let y: Vec<f64> = lp
                .constraints
                .iter()
                .map(|c| {
                    let v: f64 = rng.random_range(0.0..3.0);
                    match c.relation {
                        Relation::Le => -v,
                        Relation::Ge => v,
                        Relation::Eq => v - 1.5,
                    }
                })
                .collect();
            assert!(lagrangian_bound(&lp, &y) <= sol.objective + 1e-9);
        }
    }
    assert!(checked > 100);
}

#[test]
fn solves_are_bit_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let lp = random_lp(&mut rng);
        let a = solve_lp(&lp).unwrap();
        let b = solve_lp(&lp).unwrap();
        assert_eq!(a.pivots, b.pivots);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert!(a.x.iter().zip(&b.x).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn degenerate_problem_terminates() {
    // many redundant rows through the same vertex
    let mut lp = LpProblem::new(vec![-1.0, -1.0, -1.0]);
    for a in 1..=4 {
        for b in 1..=4 {
            lp.add_constraint(vec![f64::from(a), f64::from(b), 1.0], Relation::Le, 0.0).unwrap();
        }
    }
    lp.add_constraint(vec![1.0, 1.0, 1.0], Relation::Le, 0.0).unwrap();
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(sol.objective.abs() < 1e-12);
}

fn random_input(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    let rows = (0..n).map(|_| (0..d).map(|_| f64::from(rng.random_range(0..3u8))).collect()).collect();
    let labels = (0..n).map(|_| f64::from(rng.random_range(0..2u8))).collect();
    Dataset::new(rows, labels, NoiseModel::NoisyInput).unwrap()
}

#[test]
fn integrality_examples() {
    let monotone =
        Dataset::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 0.0, 1.0], NoiseModel::NoisyInput).unwrap();
    let c = check_integrality(&monotone, &ActiveSet::full(1)).unwrap();
    assert!(c.integral && c.lp_objective.abs() < 1e-9 && c.ip_objective == 0.0);

    let chain =
        Dataset::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![1.0, 0.0, 1.0], NoiseModel::NoisyInput).unwrap();
    let c = check_integrality(&chain, &ActiveSet::full(1)).unwrap();
    let oracle = brute_force_binary(&chain, &ActiveSet::full(1)).unwrap();
    assert_eq!(oracle.objective, 1.0);
    assert!(c.integral && (c.lp_objective - oracle.objective).abs() < 1e-7);
}

#[test]
fn relaxation_is_always_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for case in 0..250 {
        let n = rng.random_range(1..=12);
        let d = rng.random_range(1..=3);
        let ds = random_input(&mut rng, n, d);
        let active = ActiveSet::full(d);
        let c = check_integrality(&ds, &active).unwrap();
        let oracle = brute_force_binary(&ds, &active).unwrap();
        assert!(c.integral, "case {case}: lp {} ip {}", c.lp_objective, c.ip_objective);
        assert_eq!(c.ip_objective, oracle.objective, "case {case}");
    }
}
