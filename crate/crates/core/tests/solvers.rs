mod common;

use combidyn_core::combisolve::{
    is_totally_unimodular, solve_bruteforce, solve_greedy, solve_knapsack, solve_l0, solve_linear, solve_tu,
    ConstraintSet,
};
use combidyn_core::derivative::{DerivativeKind, Gradient};
use combidyn_core::matrix::DenseMatrix;
use combidyn_core::refrigeration::customer_constraints;
use combidyn_core::sysmodel::{payoff_binary, TimeGrid};
use combidyn_core::{BinaryVector, Error, Scheme};
use common::Bias;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grad(entries: &[f64]) -> Gradient {
    Gradient::from_entries(DerivativeKind::Standard, entries.to_vec())
}

fn bits(b: &[u8]) -> BinaryVector {
    BinaryVector::from_bits(b).unwrap()
}

fn linear_optimum(g: &Gradient, constraints: &ConstraintSet) -> Result<(BinaryVector, f64), Error> {
    let mut objective = |a: &BinaryVector| Ok(a.dot(&g.entries));
    solve_bruteforce(&mut objective, constraints, g.len())
}

fn random_entries(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Rows of consecutive ones, some negated into covering rows.
fn interval_instance(rng: &mut ChaCha8Rng, m: usize, rows: usize) -> (DenseMatrix<i64>, Vec<i64>) {
    let mut q = Vec::new();
    let mut r = Vec::new();
    for _ in 0..rows {
        let a = rng.random_range(0..m);
        let b = rng.random_range(a..m);
        let len = (b - a + 1) as i64;
        let sign = if rng.random_bool(0.25) { -1 } else { 1 };
        let mut row = vec![0i64; m];
        row[a..=b].fill(sign);
        q.push(row);
        r.push(if sign > 0 { rng.random_range(0..=len) } else { -rng.random_range(0..=len.min(2)) });
    }
    (DenseMatrix::from_rows(&q).unwrap(), r)
}

/// Node-arc incidence matrix of a random directed multigraph.
fn network_instance(rng: &mut ChaCha8Rng, m: usize, nodes: usize) -> (DenseMatrix<i64>, Vec<i64>) {
    let mut q = DenseMatrix::zeros(nodes, m);
    for arc in 0..m {
        let from = rng.random_range(0..nodes);
        let mut to = rng.random_range(0..nodes - 1);
        if to >= from {
            to += 1;
        }
        q.set(from, arc, 1);
        q.set(to, arc, -1);
    }
    let r = (0..nodes).map(|_| rng.random_range(-1..=2)).collect();
    (q, r)
}

#[test]
fn l0_examples() {
    let g = grad(&[0.5, -0.2, 0.3, 0.1]);
    assert_eq!(solve_l0(&g, 0, 2).unwrap(), bits(&[1, 0, 1, 0]));
    assert_eq!(solve_l0(&g, 3, 3).unwrap(), bits(&[1, 0, 1, 1]));
    assert_eq!(solve_l0(&grad(&[-1.0, -0.5, -2.0]), 0, 3).unwrap(), bits(&[0, 0, 0]));
    assert!(matches!(solve_l0(&g, 3, 2), Err(Error::Constraint(_))));
    assert!(matches!(solve_l0(&g, 0, 5), Err(Error::Constraint(_))));
}

#[test]
fn l0_ties_go_to_the_lower_index_and_zero_entries_stay_off() {
    let g = grad(&[0.2, 0.2, 0.0, 0.2]);
    assert_eq!(solve_l0(&g, 0, 2).unwrap(), bits(&[1, 1, 0, 0]));
    assert_eq!(solve_l0(&g, 0, 4).unwrap(), bits(&[1, 1, 0, 1]));
}

#[test]
fn tu_examples() {
    let q = DenseMatrix::from_rows(&[vec![1i64, 1]]).unwrap();
    assert_eq!(solve_tu(&grad(&[3.0, 2.0]), &q, &[1]).unwrap(), bits(&[1, 0]));
    let empty = DenseMatrix::zeros(0, 3);
    assert_eq!(solve_tu(&grad(&[1.0, -1.0, 1.0]), &empty, &[]).unwrap(), bits(&[1, 0, 1]));

    let q = DenseMatrix::from_rows(&[vec![-1i64, -1]]).unwrap();
    assert_eq!(solve_tu(&grad(&[1.0, 1.0]), &q, &[-3]), Err(Error::Infeasible));
}

#[test]
fn customer_rows_on_one_block_match_brute_force() {
    let (q, r, _) = customer_constraints(10).unwrap();
    assert!(is_totally_unimodular(&q));
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for budget in 0..=4 {
        let mut r = r.clone();
        *r.last_mut().unwrap() = budget;
        for _ in 0..20 {
            let g = grad(&(0..10).map(|_| rng.random_range(0.01..1.0)).collect::<Vec<_>>());
            let tu = solve_tu(&g, &q, &r).unwrap();
            let (best, value) = linear_optimum(&g, &ConstraintSet::Tu { q: q.clone(), r: r.clone() }).unwrap();
            assert_eq!(tu, best);
            assert_eq!(tu.dot(&g.entries), value);
        }
    }
}

#[test]
fn non_tu_rows_are_rejected() {
    // Odd cycle: the 3×3 determinant is 2.
    let q = DenseMatrix::from_rows(&[vec![1i64, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
    assert!(!is_totally_unimodular(&q));
    let set = ConstraintSet::Tu { q, r: vec![1, 1, 1] };
    assert!(set.validate(3).is_err());
}

#[test]
fn knapsack_examples() {
    let g = grad(&[6.0, 10.0, 12.0]);
    let picked = solve_knapsack(&g, &[1.0, 2.0, 3.0], 5.0).unwrap();
    assert_eq!(picked, bits(&[1, 1, 0]));
    let set = ConstraintSet::Knapsack { weights: vec![1.0, 2.0, 3.0], capacity: 5.0 };
    let (best, value) = linear_optimum(&g, &set).unwrap();
    assert_eq!((best, value), (bits(&[0, 1, 1]), 22.0));
    assert!(picked.dot(&g.entries) >= 0.5 * value);

    assert_eq!(solve_knapsack(&grad(&[1.0, 2.0, 3.0]), &[1.0, 1.0, 1.0], 3.0).unwrap(), bits(&[1, 1, 1]));
    assert_eq!(solve_knapsack(&grad(&[5.0, 0.0, 0.0]), &[4.0, 1.0, 1.0], 3.0).unwrap(), bits(&[0, 0, 0]));
    assert!(matches!(
        solve_knapsack(&grad(&[1.0]), &[1.0], -1.0),
        Err(Error::Constraint(_))
    ));
}

#[test]
fn brute_force_examples() {
    let c = [0.4, -1.0, 0.0, 2.0];
    let (best, value) = linear_optimum(&grad(&c), &ConstraintSet::unconstrained(4)).unwrap();
    // The zero entry may go either way; ties prefer the smaller vector.
    assert_eq!(best, bits(&[1, 0, 0, 1]));
    assert_eq!(value, 2.4);

    let g = TimeGrid::for_system(&Bias, 1001).unwrap();
    let mut objective = |a: &BinaryVector| payoff_binary(&Bias, a, &g, Scheme::Rk4);
    let (best, _) = solve_bruteforce(&mut objective, &ConstraintSet::L0Band { k_min: 0, k_max: 1 }, 2).unwrap();
    assert_eq!(best, bits(&[0, 1]));

    let mut constant = |_: &BinaryVector| Ok(0.0);
    assert_eq!(
        solve_bruteforce(&mut constant, &ConstraintSet::unconstrained(25), 25),
        Err(Error::EnumerationRefused { m: 25, limit: 24 })
    );
}

#[test]
fn explicit_lists() {
    let list = vec![bits(&[1, 1, 0]), bits(&[0, 0, 1]), bits(&[1, 0, 1])];
    let set = ConstraintSet::Explicit(list);
    let g = grad(&[1.0, 1.0, 1.5]);
    assert_eq!(solve_linear(&g, &set).unwrap(), bits(&[1, 0, 1]));
    assert!(!set.is_feasible(&bits(&[1, 1, 1])));
}

#[test]
fn greedy_examples() {
    let mut nothing_helps = |a: &BinaryVector| Ok(-(a.count_ones() as f64));
    let picked = solve_greedy(&mut nothing_helps, &ConstraintSet::unconstrained(5), 5).unwrap();
    assert_eq!(picked, BinaryVector::zeros(5));

    let set = ConstraintSet::Knapsack { weights: vec![2.0, 2.0], capacity: 1.0 };
    let mut any = |a: &BinaryVector| Ok(a.count_ones() as f64);
    assert_eq!(solve_greedy(&mut any, &set, 2).unwrap(), BinaryVector::zeros(2));
}

/// Weighted coverage of a random set system: monotone and submodular.
fn coverage(sets: &[Vec<usize>], weights: &[f64], alpha: &BinaryVector) -> f64 {
    let mut covered = vec![false; weights.len()];
    for i in alpha.ones_indices() {
        for &e in &sets[i] {
            covered[e] = true;
        }
    }
    covered.iter().zip(weights).filter(|(c, _)| **c).map(|(_, w)| w).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn l0_is_exact_on_the_linear_problem(seed in any::<u64>(), m in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grad(&random_entries(&mut rng, m));
        let k_min = rng.random_range(0..=m);
        let k_max = rng.random_range(k_min..=m);
        let fast = solve_l0(&g, k_min, k_max).unwrap();
        let (best, _) = linear_optimum(&g, &ConstraintSet::L0Band { k_min, k_max }).unwrap();
        prop_assert_eq!(fast, best);
    }

    #[test]
    fn tu_is_exact_on_the_linear_problem(seed in any::<u64>(), m in 1usize..=12, network in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grad(&random_entries(&mut rng, m));
        let (q, r) = if network {
            let nodes = rng.random_range(2..=6);
            network_instance(&mut rng, m, nodes)
        } else {
            let rows = rng.random_range(0..=6);
            interval_instance(&mut rng, m, rows)
        };
        let set = ConstraintSet::Tu { q: q.clone(), r: r.clone() };
        match linear_optimum(&g, &set) {
            Ok((best, _)) => prop_assert_eq!(solve_tu(&g, &q, &r).unwrap(), best),
            Err(e) => {
                prop_assert_eq!(e, Error::Infeasible);
                prop_assert_eq!(solve_tu(&g, &q, &r), Err(Error::Infeasible));
            }
        }
    }

    #[test]
    fn knapsack_reaches_half_the_optimum(seed in any::<u64>(), m in 1usize..=15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grad(&random_entries(&mut rng, m));
        let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let capacity = rng.random_range(0.0..=weights.iter().sum::<f64>());
        let picked = solve_knapsack(&g, &weights, capacity).unwrap();
        let set = ConstraintSet::Knapsack { weights, capacity };
        prop_assert!(set.is_feasible(&picked));
        let (_, optimum) = linear_optimum(&g, &set).unwrap();
        prop_assert!(picked.dot(&g.entries) >= 0.5 * optimum - 1e-12);
    }

    #[test]
    fn greedy_on_a_modular_objective_is_algorithm_one(seed in any::<u64>(), m in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = grad(&random_entries(&mut rng, m));
        let k_min = rng.random_range(0..=m);
        let k_max = rng.random_range(k_min..=m);
        let mut modular = |a: &BinaryVector| Ok(a.dot(&g.entries));
        let greedy = solve_greedy(&mut modular, &ConstraintSet::L0Band { k_min, k_max }, m).unwrap();
        prop_assert_eq!(greedy, solve_l0(&g, k_min, k_max).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_coverage_bound(seed in any::<u64>(), m in 1usize..=12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let universe = rng.random_range(1..=20);
        let weights: Vec<f64> = (0..universe).map(|_| rng.random_range(0.0..1.0)).collect();
        let sets: Vec<Vec<usize>> = (0..m)
            .map(|_| (0..universe).filter(|_| rng.random_bool(0.3)).collect())
            .collect();
        let k = rng.random_range(1..=m);
        let set = ConstraintSet::L0Band { k_min: 0, k_max: k };
        let mut objective = |a: &BinaryVector| Ok(coverage(&sets, &weights, a));
        let greedy = solve_greedy(&mut objective, &set, m).unwrap();
        prop_assert!(greedy.count_ones() <= k);
        let (_, optimum) = solve_bruteforce(&mut objective, &set, m).unwrap();
        let bound = 1.0 - (-1.0f64).exp();
        prop_assert!(coverage(&sets, &weights, &greedy) >= bound * optimum - 1e-12);
    }
}
