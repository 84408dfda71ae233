//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers. Criterion 9 (the full 24-qubit
//! simulation of instance C) is opt-in:
//!
//! ```text
//! cargo test -p ittg --test acceptance -- --ignored
//! ```

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ittg::circuits::{build_oracle, build_oracle_literal};
use ittg::graph::{
    brute_force_solutions, builtin_instance, classical_test, graphs_isomorphic_guarded,
    pair_count, AdjacencyVector, BoundaryDistanceData,
};
use ittg::grover::{
    analytic_success_probability, l_of_theta, solution_probability, solve_unknown_count_with,
    state_trajectory_check, GroverRunConfig, InstanceCircuits, SolveResult,
};
use ittg::reduction::{
    assignment_to_edges, decision_exhaustive_pruned, edges_to_assignment, reduce_cnf,
    satisfiable_truth_table, solve_via_decision, verify_restricted, CnfFormula,
};
use ittg::rigidity::{
    all_trees_up_to_isomorphism, check_observation_rigidity, reconstruct_tree,
    verify_boundary_rigidity, LeafDistanceMatrix, Reconstruction, Tree,
};
use ittg::statevector::apply_circuit_to_index;
use ittg::ExecMode;

fn assert_within(elapsed: Duration, budget: Duration, what: &str) {
    assert!(
        elapsed <= budget,
        "{what} took {elapsed:.2?}, over the {budget:.2?} budget"
    );
}

/// Criterion 1: the published resource table. L in {2,6,13,25} and qubit
/// counts {8,15,24,24} for instances A-D, with L derived from brute-forced
/// solution counts {1,1,4,1} through the iteration-count schedule.
#[test]
fn criterion_1_resource_table() {
    let started = Instant::now();
    let expected = [("A", 1usize, 2u64, 8usize), ("B", 1, 6, 15), ("C", 4, 13, 24), ("D", 1, 25, 24)];
    for (name, t_count, l, qubits) in expected {
        let data = builtin_instance(name).unwrap();
        let solutions = brute_force_solutions(&data).unwrap();
        assert_eq!(solutions.len(), t_count, "instance {name}: |T|");
        let n_bits = pair_count(data.n()) as u32;
        let theta = (t_count as f64 / (1u64 << n_bits) as f64).sqrt().asin();
        assert_eq!(l_of_theta(theta).unwrap(), l, "instance {name}: L");
        let oracle = build_oracle(&data).unwrap();
        assert_eq!(oracle.qubit_count(), qubits, "instance {name}: qubits");
    }
    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(1), "criterion 1");
    println!("criterion 1 PASS: L = {{2,6,13,25}}, qubits = {{8,15,24,24}} in {elapsed:.2?}");
}

/// Criterion 2: simulated success probability equals sin^2((2L+1)theta)
/// within 1e-9 for all L <= 10 on instances A and B, and the register never
/// leaves the two-state plane by more than 1e-10.
#[test]
fn criterion_2_grover_analytics() {
    let started = Instant::now();
    let mut worst_gap = 0.0f64;
    let mut worst_leak = 0.0f64;
    for name in ["A", "B"] {
        let data = builtin_instance(name).unwrap();
        let circ = InstanceCircuits::build(&data, 26, ExecMode::default()).unwrap();
        let t = brute_force_solutions(&data).unwrap().len() as u64;
        let solutions: HashSet<u64> = brute_force_solutions(&data)
            .unwrap()
            .iter()
            .map(|e| e.to_bit_value())
            .collect();
        let n_bits = pair_count(data.n()) as u32;
        for l in 0..=10u64 {
            let reg = circ.state_after(l).unwrap();
            let simulated = solution_probability(&reg, &circ, &solutions);
            let analytic = analytic_success_probability(t, n_bits, l).unwrap();
            let gap = (simulated - analytic).abs();
            worst_gap = worst_gap.max(gap);
            assert!(gap < 1e-9, "instance {name}, L={l}: gap {gap}");
        }
        let cfg = GroverRunConfig::new(data, 0);
        let report = state_trajectory_check(&cfg, 10).unwrap();
        worst_leak = worst_leak.max(report.max_leakage);
        assert!(
            report.max_leakage < 1e-10,
            "instance {name}: leakage {}",
            report.max_leakage
        );
        assert!(
            report.max_amplitude_deviation < 1e-10,
            "instance {name}: amplitude deviation {}",
            report.max_amplitude_deviation
        );
    }
    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(10), "criterion 2");
    println!(
        "criterion 2 PASS: worst probability gap {worst_gap:.2e}, worst leakage {worst_leak:.2e} in {elapsed:.2?}"
    );
}

fn random_valid_data(rng: &mut ChaCha8Rng, n: usize, m: usize) -> BoundaryDistanceData {
    let mut entries = Vec::new();
    for j in 1..=m {
        for k in j + 1..=m {
            entries.push((j, k, rng.random_range(1..=(n as u32 - 1))));
        }
    }
    let data = BoundaryDistanceData::new(n, m, &entries).unwrap();
    data.validate().unwrap();
    data
}

/// Criterion 3: exhaustive basis-mode equivalence of the oracle (both
/// builds) with the classical distance test at n = 3 and 4, on the built-in
/// instances plus 20 random valid distance tables, with every ancilla
/// returned to exactly zero.
#[test]
fn criterion_3_oracle_classical_equivalence() {
    let started = Instant::now();
    let mut tables: Vec<BoundaryDistanceData> =
        vec![builtin_instance("A").unwrap(), builtin_instance("B").unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..20 {
        let n = if i % 2 == 0 { 3 } else { 4 };
        let m = rng.random_range(2..=n);
        tables.push(random_valid_data(&mut rng, n, m));
    }
    let mut inputs_checked = 0u64;
    for data in &tables {
        let n_bits = pair_count(data.n());
        for oracle in [build_oracle(data).unwrap(), build_oracle_literal(data).unwrap()] {
            let r = oracle.layout().r_qubit();
            for e_val in 0..1u64 << n_bits {
                for r_in in 0..2u64 {
                    let input = e_val | r_in << r;
                    let out = apply_circuit_to_index(&oracle, input).unwrap();
                    let e = AdjacencyVector::from_bit_value(data.n(), e_val).unwrap();
                    let f = u64::from(classical_test(&e, data));
                    // equality of the full word asserts both the R flip and
                    // that every ancilla is exactly zero
                    assert_eq!(
                        out,
                        e_val | (r_in ^ f) << r,
                        "n={} m={} e={e_val:b}",
                        data.n(),
                        data.m()
                    );
                    inputs_checked += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(60), "criterion 3");
    println!(
        "criterion 3 PASS: {inputs_checked} oracle inputs against the classical test in {elapsed:.2?}"
    );
}

/// Criterion 4: 200 seeded end-to-end runs on instances A and B each find a
/// verified solution at least 100 times, and no run ever returns an
/// unverified measurement.
#[test]
fn criterion_4_end_to_end_success_rate() {
    let started = Instant::now();
    let mut counts = Vec::new();
    for name in ["A", "B"] {
        let data = builtin_instance(name).unwrap();
        let circ = InstanceCircuits::build(&data, 26, ExecMode::default()).unwrap();
        let mut successes = 0u32;
        for seed in 0..200u64 {
            let cfg = GroverRunConfig::new(data.clone(), seed);
            match solve_unknown_count_with(&circ, &cfg).unwrap() {
                SolveResult::Solution(o) => {
                    assert!(o.is_solution, "returned solution must be verified");
                    assert!(classical_test(&o.measured, &data));
                    successes += 1;
                }
                SolveResult::NoSolutionFound { .. } => {}
            }
        }
        assert!(
            successes >= 100,
            "instance {name}: only {successes}/200 runs found a solution"
        );
        counts.push((name, successes));
    }
    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(300), "criterion 4");
    println!("criterion 4 PASS: successes/200 = {counts:?} in {elapsed:.2?}");
}

/// Frozen scaling constants, fitted once on this implementation: the gate
/// count of either oracle build never exceeds GATE_BOUND * m * n^3 (the
/// observed n=4..8 maximum is near 12.6 with 25% headroom), and the packed
/// qubit count never exceeds QUBIT_BOUND * n^2.
const GATE_BOUND: f64 = 16.0;
const QUBIT_BOUND: f64 = 1.65;

/// Criterion 5: oracle resources at m = 4 for n = 4..8 scale as the claimed
/// O(m n^3) gates and O(n^2) qubits. Qubit ratios sit within 25% of their
/// fitted constant. Gate ratios against m n^3 keep a (n-1)^2 (n-2) / n^3
/// lower-order factor that spans a factor of two on this range for any
/// faithful compilation, so the gate check takes the frozen-upper-bound
/// form, plus a convergence check: successive ratio increments shrink,
/// which a super-cubic count would violate.
#[test]
fn criterion_5_resource_scaling() {
    let started = Instant::now();
    let m = 4usize;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut literal_ratios = Vec::new();
    let mut packed_ratios = Vec::new();
    let mut qubit_ratios = Vec::new();
    for n in 4..=8usize {
        // at least one entry at the maximal distance so depth scales with n
        let mut data = random_valid_data(&mut rng, n, m);
        while data.max_distance() != n as u32 - 1 {
            data = random_valid_data(&mut rng, n, m);
        }
        let mn3 = m as f64 * (n as f64).powi(3);
        let literal = build_oracle_literal(&data).unwrap().resource_report();
        literal_ratios.push(literal.gate_count as f64 / mn3);
        let packed = build_oracle(&data).unwrap().resource_report();
        packed_ratios.push(packed.gate_count as f64 / mn3);
        qubit_ratios.push(packed.qubit_count as f64 / (n as f64 * n as f64));
    }
    for (what, ratios) in [("literal", &literal_ratios), ("packed", &packed_ratios)] {
        for (i, r) in ratios.iter().enumerate() {
            assert!(
                *r <= GATE_BOUND,
                "{what} oracle at n={}: gate ratio {r:.3} above the frozen bound {GATE_BOUND}",
                i + 4
            );
        }
    }
    // increments of the literal ratio sequence must shrink: the count
    // converges to a cubic, rather than growing by a higher power
    let diffs: Vec<f64> = literal_ratios.windows(2).map(|w| w[1] - w[0]).collect();
    for pair in diffs.windows(2) {
        assert!(
            pair[1] < pair[0],
            "gate ratio increments must shrink, got {diffs:?}"
        );
    }
    let c = qubit_ratios.iter().sum::<f64>() / qubit_ratios.len() as f64;
    for (i, r) in qubit_ratios.iter().enumerate() {
        assert!(
            (r - c).abs() <= 0.25 * c,
            "qubit ratio {r:.4} at n={} strays more than 25% from fitted {c:.4}",
            i + 4
        );
        assert!(*r <= QUBIT_BOUND);
    }
    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(30), "criterion 5");
    println!(
        "criterion 5 PASS: literal gate ratios {literal_ratios:?}, packed {packed_ratios:?}, qubit ratios {qubit_ratios:?} in {elapsed:.2?}"
    );
}

/// Criterion 6: every tree with up to 6 vertices is rigid in its graph
/// class, and dropping the degree-1 restriction reproduces the
/// triangle-vs-path counterexample.
#[test]
fn criterion_6_tree_rigidity() {
    let started = Instant::now();
    let mut trees_checked = 0u32;
    for n in 2..=6usize {
        for tree in all_trees_up_to_isomorphism(n).unwrap() {
            let report = verify_boundary_rigidity(&tree).unwrap();
            assert!(report.rigid, "n={n}, tree {:?} not rigid", tree.adjacency().edges());
            assert!(report.distance_matching >= 1, "the tree itself must appear");
            trees_checked += 1;
        }
    }
    // the classical counterexample: boundary = an adjacent pair, degree
    // restriction dropped, and the triangle realizes the same data
    let path = AdjacencyVector::from_edges(3, &[(1, 2), (2, 3)]).unwrap();
    let report = check_observation_rigidity(&path, &[1, 2], false, ExecMode::default()).unwrap();
    assert!(!report.rigid);
    let counterexample = report.counterexample.unwrap();
    assert_eq!(counterexample.edge_count(), 3, "expected the triangle");
    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(300), "criterion 6");
    println!(
        "criterion 6 PASS: {trees_checked} trees rigid, triangle counterexample reproduced in {elapsed:.2?}"
    );
}

fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> Tree {
    loop {
        let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
        // decode the Pruefer sequence
        let mut degree = vec![1usize; n + 1];
        for &v in &seq {
            degree[v] += 1;
        }
        let mut edges = Vec::new();
        let mut rest = seq.clone();
        while !rest.is_empty() {
            let leaf = (1..=n).find(|&v| degree[v] == 1).unwrap();
            let v = rest.remove(0);
            edges.push((leaf, v));
            degree[leaf] -= 1;
            degree[v] -= 1;
        }
        let remaining: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
        edges.push((remaining[0], remaining[1]));
        let t = Tree::from_edges(n, &edges).unwrap();
        if t.leaves().len() >= 2 {
            return t;
        }
    }
}

fn assert_leaf_fixing_round_trip(t: &Tree) {
    let d = t.leaf_distance_matrix();
    let rebuilt = match reconstruct_tree(&d).unwrap() {
        Reconstruction::Realized(r) => r,
        Reconstruction::NotATreeMetric { reason } => {
            panic!("true tree metric rejected: {reason}")
        }
    };
    assert_eq!(rebuilt.n(), t.n());
    // align the original's leaves onto 1..m, internals after, then demand a
    // leaf-fixing isomorphism
    let m = t.leaves().len();
    let mut perm = vec![0usize; t.n()];
    let mut next_internal = m + 1;
    for v in 1..=t.n() {
        if let Some(i) = t.leaves().iter().position(|&l| l == v) {
            perm[v - 1] = i + 1;
        } else {
            perm[v - 1] = next_internal;
            next_internal += 1;
        }
    }
    let aligned = t.adjacency().relabel(&perm);
    let prescribed: Vec<(usize, usize)> = (1..=m).map(|i| (i, i)).collect();
    assert!(
        graphs_isomorphic_guarded(&aligned, rebuilt.adjacency(), &prescribed, 12).unwrap(),
        "reconstruction not leaf-fixing-isomorphic"
    );
}

/// Criterion 7: reconstruction round-trips 500 random trees with up to 12
/// vertices plus every tree with up to 8, and rejects invalid matrices
/// rather than mis-reconstructing.
#[test]
fn criterion_7_tree_metric_round_trip() {
    let started = Instant::now();
    let mut exhaustive = 0u32;
    for n in 2..=8usize {
        for t in all_trees_up_to_isomorphism(n).unwrap() {
            assert_leaf_fixing_round_trip(&t);
            exhaustive += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let n = rng.random_range(4..=12usize);
        let t = random_tree(&mut rng, n);
        assert_leaf_fixing_round_trip(&t);
    }
    // invalid matrices are detected, never silently realized
    let invalid = [
        LeafDistanceMatrix::from_triples(3, &[(1, 2, 1), (1, 3, 2), (2, 3, 2)]).unwrap(),
        LeafDistanceMatrix::from_triples(3, &[(1, 2, 3), (1, 3, 2), (2, 3, 2)]).unwrap(),
        LeafDistanceMatrix::from_triples(3, &[(1, 2, 8), (1, 3, 2), (2, 3, 2)]).unwrap(),
        LeafDistanceMatrix::from_triples(
            4,
            &[(1, 2, 2), (1, 3, 6), (1, 4, 2), (2, 3, 2), (2, 4, 6), (3, 4, 2)],
        )
        .unwrap(),
        LeafDistanceMatrix::from_triples(2, &[(1, 2, 0)]).unwrap(),
    ];
    for (i, d) in invalid.iter().enumerate() {
        assert!(
            matches!(reconstruct_tree(d).unwrap(), Reconstruction::NotATreeMetric { .. }),
            "invalid matrix {i} was accepted"
        );
    }
    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(120), "criterion 7");
    println!(
        "criterion 7 PASS: {exhaustive} exhaustive + 500 random round trips, {} rejections in {elapsed:.2?}",
        invalid.len()
    );
}

fn check_reduction_equivalence(f: &CnfFormula) {
    let inst = reduce_cnf(f).unwrap();
    let sat = satisfiable_truth_table(f).unwrap();
    let solvable = decision_exhaustive_pruned(&inst);
    assert_eq!(sat, solvable, "equivalence fails for {f:?}");
    if sat {
        // forward witness: some satisfying assignment produces a solution
        let n = f.num_vars();
        let witness = (0..1u64 << n)
            .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
            .find(|a| f.evaluate(a))
            .unwrap();
        let edges = assignment_to_edges(f, &witness).unwrap();
        assert!(verify_restricted(&inst, &edges).unwrap(), "forward witness fails for {f:?}");

        // Algorithm 9 with its call bound, then the backward witness
        let bound = inst.free_edges().len() + 1;
        let solve = solve_via_decision(&inst, decision_exhaustive_pruned).unwrap();
        assert!(solve.decision_calls <= bound, "call bound violated for {f:?}");
        let edges = solve.edges.expect("solvable instance");
        let assignment = edges_to_assignment(f, &edges).unwrap();
        assert!(f.evaluate(&assignment), "backward witness fails for {f:?}");
    } else {
        let solve = solve_via_decision(&inst, decision_exhaustive_pruned).unwrap();
        assert!(solve.edges.is_none());
        assert_eq!(solve.decision_calls, 1, "unsolvable costs exactly one call");
    }
}

/// Criterion 8: satisfiability equals gadget solvability, exhaustively for
/// width <= 2 formulas on <= 3 variables with <= 4 clauses plus 200 random
/// formulas, with witness maps verified in both directions and the
/// decision-to-search call bound respected on every run.
#[test]
fn criterion_8_reduction_equivalence() {
    let started = Instant::now();
    // every width-1 and width-2 clause over 3 variables
    let mut clause_types: Vec<Vec<i32>> = Vec::new();
    let literals = [1i32, -1, 2, -2, 3, -3];
    for &l in &literals {
        clause_types.push(vec![l]);
    }
    for i in 0..literals.len() {
        for j in i + 1..literals.len() {
            clause_types.push(vec![literals[i], literals[j]]);
        }
    }
    assert_eq!(clause_types.len(), 21);

    // all nonempty clause subsets of size <= 4
    let mut formulas = Vec::new();
    let t = clause_types.len();
    for a in 0..t {
        formulas.push(vec![a]);
        for b in a + 1..t {
            formulas.push(vec![a, b]);
            for c in b + 1..t {
                formulas.push(vec![a, b, c]);
                for d in c + 1..t {
                    formulas.push(vec![a, b, c, d]);
                }
            }
        }
    }
    let exhaustive_count = formulas.len();

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        formulas.par_iter().for_each(|subset| {
            let clauses: Vec<Vec<i32>> = subset.iter().map(|&i| clause_types[i].clone()).collect();
            check_reduction_equivalence(&CnfFormula::new(3, clauses).unwrap());
        });
    }
    #[cfg(not(feature = "parallel"))]
    for subset in &formulas {
        let clauses: Vec<Vec<i32>> = subset.iter().map(|&i| clause_types[i].clone()).collect();
        check_reduction_equivalence(&CnfFormula::new(3, clauses).unwrap());
    }

    // 200 random formulas, N <= 5, M <= 6
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let random_formulas: Vec<CnfFormula> = (0..200)
        .map(|_| {
            let n = rng.random_range(1..=5usize);
            let m = rng.random_range(1..=6usize);
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    let width = rng.random_range(1..=3.min(n));
                    (0..width)
                        .map(|_| {
                            let v = rng.random_range(1..=n) as i32;
                            if rng.random() { v } else { -v }
                        })
                        .collect()
                })
                .collect();
            CnfFormula::new(n, clauses).unwrap()
        })
        .collect();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        random_formulas.par_iter().for_each(check_reduction_equivalence);
    }
    #[cfg(not(feature = "parallel"))]
    random_formulas.iter().for_each(check_reduction_equivalence);

    let elapsed = started.elapsed();
    assert_within(elapsed, Duration::from_secs(300), "criterion 8");
    println!(
        "criterion 8 PASS: {exhaustive_count} exhaustive + 200 random formulas in {elapsed:.2?}"
    );
}

/// Criterion 9 (opt-in): the full 24-qubit simulation of instance C puts
/// the analytic probability mass sin^2(27 asin(sqrt(4/1024))) on its four
/// solutions after L = 13 iterations.
#[test]
#[ignore = "24-qubit statevector run: ~600 MiB and minutes of compute"]
fn criterion_9_instance_c_full_simulation() {
    let started = Instant::now();
    let data = builtin_instance("C").unwrap();
    let circ = InstanceCircuits::build(&data, 26, ExecMode::default()).unwrap();
    let solutions: HashSet<u64> = brute_force_solutions(&data)
        .unwrap()
        .iter()
        .map(|e| e.to_bit_value())
        .collect();
    assert_eq!(solutions.len(), 4);
    let reg = circ.state_after(13).unwrap();
    let simulated = solution_probability(&reg, &circ, &solutions);
    let analytic = analytic_success_probability(4, 10, 13).unwrap();
    assert!(
        (simulated - analytic).abs() < 1e-6,
        "simulated {simulated} vs analytic {analytic}"
    );
    println!(
        "criterion 9 PASS: instance C solution mass {simulated:.9} vs analytic {analytic:.9} in {:.2?}",
        started.elapsed()
    );
}
