//! End-to-end tests of the command-line surface: output formats, exit
//! codes, and byte-for-byte determinism of emitted files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn ittg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ittg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp_path(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_instance_a_quantum_sim_finds_the_solution() {
    let out = ittg(&["solve", "--instance", "A", "--mode", "quantum-sim", "--seed", "7"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("iteration schedule: L = 0,1,2"), "{text}");
    assert!(text.contains("edges: {1,3},{2,3}"), "{text}");
    assert!(text.contains("bitstring: 110"), "{text}");
    assert!(text.contains("oracle queries"), "{text}");
}

#[test]
fn solve_instance_b_brute_force_prints_published_solution() {
    let out = ittg(&["solve", "--instance", "B", "--mode", "brute-force"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("solutions: 1"), "{text}");
    assert!(text.contains("edges: {1,4},{2,3},{2,4},{3,4}"), "{text}");
}

#[test]
fn solve_instance_d_brute_force_is_the_star() {
    let out = ittg(&["solve", "--instance", "D", "--mode", "brute-force"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("edges: {1,5},{2,5},{3,5},{4,5}"));
}

#[test]
fn solve_unsatisfiable_instance_exits_one() {
    let path = tmp_path("unsat_instance.json");
    std::fs::write(&path, r#"{ "n": 3, "m": 3, "d0": [[1,2,2],[1,3,2],[2,3,2]] }"#).unwrap();
    let out = ittg(&[
        "solve",
        "--instance",
        path.to_str().unwrap(),
        "--mode",
        "brute-force",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(stdout(&out).contains("no solution found"));
}

#[test]
fn solve_large_instance_needs_acknowledgement() {
    let out = ittg(&["solve", "--instance", "C", "--mode", "quantum-sim", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("--allow-large"), "{err}");
}

#[test]
fn histogram_instance_a_l2_holds_the_analytic_mass() {
    let path = tmp_path("hist_a_l2.csv");
    let out = ittg(&[
        "histogram",
        "--instance",
        "A",
        "--iterations",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bitstring,probability"));
    let rows: Vec<(&str, f64)> = lines
        .map(|l| {
            let (bits, p) = l.split_once(',').unwrap();
            (bits, p.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 8);
    let total: f64 = rows.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-9);
    // the unique solution bitstring e(2,3) e(1,3) e(1,2) = 110 carries
    // sin^2(5 asin(sqrt(1/8)))
    let expected = (5.0 * (0.125f64).sqrt().asin()).sin().powi(2);
    let solution_row = rows.iter().find(|(bits, _)| *bits == "110").unwrap();
    assert!((solution_row.1 - expected).abs() < 1e-9);
}

#[test]
fn histogram_l0_is_uniform() {
    let path = tmp_path("hist_a_l0.csv");
    let out = ittg(&[
        "histogram",
        "--instance",
        "A",
        "--iterations",
        "0",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    for line in csv.lines().skip(1) {
        let (_, p) = line.split_once(',').unwrap();
        let p: f64 = p.parse().unwrap();
        assert!((p - 0.125).abs() < 1e-12);
    }
}

#[test]
fn histogram_output_is_byte_identical_across_runs() {
    let a = tmp_path("hist_repeat_1.csv");
    let b = tmp_path("hist_repeat_2.csv");
    for path in [&a, &b] {
        let out = ittg(&[
            "histogram",
            "--instance",
            "B",
            "--iterations",
            "6",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // the unique solution row carries sin^2(13 asin(sqrt(1/64)))
    let csv = std::fs::read_to_string(&a).unwrap();
    let expected = (13.0 * (1.0f64 / 64.0).sqrt().asin()).sin().powi(2);
    let row = csv
        .lines()
        .find(|l| l.starts_with("111100,"))
        .expect("solution bitstring row");
    let p: f64 = row.split_once(',').unwrap().1.parse().unwrap();
    assert!((p - expected).abs() < 1e-9);
}

#[test]
fn resources_reproduce_the_published_table() {
    let expected = [
        ("A", "L = 2", "qubits = 8", "state-space dimension = 256"),
        ("B", "L = 6", "qubits = 15", "state-space dimension = 32768"),
        ("C", "L = 13", "qubits = 24", "state-space dimension = 16777216"),
        ("D", "L = 25", "qubits = 24", "state-space dimension = 16777216"),
    ];
    for (name, l, qubits, dim) in expected {
        let out = ittg(&["resources", "--instance", name]);
        assert!(out.status.success());
        let text = stdout(&out);
        assert!(text.contains(l), "instance {name}: {text}");
        assert!(text.contains(qubits), "instance {name}: {text}");
        assert!(text.contains(dim), "instance {name}: {text}");
    }
}

#[test]
fn resources_export_writes_gate_lines() {
    let path = tmp_path("oracle_a.txt");
    let out = ittg(&["resources", "--instance", "A", "--export", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# E 0..3\n"), "{text}");
    assert!(text.contains("\nCNOT "));
    assert!(text.contains("\nCCNOT "));
}

#[test]
fn rigidity_all_trees_five_vertices() {
    let out = ittg(&["rigidity", "--all-trees", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("checking all 3 trees on 5 vertices"), "{text}");
    assert!(text.contains("all rigid: true"), "{text}");
}

#[test]
fn rigidity_counterexample_without_degree_restriction() {
    let path = tmp_path("three_path.json");
    std::fs::write(&path, r#"{ "n": 3, "edges": [[1,2],[2,3]] }"#).unwrap();
    let out = ittg(&[
        "rigidity",
        "--tree-file",
        path.to_str().unwrap(),
        "--boundary",
        "1,2",
        "--no-degree-restriction",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("NOT rigid"), "{text}");
    assert!(text.contains("counterexample edges {1,2},{1,3},{2,3}"), "{text}");
}

#[test]
fn rigidity_malformed_tree_file_exits_two() {
    let path = tmp_path("broken_tree.json");
    std::fs::write(&path, "{ \"n\": 3,\n  \"edges\": [[1,2],[2,\n").unwrap();
    let out = ittg(&["rigidity", "--tree-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("line"), "parse errors carry a position: {err}");
}

#[test]
fn reduce_worked_example_counts_and_solve() {
    let cnf = tmp_path("example.cnf");
    std::fs::write(&cnf, "c worked example\np cnf 3 4\n1 2 0\n-1 -3 0\n2 -3 0\n3 0\n").unwrap();
    let inst = tmp_path("example_instance.json");
    let out = ittg(&[
        "reduce",
        cnf.to_str().unwrap(),
        "--out",
        inst.to_str().unwrap(),
        "--solve",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("instance: 17 vertices, 7 constrained pairs (all distance 3), 22 allowed edges"), "{text}");
    assert!(text.contains("truth-table verified: true"), "{text}");
    assert!(std::fs::read_to_string(&inst).unwrap().contains("\"TRUE\""));
}

#[test]
fn reduce_unsatisfiable_formula_reports_no_solutions() {
    let cnf = tmp_path("unsat.cnf");
    std::fs::write(&cnf, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let inst = tmp_path("unsat_instance_out.json");
    let out = ittg(&[
        "reduce",
        cnf.to_str().unwrap(),
        "--out",
        inst.to_str().unwrap(),
        "--solve",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("there are no solutions"));
}

#[test]
fn reduce_rejects_malformed_dimacs() {
    let cnf = tmp_path("broken.cnf");
    std::fs::write(&cnf, "p cnf x y\n1 0\n").unwrap();
    let out = ittg(&[
        "reduce",
        cnf.to_str().unwrap(),
        "--out",
        tmp_path("never.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let out = ittg(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}
