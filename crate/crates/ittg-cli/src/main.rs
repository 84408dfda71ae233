//! Command-line surface: load instances, run the classical and quantum
//! solvers, emit measurement histograms and resource tables, run rigidity
//! checks, and drive the CNF reduction pipeline.
//!
//! Exit codes: 0 success/solution, 1 verified no-solution, 2 usage or parse
//! error, 3 guard refusal.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::RngCore;

use ittg::circuits::{build_diffusion, build_oracle};
use ittg::graph::{
    brute_force_solutions, builtin_instance, pair_count, parse_instance, AdjacencyVector,
    BoundaryDistanceData,
};
use ittg::grover::{
    edge_register_distribution, iteration_schedule, l_of_theta, solve_unknown_count_with,
    GroverRunConfig, InstanceCircuits, SolveResult,
};
use ittg::reduction::{
    decision_exhaustive_pruned, edges_to_assignment, gadget_summary, reduce_cnf,
    solve_via_decision, CnfFormula,
};
use ittg::rigidity::{
    all_trees_up_to_isomorphism, check_observation_rigidity, parse_tree, verify_boundary_rigidity,
    Tree,
};
use ittg::ExecMode;

/// Instances above this register width must be acknowledged explicitly.
const LARGE_REGISTER_QUBITS: usize = 20;
const ALLOW_LARGE_GUARD: usize = 30;

#[derive(Parser)]
#[command(name = "ittg", version, about = "Inverse travel time problems on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMode {
    QuantumSim,
    BruteForce,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance, by quantum-circuit simulation or brute force.
    Solve {
        /// Built-in instance name (A|B|C|D) or a path to an instance file.
        #[arg(long)]
        instance: String,
        #[arg(long, value_enum, default_value = "quantum-sim")]
        mode: SolveMode,
        /// Seed for all randomness; derived from entropy (and printed) if absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Acknowledge statevector registers above 20 qubits.
        #[arg(long)]
        allow_large: bool,
    },
    /// Write the measurement distribution after a fixed iteration count.
    Histogram {
        #[arg(long)]
        instance: String,
        /// Number of search iterations L.
        #[arg(long)]
        iterations: u64,
        /// Output CSV path (rows: bitstring,probability).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        allow_large: bool,
    },
    /// Print the iteration count, qubit total, and gate histogram.
    Resources {
        #[arg(long)]
        instance: String,
        /// Also write the oracle gate list to this path.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Boundary-rigidity checks for trees.
    Rigidity {
        /// Tree file (JSON: n, edges).
        #[arg(long, conflicts_with = "all_trees")]
        tree_file: Option<PathBuf>,
        /// Check every tree with this many vertices.
        #[arg(long)]
        all_trees: Option<usize>,
        /// Comma-separated boundary vertices overriding the leaf set.
        #[arg(long, requires = "tree_file")]
        boundary: Option<String>,
        /// Enumerate without the degree-1 restriction on the boundary.
        #[arg(long, requires = "tree_file")]
        no_degree_restriction: bool,
    },
    /// Build the restricted instance from a DIMACS CNF formula.
    Reduce {
        /// DIMACS CNF input file.
        cnf: PathBuf,
        /// Output path for the instance file.
        #[arg(long)]
        out: PathBuf,
        /// Also solve the instance and recover a satisfying assignment.
        #[arg(long)]
        solve: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn guard(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match cli.command {
        Command::Solve { instance, mode, seed, allow_large } => {
            cmd_solve(&instance, mode, seed, allow_large)
        }
        Command::Histogram { instance, iterations, out, allow_large } => {
            cmd_histogram(&instance, iterations, &out, allow_large)
        }
        Command::Resources { instance, export } => cmd_resources(&instance, export.as_deref()),
        Command::Rigidity { tree_file, all_trees, boundary, no_degree_restriction } => {
            cmd_rigidity(tree_file.as_deref(), all_trees, boundary.as_deref(), no_degree_restriction)
        }
        Command::Reduce { cnf, out, solve } => cmd_reduce(&cnf, &out, solve),
    };
    match result {
        Ok(code) => {
            println!("duration: {:.1?}", started.elapsed());
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_instance(spec: &str) -> Result<BoundaryDistanceData, Failure> {
    if let Some(data) = builtin_instance(spec) {
        return Ok(data);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::parse(format!("cannot read instance {spec:?}: {e}")))?;
    let data = parse_instance(&text).map_err(|e| Failure::parse(format!("{spec}: {e}")))?;
    data.validate()
        .map_err(|v| Failure::parse(format!("{spec}: invalid distance data: {v}")))?;
    Ok(data)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s = rand::rng().next_u64();
            println!("seed: {s} (derived from entropy)");
            s
        }
    }
}

fn build_circuits(
    data: &BoundaryDistanceData,
    allow_large: bool,
) -> Result<InstanceCircuits, Failure> {
    let probe = build_oracle(data).map_err(|e| Failure::parse(e.to_string()))?;
    let qubits = probe.qubit_count();
    if qubits > LARGE_REGISTER_QUBITS && !allow_large {
        let bytes = (1u64 << qubits) * 16 * 2;
        return Err(Failure::guard(format!(
            "instance needs a {qubits}-qubit register (about {} MiB of amplitudes); \
             rerun with --allow-large, or use --mode brute-force",
            bytes >> 20
        )));
    }
    if qubits > LARGE_REGISTER_QUBITS {
        println!(
            "large register: {qubits} qubits, about {} MiB of working memory",
            ((1u64 << qubits) * 16 * 2) >> 20
        );
    }
    InstanceCircuits::build(data, ALLOW_LARGE_GUARD, ExecMode::default())
        .map_err(|e| Failure::guard(e.to_string()))
}

fn format_edges(e: &AdjacencyVector) -> String {
    let parts: Vec<String> = e.edges().iter().map(|(j, k)| format!("{{{j},{k}}}")).collect();
    parts.join(",")
}

fn cmd_solve(
    instance: &str,
    mode: SolveMode,
    seed: Option<u64>,
    allow_large: bool,
) -> Result<u8, Failure> {
    let data = load_instance(instance)?;
    println!("command: solve");
    println!("instance: {instance} (n={}, m={})", data.n(), data.m());
    match mode {
        SolveMode::BruteForce => {
            let solutions =
                brute_force_solutions(&data).map_err(|e| Failure::guard(e.to_string()))?;
            println!(
                "mode: brute-force over 2^{} adjacency vectors",
                pair_count(data.n())
            );
            println!("solutions: {}", solutions.len());
            match solutions.first() {
                Some(first) => {
                    println!("edges: {}", format_edges(first));
                    println!("bitstring: {}", first.to_measurement_string());
                    Ok(0)
                }
                None => {
                    println!("no solution found");
                    Ok(1)
                }
            }
        }
        SolveMode::QuantumSim => {
            let seed = resolve_seed(seed);
            println!("mode: quantum-sim, seed {seed}");
            let schedule = iteration_schedule(pair_count(data.n()) as u32)
                .map_err(|e| Failure::parse(e.to_string()))?;
            let rendered: Vec<String> = schedule.iter().map(|l| l.to_string()).collect();
            println!("iteration schedule: L = {}", rendered.join(","));
            let circuits = build_circuits(&data, allow_large)?;
            let cfg = GroverRunConfig::new(data, seed);
            let result =
                solve_unknown_count_with(&circuits, &cfg).map_err(|e| Failure::guard(e.to_string()))?;
            match result {
                SolveResult::Solution(o) => {
                    println!("edges: {}", format_edges(&o.measured));
                    println!("bitstring: {}", o.measured.to_measurement_string());
                    println!("iterations used in the final run: L={}", o.l_used);
                    println!(
                        "oracle queries: quantum {} classical {}",
                        o.oracle_queries_quantum, o.oracle_queries_classical
                    );
                    Ok(0)
                }
                SolveResult::NoSolutionFound {
                    oracle_queries_quantum,
                    oracle_queries_classical,
                } => {
                    println!("no solution found");
                    println!(
                        "oracle queries: quantum {oracle_queries_quantum} classical {oracle_queries_classical}"
                    );
                    Ok(1)
                }
            }
        }
    }
}

fn cmd_histogram(
    instance: &str,
    iterations: u64,
    out: &Path,
    allow_large: bool,
) -> Result<u8, Failure> {
    let data = load_instance(instance)?;
    println!("command: histogram");
    println!("instance: {instance}, L={iterations}");
    let circuits = build_circuits(&data, allow_large)?;
    let reg = circuits
        .state_after(iterations)
        .map_err(|e| Failure::guard(e.to_string()))?;
    let n_bits = pair_count(data.n());
    let dist = edge_register_distribution(&reg, n_bits);
    let total: f64 = dist.iter().sum();
    assert!(
        (total - 1.0).abs() < 1e-9,
        "histogram mass {total} strays from 1"
    );
    let mut csv = String::from("bitstring,probability\n");
    for (value, p) in dist.iter().enumerate() {
        let e = AdjacencyVector::from_bit_value(data.n(), value as u64).unwrap();
        let _ = writeln!(csv, "{},{}", e.to_measurement_string(), p);
    }
    std::fs::write(out, csv)
        .map_err(|e| Failure::parse(format!("cannot write {}: {e}", out.display())))?;
    let best = dist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let e = AdjacencyVector::from_bit_value(data.n(), best.0 as u64).unwrap();
    println!("rows: {}", dist.len());
    println!("most likely bitstring: {} (p={})", e.to_measurement_string(), best.1);
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_resources(instance: &str, export: Option<&Path>) -> Result<u8, Failure> {
    let data = load_instance(instance)?;
    println!("command: resources");
    println!("instance: {instance} (n={}, m={})", data.n(), data.m());
    let oracle = build_oracle(&data).map_err(|e| Failure::parse(e.to_string()))?;
    let diffusion = build_diffusion(oracle.layout()).map_err(|e| Failure::parse(e.to_string()))?;

    let n_bits = pair_count(data.n()) as u32;
    let solutions = brute_force_solutions(&data).map_err(|e| Failure::guard(e.to_string()))?;
    let t = solutions.len() as u64;
    println!("solutions |T| = {t} (brute force over 2^{n_bits})");
    if t > 0 && t < 1 << n_bits {
        let theta = (t as f64 / (1u64 << n_bits) as f64).sqrt().asin();
        let l = l_of_theta(theta).map_err(|e| Failure::parse(e.to_string()))?;
        println!("L = {l}");
    } else {
        println!("L undefined (|T| outside (0, 2^N))");
    }
    let qubits = oracle.qubit_count();
    println!("qubits = {qubits}");
    println!("state-space dimension = {}", 1u64 << qubits);
    let or = oracle.resource_report();
    println!(
        "oracle gates: total {} (NOT {}, CNOT {}, CCNOT {})",
        or.gate_count, or.not_count, or.cnot_count, or.ccnot_count
    );
    let dr = diffusion.resource_report();
    println!(
        "diffusion gates: total {} (NOT {}, CNOT {}, CCNOT {}, H {})",
        dr.gate_count, dr.not_count, dr.cnot_count, dr.ccnot_count, dr.h_count
    );
    if let Some(path) = export {
        std::fs::write(path, oracle.export_text())
            .map_err(|e| Failure::parse(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn describe_rigidity(tree: Option<&Tree>, report: &ittg::rigidity::RigidityReport) {
    if let Some(t) = tree {
        println!(
            "tree: n={} edges {}",
            t.n(),
            format_edges(t.adjacency())
        );
    }
    println!(
        "boundary: {:?}; enumerated {} graphs, {} degree-admissible, {} distance-matching, {} non-isomorphic",
        report.boundary,
        report.enumerated,
        report.degree_admissible,
        report.distance_matching,
        report.non_isomorphic
    );
    if report.rigid {
        println!("verdict: rigid");
    } else {
        let ce = report.counterexample.as_ref().unwrap();
        println!("verdict: NOT rigid; counterexample edges {}", format_edges(ce));
    }
}

fn cmd_rigidity(
    tree_file: Option<&Path>,
    all_trees: Option<usize>,
    boundary: Option<&str>,
    no_degree_restriction: bool,
) -> Result<u8, Failure> {
    println!("command: rigidity");
    if let Some(n) = all_trees {
        let trees = all_trees_up_to_isomorphism(n)
            .map_err(|e| Failure::guard(e.to_string()))?;
        println!("checking all {} trees on {n} vertices", trees.len());
        let mut all_rigid = true;
        for t in &trees {
            let report = verify_boundary_rigidity(t).map_err(|e| Failure::guard(e.to_string()))?;
            describe_rigidity(Some(t), &report);
            all_rigid &= report.rigid;
        }
        println!("all rigid: {all_rigid}");
        return Ok(0);
    }
    let path = tree_file.ok_or_else(|| Failure::parse("pass --tree-file or --all-trees"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    let tree = parse_tree(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    let boundary_vec: Vec<usize> = match boundary {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Failure::parse(format!("bad boundary vertex {s:?}: {e}")))
            })
            .collect::<Result<_, _>>()?,
        None => tree.leaves().to_vec(),
    };
    let report = check_observation_rigidity(
        tree.adjacency(),
        &boundary_vec,
        !no_degree_restriction,
        ExecMode::default(),
    )
    .map_err(|e| Failure::guard(e.to_string()))?;
    describe_rigidity(Some(&tree), &report);
    Ok(0)
}

fn cmd_reduce(cnf: &Path, out: &Path, solve: bool) -> Result<u8, Failure> {
    println!("command: reduce");
    let text = std::fs::read_to_string(cnf)
        .map_err(|e| Failure::parse(format!("cannot read {}: {e}", cnf.display())))?;
    let formula = CnfFormula::parse_dimacs(&text)
        .map_err(|e| Failure::parse(format!("{}: {e}", cnf.display())))?;
    let instance = reduce_cnf(&formula).map_err(|e| Failure::parse(e.to_string()))?;
    let summary = gadget_summary(&formula).map_err(|e| Failure::parse(e.to_string()))?;
    println!(
        "formula: {} variables, {} clauses",
        formula.num_vars(),
        formula.clauses().len()
    );
    println!(
        "instance: {} vertices, {} constrained pairs (all distance 3), {} allowed edges",
        summary.vertices,
        summary.constrained_pairs,
        summary.total_edges()
    );
    println!(
        "edge buckets: TRUE-literal {}, variable ladders {}, positive membership {}, negated membership {}",
        summary.edge_buckets[0],
        summary.edge_buckets[1],
        summary.edge_buckets[2],
        summary.edge_buckets[3]
    );
    std::fs::write(out, instance.to_json())
        .map_err(|e| Failure::parse(format!("cannot write {}: {e}", out.display())))?;
    println!("wrote {}", out.display());

    if solve {
        let solved = solve_via_decision(&instance, decision_exhaustive_pruned)
            .map_err(|e| Failure::parse(e.to_string()))?;
        println!("decision calls: {}", solved.decision_calls);
        match solved.edges {
            Some(edges) => {
                let named: Vec<String> = edges
                    .iter()
                    .map(|&(x, y)| {
                        format!("{{{},{}}}", instance.vertex_name(x), instance.vertex_name(y))
                    })
                    .collect();
                println!("solution edges: {}", named.join(","));
                let assignment = edges_to_assignment(&formula, &edges)
                    .map_err(|e| Failure::parse(e.to_string()))?;
                let rendered: Vec<String> = assignment
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| format!("u{}={}", i + 1, v))
                    .collect();
                println!("assignment: {}", rendered.join(" "));
                println!("truth-table verified: {}", formula.evaluate(&assignment));
            }
            None => {
                println!("there are no solutions");
                return Ok(1);
            }
        }
    }
    Ok(0)
}
