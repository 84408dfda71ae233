//! Grover driver: the iteration-count schedule L(θ), single runs with a
//! fixed L, the unknown-solution-count outer loop, the confidence wrapper,
//! and analytic reference formulas checked against the simulation.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuits::{build_diffusion, build_oracle, Circuit, CircuitError, Gate, QubitLayout};
use crate::exec::ExecMode;
use crate::graph::{
    brute_force_solutions, classical_test, pair_count, AdjacencyVector, BoundaryDistanceData,
    GraphError,
};
use crate::statevector::{BasisPermutation, QuantumRegister, StateError, DEFAULT_MAX_QUBITS};

#[derive(Debug, Error)]
pub enum GroverError {
    #[error("instance needs {needed} qubits, above the statevector guard {guard}")]
    GuardExceeded { needed: usize, guard: usize },
    #[error("theta = {0} outside (0, pi/2)")]
    ThetaOutOfRange(f64),
    #[error("solution count {t} outside (0, 2^{n})")]
    SolutionCountOutOfRange { t: u64, n: u32 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Instance plus run parameters for the quantum search.
#[derive(Debug, Clone)]
pub struct GroverRunConfig {
    pub data: BoundaryDistanceData,
    pub seed: u64,
    pub max_statevector_qubits: usize,
    pub record_trajectory: bool,
    pub exec: ExecMode,
}

impl GroverRunConfig {
    pub fn new(data: BoundaryDistanceData, seed: u64) -> Self {
        GroverRunConfig {
            data,
            seed,
            max_statevector_qubits: DEFAULT_MAX_QUBITS,
            record_trajectory: false,
            exec: ExecMode::default(),
        }
    }
}

/// One measured run: the sampled adjacency vector, its classical
/// verification, and query accounting.
#[derive(Debug, Clone)]
pub struct GroverOutcome {
    pub measured: AdjacencyVector,
    pub is_solution: bool,
    pub l_used: u64,
    pub oracle_queries_quantum: u64,
    pub oracle_queries_classical: u64,
    pub success_probability_trace: Option<Vec<TracePoint>>,
}

/// (L, analytic success probability, simulated success probability).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub l: u64,
    pub analytic: f64,
    pub simulated: f64,
}

#[derive(Debug, Clone)]
pub enum SolveResult {
    Solution(GroverOutcome),
    NoSolutionFound {
        oracle_queries_quantum: u64,
        oracle_queries_classical: u64,
    },
}

impl SolveResult {
    pub fn solution(&self) -> Option<&GroverOutcome> {
        match self {
            SolveResult::Solution(o) => Some(o),
            SolveResult::NoSolutionFound { .. } => None,
        }
    }

    pub fn query_counts(&self) -> (u64, u64) {
        match self {
            SolveResult::Solution(o) => (o.oracle_queries_quantum, o.oracle_queries_classical),
            SolveResult::NoSolutionFound {
                oracle_queries_quantum,
                oracle_queries_classical,
            } => (*oracle_queries_quantum, *oracle_queries_classical),
        }
    }
}

/// The iteration-count schedule: ceil(pi/4θ - 1/2) for small θ, one round
/// on [pi/8, pi/4), none from pi/4 up.
pub fn l_of_theta(theta: f64) -> Result<u64, GroverError> {
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(GroverError::ThetaOutOfRange(theta));
    }
    Ok(if theta < PI / 8.0 {
        (PI / (4.0 * theta) - 0.5).ceil() as u64
    } else if theta < PI / 4.0 {
        1
    } else {
        0
    })
}

/// sin^2((2L+1) asin(sqrt(T/2^N))): the exact success probability after L
/// iterations when the search space holds T solutions.
pub fn analytic_success_probability(t_count: u64, n_bits: u32, l: u64) -> Result<f64, GroverError> {
    let dim = 1u64 << n_bits;
    if t_count == 0 || t_count >= dim {
        return Err(GroverError::SolutionCountOutOfRange { t: t_count, n: n_bits });
    }
    let theta = (t_count as f64 / dim as f64).sqrt().asin();
    Ok(((2 * l + 1) as f64 * theta).sin().powi(2))
}

/// A diffusion circuit split into Hadamard stretches and tabulated
/// permutation runs: the gate list is authoritative, the tables are just a
/// faster carrier for its long H-free middle.
enum Segment {
    Gates(Vec<Gate>),
    Permutation(BasisPermutation),
}

fn plan_segments(
    circuit: &Circuit,
    qubits: usize,
    exec: ExecMode,
) -> Result<Vec<Segment>, GroverError> {
    // below this length a tabulated run saves nothing
    const MIN_RUN: usize = 8;
    let mut segments = Vec::new();
    let mut plain: Vec<Gate> = Vec::new();
    let mut run: Vec<Gate> = Vec::new();
    let flush_run = |plain: &mut Vec<Gate>,
                     run: &mut Vec<Gate>,
                     segments: &mut Vec<Segment>|
     -> Result<(), GroverError> {
        if run.len() >= MIN_RUN {
            if !plain.is_empty() {
                segments.push(Segment::Gates(std::mem::take(plain)));
            }
            let carrier = Circuit::new(
                QubitLayout::fragment(qubits),
                std::mem::take(run),
                vec![],
            );
            segments.push(Segment::Permutation(BasisPermutation::from_circuit(
                &carrier, qubits, exec,
            )?));
        } else {
            plain.append(run);
        }
        Ok(())
    };
    for &g in circuit.gates() {
        if matches!(g, Gate::H(_)) {
            flush_run(&mut plain, &mut run, &mut segments)?;
            plain.push(g);
        } else {
            run.push(g);
        }
    }
    flush_run(&mut plain, &mut run, &mut segments)?;
    if !plain.is_empty() {
        segments.push(Segment::Gates(plain));
    }
    Ok(segments)
}

/// Oracle, diffusion, and their tabulated basis permutations, built once
/// per instance and reused across runs.
pub struct InstanceCircuits {
    layout: QubitLayout,
    oracle: Circuit,
    oracle_perm: BasisPermutation,
    diffusion: Circuit,
    diffusion_plan: Vec<Segment>,
    exec: ExecMode,
}

impl InstanceCircuits {
    pub fn build(data: &BoundaryDistanceData, guard: usize, exec: ExecMode) -> Result<Self, GroverError> {
        let oracle = build_oracle(data)?;
        let layout = oracle.layout().clone();
        if layout.qubit_count() > guard {
            return Err(GroverError::GuardExceeded { needed: layout.qubit_count(), guard });
        }
        let diffusion = build_diffusion(&layout)?;
        let diffusion_plan = plan_segments(&diffusion, layout.qubit_count(), exec)?;
        let oracle_perm = BasisPermutation::from_circuit(&oracle, layout.qubit_count(), exec)?;
        Ok(InstanceCircuits { layout, oracle, oracle_perm, diffusion, diffusion_plan, exec })
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn oracle(&self) -> &Circuit {
        &self.oracle
    }

    pub fn diffusion(&self) -> &Circuit {
        &self.diffusion
    }

    /// |0..0> -> NOT R -> H on R and every E qubit.
    pub fn initial_state(&self) -> Result<QuantumRegister, GroverError> {
        let q = self.layout.qubit_count();
        let mut reg = QuantumRegister::with_guard(q, q)?.with_exec_mode(self.exec);
        reg.apply_gate(Gate::Not(self.layout.r_qubit()))?;
        reg.apply_gate(Gate::H(self.layout.r_qubit()))?;
        for e in 0..self.layout.e_count() {
            reg.apply_gate(Gate::H(e))?;
        }
        Ok(reg)
    }

    pub fn apply_iteration(&self, reg: &mut QuantumRegister) -> Result<(), GroverError> {
        reg.apply_permutation(&self.oracle_perm)?;
        for segment in &self.diffusion_plan {
            match segment {
                Segment::Gates(g) => reg.apply_gates(g)?,
                Segment::Permutation(p) => reg.apply_permutation(p)?,
            }
        }
        Ok(())
    }

    /// State immediately before measurement after `l` iterations.
    pub fn state_after(&self, l: u64) -> Result<QuantumRegister, GroverError> {
        let mut reg = self.initial_state()?;
        for _ in 0..l {
            self.apply_iteration(&mut reg)?;
        }
        Ok(reg)
    }
}

/// Probability mass on each value of the E register (marginal over R and
/// the ancillae).
pub fn edge_register_distribution(reg: &QuantumRegister, n_bits: usize) -> Vec<f64> {
    let mask = (1u64 << n_bits) - 1;
    let mut out = vec![0.0; 1 << n_bits];
    for (idx, amp) in reg.amplitudes().iter().enumerate() {
        out[(idx as u64 & mask) as usize] += amp.norm_sqr();
    }
    out
}

fn measure_edges(
    circ: &InstanceCircuits,
    data: &BoundaryDistanceData,
    reg: &QuantumRegister,
    seed: u64,
) -> (AdjacencyVector, bool) {
    let sample = reg.measure_all(seed);
    let e_val = sample.to_index() & ((1u64 << circ.layout.e_count()) - 1);
    let measured = AdjacencyVector::from_bit_value(data.n(), e_val).unwrap();
    let ok = classical_test(&measured, data);
    (measured, ok)
}

/// One run with a fixed iteration count: prepare, iterate L times, measure
/// the E register, and verify the sample classically.
pub fn grover_l(cfg: &GroverRunConfig, l: u64) -> Result<GroverOutcome, GroverError> {
    let circ = InstanceCircuits::build(&cfg.data, cfg.max_statevector_qubits, cfg.exec)?;
    grover_l_with(&circ, cfg, l, cfg.seed)
}

pub fn grover_l_with(
    circ: &InstanceCircuits,
    cfg: &GroverRunConfig,
    l: u64,
    seed: u64,
) -> Result<GroverOutcome, GroverError> {
    let mut trace = None;
    let reg = if cfg.record_trajectory {
        let solutions = solution_values(&cfg.data)?;
        let n_bits = pair_count(cfg.data.n()) as u32;
        let t = solutions.len() as u64;
        let mut points = Vec::new();
        let mut reg = circ.initial_state()?;
        for step in 0..=l {
            if step > 0 {
                circ.apply_iteration(&mut reg)?;
            }
            let simulated = solution_probability(&reg, circ, &solutions);
            let analytic = if t == 0 || t >= 1 << n_bits {
                f64::NAN
            } else {
                analytic_success_probability(t, n_bits, step)?
            };
            points.push(TracePoint { l: step, analytic, simulated });
        }
        trace = Some(points);
        reg
    } else {
        circ.state_after(l)?
    };
    let (measured, is_solution) = measure_edges(circ, &cfg.data, &reg, seed);
    Ok(GroverOutcome {
        measured,
        is_solution,
        l_used: l,
        oracle_queries_quantum: l,
        oracle_queries_classical: 1,
        success_probability_trace: trace,
    })
}

fn solution_values(data: &BoundaryDistanceData) -> Result<HashSet<u64>, GroverError> {
    Ok(brute_force_solutions(data)?
        .iter()
        .map(|e| e.to_bit_value())
        .collect())
}

/// Probability that measuring the E register yields a solution.
pub fn solution_probability(
    reg: &QuantumRegister,
    circ: &InstanceCircuits,
    solutions: &HashSet<u64>,
) -> f64 {
    reg.probability_of(circ.layout.e_count(), |e| solutions.contains(&e))
}

/// The iteration counts the unknown-count solver tries in order: L = 0, 1,
/// 2, then L(theta_K) for the guessed solution counts K = 2^(N-4), ..., 2,
/// 1 (an empty tail when N < 4).
pub fn iteration_schedule(n_bits: u32) -> Result<Vec<u64>, GroverError> {
    let mut schedule: Vec<u64> = vec![0, 1, 2];
    if n_bits >= 4 {
        for j in (0..=n_bits - 4).rev() {
            let k = 1u64 << j;
            let theta = (k as f64 / (1u64 << n_bits) as f64).sqrt().asin();
            schedule.push(l_of_theta(theta)?);
        }
    }
    Ok(schedule)
}

/// The unknown-solution-count outer loop: runs the iteration schedule,
/// verifying every sample classically; the first verified solution wins.
pub fn solve_unknown_count(cfg: &GroverRunConfig) -> Result<SolveResult, GroverError> {
    let circ = InstanceCircuits::build(&cfg.data, cfg.max_statevector_qubits, cfg.exec)?;
    solve_unknown_count_with(&circ, cfg)
}

pub fn solve_unknown_count_with(
    circ: &InstanceCircuits,
    cfg: &GroverRunConfig,
) -> Result<SolveResult, GroverError> {
    let n_bits = pair_count(cfg.data.n()) as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut q_total = 0u64;
    let mut c_total = 0u64;

    for l in iteration_schedule(n_bits)? {
        let outcome = grover_l_with(circ, cfg, l, rng.random())?;
        q_total += outcome.oracle_queries_quantum;
        c_total += outcome.oracle_queries_classical;
        if outcome.is_solution {
            return Ok(SolveResult::Solution(GroverOutcome {
                oracle_queries_quantum: q_total,
                oracle_queries_classical: c_total,
                ..outcome
            }));
        }
    }
    Ok(SolveResult::NoSolutionFound {
        oracle_queries_quantum: q_total,
        oracle_queries_classical: c_total,
    })
}

/// Repeats the unknown-count solver with independent seeds until a solution
/// appears, at most ceil(log2(1/delta)) + 1 times; the failure probability
/// on solvable data is then below delta.
pub fn run_with_confidence(cfg: &GroverRunConfig, delta: f64) -> Result<SolveResult, GroverError> {
    assert!(delta > 0.0 && delta < 1.0, "delta must be in (0,1)");
    let reps = (1.0 / delta).log2().ceil() as u64 + 1;
    let circ = InstanceCircuits::build(&cfg.data, cfg.max_statevector_qubits, cfg.exec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut q_total = 0u64;
    let mut c_total = 0u64;
    for _ in 0..reps {
        let sub = GroverRunConfig { seed: rng.random(), ..cfg.clone() };
        match solve_unknown_count_with(&circ, &sub)? {
            SolveResult::Solution(o) => {
                return Ok(SolveResult::Solution(GroverOutcome {
                    oracle_queries_quantum: q_total + o.oracle_queries_quantum,
                    oracle_queries_classical: c_total + o.oracle_queries_classical,
                    ..o
                }))
            }
            SolveResult::NoSolutionFound {
                oracle_queries_quantum,
                oracle_queries_classical,
            } => {
                q_total += oracle_queries_quantum;
                c_total += oracle_queries_classical;
            }
        }
    }
    Ok(SolveResult::NoSolutionFound {
        oracle_queries_quantum: q_total,
        oracle_queries_classical: c_total,
    })
}

/// Deviation of the simulated register from the closed-form two-plane
/// trajectory, rebuilt from brute-forced solution sets.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryReport {
    pub max_amplitude_deviation: f64,
    pub max_leakage: f64,
    pub iterations: u64,
}

/// After every iteration 0..=L, compares each amplitude against
/// cos((2l+1)θ)|α> + sin((2l+1)θ)|β> tensored with |-> on R and zeros on
/// the ancillae, and measures the mass outside that plane.
pub fn state_trajectory_check(cfg: &GroverRunConfig, l: u64) -> Result<TrajectoryReport, GroverError> {
    let circ = InstanceCircuits::build(&cfg.data, cfg.max_statevector_qubits, cfg.exec)?;
    let n_bits = pair_count(cfg.data.n()) as u32;
    let dim = 1u64 << n_bits;
    let solutions = solution_values(&cfg.data)?;
    let t = solutions.len() as u64;
    if t == 0 || t >= dim {
        return Err(GroverError::SolutionCountOutOfRange { t, n: n_bits });
    }
    let f = (dim - t) as f64;
    let theta = (t as f64 / dim as f64).sqrt().asin();
    let r_qubit = circ.layout.r_qubit();
    let e_mask = dim - 1;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;

    let mut reg = circ.initial_state()?;
    let mut max_dev = 0.0f64;
    let mut max_leak = 0.0f64;
    for step in 0..=l {
        if step > 0 {
            circ.apply_iteration(&mut reg)?;
        }
        let angle = (2 * step + 1) as f64 * theta;
        let (cos_c, sin_c) = (angle.cos() / f.sqrt(), angle.sin() / (t as f64).sqrt());
        let mut in_plane = 0.0f64;
        for (idx, amp) in reg.amplitudes().iter().enumerate() {
            let idx = idx as u64;
            let anc = idx >> (r_qubit + 1);
            let predicted = if anc != 0 {
                0.0
            } else {
                let sign = if idx >> r_qubit & 1 == 0 { 1.0 } else { -1.0 };
                let coef = if solutions.contains(&(idx & e_mask)) { sin_c } else { cos_c };
                sign * inv_sqrt2 * coef
            };
            let dev = (amp - num_complex::Complex64::new(predicted, 0.0)).norm();
            max_dev = max_dev.max(dev);
            if predicted != 0.0 {
                in_plane += amp.norm_sqr();
            }
        }
        // mass outside span{alpha, beta} (x) |-> (x) |0>
        max_leak = max_leak.max((1.0 - in_plane).max(0.0));
    }
    Ok(TrajectoryReport { max_amplitude_deviation: max_dev, max_leakage: max_leak, iterations: l })
}
