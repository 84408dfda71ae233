//! Compilation of the distance-checking oracle and its subroutines into
//! explicit gate lists over a named qubit layout.
//!
//! Two oracle builds coexist:
//!
//! * [`literal::build_oracle_literal`] follows the published subroutine
//!   listings register-for-register (dedicated P/A/F/T registers). It is the
//!   readable reference and is exercised in basis mode, where qubit count is
//!   free.
//! * [`packed::build_oracle`] compiles the same boolean function against a
//!   shared ancilla pool sized to the instance, reproducing the reported
//!   per-instance qubit totals and making full statevector runs feasible.
//!
//! Both are verified equivalent to the classical test, exhaustively at
//! small n.

use thiserror::Error;

use crate::graph::{pair_count, AdjacencyVector};

mod diffusion;
mod fragments;
mod literal;
mod packed;

pub use diffusion::build_diffusion;
pub use fragments::{build_and_m, build_or2, build_or_m};
pub use literal::{build_oracle_literal, build_paths, build_test, build_update, literal_layout};
pub use packed::{build_oracle, packed_layout};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("distance data failed validation: {0}")]
    InvalidDistanceData(String),
    #[error("ancilla pool exhausted (pool of {pool} qubits)")]
    PoolExhausted { pool: usize },
}

/// The gate set: NOT, CNOT, CCNOT and H. Every member is self-inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Not(usize),
    H(usize),
    Cnot { control: usize, target: usize },
    Ccnot { control1: usize, control2: usize, target: usize },
}

impl Gate {
    /// All four kinds square to the identity.
    pub fn inverse(self) -> Gate {
        self
    }

    pub fn qubits(self) -> Vec<usize> {
        match self {
            Gate::Not(t) | Gate::H(t) => vec![t],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Ccnot { control1, control2, target } => vec![control1, control2, target],
        }
    }

    pub fn kind_name(self) -> &'static str {
        match self {
            Gate::Not(_) => "NOT",
            Gate::H(_) => "H",
            Gate::Cnot { .. } => "CNOT",
            Gate::Ccnot { .. } => "CCNOT",
        }
    }
}

/// Named qubit layout. The E register (one qubit per vertex pair) and the
/// target R are common to both oracle builds; what follows them differs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitLayout {
    n: usize,
    m: usize,
    qubit_count: usize,
    kind: LayoutKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum LayoutKind {
    /// Anonymous layout for standalone gate fragments and tests.
    Fragment,
    /// Dedicated registers exactly as the subroutine listings name them:
    /// P(d,j) for d=1..n-1, j=1..n, then A(1..n), F(1..f_len), T(1..m).
    Literal { f_len: usize },
    /// E and R followed by a shared ancilla pool of `pool` qubits.
    Packed { pool: usize },
}

impl QubitLayout {
    pub fn fragment(qubits: usize) -> Self {
        QubitLayout { n: 0, m: 0, qubit_count: qubits, kind: LayoutKind::Fragment }
    }

    pub(crate) fn new_literal(n: usize, m: usize) -> Self {
        let np = pair_count(n);
        let f_len = n.max(np) + 2;
        let qubit_count = np + 1 + (n - 1) * n + n + f_len + m;
        QubitLayout { n, m, qubit_count, kind: LayoutKind::Literal { f_len } }
    }

    pub(crate) fn new_packed(n: usize, m: usize, pool: usize) -> Self {
        QubitLayout { n, m, qubit_count: pair_count(n) + 1 + pool, kind: LayoutKind::Packed { pool } }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn e_count(&self) -> usize {
        pair_count(self.n)
    }

    /// Qubit holding e(j,k).
    pub fn e_qubit(&self, j: usize, k: usize) -> usize {
        AdjacencyVector::pair_index(self.n, j, k)
    }

    /// The oracle target qubit R.
    pub fn r_qubit(&self) -> usize {
        self.e_count()
    }

    /// P(d,j) in the literal layout, d in 1..=n-1, j in 1..=n.
    pub fn p_qubit(&self, d: usize, j: usize) -> usize {
        debug_assert!(matches!(self.kind, LayoutKind::Literal { .. }));
        self.e_count() + 1 + (d - 1) * self.n + (j - 1)
    }

    /// A(k) in the literal layout, k in 1..=n.
    pub fn a_qubit(&self, k: usize) -> usize {
        debug_assert!(matches!(self.kind, LayoutKind::Literal { .. }));
        self.e_count() + 1 + (self.n - 1) * self.n + (k - 1)
    }

    /// F(k) in the literal layout, k in 1..=f_len.
    pub fn f_qubit(&self, k: usize) -> usize {
        let LayoutKind::Literal { f_len } = self.kind else {
            panic!("F register only exists in the literal layout");
        };
        debug_assert!(k >= 1 && k <= f_len);
        self.e_count() + 1 + (self.n - 1) * self.n + self.n + (k - 1)
    }

    pub fn f_len(&self) -> usize {
        match self.kind {
            LayoutKind::Literal { f_len } => f_len,
            _ => 0,
        }
    }

    /// T(o) in the literal layout, o in 1..=m.
    pub fn t_qubit(&self, o: usize) -> usize {
        let LayoutKind::Literal { f_len } = self.kind else {
            panic!("T register only exists in the literal layout");
        };
        self.e_count() + 1 + (self.n - 1) * self.n + self.n + f_len + (o - 1)
    }

    /// Shared ancilla pool range in the packed layout.
    pub fn pool_range(&self) -> std::ops::Range<usize> {
        let LayoutKind::Packed { pool } = self.kind else {
            panic!("only the packed layout has an ancilla pool");
        };
        let base = self.e_count() + 1;
        base..base + pool
    }

    /// Register names with their index ranges, for the export header.
    pub fn register_table(&self) -> Vec<(String, std::ops::Range<usize>)> {
        let np = self.e_count();
        match self.kind {
            LayoutKind::Fragment => vec![("Q".into(), 0..self.qubit_count)],
            LayoutKind::Literal { f_len } => {
                let p = np + 1;
                let a = p + (self.n - 1) * self.n;
                let f = a + self.n;
                let t = f + f_len;
                vec![
                    ("E".into(), 0..np),
                    ("R".into(), np..np + 1),
                    ("P".into(), p..a),
                    ("A".into(), a..f),
                    ("F".into(), f..t),
                    ("T".into(), t..t + self.m),
                ]
            }
            LayoutKind::Packed { pool } => vec![
                ("E".into(), 0..np),
                ("R".into(), np..np + 1),
                ("S".into(), np + 1..np + 1 + pool),
            ],
        }
    }
}

/// An ordered gate list over a layout, with the set of qubits required to be
/// |0> on entry and restored on exit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    layout: QubitLayout,
    gates: Vec<Gate>,
    ancilla_set: Vec<usize>,
}

impl Circuit {
    pub fn new(layout: QubitLayout, gates: Vec<Gate>, mut ancilla_set: Vec<usize>) -> Self {
        ancilla_set.sort_unstable();
        ancilla_set.dedup();
        Circuit { layout, gates, ancilla_set }
    }

    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    pub fn qubit_count(&self) -> usize {
        self.layout.qubit_count()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn ancilla_set(&self) -> &[usize] {
        &self.ancilla_set
    }

    pub fn is_permutation(&self) -> bool {
        !self.gates.iter().any(|g| matches!(g, Gate::H(_)))
    }

    /// Structural reverse: gate order flipped, each gate replaced by its
    /// inverse (here, itself).
    pub fn reversed(&self) -> Circuit {
        Circuit {
            layout: self.layout.clone(),
            gates: self.gates.iter().rev().map(|g| g.inverse()).collect(),
            ancilla_set: self.ancilla_set.clone(),
        }
    }

    pub fn resource_report(&self) -> ResourceReport {
        let mut r = ResourceReport {
            qubit_count: self.qubit_count(),
            gate_count: self.gates.len(),
            not_count: 0,
            cnot_count: 0,
            ccnot_count: 0,
            h_count: 0,
        };
        for g in &self.gates {
            match g {
                Gate::Not(_) => r.not_count += 1,
                Gate::H(_) => r.h_count += 1,
                Gate::Cnot { .. } => r.cnot_count += 1,
                Gate::Ccnot { .. } => r.ccnot_count += 1,
            }
        }
        r
    }

    /// Line-oriented text form: a layout header, then one gate per line
    /// (`KIND q1 [q2 [q3]]`).
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for (name, range) in self.layout.register_table() {
            out.push_str(&format!("# {} {}..{}\n", name, range.start, range.end));
        }
        for g in &self.gates {
            let qs: Vec<String> = g.qubits().iter().map(|q| q.to_string()).collect();
            out.push_str(&format!("{} {}\n", g.kind_name(), qs.join(" ")));
        }
        out
    }
}

/// Exact gate and qubit accounting used by the resource criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceReport {
    pub qubit_count: usize,
    pub gate_count: usize,
    pub not_count: usize,
    pub cnot_count: usize,
    pub ccnot_count: usize,
    pub h_count: usize,
}

impl std::fmt::Display for ResourceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "qubits {} gates {} (NOT {}, CNOT {}, CCNOT {}, H {})",
            self.qubit_count,
            self.gate_count,
            self.not_count,
            self.cnot_count,
            self.ccnot_count,
            self.h_count
        )
    }
}
