//! The production oracle compiler.
//!
//! Compiles the same boolean function as the literal build, but against a
//! shared ancilla pool sized to the instance:
//!
//! * P rows stop at D = max d0 (deeper layers have no consumer), and the
//!   final row keeps only the queried columns;
//! * distances are checked once per unordered boundary pair (d and d0 are
//!   symmetric), each stored in one pool qubit, except the last pair whose
//!   comparison literals feed the final AND onto R directly;
//! * sources are processed in order, fully uncomputing their P rows before
//!   the next; the stored pair bits are cleared afterwards by replaying the
//!   per-source blocks in reverse;
//! * multi-controlled NOTs use the clean CCNOT chain while pool qubits are
//!   free and otherwise fall back to the borrowed-ancilla network over
//!   untouched E qubits, which tolerates arbitrary ancilla values.
//!
//! The pool size is `max(D*(n-1) + m(m-1)/2 - 1, N-1)` qubits, the second
//! term reserving room for the diffusion chain. On the built-in instances
//! this reproduces the published qubit totals exactly.

use std::collections::HashMap;

use super::literal::validate;
use super::{Circuit, CircuitError, Gate, QubitLayout};
use crate::graph::{pair_count, BoundaryDistanceData};

/// Layout the packed oracle for `data` compiles against.
pub fn packed_layout(data: &BoundaryDistanceData) -> Result<QubitLayout, CircuitError> {
    build_oracle(data).map(|c| c.layout().clone())
}

/// Compiles the distance-checking oracle for `data` over the packed layout:
/// on basis states it maps |e> |r> |0..0> to |e> |r xor f(e)> |0..0> with
/// f(e) = 1 exactly when the graph encoded by e realizes every boundary
/// distance.
pub fn build_oracle(data: &BoundaryDistanceData) -> Result<Circuit, CircuitError> {
    validate(data)?;
    let floor = pool_formula(data);
    // The formula is exact for the instance family of interest; a handful of
    // degenerate shapes (e.g. m = n on tiny graphs) need one or two more
    // slots, found by retrying.
    let mut last = CircuitError::PoolExhausted { pool: floor };
    for pool in floor..floor + 64 {
        match Compiler::new(data, pool).run() {
            Ok(c) => return Ok(c),
            Err(CircuitError::PoolExhausted { .. }) => {
                last = CircuitError::PoolExhausted { pool };
            }
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn pool_formula(data: &BoundaryDistanceData) -> usize {
    let n = data.n();
    let m = data.m();
    let d_cap = (data.max_distance() as usize).min(n - 1).max(1);
    let pair_bits = m * (m - 1) / 2 - 1;
    let formula = d_cap * (n - 1) + pair_bits;
    formula.max(pair_count(n).saturating_sub(1)).max(1)
}

/// Ancilla pool: lowest free slot first, exact peak accounting.
struct Pool {
    free: Vec<usize>, // sorted descending so pop() yields the lowest index
    capacity: usize,
    in_use: usize,
    peak: usize,
}

impl Pool {
    fn new(range: std::ops::Range<usize>) -> Self {
        let capacity = range.len();
        Pool { free: range.rev().collect(), capacity, in_use: 0, peak: 0 }
    }

    fn alloc(&mut self) -> Result<usize, CircuitError> {
        let slot = self
            .free
            .pop()
            .ok_or(CircuitError::PoolExhausted { pool: self.capacity })?;
        self.in_use += 1;
        self.peak = self.peak.max(self.in_use);
        Ok(slot)
    }

    fn release(&mut self, q: usize) {
        let pos = self.free.partition_point(|&x| x > q);
        self.free.insert(pos, q);
        self.in_use -= 1;
    }

    fn available(&self) -> usize {
        self.free.len()
    }
}

/// One control of a multi-controlled NOT: either a qubit (possibly
/// negated), or an on-the-fly conjunction P(d-1,k) & E(k,j) materialized
/// into a shared scratch qubit around each gate that consumes it.
#[derive(Clone, Copy)]
enum Ctl {
    Direct { qubit: usize, negated: bool },
    Term { p: usize, e: usize, negated: bool },
}

impl Ctl {
    fn qubits(self) -> Vec<usize> {
        match self {
            Ctl::Direct { qubit, .. } => vec![qubit],
            Ctl::Term { p, e, .. } => vec![p, e],
        }
    }
}

struct Compiler<'a> {
    data: &'a BoundaryDistanceData,
    n: usize,
    m: usize,
    layout: QubitLayout,
    gates: Vec<Gate>,
    pool: Pool,
    rows: HashMap<(usize, usize), usize>,
    t_slots: Vec<usize>,
}

impl<'a> Compiler<'a> {
    fn new(data: &'a BoundaryDistanceData, pool: usize) -> Self {
        let layout = QubitLayout::new_packed(data.n(), data.m(), pool);
        let range = layout.pool_range();
        Compiler {
            data,
            n: data.n(),
            m: data.m(),
            layout,
            gates: Vec::new(),
            pool: Pool::new(range),
            rows: HashMap::new(),
            t_slots: Vec::new(),
        }
    }

    fn run(mut self) -> Result<Circuit, CircuitError> {
        let mut prefix_len = 0;
        for o in 1..self.m {
            self.emit_source(o, o == self.m - 1)?;
            if o == self.m.saturating_sub(2) {
                prefix_len = self.gates.len();
            }
        }
        // clear the stored pair bits by replaying everything before the
        // folding source in reverse
        let unc: Vec<Gate> = self.gates[..prefix_len].iter().rev().map(|g| g.inverse()).collect();
        self.gates.extend(unc);

        let ancillas: Vec<usize> = self.layout.pool_range().collect();
        Ok(Circuit::new(self.layout, self.gates, ancillas))
    }

    fn source_pairs(&self, o: usize) -> Vec<(usize, usize)> {
        (o + 1..=self.m).map(|j| (j, self.data.d(o, j) as usize)).collect()
    }

    /// Columns materialized in row d for source o: all of X minus o below
    /// the top row, only the queried targets in the top row.
    fn row_cols(&self, o: usize, d: usize, d_max: usize) -> Vec<usize> {
        if d < d_max {
            (1..=self.n).filter(|&j| j != o).collect()
        } else {
            self.source_pairs(o)
                .into_iter()
                .filter(|&(_, dist)| dist == d_max)
                .map(|(j, _)| j)
                .collect()
        }
    }

    fn emit_source(&mut self, o: usize, fold: bool) -> Result<(), CircuitError> {
        let pairs = self.source_pairs(o);
        let d_max = pairs.iter().map(|&(_, d)| d).max().unwrap();

        for d in 1..=d_max {
            for j in self.row_cols(o, d, d_max) {
                let slot = self.pool.alloc()?;
                self.rows.insert((d, j), slot);
            }
        }

        self.emit_paths_body(o, d_max)?;

        for &(j, d) in &pairs {
            if fold && j == self.m {
                continue;
            }
            let t = self.pool.alloc()?;
            self.t_slots.push(t);
            self.emit_extract(j, d, t);
        }
        if fold {
            self.emit_fold(o)?;
        }

        // Re-derive the paths block under the current pool state and append
        // it reversed: it maps P back to zero using scratch that is free
        // (hence |0>) at this point, so stored pair bits are never aliased.
        let start = self.gates.len();
        self.emit_paths_body(o, d_max)?;
        let second: Vec<Gate> = self.gates.drain(start..).collect();
        self.gates.extend(second.into_iter().rev().map(|g| g.inverse()));

        let slots: Vec<usize> = self.rows.drain().map(|(_, slot)| slot).collect();
        for slot in slots {
            self.pool.release(slot);
        }
        Ok(())
    }

    fn emit_paths_body(&mut self, o: usize, d_max: usize) -> Result<(), CircuitError> {
        for j in self.row_cols(o, 1, d_max) {
            self.gates.push(Gate::Cnot {
                control: self.layout.e_qubit(j, o),
                target: self.rows[&(1, j)],
            });
        }
        for d in 2..=d_max {
            for j in self.row_cols(o, d, d_max) {
                self.emit_update_column(o, d, j)?;
            }
        }
        Ok(())
    }

    /// P(d,j) ^= P(d-1,j) | OR_k (P(d-1,k) & E(k,j)), as the NOT-conjugated
    /// AND over the negated inputs.
    fn emit_update_column(&mut self, o: usize, d: usize, j: usize) -> Result<(), CircuitError> {
        let target = self.rows[&(d, j)];
        self.gates.push(Gate::Not(target));
        let mut controls =
            vec![Ctl::Direct { qubit: self.rows[&(d - 1, j)], negated: true }];
        for k in (1..=self.n).filter(|&k| k != o && k != j) {
            controls.push(Ctl::Term {
                p: self.rows[&(d - 1, k)],
                e: self.layout.e_qubit(k, j),
                negated: true,
            });
        }
        self.emit_mcx(&controls, target)
    }

    fn emit_extract(&mut self, j: usize, d: usize, t: usize) {
        if d == 1 {
            self.gates.push(Gate::Cnot { control: self.rows[&(1, j)], target: t });
        } else {
            let below = self.rows[&(d - 1, j)];
            self.gates.push(Gate::Not(below));
            self.gates.push(Gate::Ccnot { control1: self.rows[&(d, j)], control2: below, target: t });
            self.gates.push(Gate::Not(below));
        }
    }

    /// Final AND onto R: every stored pair bit plus the comparison literals
    /// of the last pair, read off the live P rows.
    fn emit_fold(&mut self, o: usize) -> Result<(), CircuitError> {
        let j = self.m;
        let d = self.data.d(o, j) as usize;
        let mut controls: Vec<Ctl> = self
            .t_slots
            .iter()
            .map(|&t| Ctl::Direct { qubit: t, negated: false })
            .collect();
        if d == 1 {
            controls.push(Ctl::Direct { qubit: self.rows[&(1, j)], negated: false });
        } else {
            controls.push(Ctl::Direct { qubit: self.rows[&(d, j)], negated: false });
            controls.push(Ctl::Direct { qubit: self.rows[&(d - 1, j)], negated: true });
        }
        let r = self.layout.r_qubit();
        self.emit_mcx(&controls, r)
    }

    /// target ^= AND over the controls. Negated direct controls are
    /// NOT-sandwiched; conjunction controls are rebuilt in a single clean
    /// scratch qubit around each consuming gate.
    fn emit_mcx(&mut self, controls: &[Ctl], target: usize) -> Result<(), CircuitError> {
        let mut ctls = controls.to_vec();
        if matches!(ctls.first(), Some(Ctl::Term { .. })) {
            let i = ctls
                .iter()
                .position(|c| matches!(c, Ctl::Direct { .. }))
                .expect("multi-controlled NOT needs at least one direct control");
            ctls.swap(0, i);
        }

        let sandwich: Vec<usize> = ctls
            .iter()
            .filter_map(|c| match *c {
                Ctl::Direct { qubit, negated: true } => Some(qubit),
                _ => None,
            })
            .collect();
        for &q in &sandwich {
            self.gates.push(Gate::Not(q));
        }

        let has_term = ctls.iter().any(|c| matches!(c, Ctl::Term { .. }));
        let scratch_a = if has_term { Some(self.pool.alloc()?) } else { None };

        match ctls.len() {
            0 => self.gates.push(Gate::Not(target)),
            1 => {
                let q = self.hold_ctl(&ctls[0], scratch_a);
                self.gates.push(Gate::Cnot { control: q, target });
                self.drop_ctl(&ctls[0], scratch_a);
            }
            2 => {
                let q0 = self.direct_qubit(&ctls[0]);
                let q1 = self.hold_ctl(&ctls[1], scratch_a);
                self.gates.push(Gate::Ccnot { control1: q0, control2: q1, target });
                self.drop_ctl(&ctls[1], scratch_a);
            }
            k => {
                let need = k - 2;
                if self.pool.available() >= need {
                    self.emit_clean_chain(&ctls, target, scratch_a)?;
                } else {
                    self.emit_borrowed_network(&ctls, target, scratch_a)?;
                }
            }
        }

        if let Some(a) = scratch_a {
            self.pool.release(a);
        }
        for &q in &sandwich {
            self.gates.push(Gate::Not(q));
        }
        Ok(())
    }

    fn direct_qubit(&self, c: &Ctl) -> usize {
        match *c {
            Ctl::Direct { qubit, .. } => qubit,
            Ctl::Term { .. } => unreachable!("first chain control is always direct"),
        }
    }

    /// Makes the control's value available on some qubit, materializing a
    /// term into the scratch slot if needed.
    fn hold_ctl(&mut self, c: &Ctl, scratch_a: Option<usize>) -> usize {
        match *c {
            Ctl::Direct { qubit, .. } => qubit,
            Ctl::Term { p, e, negated } => {
                let a = scratch_a.expect("term control requires the scratch qubit");
                if negated {
                    self.gates.push(Gate::Not(a));
                }
                self.gates.push(Gate::Ccnot { control1: p, control2: e, target: a });
                a
            }
        }
    }

    fn drop_ctl(&mut self, c: &Ctl, scratch_a: Option<usize>) {
        if let Ctl::Term { p, e, negated } = *c {
            let a = scratch_a.expect("term control requires the scratch qubit");
            self.gates.push(Gate::Ccnot { control1: p, control2: e, target: a });
            if negated {
                self.gates.push(Gate::Not(a));
            }
        }
    }

    fn link(&mut self, fixed: usize, c: &Ctl, target: usize, scratch_a: Option<usize>) {
        let q = self.hold_ctl(c, scratch_a);
        self.gates.push(Gate::Ccnot { control1: fixed, control2: q, target });
        self.drop_ctl(c, scratch_a);
    }

    fn emit_clean_chain(
        &mut self,
        ctls: &[Ctl],
        target: usize,
        scratch_a: Option<usize>,
    ) -> Result<(), CircuitError> {
        let k = ctls.len();
        let mut s = Vec::with_capacity(k - 2);
        for _ in 0..k - 2 {
            s.push(self.pool.alloc()?);
        }
        let c0 = self.direct_qubit(&ctls[0]);
        self.link(c0, &ctls[1], s[0], scratch_a);
        for j in 1..k - 2 {
            self.link(s[j - 1], &ctls[j + 1], s[j], scratch_a);
        }
        self.link(s[k - 3], &ctls[k - 1], target, scratch_a);
        for j in (1..k - 2).rev() {
            self.link(s[j - 1], &ctls[j + 1], s[j], scratch_a);
        }
        self.link(c0, &ctls[1], s[0], scratch_a);
        for slot in s {
            self.pool.release(slot);
        }
        Ok(())
    }

    /// Multi-controlled NOT with borrowed ancillae of unknown value (they
    /// are returned exactly as found): the doubled ladder cancels their
    /// contribution. Borrows come from E qubits untouched by the controls.
    fn emit_borrowed_network(
        &mut self,
        ctls: &[Ctl],
        target: usize,
        scratch_a: Option<usize>,
    ) -> Result<(), CircuitError> {
        let k = ctls.len();
        let mut excluded: Vec<usize> = ctls.iter().flat_map(|c| c.qubits()).collect();
        excluded.push(target);
        excluded.extend(scratch_a);
        let dirty: Vec<usize> = (0..self.layout.e_count())
            .filter(|q| !excluded.contains(q))
            .take(k - 2)
            .collect();
        if dirty.len() < k - 2 {
            return Err(CircuitError::PoolExhausted { pool: self.pool.capacity });
        }
        let c0 = self.direct_qubit(&ctls[0]);
        for _ in 0..2 {
            self.link(dirty[k - 3], &ctls[k - 1], target, scratch_a);
            for i in (0..k.saturating_sub(3)).rev() {
                self.link(dirty[i], &ctls[i + 2], dirty[i + 1], scratch_a);
            }
            self.link(c0, &ctls[1], dirty[0], scratch_a);
            for i in 0..k.saturating_sub(3) {
                self.link(dirty[i], &ctls[i + 2], dirty[i + 1], scratch_a);
            }
        }
        Ok(())
    }
}
