//! Quantum register simulation.
//!
//! Two execution paths, both first-class: a dense complex statevector for
//! Grover runs, and a bit-vector "basis mode" that exploits the fact that
//! every gate except H permutes computational basis states. Basis mode makes
//! exhaustive oracle verification tractable (cost is linear in gate count,
//! independent of 2^Q).
//!
//! Convention: qubit i corresponds to bit i of the basis-state index
//! (little-endian). Rendering in any other order happens at the CLI boundary.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuits::{Circuit, Gate};
use crate::exec::ExecMode;

pub const DEFAULT_MAX_QUBITS: usize = 26;

/// Below this many amplitudes the parallel path falls back to a plain loop.
#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
const PARALLEL_THRESHOLD: usize = 1 << 15;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("register of {requested} qubits exceeds guard of {guard}")]
    TooManyQubits { requested: usize, guard: usize },
    #[error("gate touches qubit {qubit} but register has {qubits} qubits")]
    QubitOutOfRange { qubit: usize, qubits: usize },
    #[error("gate uses the same qubit twice: {qubit}")]
    DuplicateQubit { qubit: usize },
    #[error("basis mode cannot apply a Hadamard gate")]
    HadamardInBasisMode,
    #[error("circuit needs {needed} qubits but register has {qubits}")]
    CircuitTooWide { needed: usize, qubits: usize },
}

/// A single computational basis state of Q qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    qubits: usize,
    bits: Vec<bool>,
}

impl BasisState {
    pub fn zero(qubits: usize) -> Self {
        BasisState { qubits, bits: vec![false; qubits] }
    }

    pub fn from_index(qubits: usize, index: u64) -> Self {
        let bits = (0..qubits).map(|i| index >> i & 1 == 1).collect();
        BasisState { qubits, bits }
    }

    pub fn to_index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn bit(&self, qubit: usize) -> bool {
        self.bits[qubit]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn set_bit(&mut self, qubit: usize, value: bool) {
        self.bits[qubit] = value;
    }
}

/// Applies one permutation gate to a basis index. H is rejected by callers.
#[inline]
fn gate_on_index(g: Gate, x: u128) -> u128 {
    match g {
        Gate::Not(t) => x ^ (1 << t),
        Gate::Cnot { control, target } => {
            if x >> control & 1 == 1 {
                x ^ (1 << target)
            } else {
                x
            }
        }
        Gate::Ccnot { control1, control2, target } => {
            if x >> control1 & 1 == 1 && x >> control2 & 1 == 1 {
                x ^ (1 << target)
            } else {
                x
            }
        }
        Gate::H(_) => unreachable!("checked before dispatch"),
    }
}

/// Runs an H-free circuit on a single basis index. The wide variant covers
/// the literal oracle layouts, which outgrow 64 qubits around n = 6.
pub fn apply_circuit_to_index_wide(c: &Circuit, mut x: u128) -> Result<u128, StateError> {
    if c.qubit_count() > 128 {
        return Err(StateError::TooManyQubits { requested: c.qubit_count(), guard: 128 });
    }
    for &g in c.gates() {
        if matches!(g, Gate::H(_)) {
            return Err(StateError::HadamardInBasisMode);
        }
        x = gate_on_index(g, x);
    }
    Ok(x)
}

/// Runs an H-free circuit on a single basis index.
pub fn apply_circuit_to_index(c: &Circuit, x: u64) -> Result<u64, StateError> {
    if c.qubit_count() > 64 {
        return Err(StateError::TooManyQubits { requested: c.qubit_count(), guard: 64 });
    }
    Ok(apply_circuit_to_index_wide(c, u128::from(x))? as u64)
}

/// Runs an H-free circuit on a basis state.
pub fn apply_circuit_basis(c: &Circuit, s: &BasisState) -> Result<BasisState, StateError> {
    if c.qubit_count() > s.qubit_count() {
        return Err(StateError::CircuitTooWide {
            needed: c.qubit_count(),
            qubits: s.qubit_count(),
        });
    }
    let x = apply_circuit_to_index(c, s.to_index())?;
    Ok(BasisState::from_index(s.qubit_count(), x))
}

/// Precomputed action of an H-free circuit on all 2^Q basis states, stored
/// as the inverse map so application is a parallel gather.
pub struct BasisPermutation {
    qubits: usize,
    inverse: Vec<u32>,
}

impl BasisPermutation {
    /// Tabulates the permutation by running the circuit's reverse on every
    /// basis index (the reverse walk directly yields the inverse table).
    pub fn from_circuit(c: &Circuit, qubits: usize, mode: ExecMode) -> Result<Self, StateError> {
        if qubits > 32 {
            return Err(StateError::TooManyQubits { requested: qubits, guard: 32 });
        }
        if c.qubit_count() > qubits {
            return Err(StateError::CircuitTooWide { needed: c.qubit_count(), qubits });
        }
        let rev = c.reversed();
        for &g in rev.gates() {
            if matches!(g, Gate::H(_)) {
                return Err(StateError::HadamardInBasisMode);
            }
        }
        let dim = 1usize << qubits;
        let mut inverse = vec![0u32; dim];
        let walk = |chunk: &mut [u32], base: usize| {
            for (i, slot) in chunk.iter_mut().enumerate() {
                let mut x = (base + i) as u128;
                for &g in rev.gates() {
                    x = gate_on_index(g, x);
                }
                *slot = x as u32;
            }
        };
        #[cfg(feature = "parallel")]
        if mode.is_parallel() && dim >= PARALLEL_THRESHOLD {
            use rayon::prelude::*;
            let chunk = 1 << 12;
            inverse
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(ci, slice)| walk(slice, ci * chunk));
            return Ok(BasisPermutation { qubits, inverse });
        }
        let _ = mode;
        walk(&mut inverse, 0);
        Ok(BasisPermutation { qubits, inverse })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn apply_to_index(&self, x: u64) -> u64 {
        // inverse is a bijection; linear scan is only for tests
        self.inverse
            .iter()
            .position(|&y| u64::from(y) == x)
            .expect("bijective table") as u64
    }
}

/// Full complex statevector over Q named qubits.
#[derive(Debug, Clone)]
pub struct QuantumRegister {
    qubits: usize,
    amps: Vec<Complex64>,
    // reused by apply_permutation; allocating half a gigabyte per gather
    // dominates large-register runs otherwise
    scratch: Vec<Complex64>,
    exec: ExecMode,
}

impl QuantumRegister {
    /// Fresh register in |0...0>.
    pub fn new(qubits: usize) -> Result<Self, StateError> {
        Self::with_guard(qubits, DEFAULT_MAX_QUBITS)
    }

    pub fn with_guard(qubits: usize, guard: usize) -> Result<Self, StateError> {
        if qubits > guard {
            return Err(StateError::TooManyQubits { requested: qubits, guard });
        }
        let mut amps = vec![Complex64::ZERO; 1 << qubits];
        amps[0] = Complex64::ONE;
        Ok(QuantumRegister { qubits, amps, scratch: Vec::new(), exec: ExecMode::default() })
    }

    pub fn with_exec_mode(mut self, mode: ExecMode) -> Self {
        self.exec = mode;
        self
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, q: usize) -> Result<(), StateError> {
        if q >= self.qubits {
            Err(StateError::QubitOutOfRange { qubit: q, qubits: self.qubits })
        } else {
            Ok(())
        }
    }

    pub fn apply_gate(&mut self, g: Gate) -> Result<(), StateError> {
        match g {
            Gate::Not(t) => {
                self.check_qubit(t)?;
                self.update_pairs(t, |_| true, std::mem::swap);
            }
            Gate::H(t) => {
                self.check_qubit(t)?;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                self.update_pairs(t, |_| true, move |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * s;
                    *b = (x - y) * s;
                });
            }
            Gate::Cnot { control, target } => {
                self.check_qubit(control)?;
                self.check_qubit(target)?;
                if control == target {
                    return Err(StateError::DuplicateQubit { qubit: control });
                }
                let cbit = 1u64 << control;
                self.update_pairs(
                    target,
                    move |idx| idx & cbit != 0,
                    std::mem::swap,
                );
            }
            Gate::Ccnot { control1, control2, target } => {
                self.check_qubit(control1)?;
                self.check_qubit(control2)?;
                self.check_qubit(target)?;
                if control1 == control2 || control1 == target || control2 == target {
                    let dup = if control1 == control2 { control1 } else { target };
                    return Err(StateError::DuplicateQubit { qubit: dup });
                }
                let cbits = (1u64 << control1) | (1u64 << control2);
                self.update_pairs(
                    target,
                    move |idx| idx & cbits == cbits,
                    std::mem::swap,
                );
            }
        }
        Ok(())
    }

    /// Applies `f` to every amplitude pair (i, i + 2^t) with target bit 0 on
    /// i and `pred(i)` true. Each pair is owned by exactly one worker, so
    /// the parallel result is bit-identical to the sequential one.
    fn update_pairs<P, F>(&mut self, target: usize, pred: P, f: F)
    where
        P: Fn(u64) -> bool + Sync,
        F: Fn(&mut Complex64, &mut Complex64) + Sync,
    {
        let stride = 1usize << target;
        let block = stride * 2;
        let run_block = |chunk: &mut [Complex64], base: usize| {
            let (lo, hi) = chunk.split_at_mut(stride);
            for i in 0..stride {
                let abs = (base + i) as u64;
                if pred(abs) {
                    f(&mut lo[i], &mut hi[i]);
                }
            }
        };
        #[cfg(feature = "parallel")]
        if self.exec.is_parallel() && self.amps.len() >= PARALLEL_THRESHOLD {
            use rayon::prelude::*;
            if self.amps.len() / block >= 8 {
                self.amps
                    .par_chunks_mut(block)
                    .enumerate()
                    .for_each(|(bi, chunk)| run_block(chunk, bi * block));
            } else {
                // high target bit: few blocks, parallelize inside each
                for (bi, chunk) in self.amps.chunks_mut(block).enumerate() {
                    let base = bi * block;
                    let (lo, hi) = chunk.split_at_mut(stride);
                    lo.par_iter_mut().zip(hi.par_iter_mut()).enumerate().for_each(
                        |(i, (a, b))| {
                            if pred((base + i) as u64) {
                                f(a, b);
                            }
                        },
                    );
                }
            }
            return;
        }
        for (bi, chunk) in self.amps.chunks_mut(block).enumerate() {
            run_block(chunk, bi * block);
        }
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<(), StateError> {
        for &g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<(), StateError> {
        if c.qubit_count() > self.qubits {
            return Err(StateError::CircuitTooWide {
                needed: c.qubit_count(),
                qubits: self.qubits,
            });
        }
        self.apply_gates(c.gates())
    }

    /// Applies a precomputed basis permutation to the amplitudes.
    pub fn apply_permutation(&mut self, perm: &BasisPermutation) -> Result<(), StateError> {
        if perm.qubit_count() != self.qubits {
            return Err(StateError::CircuitTooWide {
                needed: perm.qubit_count(),
                qubits: self.qubits,
            });
        }
        self.scratch.resize(self.amps.len(), Complex64::ZERO);
        let old = &self.amps;
        let gather = |chunk: &mut [Complex64], base: usize| {
            for (i, slot) in chunk.iter_mut().enumerate() {
                *slot = old[perm.inverse[base + i] as usize];
            }
        };
        #[cfg(feature = "parallel")]
        if self.exec.is_parallel() && self.scratch.len() >= PARALLEL_THRESHOLD {
            use rayon::prelude::*;
            let chunk = 1 << 12;
            self.scratch
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(ci, slice)| gather(slice, ci * chunk));
            std::mem::swap(&mut self.amps, &mut self.scratch);
            return Ok(());
        }
        gather(&mut self.scratch, 0);
        std::mem::swap(&mut self.amps, &mut self.scratch);
        Ok(())
    }

    /// Samples a basis state from the Born distribution with a seeded
    /// generator. The register is left untouched (collapse is not modeled).
    pub fn measure_all(&self, seed: u64) -> BasisState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (idx, amp) in self.amps.iter().enumerate() {
            acc += amp.norm_sqr();
            if u < acc {
                return BasisState::from_index(self.qubits, idx as u64);
            }
        }
        // rounding pushed the total just below u
        BasisState::from_index(self.qubits, self.amps.len() as u64 - 1)
    }

    /// Born probability that the first k qubits satisfy `pred` (pred sees
    /// the low-k bits of the basis index).
    pub fn probability_of<P: Fn(u64) -> bool>(&self, k: usize, pred: P) -> f64 {
        let mask = if k >= 64 { u64::MAX } else { (1u64 << k) - 1 };
        self.amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| pred(*idx as u64 & mask))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}
