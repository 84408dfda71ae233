//! The diffusion operator 2|γ><γ| - id on the E register, realized with
//! {NOT, CNOT, CCNOT, H} and the shared ancilla pool.
//!
//! Construction: conjugate by Hadamards and NOTs so the reflection happens
//! about |1..1>, deliver the phase through an ancilla prepared in |-> via an
//! AND chain over the E qubits, and flip that ancilla once more inside the
//! |-> window. That last NOT contributes a global -1 which makes the
//! compiled operator equal +D_N exactly (not -D_N), so trajectory checks
//! need no phase bookkeeping. O(N) gates.

use super::fragments::emit_and;
use super::{Circuit, CircuitError, Gate, QubitLayout};

/// Builds the diffusion circuit for the E register of `layout`. Requires
/// N - 1 ancilla qubits (kick + chain), drawn from the pool in the packed
/// layout and from the F register in the literal one.
pub fn build_diffusion(layout: &QubitLayout) -> Result<Circuit, CircuitError> {
    let n_bits = layout.e_count();
    if n_bits == 0 {
        return Err(CircuitError::ParameterRange("diffusion needs at least one qubit".into()));
    }
    let scratch: Vec<usize> = if layout.f_len() > 0 {
        (1..=layout.f_len()).map(|k| layout.f_qubit(k)).collect()
    } else {
        layout.pool_range().collect()
    };
    let needed = 1 + n_bits.saturating_sub(2);
    if scratch.len() < needed {
        return Err(CircuitError::PoolExhausted { pool: scratch.len() });
    }
    let kick = scratch[0];
    let chain = &scratch[1..needed];

    let mut gates = Vec::new();
    for q in 0..n_bits {
        gates.push(Gate::H(q));
    }
    for q in 0..n_bits {
        gates.push(Gate::Not(q));
    }
    gates.push(Gate::Not(kick));
    gates.push(Gate::H(kick));
    let controls: Vec<usize> = (0..n_bits).collect();
    emit_and(&mut gates, &controls, kick, chain);
    gates.push(Gate::Not(kick)); // global phase fix: X on |-> is -1
    gates.push(Gate::H(kick));
    gates.push(Gate::Not(kick));
    for q in 0..n_bits {
        gates.push(Gate::Not(q));
    }
    for q in 0..n_bits {
        gates.push(Gate::H(q));
    }

    let mut ancillas = vec![kick];
    ancillas.extend_from_slice(chain);
    Ok(Circuit::new(layout.clone(), gates, ancillas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::builtin_instance;
    use crate::statevector::QuantumRegister;
    use num_complex::Complex64;

    /// <x|D|y> on a small standalone diffusion block: prepare |y>, apply,
    /// read the amplitude of |x>.
    fn matrix_element(c: &Circuit, qubits: usize, n_bits: usize, x: u64, y: u64) -> Complex64 {
        let mut reg = QuantumRegister::new(qubits).unwrap();
        for b in 0..n_bits {
            if y >> b & 1 == 1 {
                reg.apply_gate(Gate::Not(b)).unwrap();
            }
        }
        reg.apply_circuit(c).unwrap();
        reg.amplitudes()[x as usize]
    }

    #[test]
    fn diffusion_matrix_entries_for_two_qubits() {
        // D on N=2 with one kick ancilla: <x|D|y> = 2/4 - delta_xy
        let layout = QubitLayout::fragment(3);
        let c = build_diffusion_on_fragment(&layout);
        for x in 0..4u64 {
            for y in 0..4u64 {
                let expected = 2.0 / 4.0 - f64::from(u8::from(x == y));
                let got = matrix_element(&c, 3, 2, x, y);
                assert!(
                    (got - Complex64::new(expected, 0.0)).norm() < 1e-12,
                    "x={x} y={y} got {got}"
                );
            }
        }
    }

    /// Same construction as build_diffusion but over a bare 3-qubit
    /// fragment: E = qubits 0,1 and kick = qubit 2.
    fn build_diffusion_on_fragment(layout: &QubitLayout) -> Circuit {
        let mut gates = Vec::new();
        for q in 0..2 {
            gates.push(Gate::H(q));
        }
        for q in 0..2 {
            gates.push(Gate::Not(q));
        }
        gates.push(Gate::Not(2));
        gates.push(Gate::H(2));
        emit_and(&mut gates, &[0, 1], 2, &[]);
        gates.push(Gate::Not(2));
        gates.push(Gate::H(2));
        gates.push(Gate::Not(2));
        for q in 0..2 {
            gates.push(Gate::Not(q));
        }
        for q in 0..2 {
            gates.push(Gate::H(q));
        }
        Circuit::new(layout.clone(), gates, vec![2])
    }

    #[test]
    fn uniform_superposition_is_fixed() {
        let data = builtin_instance("A").unwrap();
        let oracle = crate::circuits::build_oracle(&data).unwrap();
        let layout = oracle.layout().clone();
        let d = build_diffusion(&layout).unwrap();
        let mut reg = QuantumRegister::new(layout.qubit_count()).unwrap();
        for q in 0..layout.e_count() {
            reg.apply_gate(Gate::H(q)).unwrap();
        }
        let before = reg.amplitudes().to_vec();
        reg.apply_circuit(&d).unwrap();
        let fidelity: f64 = reg
            .amplitudes()
            .iter()
            .zip(&before)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        assert!((fidelity - 1.0).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_states_flip_sign() {
        let data = builtin_instance("A").unwrap();
        let oracle = crate::circuits::build_oracle(&data).unwrap();
        let layout = oracle.layout().clone();
        let d = build_diffusion(&layout).unwrap();
        // (|0> - |1>)/sqrt2 on E qubit 0 is orthogonal to the uniform state
        let mut reg = QuantumRegister::new(layout.qubit_count()).unwrap();
        reg.apply_gate(Gate::Not(0)).unwrap();
        reg.apply_gate(Gate::H(0)).unwrap();
        let before = reg.amplitudes().to_vec();
        reg.apply_circuit(&d).unwrap();
        for (a, b) in reg.amplitudes().iter().zip(&before) {
            assert!((a + b).norm() < 1e-10, "expected exact sign flip");
        }
    }

    #[test]
    fn diffusion_gate_count_is_linear_in_register_size() {
        for n in [3usize, 4, 5, 6] {
            let data = crate::graph::BoundaryDistanceData::new(n, 2, &[(1, 2, 2)]).unwrap();
            let oracle = crate::circuits::build_oracle(&data).unwrap();
            let n_bits = oracle.layout().e_count();
            let d = build_diffusion(oracle.layout()).unwrap();
            // 2N H + 2N NOT + chain (2(N-2)+1) + 5 kick gates
            assert!(d.gates().len() <= 6 * n_bits + 6);
        }
    }
}
