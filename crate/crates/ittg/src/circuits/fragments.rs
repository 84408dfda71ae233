//! The OR gate and the iterated AND/OR operators, as standalone fragments
//! and as emit helpers shared by the subroutine builders.
//!
//! Chain extensions below the listed arities follow the degenerate cases:
//! AND over one control is a CNOT, over two a CCNOT; OR over one control is
//! a CNOT, over two the NOT-sandwich OR gate.

use super::{Circuit, CircuitError, Gate, QubitLayout};

/// T ^= C1 & C2 & ... & Ck with clean scratch, `scratch.len() >= k - 2`.
/// For k >= 3 this is the CCNOT chain with uncomputation.
pub(crate) fn emit_and(gates: &mut Vec<Gate>, controls: &[usize], target: usize, scratch: &[usize]) {
    let k = controls.len();
    match k {
        0 => gates.push(Gate::Not(target)),
        1 => gates.push(Gate::Cnot { control: controls[0], target }),
        2 => gates.push(Gate::Ccnot { control1: controls[0], control2: controls[1], target }),
        _ => {
            assert!(scratch.len() >= k - 2, "AND chain needs {} scratch qubits", k - 2);
            gates.push(Gate::Ccnot { control1: controls[0], control2: controls[1], target: scratch[0] });
            for j in 1..k - 2 {
                gates.push(Gate::Ccnot {
                    control1: scratch[j - 1],
                    control2: controls[j + 1],
                    target: scratch[j],
                });
            }
            gates.push(Gate::Ccnot { control1: scratch[k - 3], control2: controls[k - 1], target });
            for j in (1..k - 2).rev() {
                gates.push(Gate::Ccnot {
                    control1: scratch[j - 1],
                    control2: controls[j + 1],
                    target: scratch[j],
                });
            }
            gates.push(Gate::Ccnot { control1: controls[0], control2: controls[1], target: scratch[0] });
        }
    }
}

/// T ^= C1 | C2 | ... | Ck. Two controls use the NOT-NOT-CCNOT-NOT sandwich;
/// more go through the NOT-conjugated AND chain.
pub(crate) fn emit_or(gates: &mut Vec<Gate>, controls: &[usize], target: usize, scratch: &[usize]) {
    match controls.len() {
        0 => {}
        1 => gates.push(Gate::Cnot { control: controls[0], target }),
        2 => {
            gates.push(Gate::Not(controls[0]));
            gates.push(Gate::Not(controls[1]));
            gates.push(Gate::Not(target));
            gates.push(Gate::Ccnot { control1: controls[0], control2: controls[1], target });
            gates.push(Gate::Not(controls[0]));
            gates.push(Gate::Not(controls[1]));
        }
        _ => {
            for &c in controls {
                gates.push(Gate::Not(c));
            }
            emit_and(gates, controls, target, scratch);
            gates.push(Gate::Not(target));
            for &c in controls {
                gates.push(Gate::Not(c));
            }
        }
    }
}

/// The two-control OR gate on qubits C1=0, C2=1, T=2.
pub fn build_or2() -> Circuit {
    let mut gates = Vec::new();
    emit_or(&mut gates, &[0, 1], 2, &[]);
    Circuit::new(QubitLayout::fragment(3), gates, vec![])
}

/// The iterated AND over m controls: qubits C1..Cm = 0..m-1, T = m,
/// F(1..m-2) = m+1 onward.
pub fn build_and_m(m: usize) -> Result<Circuit, CircuitError> {
    if m == 0 {
        return Err(CircuitError::ParameterRange("AND over zero controls".into()));
    }
    let scratch_len = m.saturating_sub(2);
    let controls: Vec<usize> = (0..m).collect();
    let scratch: Vec<usize> = (m + 1..m + 1 + scratch_len).collect();
    let mut gates = Vec::new();
    emit_and(&mut gates, &controls, m, &scratch);
    Ok(Circuit::new(QubitLayout::fragment(m + 1 + scratch_len), gates, scratch))
}

/// The iterated OR over m controls, same qubit convention as [`build_and_m`].
pub fn build_or_m(m: usize) -> Result<Circuit, CircuitError> {
    if m == 0 {
        return Err(CircuitError::ParameterRange("OR over zero controls".into()));
    }
    let scratch_len = m.saturating_sub(2);
    let controls: Vec<usize> = (0..m).collect();
    let scratch: Vec<usize> = (m + 1..m + 1 + scratch_len).collect();
    let mut gates = Vec::new();
    emit_or(&mut gates, &controls, m, &scratch);
    Ok(Circuit::new(QubitLayout::fragment(m + 1 + scratch_len), gates, scratch))
}
