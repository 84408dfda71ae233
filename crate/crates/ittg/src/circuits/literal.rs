//! The distance-oracle subroutines compiled register-for-register against
//! dedicated P/A/F/T registers, exactly as the listings name them. These
//! circuits are wide but structurally transparent; they run in basis mode
//! where width costs nothing.

use super::fragments::{emit_and, emit_or};
use super::{Circuit, CircuitError, Gate, QubitLayout};
use crate::graph::BoundaryDistanceData;

/// Layout with dedicated registers: E, R, P(d,j) for d=1..n-1 and j=1..n,
/// A(1..n), F (sized to serve every chain consumer), T(1..m).
pub fn literal_layout(n: usize, m: usize) -> Result<QubitLayout, CircuitError> {
    if n < 2 || m < 2 || m > n {
        return Err(CircuitError::ParameterRange(format!(
            "need n >= 2 and 2 <= m <= n, got n={n} m={m}"
        )));
    }
    Ok(QubitLayout::new_literal(n, m))
}

/// One layer step: assuming P(d-1, .) satisfies the reachability condition
/// for paths from o, extends it to P(d, .). Structure per column j: CCNOTs
/// computing A(k) = P(d-1,k) & E(k,j), an OR over those and P(d-1,j) into
/// P(d,j), then the reverse CCNOTs.
pub fn build_update(n: usize, m: usize, d: usize, o: usize) -> Result<Circuit, CircuitError> {
    let layout = literal_layout(n, m)?;
    if !(2..n).contains(&d) {
        return Err(CircuitError::ParameterRange(format!(
            "update layer d={d} outside 2..={}",
            n - 1
        )));
    }
    if o == 0 || o > m {
        return Err(CircuitError::ParameterRange(format!("source o={o} outside boundary")));
    }
    let mut gates = Vec::new();
    emit_update(&mut gates, &layout, d, o);
    let ancillas: Vec<usize> = (1..=n)
        .filter(|&k| k != o)
        .map(|k| layout.a_qubit(k))
        .chain((1..=layout.f_len()).map(|k| layout.f_qubit(k)))
        .collect();
    Ok(Circuit::new(layout, gates, ancillas))
}

fn emit_update(gates: &mut Vec<Gate>, layout: &QubitLayout, d: usize, o: usize) {
    let n = layout.n();
    for j in (1..=n).filter(|&j| j != o) {
        let others: Vec<usize> = (1..=n).filter(|&k| k != o && k != j).collect();
        for &k in &others {
            gates.push(Gate::Ccnot {
                control1: layout.p_qubit(d - 1, k),
                control2: layout.e_qubit(k, j),
                target: layout.a_qubit(k),
            });
        }
        let mut controls: Vec<usize> = others.iter().map(|&k| layout.a_qubit(k)).collect();
        controls.push(layout.p_qubit(d - 1, j));
        let scratch: Vec<usize> = (1..=layout.f_len()).map(|k| layout.f_qubit(k)).collect();
        emit_or(gates, &controls, layout.p_qubit(d, j), &scratch);
        for &k in &others {
            gates.push(Gate::Ccnot {
                control1: layout.p_qubit(d - 1, k),
                control2: layout.e_qubit(k, j),
                target: layout.a_qubit(k),
            });
        }
    }
}

/// Fills the whole P table for source o: a CNOT layer for d = 1 (the update
/// step cannot initialize it), then one update per layer d = 2..n-1.
pub fn build_paths(n: usize, m: usize, o: usize) -> Result<Circuit, CircuitError> {
    let layout = literal_layout(n, m)?;
    if o == 0 || o > m {
        return Err(CircuitError::ParameterRange(format!("source o={o} outside boundary")));
    }
    let mut gates = Vec::new();
    emit_paths(&mut gates, &layout, o);
    let ancillas: Vec<usize> = (1..=n)
        .filter(|&k| k != o)
        .map(|k| layout.a_qubit(k))
        .chain((1..=layout.f_len()).map(|k| layout.f_qubit(k)))
        .collect();
    Ok(Circuit::new(layout, gates, ancillas))
}

fn emit_paths(gates: &mut Vec<Gate>, layout: &QubitLayout, o: usize) {
    let n = layout.n();
    for j in (1..=n).filter(|&j| j != o) {
        gates.push(Gate::Cnot { control: layout.e_qubit(j, o), target: layout.p_qubit(1, j) });
    }
    for d in 2..n {
        emit_update(gates, layout, d, o);
    }
}

/// For each source o in B: PATHS, per-target comparison against d0 (the d=1
/// branch is a plain CNOT, d >= 2 checks p(d-1)=0 and p(d)=1), an AND over
/// the comparison bits into T(o), then full uncomputation including
/// REVERSE-PATHS.
pub fn build_test(data: &BoundaryDistanceData) -> Result<Circuit, CircuitError> {
    let layout = literal_layout(data.n(), data.m())?;
    validate(data)?;
    let mut gates = Vec::new();
    emit_test(&mut gates, &layout, data);
    let mut ancillas: Vec<usize> = (1..=data.n())
        .map(|k| layout.a_qubit(k))
        .chain((1..=layout.f_len()).map(|k| layout.f_qubit(k)))
        .collect();
    for d in 1..data.n() {
        for j in 1..=data.n() {
            ancillas.push(layout.p_qubit(d, j));
        }
    }
    Ok(Circuit::new(layout, gates, ancillas))
}

pub(crate) fn validate(data: &BoundaryDistanceData) -> Result<(), CircuitError> {
    data.validate()
        .map_err(|v| CircuitError::InvalidDistanceData(v.to_string()))
}

fn emit_test(gates: &mut Vec<Gate>, layout: &QubitLayout, data: &BoundaryDistanceData) {
    let m = layout.m();
    for o in 1..=m {
        let paths_start = gates.len();
        emit_paths(gates, layout, o);
        let paths_end = gates.len();

        let targets: Vec<usize> = (1..=m).filter(|&j| j != o).collect();
        for &j in &targets {
            let d = data.d(j, o) as usize;
            if d == 1 {
                gates.push(Gate::Cnot { control: layout.p_qubit(1, j), target: layout.a_qubit(j) });
            } else {
                gates.push(Gate::Not(layout.p_qubit(d - 1, j)));
                gates.push(Gate::Ccnot {
                    control1: layout.p_qubit(d, j),
                    control2: layout.p_qubit(d - 1, j),
                    target: layout.a_qubit(j),
                });
            }
        }
        let controls: Vec<usize> = targets.iter().map(|&j| layout.a_qubit(j)).collect();
        let scratch: Vec<usize> = (1..=layout.f_len()).map(|k| layout.f_qubit(k)).collect();
        emit_and(gates, &controls, layout.t_qubit(o), &scratch);
        for &j in &targets {
            let d = data.d(j, o) as usize;
            if d == 1 {
                gates.push(Gate::Cnot { control: layout.p_qubit(1, j), target: layout.a_qubit(j) });
            } else {
                gates.push(Gate::Ccnot {
                    control1: layout.p_qubit(d, j),
                    control2: layout.p_qubit(d - 1, j),
                    target: layout.a_qubit(j),
                });
                gates.push(Gate::Not(layout.p_qubit(d - 1, j)));
            }
        }
        let reversed: Vec<Gate> = gates[paths_start..paths_end]
            .iter()
            .rev()
            .map(|g| g.inverse())
            .collect();
        gates.extend(reversed);
    }
}

/// The reference oracle: TEST, an AND over the T register into R, then
/// REVERSE-TEST. Flips R exactly on adjacency inputs whose graph realizes
/// every boundary distance.
pub fn build_oracle_literal(data: &BoundaryDistanceData) -> Result<Circuit, CircuitError> {
    let layout = literal_layout(data.n(), data.m())?;
    validate(data)?;
    let mut gates = Vec::new();
    let test_start = gates.len();
    emit_test(&mut gates, &layout, data);
    let test_end = gates.len();

    let controls: Vec<usize> = (1..=data.m()).map(|o| layout.t_qubit(o)).collect();
    let scratch: Vec<usize> = (1..=layout.f_len()).map(|k| layout.f_qubit(k)).collect();
    emit_and(&mut gates, &controls, layout.r_qubit(), &scratch);

    let reversed: Vec<Gate> = gates[test_start..test_end]
        .iter()
        .rev()
        .map(|g| g.inverse())
        .collect();
    gates.extend(reversed);

    let mut ancillas: Vec<usize> = (1..=data.n())
        .map(|k| layout.a_qubit(k))
        .chain((1..=layout.f_len()).map(|k| layout.f_qubit(k)))
        .chain((1..=data.m()).map(|o| layout.t_qubit(o)))
        .collect();
    for d in 1..data.n() {
        for j in 1..=data.n() {
            ancillas.push(layout.p_qubit(d, j));
        }
    }
    Ok(Circuit::new(layout, gates, ancillas))
}
