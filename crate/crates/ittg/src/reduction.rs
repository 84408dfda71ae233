//! The restricted inverse travel time problem: instance model, solution
//! verification, the CNF-to-instance gadget construction, witness maps in
//! both directions, and the decision-to-search wrapper.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{self, ExecMode};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("formula has no clauses")]
    EmptyFormula,
    #[error("clause {index} is empty")]
    EmptyClause { index: usize },
    #[error("literal {literal} names no variable (formula has {num_vars})")]
    BadLiteral { literal: i32, num_vars: usize },
    #[error("DIMACS: {0}")]
    Dimacs(String),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("unknown vertex name {0:?}")]
    UnknownVertex(String),
    #[error("required edges are not a subset of allowed edges: {0:?}")]
    MandatoryNotAllowed((usize, usize)),
    #[error("{what} guard exceeded: {got} > {limit}")]
    GuardExceeded { what: &'static str, got: u64, limit: u64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("decision procedure inconsistent: {0}")]
    DecisionInconsistent(String),
    #[error("assignment has {got} values for {expected} variables")]
    AssignmentLength { got: usize, expected: usize },
}

/// CNF formula over variables 1..=num_vars; a literal is a signed index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self, ReductionError> {
        for (index, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(ReductionError::EmptyClause { index: index + 1 });
            }
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(ReductionError::BadLiteral { literal: lit, num_vars });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn evaluate(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let value = assignment[lit.unsigned_abs() as usize - 1];
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
        })
    }

    /// Parses DIMACS CNF: comment lines, a `p cnf N M` header, then
    /// zero-terminated clauses.
    pub fn parse_dimacs(text: &str) -> Result<Self, ReductionError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        let mut current: Vec<i32> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(ReductionError::Dimacs(format!("bad header {line:?}")));
                }
                let n = parts[2]
                    .parse()
                    .map_err(|e| ReductionError::Dimacs(format!("bad variable count: {e}")))?;
                let m = parts[3]
                    .parse()
                    .map_err(|e| ReductionError::Dimacs(format!("bad clause count: {e}")))?;
                header = Some((n, m));
                continue;
            }
            for token in line.split_whitespace() {
                let lit: i32 = token
                    .parse()
                    .map_err(|e| ReductionError::Dimacs(format!("bad literal {token:?}: {e}")))?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let (num_vars, num_clauses) =
            header.ok_or_else(|| ReductionError::Dimacs("missing p cnf header".into()))?;
        if clauses.len() != num_clauses {
            return Err(ReductionError::Dimacs(format!(
                "header promises {num_clauses} clauses, found {}",
                clauses.len()
            )));
        }
        Self::new(num_vars, clauses)
    }
}

/// Exhaustive truth-table satisfiability, the independent oracle for the
/// reduction tests. The empty formula is vacuously satisfiable.
pub fn satisfiable_truth_table(f: &CnfFormula) -> Result<bool, ReductionError> {
    if f.num_vars > 20 {
        return Err(ReductionError::GuardExceeded {
            what: "truth table variables",
            got: f.num_vars as u64,
            limit: 20,
        });
    }
    let n = f.num_vars;
    Ok((0..1u64 << n).any(|bits| {
        let assignment: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        f.evaluate(&assignment)
    }))
}

fn normalize(x: usize, y: usize) -> (usize, usize) {
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Instance of the restricted problem: named vertices, required distances
/// on ordered pairs V, mandatory edges E0 and allowed edges E1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedInstance {
    vertices: Vec<String>,
    v_pairs: Vec<(usize, usize, u32)>,
    e0: Vec<(usize, usize)>,
    e1: Vec<(usize, usize)>,
}

impl RestrictedInstance {
    pub fn new(
        vertices: Vec<String>,
        v_pairs: Vec<(usize, usize, u32)>,
        e0: Vec<(usize, usize)>,
        e1: Vec<(usize, usize)>,
    ) -> Result<Self, ReductionError> {
        let n = vertices.len();
        let check = |v: usize| {
            if v >= n {
                Err(ReductionError::VertexOutOfRange(v))
            } else {
                Ok(())
            }
        };
        for &(x, y, _) in &v_pairs {
            check(x)?;
            check(y)?;
        }
        let mut e0: Vec<(usize, usize)> = e0.iter().map(|&(x, y)| normalize(x, y)).collect();
        let mut e1: Vec<(usize, usize)> = e1.iter().map(|&(x, y)| normalize(x, y)).collect();
        e0.sort_unstable();
        e0.dedup();
        e1.sort_unstable();
        e1.dedup();
        for &(x, y) in e1.iter().chain(&e0) {
            check(x)?;
            check(y)?;
        }
        if let Some(&edge) = e0.iter().find(|e| !e1.contains(e)) {
            return Err(ReductionError::MandatoryNotAllowed(edge));
        }
        Ok(RestrictedInstance { vertices, v_pairs, e0, e1 })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize, ReductionError> {
        self.vertices
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| ReductionError::UnknownVertex(name.to_string()))
    }

    pub fn v_pairs(&self) -> &[(usize, usize, u32)] {
        &self.v_pairs
    }

    pub fn e0(&self) -> &[(usize, usize)] {
        &self.e0
    }

    pub fn e1(&self) -> &[(usize, usize)] {
        &self.e1
    }

    pub fn free_edges(&self) -> Vec<(usize, usize)> {
        self.e1.iter().copied().filter(|e| !self.e0.contains(e)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ReductionError> {
        let inst: RestrictedInstance =
            serde_json::from_str(text).map_err(|e| ReductionError::Dimacs(e.to_string()))?;
        Self::new(inst.vertices, inst.v_pairs, inst.e0, inst.e1)
    }
}

fn bfs_dist(n: usize, adj: &[Vec<usize>], from: usize, to: usize) -> Option<u32> {
    let mut dist = vec![None; n];
    dist[from] = Some(0);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            return dist[v];
        }
        for &u in &adj[v] {
            if dist[u].is_none() {
                dist[u] = Some(dist[v].unwrap() + 1);
                queue.push_back(u);
            }
        }
    }
    dist[to]
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(x, y) in edges {
        adj[x].push(y);
        adj[y].push(x);
    }
    adj
}

/// 1 iff E0 ⊆ E ⊆ E1 and the graph (X, E) realizes every required pair
/// distance exactly.
pub fn verify_restricted(
    inst: &RestrictedInstance,
    edges: &[(usize, usize)],
) -> Result<bool, ReductionError> {
    let n = inst.vertex_count();
    let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
    for &(x, y) in edges {
        if x >= n || y >= n {
            return Err(ReductionError::VertexOutOfRange(x.max(y)));
        }
        normalized.push(normalize(x, y));
    }
    normalized.sort_unstable();
    normalized.dedup();
    if !inst.e0.iter().all(|e| normalized.contains(e)) {
        return Ok(false);
    }
    if !normalized.iter().all(|e| inst.e1.contains(e)) {
        return Ok(false);
    }
    let adj = adjacency(n, &normalized);
    Ok(inst
        .v_pairs
        .iter()
        .all(|&(x, y, d)| bfs_dist(n, &adj, x, y) == Some(d)))
}

/// Vertex indices of the gadget built from a formula: TRUE first, then the
/// u, a, negated-a, negated-u block per variable, then one vertex per
/// clause.
pub struct GadgetIndex {
    num_vars: usize,
}

impl GadgetIndex {
    pub fn true_vertex(&self) -> usize {
        0
    }
    pub fn u(&self, j: usize) -> usize {
        1 + 4 * (j - 1)
    }
    pub fn a(&self, j: usize) -> usize {
        2 + 4 * (j - 1)
    }
    pub fn a_bar(&self, j: usize) -> usize {
        3 + 4 * (j - 1)
    }
    pub fn u_bar(&self, j: usize) -> usize {
        4 + 4 * (j - 1)
    }
    pub fn clause(&self, i: usize) -> usize {
        4 * self.num_vars + i
    }
}

pub fn gadget_index(f: &CnfFormula) -> GadgetIndex {
    GadgetIndex { num_vars: f.num_vars }
}

/// Per-bucket edge counts of the gadget: TRUE-to-literal, variable ladder,
/// positive clause membership, negated clause membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetSummary {
    pub vertices: usize,
    pub constrained_pairs: usize,
    pub edge_buckets: [usize; 4],
}

impl GadgetSummary {
    pub fn total_edges(&self) -> usize {
        self.edge_buckets.iter().sum()
    }
}

/// Builds the restricted instance from a CNF formula: 1 + 4N + M vertices,
/// TRUE-to-clause and literal-to-negation distances all required to be 3,
/// no mandatory edges, and allowed edges per the four gadget buckets.
/// Duplicate literals inside a clause are collapsed; empty clauses are
/// rejected (their clause vertex would be unreachable).
pub fn reduce_cnf(f: &CnfFormula) -> Result<RestrictedInstance, ReductionError> {
    if f.clauses.is_empty() {
        return Err(ReductionError::EmptyFormula);
    }
    let idx = gadget_index(f);
    let n_vars = f.num_vars;
    let mut vertices = vec!["TRUE".to_string()];
    for j in 1..=n_vars {
        vertices.push(format!("u{j}"));
        vertices.push(format!("a{j}"));
        vertices.push(format!("~a{j}"));
        vertices.push(format!("~u{j}"));
    }
    for i in 1..=f.clauses.len() {
        vertices.push(format!("C{i}"));
    }

    let mut v_pairs = Vec::new();
    for j in 1..=n_vars {
        v_pairs.push((idx.u(j), idx.u_bar(j), 3));
    }
    for i in 1..=f.clauses.len() {
        v_pairs.push((idx.true_vertex(), idx.clause(i), 3));
    }

    let mut e1 = Vec::new();
    for j in 1..=n_vars {
        e1.push((idx.true_vertex(), idx.u(j)));
        e1.push((idx.true_vertex(), idx.u_bar(j)));
    }
    for j in 1..=n_vars {
        e1.push((idx.u(j), idx.a(j)));
        e1.push((idx.a(j), idx.a_bar(j)));
        e1.push((idx.a_bar(j), idx.u_bar(j)));
    }
    for (i, clause) in f.clauses.iter().enumerate() {
        let mut seen = std::collections::HashSet::new();
        for &lit in clause {
            if !seen.insert(lit) {
                continue;
            }
            let j = lit.unsigned_abs() as usize;
            if lit > 0 {
                e1.push((idx.a(j), idx.clause(i + 1)));
            } else {
                e1.push((idx.a_bar(j), idx.clause(i + 1)));
            }
        }
    }

    RestrictedInstance::new(vertices, v_pairs, Vec::new(), e1)
}

pub fn gadget_summary(f: &CnfFormula) -> Result<GadgetSummary, ReductionError> {
    if f.clauses.is_empty() {
        return Err(ReductionError::EmptyFormula);
    }
    let n = f.num_vars;
    let mut positive = 0;
    let mut negative = 0;
    for clause in &f.clauses {
        let mut seen = std::collections::HashSet::new();
        for &lit in clause {
            if seen.insert(lit) {
                if lit > 0 {
                    positive += 1;
                } else {
                    negative += 1;
                }
            }
        }
    }
    Ok(GadgetSummary {
        vertices: 1 + 4 * n + f.clauses.len(),
        constrained_pairs: n + f.clauses.len(),
        edge_buckets: [2 * n, 3 * n, positive, negative],
    })
}

/// The forward witness map: the ladder and clause-membership edges plus a
/// TRUE edge to each literal the assignment makes true. If the assignment
/// satisfies the formula, the result solves the gadget instance.
pub fn assignment_to_edges(
    f: &CnfFormula,
    assignment: &[bool],
) -> Result<Vec<(usize, usize)>, ReductionError> {
    if assignment.len() != f.num_vars {
        return Err(ReductionError::AssignmentLength {
            got: assignment.len(),
            expected: f.num_vars,
        });
    }
    let inst = reduce_cnf(f)?;
    let idx = gadget_index(f);
    let mut edges: Vec<(usize, usize)> = inst
        .e1
        .iter()
        .copied()
        .filter(|&(x, y)| x != idx.true_vertex() && y != idx.true_vertex())
        .collect();
    for j in 1..=f.num_vars {
        let literal_vertex = if assignment[j - 1] { idx.u(j) } else { idx.u_bar(j) };
        edges.push((idx.true_vertex(), literal_vertex));
    }
    edges.sort_unstable();
    Ok(edges)
}

/// The backward witness map: a variable is true exactly when TRUE is not
/// joined to its negation. Requires `edges` to solve the gadget instance;
/// the returned assignment then satisfies the formula.
pub fn edges_to_assignment(
    f: &CnfFormula,
    edges: &[(usize, usize)],
) -> Result<Vec<bool>, ReductionError> {
    let inst = reduce_cnf(f)?;
    if !verify_restricted(&inst, edges)? {
        return Err(ReductionError::PreconditionViolated(
            "edge set does not solve the gadget instance".into(),
        ));
    }
    let idx = gadget_index(f);
    let normalized: Vec<(usize, usize)> = edges.iter().map(|&(x, y)| normalize(x, y)).collect();
    Ok((1..=f.num_vars)
        .map(|j| !normalized.contains(&normalize(idx.true_vertex(), idx.u_bar(j))))
        .collect())
}

pub const DEFAULT_DECISION_GUARD: u32 = 24;

#[derive(Debug, Clone, Copy)]
pub struct DecisionOptions {
    pub max_free_edges: u32,
    pub mode: ExecMode,
}

impl Default for DecisionOptions {
    fn default() -> Self {
        DecisionOptions { max_free_edges: DEFAULT_DECISION_GUARD, mode: ExecMode::default() }
    }
}

/// Ground-truth decision oracle: flat enumeration of every edge set between
/// E0 and E1.
pub fn decision_brute_force(inst: &RestrictedInstance) -> Result<bool, ReductionError> {
    decision_brute_force_with(inst, DecisionOptions::default())
}

pub fn decision_brute_force_with(
    inst: &RestrictedInstance,
    opts: DecisionOptions,
) -> Result<bool, ReductionError> {
    let free = inst.free_edges();
    if free.len() as u32 > opts.max_free_edges {
        return Err(ReductionError::GuardExceeded {
            what: "free edges",
            got: free.len() as u64,
            limit: u64::from(opts.max_free_edges),
        });
    }
    let n = inst.vertex_count();
    Ok(exec::any(0..1u64 << free.len(), opts.mode, |mask| {
        let mut edges: Vec<(usize, usize)> = inst.e0.clone();
        for (i, &e) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                edges.push(e);
            }
        }
        let adj = adjacency(n, &edges);
        inst.v_pairs
            .iter()
            .all(|&(x, y, d)| bfs_dist(n, &adj, x, y) == Some(d))
    }))
}

/// Complete decision search with distance-interval pruning: adding edges
/// can only shrink distances, so the distance over included-plus-undecided
/// edges bounds the reachable distance from below and the included-only
/// distance bounds it from above. Exhaustive but fast on gadget instances
/// whose flat enumeration would be infeasible.
pub fn decision_exhaustive_pruned(inst: &RestrictedInstance) -> bool {
    let free = inst.free_edges();
    let n = inst.vertex_count();
    #[derive(Clone, Copy, PartialEq)]
    enum S {
        Undecided,
        In,
        Out,
    }
    fn feasible(
        inst: &RestrictedInstance,
        free: &[(usize, usize)],
        state: &[S],
        n: usize,
    ) -> bool {
        let mut lower = inst.e0.clone();
        let mut upper = inst.e0.clone();
        for (i, &e) in free.iter().enumerate() {
            match state[i] {
                S::In => {
                    lower.push(e);
                    upper.push(e);
                }
                S::Undecided => upper.push(e),
                S::Out => {}
            }
        }
        let min_adj = adjacency(n, &upper);
        let max_adj = adjacency(n, &lower);
        inst.v_pairs.iter().all(|&(x, y, d)| {
            let d_min = bfs_dist(n, &min_adj, x, y);
            let d_max = bfs_dist(n, &max_adj, x, y);
            let lower_ok = match d_min {
                Some(v) => v <= d,
                None => false,
            };
            let upper_ok = match d_max {
                Some(v) => v >= d,
                None => true,
            };
            lower_ok && upper_ok
        })
    }
    fn search(
        inst: &RestrictedInstance,
        free: &[(usize, usize)],
        state: &mut [S],
        from: usize,
        n: usize,
    ) -> bool {
        if !feasible(inst, free, state, n) {
            return false;
        }
        let Some(next) = (from..free.len()).find(|&i| state[i] == S::Undecided) else {
            return true;
        };
        for choice in [S::In, S::Out] {
            state[next] = choice;
            if search(inst, free, state, next + 1, n) {
                return true;
            }
        }
        state[next] = S::Undecided;
        false
    }
    let mut state = vec![S::Undecided; free.len()];
    search(inst, &free, &mut state, 0, n)
}

/// Result of the decision-to-search wrapper.
#[derive(Debug, Clone)]
pub struct DecisionSolve {
    pub edges: Option<Vec<(usize, usize)>>,
    pub decision_calls: usize,
}

/// Recovers a full solution from a decision procedure by pinning one free
/// edge at a time, with at most |E1 - E0| + 1 decision calls.
pub fn solve_via_decision<F>(
    inst: &RestrictedInstance,
    mut decision: F,
) -> Result<DecisionSolve, ReductionError>
where
    F: FnMut(&RestrictedInstance) -> bool,
{
    let bound = inst.free_edges().len() + 1;
    let mut calls = 1;
    if !decision(inst) {
        return Ok(DecisionSolve { edges: None, decision_calls: calls });
    }
    let mut e0 = inst.e0.clone();
    let mut e1 = inst.e1.clone();
    while e0 != e1 {
        let edge = *e1.iter().find(|e| !e0.contains(e)).expect("e0 != e1");
        let mut e0_new = e0.clone();
        e0_new.push(edge);
        e0_new.sort_unstable();
        let candidate = RestrictedInstance::new(
            inst.vertices.clone(),
            inst.v_pairs.clone(),
            e0_new.clone(),
            e1.clone(),
        )?;
        calls += 1;
        if calls > bound {
            return Err(ReductionError::DecisionInconsistent(format!(
                "call budget {bound} exceeded"
            )));
        }
        if decision(&candidate) {
            e0 = e0_new;
        } else {
            e1.retain(|&e| e != edge);
        }
    }
    if !verify_restricted(inst, &e0)? {
        return Err(ReductionError::DecisionInconsistent(
            "accepted branch yields a non-solution".into(),
        ));
    }
    Ok(DecisionSolve { edges: Some(e0), decision_calls: calls })
}
