//! Graph representation and the classical side of the inverse travel time
//! problem: layered path tables, the distance test, and the brute-force
//! enumeration oracles that serve as ground truth for the quantum circuits.
//!
//! Vertices are 1-indexed throughout, matching the qubit layout and the
//! measurement bitstring. The unordered pair (j,k), j < k, lives at flat
//! index `(j-1)*n - j*(j+1)/2 + k - 1`, i.e. pairs are ordered
//! (1,2), (1,3), ..., (1,n), (2,3), ...

use serde::Deserialize;
use thiserror::Error;

use crate::exec::{self, ExecMode};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex count must be at least 1")]
    EmptyGraph,
    #[error("bit vector has length {got}, expected {expected}")]
    BitLengthMismatch { got: usize, expected: usize },
    #[error("boundary size m={m} must satisfy 2 <= m <= n={n}")]
    BadBoundarySize { m: usize, n: usize },
    #[error("distance entry ({j},{k}) outside boundary 1..={m}")]
    DistanceIndexOutOfRange { j: usize, k: usize, m: usize },
    #[error("graphs have different vertex counts ({a} vs {b})")]
    SizeMismatch { a: usize, b: usize },
    #[error("{what} guard exceeded: {got} > {limit}")]
    GuardExceeded {
        what: &'static str,
        got: u64,
        limit: u64,
    },
    #[error("instance file: {0}")]
    InstanceFormat(String),
}

/// Upper-triangular bit vector encoding a simple undirected graph on
/// vertices 1..=n.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyVector {
    n: usize,
    bits: Vec<bool>,
}

/// Number of vertex pairs, n(n-1)/2.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl AdjacencyVector {
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        Ok(AdjacencyVector {
            n,
            bits: vec![false; pair_count(n)],
        })
    }

    pub fn from_bits(n: usize, bits: Vec<bool>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if bits.len() != pair_count(n) {
            return Err(GraphError::BitLengthMismatch {
                got: bits.len(),
                expected: pair_count(n),
            });
        }
        Ok(AdjacencyVector { n, bits })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = Self::empty(n)?;
        for &(j, k) in edges {
            adj.check_vertex(j)?;
            adj.check_vertex(k)?;
            adj.set_edge(j, k, true);
        }
        Ok(adj)
    }

    /// Decodes the low `n(n-1)/2` bits of `value`, bit i = pair index i.
    pub fn from_bit_value(n: usize, value: u64) -> Result<Self, GraphError> {
        let len = pair_count(n);
        let bits = (0..len).map(|i| value >> i & 1 == 1).collect();
        Self::from_bits(n, bits)
    }

    pub fn to_bit_value(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bit_count(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v == 0 || v > self.n {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Flat index of the unordered pair {j,k}, 1-based vertices, j != k.
    pub fn pair_index(n: usize, j: usize, k: usize) -> usize {
        debug_assert!(j != k && j >= 1 && k >= 1 && j <= n && k <= n);
        let (j, k) = if j < k { (j, k) } else { (k, j) };
        (j - 1) * n + (k - 1) - j * (j + 1) / 2
    }

    /// Inverse of [`Self::pair_index`].
    pub fn index_pair(n: usize, mut idx: usize) -> (usize, usize) {
        for j in 1..n {
            let row = n - j;
            if idx < row {
                return (j, j + 1 + idx);
            }
            idx -= row;
        }
        panic!("pair index out of range");
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.bits[Self::pair_index(self.n, j, k)]
    }

    pub fn set_edge(&mut self, j: usize, k: usize, present: bool) {
        let idx = Self::pair_index(self.n, j, k);
        self.bits[idx] = present;
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.bits.len())
            .filter(|&i| self.bits[i])
            .map(|i| Self::index_pair(self.n, i))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn degree(&self, v: usize) -> usize {
        (1..=self.n)
            .filter(|&u| u != v && self.has_edge(u, v))
            .count()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (1..=self.n)
            .filter(|&u| u != v && self.has_edge(u, v))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        bfs_distances(self, 1).iter().all(|d| d.is_some())
    }

    /// Renders the measurement string: pair bits in reverse lexicographic
    /// order, e.g. n=3 gives e(2,3) e(1,3) e(1,2).
    pub fn to_measurement_string(&self) -> String {
        self.bits
            .iter()
            .rev()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    pub fn from_measurement_string(n: usize, s: &str) -> Result<Self, GraphError> {
        let bits: Vec<bool> = s
            .chars()
            .rev()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(GraphError::InstanceFormat(format!(
                    "invalid bit character {c:?}"
                ))),
            })
            .collect::<Result<_, _>>()?;
        Self::from_bits(n, bits)
    }

    /// Relabels vertices: `perm[v-1]` is the new label of vertex v.
    pub fn relabel(&self, perm: &[usize]) -> AdjacencyVector {
        assert_eq!(perm.len(), self.n);
        let mut out = AdjacencyVector::empty(self.n).unwrap();
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                let (j, k) = Self::index_pair(self.n, i);
                out.set_edge(perm[j - 1], perm[k - 1], true);
            }
        }
        out
    }
}

/// Boundary distance data (n, m, d0) for the inverse travel time problem:
/// distances are observed on B = {1..m} inside a graph on n vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryDistanceData {
    n: usize,
    m: usize,
    d0: Vec<u32>,
}

/// First violated condition of the standing data assumptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceDataViolation {
    /// d0(j,j) != 0
    Diagonal { j: usize },
    /// d0(j,k) != d0(k,j)
    Symmetry { j: usize, k: usize },
    /// d0(j,k) = 0 for j != k
    Positivity { j: usize, k: usize },
    /// d0(j,k) > n - 1
    Range { j: usize, k: usize, value: u32 },
}

impl std::fmt::Display for DistanceDataViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistanceDataViolation::Diagonal { j } => write!(f, "diagonal: d0({j},{j}) != 0"),
            DistanceDataViolation::Symmetry { j, k } => {
                write!(f, "symmetry: d0({j},{k}) != d0({k},{j})")
            }
            DistanceDataViolation::Positivity { j, k } => {
                write!(f, "positivity: d0({j},{k}) = 0 with {j} != {k}")
            }
            DistanceDataViolation::Range { j, k, value } => {
                write!(f, "range <= n-1: d0({j},{k}) = {value}")
            }
        }
    }
}

impl BoundaryDistanceData {
    /// Builds from `[j, k, dist]` triples; unspecified off-diagonal pairs
    /// stay 0 and are caught by [`Self::validate`].
    pub fn new(n: usize, m: usize, entries: &[(usize, usize, u32)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if m < 2 || m > n {
            return Err(GraphError::BadBoundarySize { m, n });
        }
        let mut d0 = vec![0u32; m * m];
        for &(j, k, dist) in entries {
            if j == 0 || k == 0 || j > m || k > m {
                return Err(GraphError::DistanceIndexOutOfRange { j, k, m });
            }
            d0[(j - 1) * m + (k - 1)] = dist;
            d0[(k - 1) * m + (j - 1)] = dist;
        }
        Ok(BoundaryDistanceData { n, m, d0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self, j: usize, k: usize) -> u32 {
        self.d0[(j - 1) * self.m + (k - 1)]
    }

    pub fn max_distance(&self) -> u32 {
        self.d0.iter().copied().max().unwrap_or(0)
    }

    /// Checks the four standing assumptions on the data; reports the first
    /// violated condition in row-major scan order.
    pub fn validate(&self) -> Result<(), DistanceDataViolation> {
        for j in 1..=self.m {
            if self.d(j, j) != 0 {
                return Err(DistanceDataViolation::Diagonal { j });
            }
        }
        for j in 1..=self.m {
            for k in 1..=self.m {
                if self.d(j, k) != self.d(k, j) {
                    return Err(DistanceDataViolation::Symmetry { j, k });
                }
            }
        }
        for j in 1..=self.m {
            for k in 1..=self.m {
                if j != k && self.d(j, k) == 0 {
                    return Err(DistanceDataViolation::Positivity { j, k });
                }
            }
        }
        for j in 1..=self.m {
            for k in 1..=self.m {
                let v = self.d(j, k);
                if v as usize > self.n - 1 {
                    return Err(DistanceDataViolation::Range { j, k, value: v });
                }
            }
        }
        Ok(())
    }
}

/// Layered reachability table from a source vertex: `p(d,j)` says whether a
/// path of length <= d joins the source to j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLayerTable {
    n: usize,
    source: usize,
    // (d-1) * n + (j-1); column `source` is unused and stays false
    p: Vec<bool>,
}

impl PathLayerTable {
    pub fn source(&self) -> usize {
        self.source
    }

    /// `p(d, j)` for d in 1..=n-1 and j != source.
    pub fn reachable_within(&self, d: usize, j: usize) -> bool {
        assert!(d >= 1 && d < self.n, "layer {d} out of range");
        assert!(j >= 1 && j <= self.n && j != self.source, "vertex {j} invalid");
        self.p[(d - 1) * self.n + (j - 1)]
    }
}

/// Layered shortest-path computation from `o`: fills the table so that
/// p(d,j) = 1 exactly when the graph has a path of length <= d from o to j.
pub fn classical_paths(e: &AdjacencyVector, o: usize) -> Result<PathLayerTable, GraphError> {
    e.check_vertex(o)?;
    let n = e.n();
    let mut p = vec![false; n.saturating_sub(1) * n];
    if n >= 2 {
        for j in 1..=n {
            if j != o {
                p[j - 1] = e.has_edge(o, j);
            }
        }
        for d in 2..n {
            for j in 1..=n {
                if j == o {
                    continue;
                }
                let mut hit = p[(d - 2) * n + (j - 1)];
                for k in 1..=n {
                    if k == o || k == j {
                        continue;
                    }
                    if p[(d - 2) * n + (k - 1)] && e.has_edge(k, j) {
                        hit = true;
                    }
                }
                p[(d - 1) * n + (j - 1)] = hit;
            }
        }
    }
    Ok(PathLayerTable { n, source: o, p })
}

/// The layer-table distance test: 1 iff the graph realizes every boundary
/// distance, composed exactly as the layered algorithm prescribes (the d=1
/// branch versus the p(d-1)=0, p(d)=1 branch).
pub fn classical_test(e: &AdjacencyVector, data: &BoundaryDistanceData) -> bool {
    debug_assert_eq!(e.n(), data.n());
    debug_assert!(data.validate().is_ok());
    for o in 1..=data.m() {
        let table = classical_paths(e, o).expect("boundary vertex in range");
        for j in 1..=data.m() {
            if j == o {
                continue;
            }
            let d = data.d(o, j) as usize;
            let s = if d == 1 {
                table.reachable_within(1, j)
            } else {
                !table.reachable_within(d - 1, j) && table.reachable_within(d, j)
            };
            if !s {
                return false;
            }
        }
    }
    true
}

/// Independent BFS distances from `source`; `None` marks unreachable
/// vertices. Cross-check oracle for the layered computation.
pub fn bfs_distances(e: &AdjacencyVector, source: usize) -> Vec<Option<u32>> {
    let n = e.n();
    let mut dist = vec![None; n];
    dist[source - 1] = Some(0);
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v - 1].unwrap();
        for u in 1..=n {
            if u != v && e.has_edge(u, v) && dist[u - 1].is_none() {
                dist[u - 1] = Some(dv + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

pub const DEFAULT_ENUMERATION_GUARD: u32 = 30;

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub max_bits: u32,
    pub mode: ExecMode,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_bits: DEFAULT_ENUMERATION_GUARD,
            mode: ExecMode::default(),
        }
    }
}

/// Enumerates every adjacency vector on n vertices and keeps those passing
/// [`classical_test`]: the exact solution set T, ordered by bit value.
pub fn brute_force_solutions(
    data: &BoundaryDistanceData,
) -> Result<Vec<AdjacencyVector>, GraphError> {
    brute_force_solutions_with(data, SearchOptions::default())
}

pub fn brute_force_solutions_with(
    data: &BoundaryDistanceData,
    opts: SearchOptions,
) -> Result<Vec<AdjacencyVector>, GraphError> {
    let bits = pair_count(data.n()) as u32;
    if bits > opts.max_bits {
        return Err(GraphError::GuardExceeded {
            what: "enumeration bits",
            got: u64::from(bits),
            limit: u64::from(opts.max_bits),
        });
    }
    let n = data.n();
    Ok(exec::collect_filtered(0..1u64 << bits, opts.mode, |value| {
        let e = AdjacencyVector::from_bit_value(n, value).unwrap();
        classical_test(&e, data).then_some(e)
    }))
}

pub const DEFAULT_ISOMORPHISM_GUARD: usize = 10;

/// Edge-preserving bijection test by backtracking over vertex assignments,
/// with a degree-sequence prefilter. Guarded to small n.
pub fn graphs_isomorphic(a: &AdjacencyVector, b: &AdjacencyVector) -> Result<bool, GraphError> {
    graphs_isomorphic_with_prescribed(a, b, &[])
}

/// Isomorphism test where `prescribed` pins vertex images (pairs of 1-based
/// vertices of a and b). A boundary-respecting check prescribes the identity
/// on the boundary.
pub fn graphs_isomorphic_with_prescribed(
    a: &AdjacencyVector,
    b: &AdjacencyVector,
    prescribed: &[(usize, usize)],
) -> Result<bool, GraphError> {
    graphs_isomorphic_guarded(a, b, prescribed, DEFAULT_ISOMORPHISM_GUARD)
}

/// As [`graphs_isomorphic_with_prescribed`] with an explicit vertex-count
/// guard, for callers (like the tree round-trip checks) that accept the
/// cost of a slightly larger search.
pub fn graphs_isomorphic_guarded(
    a: &AdjacencyVector,
    b: &AdjacencyVector,
    prescribed: &[(usize, usize)],
    guard: usize,
) -> Result<bool, GraphError> {
    if a.n() != b.n() {
        return Err(GraphError::SizeMismatch { a: a.n(), b: b.n() });
    }
    let n = a.n();
    if n > guard {
        return Err(GraphError::GuardExceeded {
            what: "isomorphism vertices",
            got: n as u64,
            limit: guard as u64,
        });
    }
    if a.edge_count() != b.edge_count() {
        return Ok(false);
    }
    let mut deg_a: Vec<usize> = (1..=n).map(|v| a.degree(v)).collect();
    let mut deg_b: Vec<usize> = (1..=n).map(|v| b.degree(v)).collect();
    let (da, db) = (deg_a.clone(), deg_b.clone());
    deg_a.sort_unstable();
    deg_b.sort_unstable();
    if deg_a != deg_b {
        return Ok(false);
    }

    // map[v-1] = image of v, 0 = unassigned
    let mut map = vec![0usize; n];
    let mut used = vec![false; n];
    for &(va, vb) in prescribed {
        a.check_vertex(va)?;
        b.check_vertex(vb)?;
        if (map[va - 1] != 0 && map[va - 1] != vb) || (map[va - 1] == 0 && used[vb - 1]) {
            return Ok(false);
        }
        if da[va - 1] != db[vb - 1] {
            return Ok(false);
        }
        map[va - 1] = vb;
        used[vb - 1] = true;
    }

    fn extend(
        a: &AdjacencyVector,
        b: &AdjacencyVector,
        da: &[usize],
        db: &[usize],
        map: &mut [usize],
        used: &mut [bool],
        v: usize,
    ) -> bool {
        let n = a.n();
        if v > n {
            return true;
        }
        if map[v - 1] != 0 {
            return extend(a, b, da, db, map, used, v + 1);
        }
        for w in 1..=n {
            if used[w - 1] || da[v - 1] != db[w - 1] {
                continue;
            }
            let consistent = (1..=n).all(|u| {
                u == v || map[u - 1] == 0 || a.has_edge(u, v) == b.has_edge(map[u - 1], w)
            });
            if consistent {
                map[v - 1] = w;
                used[w - 1] = true;
                if extend(a, b, da, db, map, used, v + 1) {
                    return true;
                }
                map[v - 1] = 0;
                used[w - 1] = false;
            }
        }
        false
    }

    // verify prescribed pairs are already edge-consistent with each other
    for &(va, _) in prescribed {
        for &(ua, _) in prescribed {
            if ua != va && a.has_edge(ua, va) != b.has_edge(map[ua - 1], map[va - 1]) {
                return Ok(false);
            }
        }
    }
    Ok(extend(a, b, &da, &db, &mut map, &mut used, 1))
}

/// The four built-in instances with their published boundary distance data.
pub fn builtin_instance(name: &str) -> Option<BoundaryDistanceData> {
    let data = match name {
        "A" => BoundaryDistanceData::new(3, 2, &[(1, 2, 2)]),
        "B" => BoundaryDistanceData::new(4, 3, &[(1, 2, 2), (1, 3, 2), (2, 3, 1)]),
        "C" => BoundaryDistanceData::new(
            5,
            4,
            &[(1, 2, 2), (1, 3, 2), (1, 4, 1), (2, 3, 1), (2, 4, 2), (3, 4, 1)],
        ),
        "D" => BoundaryDistanceData::new(
            5,
            4,
            &[(1, 2, 2), (1, 3, 2), (1, 4, 2), (2, 3, 2), (2, 4, 2), (3, 4, 2)],
        ),
        _ => return None,
    };
    Some(data.expect("built-in instances are well-formed"))
}

#[derive(Deserialize)]
struct InstanceFile {
    n: usize,
    m: usize,
    d0: Vec<(usize, usize, u32)>,
}

/// Parses an instance file: a JSON object with fields `n`, `m`, and `d0`
/// (a list of `[j, k, dist]` triples with j < k <= m).
pub fn parse_instance(text: &str) -> Result<BoundaryDistanceData, GraphError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| GraphError::InstanceFormat(e.to_string()))?;
    BoundaryDistanceData::new(file.n, file.m, &file.d0)
}
