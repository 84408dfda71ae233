//! Tree boundary-rigidity toolkit: Gromov products, trunk peeling,
//! constructive reconstruction of a tree from its leaf-to-leaf distances,
//! and brute-force rigidity verification on small vertex counts.

use serde::Deserialize;
use thiserror::Error;

use crate::exec::{self, ExecMode};
use crate::graph::{
    bfs_distances, graphs_isomorphic_with_prescribed, pair_count, AdjacencyVector, GraphError,
};

#[derive(Debug, Error)]
pub enum RigidityError {
    #[error("graph is not a tree: {0}")]
    NotATree(String),
    #[error("vertex {0} is not a leaf")]
    NotALeaf(usize),
    #[error("leaf index {index} out of range 1..={m}")]
    LeafOutOfRange { index: usize, m: usize },
    #[error("leaf indices must be distinct, got {0:?}")]
    LeavesNotDistinct(Vec<usize>),
    #[error("need at least {needed} leaves, got {got}")]
    TooFewLeaves { needed: usize, got: usize },
    #[error("leaf counts differ: {a} vs {b}")]
    LeafCountMismatch { a: usize, b: usize },
    #[error("sigma is not a bijection onto the second tree's leaves")]
    BadSigma,
    #[error("{what} guard exceeded: {got} > {limit}")]
    GuardExceeded { what: &'static str, got: usize, limit: usize },
    #[error("boundary distances are not all finite on the reference graph")]
    DisconnectedBoundary,
    #[error("matrix file: {0}")]
    MatrixFormat(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A connected acyclic graph together with its leaf list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    adj: AdjacencyVector,
    leaves: Vec<usize>,
}

impl Tree {
    pub fn from_adjacency(adj: AdjacencyVector) -> Result<Self, RigidityError> {
        let n = adj.n();
        if adj.edge_count() != n - 1 {
            return Err(RigidityError::NotATree(format!(
                "{} edges on {} vertices",
                adj.edge_count(),
                n
            )));
        }
        if !adj.is_connected() {
            return Err(RigidityError::NotATree("disconnected".into()));
        }
        let leaves = (1..=n).filter(|&v| adj.degree(v) == 1).collect();
        Ok(Tree { adj, leaves })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, RigidityError> {
        Self::from_adjacency(AdjacencyVector::from_edges(n, edges)?)
    }

    pub fn adjacency(&self) -> &AdjacencyVector {
        &self.adj
    }

    pub fn n(&self) -> usize {
        self.adj.n()
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    /// Pairwise distances between the leaves, indexed in leaf-list order.
    pub fn leaf_distance_matrix(&self) -> LeafDistanceMatrix {
        let m = self.leaves.len();
        let mut d = vec![0u32; m * m];
        for (i, &p) in self.leaves.iter().enumerate() {
            let dist = bfs_distances(&self.adj, p);
            for (j, &q) in self.leaves.iter().enumerate() {
                d[i * m + j] = dist[q - 1].expect("tree is connected");
            }
        }
        LeafDistanceMatrix { m, d }
    }
}

/// Symmetric nonnegative integer matrix of claimed leaf-to-leaf distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafDistanceMatrix {
    m: usize,
    d: Vec<u32>,
}

impl LeafDistanceMatrix {
    pub fn from_triples(m: usize, entries: &[(usize, usize, u32)]) -> Result<Self, RigidityError> {
        let mut d = vec![0u32; m * m];
        for &(p, q, dist) in entries {
            if p == 0 || q == 0 || p > m || q > m {
                return Err(RigidityError::LeafOutOfRange { index: p.max(q), m });
            }
            d[(p - 1) * m + (q - 1)] = dist;
            d[(q - 1) * m + (p - 1)] = dist;
        }
        Ok(LeafDistanceMatrix { m, d })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self, p: usize, q: usize) -> u32 {
        self.d[(p - 1) * self.m + (q - 1)]
    }
}

#[derive(Deserialize)]
struct MatrixFile {
    m: usize,
    d: Vec<(usize, usize, u32)>,
}

/// Parses a leaf-distance file: JSON with fields `m` and `d` (triples).
pub fn parse_leaf_matrix(text: &str) -> Result<LeafDistanceMatrix, RigidityError> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| RigidityError::MatrixFormat(e.to_string()))?;
    LeafDistanceMatrix::from_triples(file.m, &file.d)
}

#[derive(Deserialize)]
struct TreeFile {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// Parses a tree file: JSON with fields `n` and `edges`.
pub fn parse_tree(text: &str) -> Result<Tree, RigidityError> {
    let file: TreeFile =
        serde_json::from_str(text).map_err(|e| RigidityError::MatrixFormat(e.to_string()))?;
    Tree::from_edges(file.n, &file.edges)
}

/// (p,q)_z = d(p,z) + d(q,z) - d(p,q). Twice the distance from z to the
/// meeting point of p and q in a tree realizing d.
pub fn gromov_product(
    d: &LeafDistanceMatrix,
    p: usize,
    q: usize,
    z: usize,
) -> Result<i64, RigidityError> {
    for &v in &[p, q, z] {
        if v == 0 || v > d.m() {
            return Err(RigidityError::LeafOutOfRange { index: v, m: d.m() });
        }
    }
    if p == q || p == z || q == z {
        return Err(RigidityError::LeavesNotDistinct(vec![p, q, z]));
    }
    Ok(i64::from(d.d(p, z)) + i64::from(d.d(q, z)) - i64::from(d.d(p, q)))
}

/// The trunk of leaf p: the maximal simple path p x1 .. xk y whose interior
/// vertices all have degree 2. Returns the full vertex path; its length is
/// `path.len() - 1`.
pub fn leaf_trunk(t: &Tree, p: usize) -> Result<Vec<usize>, RigidityError> {
    if !t.leaves().contains(&p) {
        return Err(RigidityError::NotALeaf(p));
    }
    let mut path = vec![p];
    let mut prev = p;
    let mut cur = t.adj.neighbors(p)[0];
    while t.adj.degree(cur) == 2 {
        let next = t
            .adj
            .neighbors(cur)
            .into_iter()
            .find(|&u| u != prev)
            .expect("degree-2 vertex has another neighbor");
        path.push(cur);
        prev = cur;
        cur = next;
    }
    path.push(cur);
    Ok(path)
}

/// Outcome of [`reconstruct_tree`]: either a tree realizing the matrix
/// exactly, or the reason no tree can.
#[derive(Debug, Clone)]
pub enum Reconstruction {
    Realized(Tree),
    NotATreeMetric { reason: String },
}

impl Reconstruction {
    pub fn tree(&self) -> Option<&Tree> {
        match self {
            Reconstruction::Realized(t) => Some(t),
            Reconstruction::NotATreeMetric { .. } => None,
        }
    }
}

struct Builder {
    next_internal: usize,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        let v = self.next_internal;
        self.next_internal += 1;
        v
    }

    /// Chain of `len` edges from `from` to `to` through fresh internals.
    fn add_chain(&mut self, from: usize, to: usize, len: i64) {
        let mut prev = from;
        for _ in 1..len {
            let mid = self.fresh();
            self.edges.push((prev, mid));
            prev = mid;
        }
        self.edges.push((prev, to));
    }

    fn path_between(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut adj: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for &(x, y) in &self.edges {
            adj.entry(x).or_default().push(y);
            adj.entry(y).or_default().push(x);
        }
        let mut parent: std::collections::HashMap<usize, usize> = Default::default();
        let mut queue = std::collections::VecDeque::from([a]);
        parent.insert(a, a);
        while let Some(v) = queue.pop_front() {
            if v == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &u in adj.get(&v).into_iter().flatten() {
                parent.entry(u).or_insert_with(|| {
                    queue.push_back(u);
                    v
                });
            }
        }
        None
    }
}

/// Rebuilds a tree from claimed leaf distances by peeling the trunk of a
/// leaf attaining the maximal Gromov product, recursing, and reattaching.
/// The result is re-verified against the input exactly; any inconsistency
/// yields `NotATreeMetric`, never a silently wrong tree.
pub fn reconstruct_tree(d: &LeafDistanceMatrix) -> Result<Reconstruction, RigidityError> {
    let m = d.m();
    if m < 2 {
        return Err(RigidityError::TooFewLeaves { needed: 2, got: m });
    }
    for p in 1..=m {
        if d.d(p, p) != 0 {
            return Ok(not_metric(format!("d({p},{p}) != 0")));
        }
        for q in p + 1..=m {
            if d.d(p, q) != d.d(q, p) {
                return Ok(not_metric(format!("d({p},{q}) asymmetric")));
            }
            if d.d(p, q) == 0 {
                return Ok(not_metric(format!("d({p},{q}) = 0 for distinct leaves")));
            }
            if m >= 3 && d.d(p, q) < 2 {
                return Ok(not_metric(format!(
                    "d({p},{q}) = 1: leaves of a tree with 3 or more leaves cannot be adjacent"
                )));
            }
        }
    }

    let mut builder = Builder { next_internal: m + 1, edges: Vec::new() };
    let labels: Vec<usize> = (1..=m).collect();
    let dist: Vec<Vec<i64>> = (1..=m)
        .map(|p| (1..=m).map(|q| i64::from(d.d(p, q))).collect())
        .collect();
    if let Err(reason) = peel(&labels, &dist, &mut builder) {
        return Ok(not_metric(reason));
    }

    let n = builder.next_internal - 1;
    let adj = match AdjacencyVector::from_edges(n, &builder.edges) {
        Ok(a) => a,
        Err(e) => return Ok(not_metric(format!("inconsistent construction: {e}"))),
    };
    let tree = match Tree::from_adjacency(adj) {
        Ok(t) => t,
        Err(e) => return Ok(not_metric(format!("construction is not a tree: {e}"))),
    };
    if tree.leaves() != (1..=m).collect::<Vec<_>>() {
        return Ok(not_metric("leaf set of the built tree is not the input set".into()));
    }
    let realized = tree.leaf_distance_matrix();
    for p in 1..=m {
        for q in 1..=m {
            if realized.d(p, q) != d.d(p, q) {
                return Ok(not_metric(format!(
                    "realized d({p},{q}) = {} differs from input {}",
                    realized.d(p, q),
                    d.d(p, q)
                )));
            }
        }
    }
    Ok(Reconstruction::Realized(tree))
}

fn not_metric(reason: String) -> Reconstruction {
    Reconstruction::NotATreeMetric { reason }
}

fn peel(labels: &[usize], dist: &[Vec<i64>], b: &mut Builder) -> Result<(), String> {
    let m = labels.len();
    if m == 2 {
        let len = dist[0][1];
        if len < 1 {
            return Err("non-positive distance between the last two leaves".into());
        }
        b.add_chain(labels[0], labels[1], len);
        return Ok(());
    }
    if m == 3 {
        let center = b.fresh();
        for i in 0..3 {
            let (j, k) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let twice = dist[i][j] + dist[i][k] - dist[j][k];
            if twice % 2 != 0 {
                return Err(format!("odd Gromov product at leaf {}", labels[i]));
            }
            let ell = twice / 2;
            if ell < 1 {
                return Err(format!("trunk of leaf {} would have length {ell}", labels[i]));
            }
            b.add_chain(labels[i], center, ell);
        }
        return Ok(());
    }

    // pick the triple maximizing the Gromov product, lowest (p,q,z) on ties
    let mut best: Option<(i64, usize, usize, usize)> = None;
    for p in 0..m {
        for q in p + 1..m {
            for z in (0..m).filter(|&z| z != p && z != q) {
                let g = dist[p][z] + dist[q][z] - dist[p][q];
                if best.is_none_or(|(bg, ..)| g > bg) {
                    best = Some((g, p, q, z));
                }
            }
        }
    }
    let (_, p, q, z) = best.expect("m >= 4");

    // |T(p)| = ((q,z)_p) / 2, the distance from p to the meet of q and z
    let twice = dist[p][q] + dist[p][z] - dist[q][z];
    if twice % 2 != 0 {
        return Err(format!("odd Gromov product at leaf {}", labels[p]));
    }
    let ell = twice / 2;
    if ell < 1 {
        return Err(format!("trunk of leaf {} would have length {ell}", labels[p]));
    }
    if ell > dist[p][q] - 1 {
        return Err(format!("trunk of leaf {} swallows its partner", labels[p]));
    }

    let reduced_labels: Vec<usize> =
        labels.iter().enumerate().filter(|&(i, _)| i != p).map(|(_, &l)| l).collect();
    let reduced: Vec<Vec<i64>> = (0..m)
        .filter(|&i| i != p)
        .map(|i| (0..m).filter(|&j| j != p).map(|j| dist[i][j]).collect())
        .collect();
    peel(&reduced_labels, &reduced, b)?;

    let path = b
        .path_between(labels[q], labels[z])
        .ok_or_else(|| "reattachment endpoints disconnected".to_string())?;
    let pos = dist[p][q] - ell;
    if pos < 1 || pos >= path.len() as i64 {
        return Err(format!("attach point for leaf {} falls off the path", labels[p]));
    }
    b.add_chain(labels[p], path[pos as usize], ell);
    Ok(())
}

pub const RIGIDITY_GUARD: usize = 7;

/// Counts from enumerating the graph class against a reference graph's
/// boundary distances.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    pub n: usize,
    pub boundary: Vec<usize>,
    pub enumerated: u64,
    pub degree_admissible: u64,
    pub distance_matching: u64,
    pub non_isomorphic: u64,
    pub rigid: bool,
    pub counterexample: Option<AdjacencyVector>,
}

/// Enumerates every graph on n labeled vertices whose boundary vertices
/// have degree 1 (the class the tree-rigidity statement ranges over),
/// keeps the
/// connected ones matching the tree's leaf distances, and checks each is
/// isomorphic to the tree by a boundary-fixing isomorphism.
pub fn verify_boundary_rigidity(t: &Tree) -> Result<RigidityReport, RigidityError> {
    check_observation_rigidity(t.adjacency(), t.leaves(), true, ExecMode::default())
}

/// General engine behind [`verify_boundary_rigidity`]: arbitrary boundary,
/// optional degree-1 restriction (dropping it reproduces the classical
/// triangle-vs-path counterexample). In the degree-restricted class the
/// boundary identification is part of the data, so matches are compared by
/// boundary-fixing isomorphism; without the restriction plain isomorphism
/// is used, matching how the counterexample is usually stated.
pub fn check_observation_rigidity(
    reference: &AdjacencyVector,
    boundary: &[usize],
    require_degree_one: bool,
    mode: ExecMode,
) -> Result<RigidityReport, RigidityError> {
    let n = reference.n();
    if n > RIGIDITY_GUARD {
        return Err(RigidityError::GuardExceeded {
            what: "rigidity enumeration vertices",
            got: n,
            limit: RIGIDITY_GUARD,
        });
    }
    let target: Vec<Vec<u32>> = boundary
        .iter()
        .map(|&b| {
            let dist = bfs_distances(reference, b);
            boundary
                .iter()
                .map(|&c| dist[c - 1].ok_or(RigidityError::DisconnectedBoundary))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;

    // bit mask of pairs incident to each vertex, for fast degree filtering
    let masks: Vec<u64> = (1..=n)
        .map(|v| {
            (1..=n)
                .filter(|&u| u != v)
                .map(|u| 1u64 << AdjacencyVector::pair_index(n, u, v))
                .sum()
        })
        .collect();

    #[derive(Clone, Default)]
    struct Acc {
        degree_admissible: u64,
        distance_matching: u64,
        non_isomorphic: u64,
        counterexample: Option<u64>,
    }

    let bits = pair_count(n) as u32;
    let prescribed: Vec<(usize, usize)> = if require_degree_one {
        boundary.iter().map(|&b| (b, b)).collect()
    } else {
        Vec::new()
    };
    let acc = exec::map_reduce(
        0..1u64 << bits,
        mode,
        Acc::default(),
        |value| {
            let mut acc = Acc::default();
            if require_degree_one
                && boundary
                    .iter()
                    .any(|&b| (value & masks[b - 1]).count_ones() != 1)
            {
                return acc;
            }
            acc.degree_admissible = 1;
            let g = AdjacencyVector::from_bit_value(n, value).unwrap();
            if !g.is_connected() {
                return acc;
            }
            let matches = boundary.iter().enumerate().all(|(i, &b)| {
                let dist = bfs_distances(&g, b);
                boundary
                    .iter()
                    .enumerate()
                    .all(|(j, &c)| dist[c - 1] == Some(target[i][j]))
            });
            if !matches {
                return acc;
            }
            acc.distance_matching = 1;
            let iso = graphs_isomorphic_with_prescribed(&g, reference, &prescribed)
                .expect("sizes match under guard");
            if !iso {
                acc.non_isomorphic = 1;
                acc.counterexample = Some(value);
            }
            acc
        },
        |a, b| Acc {
            degree_admissible: a.degree_admissible + b.degree_admissible,
            distance_matching: a.distance_matching + b.distance_matching,
            non_isomorphic: a.non_isomorphic + b.non_isomorphic,
            counterexample: match (a.counterexample, b.counterexample) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
        },
    );

    Ok(RigidityReport {
        n,
        boundary: boundary.to_vec(),
        enumerated: 1u64 << bits,
        degree_admissible: acc.degree_admissible,
        distance_matching: acc.distance_matching,
        non_isomorphic: acc.non_isomorphic,
        rigid: acc.non_isomorphic == 0,
        counterexample: acc
            .counterexample
            .map(|v| AdjacencyVector::from_bit_value(n, v).unwrap()),
    })
}

/// Distance-monotonicity comparison between two trees under a leaf
/// bijection: if d1 >= d2 on leaves then |X1| >= |X2|, with equality
/// forcing an isomorphism extending the bijection.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub hypothesis_holds: bool,
    pub vertex_counts: (usize, usize),
    pub conclusion_holds: bool,
    pub isomorphic_extending_sigma: Option<bool>,
}

/// `sigma[i]` is the leaf vertex of `t2` assigned to `t1.leaves()[i]`.
pub fn check_monotonicity(
    t1: &Tree,
    t2: &Tree,
    sigma: &[usize],
) -> Result<MonotonicityReport, RigidityError> {
    if t1.leaves().len() != t2.leaves().len() {
        return Err(RigidityError::LeafCountMismatch {
            a: t1.leaves().len(),
            b: t2.leaves().len(),
        });
    }
    if sigma.len() != t1.leaves().len() {
        return Err(RigidityError::BadSigma);
    }
    let mut sorted = sigma.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sigma.len() || sigma.iter().any(|v| !t2.leaves().contains(v)) {
        return Err(RigidityError::BadSigma);
    }

    let d1 = t1.leaf_distance_matrix();
    let leaves2 = t2.leaves();
    let d2 = t2.leaf_distance_matrix();
    let pos2 = |v: usize| leaves2.iter().position(|&w| w == v).unwrap() + 1;
    let m = sigma.len();
    let hypothesis_holds = (1..=m).all(|i| {
        (1..=m).all(|j| d1.d(i, j) >= d2.d(pos2(sigma[i - 1]), pos2(sigma[j - 1])))
    });
    let vertex_counts = (t1.n(), t2.n());
    let conclusion_holds = !hypothesis_holds || vertex_counts.0 >= vertex_counts.1;
    let isomorphic_extending_sigma = if hypothesis_holds && vertex_counts.0 == vertex_counts.1 {
        let prescribed: Vec<(usize, usize)> = t1
            .leaves()
            .iter()
            .zip(sigma)
            .map(|(&a, &b)| (a, b))
            .collect();
        Some(graphs_isomorphic_with_prescribed(
            t1.adjacency(),
            t2.adjacency(),
            &prescribed,
        )?)
    } else {
        None
    };
    Ok(MonotonicityReport {
        hypothesis_holds,
        vertex_counts,
        conclusion_holds,
        isomorphic_extending_sigma,
    })
}

/// Decodes a Pruefer sequence into a labeled tree on 1..=n.
fn tree_from_pruefer(n: usize, seq: &[usize]) -> Tree {
    let mut degree = vec![1usize; n + 1];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut seq = seq.to_vec();
    for i in 0.. {
        if seq.is_empty() {
            break;
        }
        let leaf = (1..=n).find(|&v| degree[v] == 1).unwrap();
        let v = seq[0];
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
        seq.remove(0);
        let _ = i;
    }
    let remaining: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
    edges.push((remaining[0], remaining[1]));
    Tree::from_edges(n, &edges).expect("Pruefer decoding yields a tree")
}

/// Every tree on n >= 2 labeled vertices, deduplicated up to isomorphism.
pub fn all_trees_up_to_isomorphism(n: usize) -> Result<Vec<Tree>, RigidityError> {
    if n > 8 {
        return Err(RigidityError::GuardExceeded { what: "tree enumeration", got: n, limit: 8 });
    }
    if n == 2 {
        return Ok(vec![Tree::from_edges(2, &[(1, 2)]).unwrap()]);
    }
    let mut reps: Vec<Tree> = Vec::new();
    let count = n.pow(n as u32 - 2);
    for code in 0..count {
        let mut c = code;
        let seq: Vec<usize> = (0..n - 2)
            .map(|_| {
                let v = c % n + 1;
                c /= n;
                v
            })
            .collect();
        let t = tree_from_pruefer(n, &seq);
        let is_new = reps
            .iter()
            .all(|r| !crate::graph::graphs_isomorphic(r.adjacency(), t.adjacency()).unwrap());
        if is_new {
            reps.push(t);
        }
    }
    Ok(reps)
}
