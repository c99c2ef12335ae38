//! Exact combinatorics of the planar rigidity matroid: the (2,3) pebble game,
//! Laman rigidity, circuits, M-components, ear decompositions, and the
//! degree-three-vertex / removable-edge reduction for 3-connected redundantly
//! rigid graphs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{vertex_connectivity, Edge, SimpleGraph, VertexId};
use crate::rigidity::Redundancy;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparsityError {
    #[error("graph is not M-connected")]
    NotMConnected,
    #[error("reduction precondition failed: {0}")]
    Precondition(String),
    #[error("invariant violated: no degree-3 vertex and no removable edge in a 3-connected redundantly rigid graph")]
    InvariantFault,
}

/// (2,3) pebble game state. Each vertex starts with two pebbles; an accepted edge is
/// oriented away from the vertex whose pebble covers it, so
/// `pebbles(v) + outdegree(v) = 2` always holds.
#[derive(Clone, Debug)]
pub struct PebbleGame {
    pebbles: Vec<u8>,
    out: Vec<Vec<VertexId>>,
    accepted: Vec<Edge>,
}

impl PebbleGame {
    pub fn new(n: usize) -> Self {
        PebbleGame {
            pebbles: vec![2; n],
            out: vec![Vec::new(); n],
            accepted: Vec::new(),
        }
    }

    pub fn accepted(&self) -> &[Edge] {
        &self.accepted
    }

    pub fn pebbles(&self, v: VertexId) -> u8 {
        self.pebbles[v]
    }

    pub fn outdegree(&self, v: VertexId) -> usize {
        self.out[v].len()
    }

    /// Tries to accept `uv`. On rejection returns the vertices reachable from `u` and
    /// `v` along the orientation; the accepted edges they induce form a tight block
    /// spanning `uv`.
    pub fn try_add(&mut self, u: VertexId, v: VertexId) -> Result<(), BTreeSet<VertexId>> {
        while self.pebbles[u] < 2 {
            if !self.fetch_pebble(u, v) {
                return Err(self.reach(&[u, v]));
            }
        }
        while self.pebbles[v] < 2 {
            if !self.fetch_pebble(v, u) {
                return Err(self.reach(&[u, v]));
            }
        }
        self.pebbles[u] -= 1;
        self.out[u].push(v);
        self.accepted.push((u.min(v), u.max(v)));
        Ok(())
    }

    /// Moves one pebble to `root` from a vertex reachable along the orientation, never
    /// touching `keep`. Reverses the path it uses.
    fn fetch_pebble(&mut self, root: VertexId, keep: VertexId) -> bool {
        let n = self.pebbles.len();
        let mut pred = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        seen[keep] = true;
        let mut stack = vec![root];
        let mut found = None;
        'search: while let Some(x) = stack.pop() {
            for &y in &self.out[x] {
                if seen[y] {
                    continue;
                }
                seen[y] = true;
                pred[y] = x;
                if self.pebbles[y] > 0 {
                    found = Some(y);
                    break 'search;
                }
                stack.push(y);
            }
        }
        let Some(w) = found else {
            return false;
        };
        self.pebbles[w] -= 1;
        let mut y = w;
        while y != root {
            let x = pred[y];
            // flip x -> y into y -> x
            let pos = self.out[x]
                .iter()
                .position(|&t| t == y)
                .expect("arc on path");
            self.out[x].swap_remove(pos);
            self.out[y].push(x);
            y = x;
        }
        self.pebbles[root] += 1;
        true
    }

    fn reach(&self, roots: &[VertexId]) -> BTreeSet<VertexId> {
        let mut seen: BTreeSet<VertexId> = roots.iter().copied().collect();
        let mut stack: Vec<VertexId> = roots.to_vec();
        while let Some(x) = stack.pop() {
            for &y in &self.out[x] {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }
}

/// Whether an edge list is independent in the planar rigidity matroid.
pub fn is_independent(n: usize, edges: &[Edge]) -> bool {
    let mut game = PebbleGame::new(n);
    edges.iter().all(|&(u, v)| game.try_add(u, v).is_ok())
}

/// Rank of an edge list (size of a maximal (2,3)-sparse subset) and the greedy basis.
pub fn rank_of(n: usize, edges: &[Edge]) -> (usize, Vec<Edge>) {
    let mut game = PebbleGame::new(n);
    for &(u, v) in edges {
        let _ = game.try_add(u, v);
    }
    (game.accepted.len(), game.accepted)
}

pub fn pebble_rank(g: &SimpleGraph) -> (usize, Vec<Edge>) {
    rank_of(g.n(), &g.edges())
}

/// Unique circuit in `independent + e`, given the reach block from a failed insertion.
fn fundamental_circuit(
    n: usize,
    independent: &[Edge],
    e: Edge,
    block: &BTreeSet<VertexId>,
) -> Vec<Edge> {
    let candidates: Vec<Edge> = independent
        .iter()
        .copied()
        .filter(|(a, b)| block.contains(a) && block.contains(b))
        .collect();
    let mut circuit: Vec<Edge> = (0..candidates.len())
        .filter(|&i| {
            let trial: Vec<Edge> = candidates
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &f)| f)
                .chain([e])
                .collect();
            is_independent(n, &trial)
        })
        .map(|i| candidates[i])
        .collect();
    circuit.push(e);
    circuit.sort_unstable();
    circuit
}

/// Runs the pebble game over `edges` in order and reports the fundamental circuit of
/// every rejected edge with respect to the accepted set.
pub fn fundamental_circuits(n: usize, edges: &[Edge]) -> (Vec<Edge>, Vec<(Edge, Vec<Edge>)>) {
    let mut game = PebbleGame::new(n);
    let mut circuits = Vec::new();
    for &(u, v) in edges {
        if let Err(block) = game.try_add(u, v) {
            let c = fundamental_circuit(n, game.accepted(), (u, v), &block);
            circuits.push(((u, v), c));
        }
    }
    (game.accepted, circuits)
}

/// Rigid in the plane: `n <= 1`, or a (2,3)-sparse spanning subset of size `2n - 3`.
pub fn is_laman_rigid(g: &SimpleGraph) -> bool {
    let n = g.n();
    n <= 1 || pebble_rank(g).0 == 2 * n - 3
}

/// `|E| = 2|V| - 2` with every proper subgraph (2,3)-sparse.
pub fn is_circuit_r2(g: &SimpleGraph) -> bool {
    let n = g.n();
    let edges = g.edges();
    if n < 2 || edges.len() != 2 * n - 2 {
        return false;
    }
    (0..edges.len()).all(|i| {
        let rest: Vec<Edge> = edges
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &f)| f)
            .collect();
        is_independent(n, &rest)
    })
}

/// Connected components of the planar rigidity matroid, as sorted edge classes.
///
/// Two edges share a component iff they are linked by a chain of fundamental circuits
/// with respect to one basis; coloops end up as singletons.
pub fn m_components(g: &SimpleGraph) -> Vec<Vec<Edge>> {
    let edges = g.edges();
    let index = |e: &Edge| edges.binary_search(e).expect("edge of g");
    let mut uf = UnionFind::new(edges.len());
    let (_, circuits) = fundamental_circuits(g.n(), &edges);
    for (_, c) in &circuits {
        let first = index(&c[0]);
        for f in &c[1..] {
            uf.union(first, index(f));
        }
    }
    let mut classes: Vec<Vec<Edge>> = Vec::new();
    let mut slot = vec![usize::MAX; edges.len()];
    for (i, &e) in edges.iter().enumerate() {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[slot[r]].push(e);
    }
    classes
}

/// One M-component holding at least two edges; a lone coloop lies on no circuit and is
/// not counted as M-connected.
pub fn is_m_connected(g: &SimpleGraph) -> bool {
    g.m() > 1 && m_components(g).len() == 1
}

/// Exact planar test of "G - e rigid for every edge e".
pub fn redundantly_rigid_2d(g: &SimpleGraph) -> Redundancy<Edge> {
    let edges = g.edges();
    if edges.is_empty() {
        return Redundancy {
            holds: true,
            first_failure: None,
        };
    }
    let first_failure = if !is_laman_rigid(g) {
        Some(edges[0])
    } else {
        m_components(g)
            .into_iter()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .min()
    };
    Redundancy {
        holds: first_failure.is_none(),
        first_failure,
    }
}

/// An ordered circuit cover `C_1, ..., C_t` of the edge set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EarDecomposition {
    pub ears: Vec<Vec<Edge>>,
}

impl EarDecomposition {
    /// `D_i = C_1 ∪ ... ∪ C_i` for `i = 1..=t`.
    pub fn prefix_unions(&self) -> Vec<BTreeSet<Edge>> {
        let mut acc = BTreeSet::new();
        self.ears
            .iter()
            .map(|c| {
                acc.extend(c.iter().copied());
                acc.clone()
            })
            .collect()
    }
}

/// Whether some circuit inside `inner ∪ outer` meets both parts, i.e. whether one
/// M-component of that edge set touches both.
fn circuit_meets_both(n: usize, inner: &BTreeSet<Edge>, outer: &[Edge]) -> bool {
    let mut edges: Vec<Edge> = inner.iter().chain(outer).copied().collect();
    edges.sort_unstable();
    let g = SimpleGraph::from_edges(n, &edges).expect("edges of one simple graph");
    m_components(&g)
        .iter()
        .any(|c| c.iter().any(|e| inner.contains(e)) && c.iter().any(|e| !inner.contains(e)))
}

/// Greedy ear decomposition of an M-connected graph.
///
/// The first ear is the first circuit the pebble game meets. For each later ear the new
/// part `T` starts as all uncovered edges and loses edges while some circuit inside
/// `D_{i-1} ∪ T` still meets both sides. Every such circuit then has new part exactly
/// `T`, so no circuit meeting `D_{i-1}` has a strictly smaller new part. The old part is
/// shrunk the same way until only one circuit is left.
pub fn ear_decomposition(g: &SimpleGraph) -> Result<EarDecomposition, SparsityError> {
    if !is_m_connected(g) {
        return Err(SparsityError::NotMConnected);
    }
    let n = g.n();
    let edges = g.edges();
    let (_, circuits) = fundamental_circuits(n, &edges);
    let first = circuits
        .first()
        .map(|(_, c)| c.clone())
        .ok_or(SparsityError::NotMConnected)?;
    let mut covered: BTreeSet<Edge> = first.iter().copied().collect();
    let mut ears = vec![first];
    while covered.len() < edges.len() {
        let mut fresh: Vec<Edge> = edges
            .iter()
            .copied()
            .filter(|e| !covered.contains(e))
            .collect();
        if !circuit_meets_both(n, &covered, &fresh) {
            return Err(SparsityError::InvariantFault);
        }
        let mut i = 0;
        while i < fresh.len() {
            let mut trial = fresh.clone();
            trial.remove(i);
            if !trial.is_empty() && circuit_meets_both(n, &covered, &trial) {
                fresh = trial;
            } else {
                i += 1;
            }
        }
        let mut old = covered.clone();
        for e in covered.iter() {
            old.remove(e);
            if !circuit_meets_both(n, &old, &fresh) {
                old.insert(*e);
            }
        }
        let mut ear: Vec<Edge> = old.into_iter().chain(fresh).collect();
        ear.sort_unstable();
        covered.extend(ear.iter().copied());
        ears.push(ear);
    }
    Ok(EarDecomposition { ears })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    Degree3Vertex(VertexId),
    RemovableEdge(Edge),
}

/// Whether `G` is 3-connected and redundantly rigid in the plane (exact).
pub fn is_3connected_redundant_2d(g: &SimpleGraph) -> bool {
    g.n() >= 4
        && vertex_connectivity(g).map(|(k, _)| k >= 3).unwrap_or(false)
        && redundantly_rigid_2d(g).holds
}

/// A degree-3 vertex (smallest id) or else the first edge whose deletion keeps the graph
/// 3-connected and redundantly rigid. One of the two always exists when `G` is
/// 3-connected, redundantly rigid and has at least five vertices.
pub fn find_reduction(g: &SimpleGraph) -> Result<Reduction, SparsityError> {
    if g.n() < 5 {
        return Err(SparsityError::Precondition(format!(
            "need at least 5 vertices, got {}",
            g.n()
        )));
    }
    if !is_3connected_redundant_2d(g) {
        return Err(SparsityError::Precondition(
            "graph is not 3-connected and redundantly rigid".into(),
        ));
    }
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 3) {
        return Ok(Reduction::Degree3Vertex(v));
    }
    g.edges()
        .into_iter()
        .find(|&(u, v)| is_3connected_redundant_2d(&g.without_edge(u, v)))
        .map(Reduction::RemovableEdge)
        .ok_or(SparsityError::InvariantFault)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::one_extension;
    use crate::graph::two_sum;

    fn k4_minus_e() -> SimpleGraph {
        SimpleGraph::complete(4).without_edge(0, 1)
    }

    fn k4_one_extension() -> SimpleGraph {
        one_extension(&SimpleGraph::complete(4), 2, (0, 1), &[2]).unwrap()
    }

    /// Brute force: `e ~ f` iff some circuit (found by subset enumeration) contains both.
    fn brute_components(g: &SimpleGraph) -> Vec<Vec<Edge>> {
        let edges = g.edges();
        let m = edges.len();
        let mut circuits: Vec<u32> = Vec::new();
        for mask in 1u32..(1 << m) {
            let sub: Vec<Edge> = (0..m)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| edges[i])
                .collect();
            if is_independent(g.n(), &sub) {
                continue;
            }
            let minimal = (0..sub.len()).all(|k| {
                let rest: Vec<Edge> = sub
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &f)| f)
                    .collect();
                is_independent(g.n(), &rest)
            });
            if minimal {
                circuits.push(mask);
            }
        }
        let mut uf = UnionFind::new(m);
        for c in circuits {
            let idx: Vec<usize> = (0..m).filter(|i| c & (1 << i) != 0).collect();
            for w in idx.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        let mut classes: std::collections::BTreeMap<usize, Vec<Edge>> = Default::default();
        for (i, &e) in edges.iter().enumerate() {
            classes.entry(uf.find(i)).or_default().push(e);
        }
        let mut out: Vec<_> = classes.into_values().collect();
        out.sort();
        out
    }

    #[test]
    fn pebble_rank_examples() {
        assert_eq!(pebble_rank(&SimpleGraph::complete(3)).0, 3);
        assert_eq!(pebble_rank(&SimpleGraph::complete(4)).0, 5);
        assert_eq!(pebble_rank(&SimpleGraph::cycle(4)).0, 4);
    }

    #[test]
    fn pebble_invariant_holds() {
        let g = SimpleGraph::complete(6);
        let mut game = PebbleGame::new(6);
        for (u, v) in g.edges() {
            let _ = game.try_add(u, v);
            for w in 0..6 {
                assert_eq!(game.pebbles(w) as usize + game.outdegree(w), 2);
            }
        }
        assert_eq!(game.accepted().len(), 9);
    }

    #[test]
    fn laman_examples() {
        assert!(is_laman_rigid(&k4_minus_e()));
        assert!(!is_laman_rigid(&SimpleGraph::cycle(4)));
        let k33 = SimpleGraph::complete_bipartite(3, 3);
        assert!(is_laman_rigid(&k33));
        assert_eq!(pebble_rank(&k33).0, 9);
        assert!(is_laman_rigid(&SimpleGraph::complete(2)));
    }

    #[test]
    fn circuit_examples() {
        assert!(is_circuit_r2(&SimpleGraph::complete(4)));
        assert!(!is_circuit_r2(&k4_minus_e()));
        let ext = k4_one_extension();
        assert_eq!((ext.n(), ext.m()), (5, 8));
        assert!(is_circuit_r2(&ext));
    }

    #[test]
    fn m_components_examples() {
        let mut two_k4 = SimpleGraph::complete(4);
        for _ in 0..3 {
            two_k4.add_vertex();
        }
        two_k4.complete_on(&[3, 4, 5, 6]);
        let comps = m_components(&two_k4);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], SimpleGraph::complete(4).edges());
        assert_eq!(m_components(&SimpleGraph::complete(4)).len(), 1);
        let tree = SimpleGraph::path(5);
        assert!(m_components(&tree).iter().all(|c| c.len() == 1));
        assert!(is_m_connected(&SimpleGraph::complete(4)));
        assert!(!is_m_connected(&k4_minus_e()));
        let k4 = SimpleGraph::complete(4);
        assert!(is_m_connected(&two_sum(&k4, &k4, (0, 1), (0, 1)).unwrap()));
        assert!(!is_m_connected(&SimpleGraph::new(3)));
    }

    #[test]
    fn m_components_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(3..=6);
            let mut g = SimpleGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.6) {
                        g.add_edge(u, v);
                    }
                }
            }
            if g.m() > 14 {
                continue;
            }
            let mut ours = m_components(&g);
            ours.sort();
            assert_eq!(ours, brute_components(&g), "{:?}", g.edges());
        }
    }

    #[test]
    fn ear_examples() {
        let k4 = SimpleGraph::complete(4);
        assert_eq!(ear_decomposition(&k4).unwrap().ears, vec![k4.edges()]);
        // two K4's sharing an edge: two ears, the second adds the other K4's private part
        let mut g = SimpleGraph::complete(4);
        g.add_vertex();
        g.add_vertex();
        g.complete_on(&[0, 1, 4, 5]);
        let ed = ear_decomposition(&g).unwrap();
        assert_eq!(ed.ears.len(), 2);
        assert_eq!(ed.prefix_unions().last().unwrap().len(), g.m());
        assert_eq!(
            ear_decomposition(&k4_minus_e()),
            Err(SparsityError::NotMConnected)
        );
        // 1-extension of K4 plus an edge between old vertices: last ear is a single edge
        let mut h = k4_one_extension();
        h.add_edge(0, 1);
        let ed = ear_decomposition(&h).unwrap();
        let unions = ed.prefix_unions();
        let last = ed.ears.last().unwrap();
        let before: BTreeSet<VertexId> = unions[unions.len() - 2]
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .collect();
        if last
            .iter()
            .all(|&(a, b)| before.contains(&a) && before.contains(&b))
        {
            assert_eq!(
                last.iter()
                    .filter(|e| !unions[unions.len() - 2].contains(e))
                    .count(),
                1
            );
        }
    }

    #[test]
    fn reduction_examples() {
        let ext = k4_one_extension();
        let mut plus = ext.clone();
        plus.add_edge(0, 1);
        // vertices 3 and 4 both have degree 3; the smaller id wins
        assert_eq!(find_reduction(&plus), Ok(Reduction::Degree3Vertex(3)));
        let (u, v) = (0, 1);
        assert!(is_3connected_redundant_2d(&plus.without_edge(u, v)));

        let oct = SimpleGraph::complete_multipartite(&[2, 2, 2]);
        match find_reduction(&oct).unwrap() {
            Reduction::RemovableEdge((u, v)) => {
                assert!(is_3connected_redundant_2d(&oct.without_edge(u, v)))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            find_reduction(&SimpleGraph::complete(4)),
            Err(SparsityError::Precondition(_))
        ));
        assert!(matches!(
            find_reduction(&SimpleGraph::cycle(6)),
            Err(SparsityError::Precondition(_))
        ));
    }
}
