//! Simple graphs, multigraphs and the structural operations on them: vertex
//! connectivity with separator witnesses, fragments of 2-separators, 2-sums,
//! cleaving, and rooted-minor verification.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = usize;
pub type Edge = (VertexId, VertexId);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {v} out of range for a graph on {n} vertices")]
    VertexOutOfRange { v: VertexId, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("parallel edge {0}-{1} in a simple graph")]
    ParallelEdge(VertexId, VertexId),
    #[error("edge {0}-{1} not present")]
    MissingEdge(VertexId, VertexId),
    #[error("connectivity is undefined on fewer than two vertices")]
    TooFewVertices,
    #[error("graph is not 2-connected; cut vertex {0}")]
    NotTwoConnected(VertexId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("{{{0}, {1}}} is not a 2-separator")]
    NotASeparator(VertexId, VertexId),
    #[error("vertex {0} is not assigned to any root")]
    UnassignedVertex(VertexId),
    #[error("vertex {v} assigned to {root}, which is not a root")]
    UnknownRoot { v: VertexId, root: VertexId },
    #[error("{0}")]
    Invalid(String),
}

/// Normalizes an unordered pair to `(min, max)`.
pub fn ordered(u: VertexId, v: VertexId) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Serialized form shared by both graph types.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct EdgeList {
    n: usize,
    edges: Vec<Edge>,
}

impl From<SimpleGraph> for EdgeList {
    fn from(g: SimpleGraph) -> Self {
        EdgeList {
            n: g.n(),
            edges: g.edges(),
        }
    }
}

impl TryFrom<EdgeList> for SimpleGraph {
    type Error = GraphError;

    fn try_from(l: EdgeList) -> Result<Self, GraphError> {
        SimpleGraph::from_edges(l.n, &l.edges)
    }
}

impl TryFrom<EdgeList> for Multigraph {
    type Error = GraphError;

    fn try_from(l: EdgeList) -> Result<Self, GraphError> {
        Multigraph::new(l.n, l.edges)
    }
}

/// Undirected graph without loops or parallel edges on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "EdgeList", try_from = "EdgeList")]
pub struct SimpleGraph {
    adj: Vec<BTreeSet<VertexId>>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    /// Builds a graph, rejecting loops, duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[Edge]) -> Result<Self, GraphError> {
        let mut g = SimpleGraph::new(n);
        for &(u, v) in edges {
            g.check_pair(u, v)?;
            if !g.add_edge(u, v) {
                let (a, b) = ordered(u, v);
                return Err(GraphError::ParallelEdge(a, b));
            }
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = SimpleGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = SimpleGraph::new(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = SimpleGraph::new(n);
        for i in 1..n {
            g.add_edge(i - 1, i);
        }
        g
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let mut g = SimpleGraph::new(a + b);
        for u in 0..a {
            for v in a..a + b {
                g.add_edge(u, v);
            }
        }
        g
    }

    /// Complete multipartite graph with the given part sizes.
    pub fn complete_multipartite(parts: &[usize]) -> Self {
        let n = parts.iter().sum();
        let mut part_of = Vec::with_capacity(n);
        for (i, &s) in parts.iter().enumerate() {
            part_of.extend(std::iter::repeat(i).take(s));
        }
        let mut g = SimpleGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if part_of[u] != part_of[v] {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    fn check_pair(&self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        let n = self.n();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange { v: w, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Adds `uv`; returns false if it was already present. Panics on loops or bad ids.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        assert!(u != v && u < self.n() && v < self.n(), "bad edge {u}-{v}");
        let fresh = self.adj[u].insert(v);
        self.adj[v].insert(u);
        fresh
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        if u >= self.n() || v >= self.n() {
            return false;
        }
        let had = self.adj[u].remove(&v);
        self.adj[v].remove(&u);
        had
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.adj.push(BTreeSet::new());
        self.adj.len() - 1
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.n() && self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).min().unwrap_or(0)
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<Edge> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.range(u + 1..).map(move |&v| (u, v)))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        self.adj.iter().all(|nb| nb.len() + 1 == n)
    }

    pub fn without_edge(&self, u: VertexId, v: VertexId) -> SimpleGraph {
        let mut g = self.clone();
        g.remove_edge(u, v);
        g
    }

    pub fn with_edge(&self, u: VertexId, v: VertexId) -> SimpleGraph {
        let mut g = self.clone();
        g.add_edge(u, v);
        g
    }

    /// Deletes `v`; vertices above `v` shift down by one.
    pub fn without_vertex(&self, v: VertexId) -> SimpleGraph {
        let keep: Vec<VertexId> = (0..self.n()).filter(|&w| w != v).collect();
        self.induced(&keep)
    }

    /// Subgraph induced by `vertices`, relabelled `0..k` in the order given.
    pub fn induced(&self, vertices: &[VertexId]) -> SimpleGraph {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut g = SimpleGraph::new(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = index[w];
                if j != usize::MAX && i < j {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Vertex-disjoint union: `other`'s vertices are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &SimpleGraph) -> SimpleGraph {
        let off = self.n();
        let mut g = self.clone();
        for _ in 0..other.n() {
            g.add_vertex();
        }
        for (u, v) in other.edges() {
            g.add_edge(u + off, v + off);
        }
        g
    }

    /// Makes every pair of `vertices` adjacent.
    pub fn complete_on(&mut self, vertices: &[VertexId]) {
        for (i, &u) in vertices.iter().enumerate() {
            for &v in &vertices[i + 1..] {
                if u != v {
                    self.add_edge(u, v);
                }
            }
        }
    }

    /// Connected components restricted to vertices not in `removed`, each sorted.
    pub fn components_avoiding(&self, removed: &BTreeSet<VertexId>) -> Vec<Vec<VertexId>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] || removed.contains(&s) {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adj[u] {
                    if !seen[w] && !removed.contains(&w) {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn components(&self) -> Vec<Vec<VertexId>> {
        self.components_avoiding(&BTreeSet::new())
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// Whether the subgraph induced by `set` is connected (empty set counts as not connected).
    pub fn induces_connected(&self, set: &BTreeSet<VertexId>) -> bool {
        let Some(&start) = set.iter().next() else {
            return false;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if set.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen.len() == set.len()
    }
}

/// Multigraph on `0..n`; each entry of `edges` is one copy, identified by its index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdgeList")]
pub struct Multigraph {
    n: usize,
    edges: Vec<Edge>,
}

impl Multigraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { v: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
        }
        let edges = edges.into_iter().map(|(u, v)| ordered(u, v)).collect();
        Ok(Multigraph { n, edges })
    }

    /// `mult` parallel copies of every edge of `g`.
    pub fn from_simple(g: &SimpleGraph, mult: usize) -> Self {
        let edges = g
            .edges()
            .into_iter()
            .flat_map(|e| std::iter::repeat(e).take(mult))
            .collect();
        Multigraph { n: g.n(), edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Copy `idx` removed; later copies shift down by one.
    pub fn without_edge(&self, idx: usize) -> Multigraph {
        let mut edges = self.edges.clone();
        edges.remove(idx);
        Multigraph { n: self.n, edges }
    }

    /// Multiplicity of each distinct pair.
    pub fn multiplicities(&self) -> BTreeMap<Edge, usize> {
        let mut m = BTreeMap::new();
        for &e in &self.edges {
            *m.entry(e).or_insert(0) += 1;
        }
        m
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicities().values().all(|&c| c == 1)
    }

    pub fn to_simple(&self) -> Result<SimpleGraph, GraphError> {
        SimpleGraph::from_edges(self.n, &self.edges)
    }

    /// Index of the first copy of each distinct pair.
    pub fn parallel_class_representatives(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        (0..self.edges.len())
            .filter(|&i| seen.insert(self.edges[i]))
            .collect()
    }
}

/// A vertex separator and one component of the graph with the separator removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub separator: Vec<VertexId>,
    pub side: Vec<VertexId>,
}

impl SeparationWitness {
    /// Checks that `separator` disconnects `g` and `side` is one resulting component.
    pub fn verify(&self, g: &SimpleGraph) -> bool {
        let removed: BTreeSet<_> = self.separator.iter().copied().collect();
        let comps = g.components_avoiding(&removed);
        comps.len() >= 2 && comps.iter().any(|c| *c == self.side)
    }
}

/// Vertex connectivity and, when `k < n - 1`, a minimum separator.
///
/// A complete graph on `n` vertices has connectivity `n - 1`. For other graphs the
/// value is the minimum local connectivity over non-adjacent pairs, each computed by
/// unit-capacity max-flow on the vertex-split digraph. Only pairs whose first vertex
/// is among the first `k + 1` scanned need to be checked.
pub fn vertex_connectivity(
    g: &SimpleGraph,
) -> Result<(usize, Option<SeparationWitness>), GraphError> {
    let n = g.n();
    if n < 2 {
        return Err(GraphError::TooFewVertices);
    }
    let comps = g.components();
    if comps.len() > 1 {
        let side = comps[0].clone();
        return Ok((
            0,
            Some(SeparationWitness {
                separator: Vec::new(),
                side,
            }),
        ));
    }
    if g.is_complete() {
        return Ok((n - 1, None));
    }
    let mut best = n - 1;
    let mut best_cut: Option<Vec<VertexId>> = None;
    let mut i = 0;
    while i < n && i <= best {
        for j in i + 1..n {
            if g.has_edge(i, j) {
                continue;
            }
            let (value, cut) = local_vertex_cut(g, i, j, best);
            if value < best {
                best = value;
                best_cut = Some(cut);
            }
        }
        i += 1;
    }
    let witness = best_cut.map(|separator| {
        let removed: BTreeSet<_> = separator.iter().copied().collect();
        let side = g.components_avoiding(&removed)[0].clone();
        SeparationWitness { separator, side }
    });
    Ok((best, witness))
}

/// Local vertex connectivity between non-adjacent `s` and `t`, stopping early once
/// the flow reaches `limit`. The returned cut is only meaningful when value < limit.
fn local_vertex_cut(
    g: &SimpleGraph,
    s: VertexId,
    t: VertexId,
    limit: usize,
) -> (usize, Vec<VertexId>) {
    // Node 2v = v_in, 2v+1 = v_out; v_in -> v_out has capacity 1 except at s and t.
    let n = g.n();
    let mut net = FlowNetwork::new(2 * n);
    for v in 0..n {
        let cap = if v == s || v == t { n as i64 } else { 1 };
        net.add_arc(2 * v, 2 * v + 1, cap);
    }
    for (u, v) in g.edges() {
        net.add_arc(2 * u + 1, 2 * v, n as i64);
        net.add_arc(2 * v + 1, 2 * u, n as i64);
    }
    let source = 2 * s + 1;
    let sink = 2 * t;
    let mut flow = 0;
    while flow < limit && net.augment(source, sink) {
        flow += 1;
    }
    if flow >= limit {
        return (flow, Vec::new());
    }
    let reach = net.residual_reach(source);
    let cut = (0..n)
        .filter(|&v| reach[2 * v] && !reach[2 * v + 1])
        .collect();
    (flow, cut)
}

struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_arc(&mut self, a: usize, b: usize, c: i64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0);
    }

    /// One BFS augmenting path of unit flow.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut pred = vec![usize::MAX; self.head.len()];
        let mut visited = vec![false; self.head.len()];
        visited[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &a in &self.head[u] {
                let w = self.to[a];
                if self.cap[a] > 0 && !visited[w] {
                    visited[w] = true;
                    pred[w] = a;
                    queue.push_back(w);
                }
            }
        }
        if !visited[t] {
            return false;
        }
        let mut v = t;
        while v != s {
            let a = pred[v];
            self.cap[a] -= 1;
            self.cap[a ^ 1] += 1;
            v = self.to[a ^ 1];
        }
        true
    }

    fn residual_reach(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.head[u] {
                let w = self.to[a];
                if self.cap[a] > 0 && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }
}

/// Some cut vertex of a connected graph, if any.
pub fn find_cut_vertex(g: &SimpleGraph) -> Option<VertexId> {
    (0..g.n()).find(|&v| {
        let removed = BTreeSet::from([v]);
        g.components_avoiding(&removed).len() > 1
    })
}

/// A fragment: a vertex set whose neighbourhood is exactly the 2-separator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fragment {
    pub vertices: Vec<VertexId>,
    pub separator: (VertexId, VertexId),
}

/// All fragments of a 2-connected graph, smallest (lexicographically) first.
///
/// For a separator `{a, b}` the fragments are exactly the nonempty proper unions of
/// components of `G - a - b`.
pub fn fragments(g: &SimpleGraph) -> Result<Vec<Fragment>, GraphError> {
    let n = g.n();
    if n < 3 || !g.is_connected() {
        return Err(match find_cut_vertex(g) {
            Some(v) => GraphError::NotTwoConnected(v),
            None => GraphError::Disconnected,
        });
    }
    if let Some(v) = find_cut_vertex(g) {
        return Err(GraphError::NotTwoConnected(v));
    }
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let removed = BTreeSet::from([a, b]);
            let comps = g.components_avoiding(&removed);
            if comps.len() < 2 || comps.len() > 16 {
                // 16 components would mean 2^16 unions; no graph at this scale gets near it.
                assert!(comps.len() <= 16, "too many components at {{{a}, {b}}}");
                continue;
            }
            let k = comps.len();
            for mask in 1u32..(1 << k) - 1 {
                let mut vs: Vec<VertexId> = (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .flat_map(|i| comps[i].iter().copied())
                    .collect();
                vs.sort_unstable();
                out.push(Fragment {
                    vertices: vs,
                    separator: (a, b),
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Open neighbourhood of a vertex set.
pub fn neighborhood(g: &SimpleGraph, set: &[VertexId]) -> BTreeSet<VertexId> {
    let inside: BTreeSet<_> = set.iter().copied().collect();
    set.iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|w| !inside.contains(w))
        .collect()
}

/// 2-sum of `g1` and `g2` along `a1b1` and `a2b2`.
///
/// Vertices of `g1` keep their ids; `a2` maps to `a1`, `b2` to `b1`, and the other
/// vertices of `g2` follow in increasing order starting at `g1.n()`.
pub fn two_sum(
    g1: &SimpleGraph,
    g2: &SimpleGraph,
    e1: Edge,
    e2: Edge,
) -> Result<SimpleGraph, GraphError> {
    let (a1, b1) = e1;
    let (a2, b2) = e2;
    if !g1.has_edge(a1, b1) {
        return Err(GraphError::MissingEdge(a1, b1));
    }
    if !g2.has_edge(a2, b2) {
        return Err(GraphError::MissingEdge(a2, b2));
    }
    let map = two_sum_vertex_map(g1.n(), g2.n(), e1, e2);
    let mut g = g1.without_edge(a1, b1);
    for _ in 0..g2.n() - 2 {
        g.add_vertex();
    }
    for (u, v) in g2.edges() {
        if ordered(u, v) == ordered(a2, b2) {
            continue;
        }
        g.add_edge(map[u], map[v]);
    }
    Ok(g)
}

/// Where each vertex of `g2` lands in [`two_sum`].
pub fn two_sum_vertex_map(n1: usize, n2: usize, e1: Edge, e2: Edge) -> Vec<VertexId> {
    let mut map = vec![0; n2];
    let mut next = n1;
    for (v, slot) in map.iter_mut().enumerate() {
        *slot = if v == e2.0 {
            e1.0
        } else if v == e2.1 {
            e1.1
        } else {
            next += 1;
            next - 1
        };
    }
    map
}

/// The two cleavage graphs, each with the map from its vertices back to the original.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cleavage {
    pub g1: SimpleGraph,
    pub map1: Vec<VertexId>,
    pub g2: SimpleGraph,
    pub map2: Vec<VertexId>,
}

/// Cleaves `g` along the 2-separator `{a, b}`.
///
/// Side one is the component of `G - a - b` holding the smallest vertex; side two is
/// everything else. Both sides get the edge `ab`.
pub fn cleave(g: &SimpleGraph, a: VertexId, b: VertexId) -> Result<Cleavage, GraphError> {
    if a == b || a >= g.n() || b >= g.n() {
        return Err(GraphError::NotASeparator(a, b));
    }
    let removed = BTreeSet::from([a, b]);
    let comps = g.components_avoiding(&removed);
    if comps.len() < 2 {
        return Err(GraphError::NotASeparator(a, b));
    }
    let side1: Vec<VertexId> = comps[0].clone();
    let side2: Vec<VertexId> = comps[1..].iter().flatten().copied().collect();
    let build = |side: &[VertexId]| {
        let mut vs: Vec<VertexId> = side.iter().copied().chain([a, b]).collect();
        vs.sort_unstable();
        let mut h = g.induced(&vs);
        let ia = vs.binary_search(&a).unwrap();
        let ib = vs.binary_search(&b).unwrap();
        h.add_edge(ia, ib);
        (h, vs)
    };
    let (g1, map1) = build(&side1);
    let (g2, map2) = build(&side2);
    Ok(Cleavage { g1, map1, g2, map2 })
}

/// Assignment of every vertex of `G` to a root in `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedMinorWitness {
    /// `assignment[v]` is the root whose branch set holds `v`; `None` means unassigned.
    pub assignment: Vec<Option<VertexId>>,
}

impl RootedMinorWitness {
    pub fn from_blocks(n: usize, blocks: &BTreeMap<VertexId, Vec<VertexId>>) -> Self {
        let mut assignment = vec![None; n];
        for (&root, members) in blocks {
            for &v in members {
                if v < n {
                    assignment[v] = Some(root);
                }
            }
        }
        RootedMinorWitness { assignment }
    }
}

/// Checks the three rooted-minor conditions: each root lies in its own branch set, each
/// branch set induces a connected subgraph, and every edge of `h` is realized by an
/// edge of `g` between the two branch sets.
///
/// `h` is given by edges over the ids in `roots`.
pub fn verify_rooted_minor(
    g: &SimpleGraph,
    roots: &[VertexId],
    h_edges: &[Edge],
    w: &RootedMinorWitness,
) -> Result<bool, GraphError> {
    let n = g.n();
    let root_set: BTreeSet<_> = roots.iter().copied().collect();
    for &r in &root_set {
        if r >= n {
            return Err(GraphError::VertexOutOfRange { v: r, n });
        }
    }
    for &(x, y) in h_edges {
        if !root_set.contains(&x) || !root_set.contains(&y) {
            return Err(GraphError::Invalid(format!(
                "edge {x}-{y} of H is not on the root set"
            )));
        }
    }
    if w.assignment.len() != n {
        return Err(GraphError::Invalid(format!(
            "witness covers {} vertices, graph has {n}",
            w.assignment.len()
        )));
    }
    let mut blocks: BTreeMap<VertexId, BTreeSet<VertexId>> =
        root_set.iter().map(|&r| (r, BTreeSet::new())).collect();
    for (v, slot) in w.assignment.iter().enumerate() {
        let root = slot.ok_or(GraphError::UnassignedVertex(v))?;
        match blocks.get_mut(&root) {
            Some(b) => {
                b.insert(v);
            }
            None => return Err(GraphError::UnknownRoot { v, root }),
        }
    }
    for (&r, block) in &blocks {
        if !block.contains(&r) || !g.induces_connected(block) {
            return Ok(false);
        }
    }
    for &(x, y) in h_edges {
        let crosses = blocks[&x]
            .iter()
            .any(|&u| g.neighbors(u).iter().any(|v| blocks[&y].contains(v)));
        if !crosses {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_connectivity(g: &SimpleGraph) -> usize {
        let n = g.n();
        if g.is_complete() {
            return n - 1;
        }
        for k in 0..n {
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let removed: BTreeSet<_> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                if g.components_avoiding(&removed).len() > 1 {
                    return k;
                }
            }
        }
        n - 1
    }

    fn two_triangles_sharing_edge() -> SimpleGraph {
        // a=0, b=1, x=2, y=3
        SimpleGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)]).unwrap()
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(
            vertex_connectivity(&SimpleGraph::complete(4)).unwrap(),
            (3, None)
        );
        let (k, w) = vertex_connectivity(&SimpleGraph::cycle(4)).unwrap();
        assert_eq!(k, 2);
        let w = w.unwrap();
        assert!(w.separator == vec![0, 2] || w.separator == vec![1, 3]);
        assert!(w.verify(&SimpleGraph::cycle(4)));
        let k55 = SimpleGraph::complete_bipartite(5, 5);
        assert_eq!(brute_connectivity(&k55), 5);
        let (k, w) = vertex_connectivity(&k55).unwrap();
        assert_eq!(k, 5);
        assert!(w.unwrap().verify(&k55));
        assert_eq!(
            vertex_connectivity(&SimpleGraph::new(1)),
            Err(GraphError::TooFewVertices)
        );
        let (k, w) = vertex_connectivity(&SimpleGraph::new(3)).unwrap();
        assert_eq!(k, 0);
        assert!(w.unwrap().separator.is_empty());
    }

    #[test]
    fn connectivity_matches_subset_enumeration_on_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(2..=9);
            let p = rng.gen_range(0.2..0.9);
            let mut g = SimpleGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        g.add_edge(u, v);
                    }
                }
            }
            let (k, w) = vertex_connectivity(&g).unwrap();
            assert_eq!(k, brute_connectivity(&g), "{:?}", g.edges());
            if let Some(w) = w {
                assert_eq!(w.separator.len(), k);
                assert!(w.verify(&g));
            } else {
                assert!(g.is_complete());
            }
        }
    }

    #[test]
    fn fragments_examples() {
        let g = two_triangles_sharing_edge();
        let f = fragments(&g).unwrap();
        assert_eq!(
            f,
            vec![
                Fragment {
                    vertices: vec![2],
                    separator: (0, 1)
                },
                Fragment {
                    vertices: vec![3],
                    separator: (0, 1)
                },
            ]
        );
        assert!(fragments(&SimpleGraph::complete(4)).unwrap().is_empty());
        let path = SimpleGraph::path(3);
        assert_eq!(fragments(&path), Err(GraphError::NotTwoConnected(1)));
    }

    #[test]
    fn fragments_of_two_k4_glued_on_kept_edge() {
        // K4 on {0,1,2,3} and K4 on {0,1,4,5}
        let mut g = SimpleGraph::complete(4);
        g.add_vertex();
        g.add_vertex();
        g.complete_on(&[0, 1, 4, 5]);
        let f = fragments(&g).unwrap();
        // brute force: every X with |N(X)| = 2 and a nonempty remainder
        let n = g.n();
        let mut brute = Vec::new();
        for mask in 1u32..(1 << n) {
            let xs: Vec<_> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let nb = neighborhood(&g, &xs);
            if nb.len() == 2 && xs.len() + 2 < n {
                let sep: Vec<_> = nb.into_iter().collect();
                brute.push(Fragment {
                    vertices: xs,
                    separator: (sep[0], sep[1]),
                });
            }
        }
        brute.sort();
        assert_eq!(f, brute);
        assert_eq!(
            f.iter().map(|x| x.vertices.clone()).collect::<Vec<_>>(),
            vec![vec![2, 3], vec![4, 5]]
        );
    }

    #[test]
    fn two_sum_examples() {
        let k4 = SimpleGraph::complete(4);
        let g = two_sum(&k4, &k4, (0, 1), (0, 1)).unwrap();
        assert_eq!((g.n(), g.m()), (6, 10));
        let k3 = SimpleGraph::complete(3);
        let c = two_sum(&k3, &k3, (0, 1), (0, 1)).unwrap();
        assert_eq!((c.n(), c.m()), (4, 4));
        assert!(c
            .edges()
            .iter()
            .all(|&(u, v)| c.degree(u) == 2 && c.degree(v) == 2));
        let g = two_sum(&k4, &k3, (0, 1), (0, 1)).unwrap();
        assert_eq!((g.n(), g.m()), (5, 7));
        assert_eq!(
            two_sum(&SimpleGraph::path(3), &k3, (0, 2), (0, 1)),
            Err(GraphError::MissingEdge(0, 2))
        );
    }

    #[test]
    fn cleave_examples() {
        let g = two_triangles_sharing_edge();
        let c = cleave(&g, 0, 1).unwrap();
        assert_eq!(c.g1, SimpleGraph::complete(3));
        assert_eq!(c.g2, SimpleGraph::complete(3));
        assert_eq!(c.map1, vec![0, 1, 2]);
        assert_eq!(c.map2, vec![0, 1, 3]);

        // C4 a=0, x=1, b=2, y=3
        let c4 = SimpleGraph::cycle(4);
        let c = cleave(&c4, 0, 2).unwrap();
        assert_eq!(c.g1, SimpleGraph::complete(3));
        assert_eq!(c.g2, SimpleGraph::complete(3));

        let k4 = SimpleGraph::complete(4);
        let s = two_sum(&k4, &k4, (0, 1), (0, 1)).unwrap();
        let c = cleave(&s, 0, 1).unwrap();
        assert_eq!(c.g1, k4);
        assert_eq!(c.g2, k4);
        assert_eq!(cleave(&k4, 0, 1), Err(GraphError::NotASeparator(0, 1)));
    }

    #[test]
    fn rooted_minor_examples() {
        // a=0, m=1, b=2
        let g = SimpleGraph::path(3);
        let w = RootedMinorWitness {
            assignment: vec![Some(0), Some(0), Some(2)],
        };
        assert_eq!(verify_rooted_minor(&g, &[0, 2], &[(0, 2)], &w), Ok(true));
        let w = RootedMinorWitness {
            assignment: vec![Some(0), None, Some(2)],
        };
        assert_eq!(
            verify_rooted_minor(&g, &[0, 2], &[(0, 2)], &w),
            Err(GraphError::UnassignedVertex(1))
        );
        // a=0 - m=1, b=2 - m'=3
        let g = SimpleGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let w = RootedMinorWitness {
            assignment: vec![Some(0), Some(0), Some(2), Some(2)],
        };
        assert_eq!(verify_rooted_minor(&g, &[0, 2], &[(0, 2)], &w), Ok(false));
    }

    #[test]
    fn multigraph_basics() {
        let h = Multigraph::new(2, vec![(1, 0), (0, 1)]).unwrap();
        assert_eq!(h.edges(), &[(0, 1), (0, 1)]);
        assert!(!h.is_simple());
        assert_eq!(h.multiplicities()[&(0, 1)], 2);
        assert!(Multigraph::new(2, vec![(1, 1)]).is_err());
        assert!(h.to_simple().is_err());
    }
}
