//! Edge-disjoint spanning tree packings of multigraphs and the body-bar / body-hinge
//! counting conditions built on them.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Multigraph, VertexId};
use crate::rigidity::binom2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PackingError {
    #[error("tree count must be positive")]
    ZeroTrees,
    #[error("edge index {0} out of range")]
    NoSuchEdge(usize),
    #[error("body-hinge counts need d >= 2, got {0}")]
    DimensionTooSmall(usize),
}

/// `k` edge-disjoint spanning trees; `assignment[i]` is the tree (0-based) holding edge copy
/// `i`, or `None` for copies left over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreePacking {
    pub k: usize,
    pub assignment: Vec<Option<usize>>,
}

impl TreePacking {
    pub fn trees(&self) -> Vec<Vec<usize>> {
        let mut trees = vec![Vec::new(); self.k];
        for (i, t) in self.assignment.iter().enumerate() {
            if let Some(t) = t {
                trees[*t].push(i);
            }
        }
        trees
    }

    /// Every class is a spanning tree of `h`.
    pub fn verify(&self, h: &Multigraph) -> bool {
        if self.assignment.len() != h.m() || self.assignment.iter().flatten().any(|&t| t >= self.k)
        {
            return false;
        }
        let n = h.n();
        self.trees().iter().all(|tree| {
            if tree.len() + 1 != n.max(1) {
                return false;
            }
            let mut dsu = Dsu::new(n);
            tree.iter().all(|&i| {
                let (u, v) = h.edges()[i];
                dsu.union(u, v)
            })
        })
    }
}

/// A vertex partition with fewer than `k(|P| - 1)` crossing edge copies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionWitness {
    pub k: usize,
    pub blocks: Vec<Vec<VertexId>>,
    pub cross_edges: usize,
}

impl PartitionWitness {
    pub fn verify(&self, h: &Multigraph) -> bool {
        let mut block_of = vec![usize::MAX; h.n()];
        for (b, block) in self.blocks.iter().enumerate() {
            if block.is_empty() {
                return false;
            }
            for &v in block {
                if v >= h.n() || block_of[v] != usize::MAX {
                    return false;
                }
                block_of[v] = b;
            }
        }
        if block_of.contains(&usize::MAX) {
            return false;
        }
        let cross = h
            .edges()
            .iter()
            .filter(|&&(u, v)| block_of[u] != block_of[v])
            .count();
        cross == self.cross_edges && cross < self.k * (self.blocks.len().saturating_sub(1))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PackingOutcome {
    Packed(TreePacking),
    Deficient(PartitionWitness),
}

impl PackingOutcome {
    pub fn feasible(&self) -> bool {
        matches!(self, PackingOutcome::Packed(_))
    }

    pub fn verify(&self, h: &Multigraph) -> bool {
        match self {
            PackingOutcome::Packed(p) => p.verify(h),
            PackingOutcome::Deficient(w) => w.verify(h),
        }
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        self.parent[x] = r;
        r
    }

    /// False if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// `k` forests over the copies of a multigraph, with path queries.
struct Forests<'a> {
    h: &'a Multigraph,
    owner: Vec<Option<usize>>,
    adj: Vec<Vec<Vec<(VertexId, usize)>>>,
}

impl<'a> Forests<'a> {
    fn new(h: &'a Multigraph, k: usize) -> Self {
        Forests {
            h,
            owner: vec![None; h.m()],
            adj: vec![vec![Vec::new(); h.n()]; k],
        }
    }

    fn insert(&mut self, f: usize, edge: usize) {
        let (u, v) = self.h.edges()[edge];
        self.adj[f][u].push((v, edge));
        self.adj[f][v].push((u, edge));
        self.owner[edge] = Some(f);
    }

    fn remove(&mut self, edge: usize) {
        let f = self.owner[edge].take().expect("edge in a forest");
        let (u, v) = self.h.edges()[edge];
        self.adj[f][u].retain(|&(_, e)| e != edge);
        self.adj[f][v].retain(|&(_, e)| e != edge);
    }

    /// Edge copies on the `u`-`v` path of forest `f`, or `None` if not connected.
    fn path(&self, f: usize, u: VertexId, v: VertexId) -> Option<Vec<usize>> {
        let n = self.h.n();
        let mut pred: Vec<Option<(VertexId, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[u] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == v {
                let mut out = Vec::new();
                let mut y = v;
                while let Some((p, e)) = pred[y] {
                    out.push(e);
                    y = p;
                }
                return Some(out);
            }
            for &(y, e) in &self.adj[f][x] {
                if !seen[y] {
                    seen[y] = true;
                    pred[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        None
    }

    /// Shortest augmenting path from `start`; inserts it and returns true on success.
    fn augment(&mut self, start: usize) -> bool {
        let k = self.adj.len();
        let m = self.h.m();
        // pred[y] = the copy that displaces y
        let mut pred: Vec<Option<usize>> = vec![None; m];
        let mut seen = vec![false; m];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            let (u, v) = self.h.edges()[x];
            for f in 0..k {
                if self.owner[x] == Some(f) {
                    continue;
                }
                match self.path(f, u, v) {
                    None => {
                        self.apply(x, f, &pred);
                        return true;
                    }
                    Some(cycle) => {
                        for y in cycle {
                            if !seen[y] {
                                seen[y] = true;
                                pred[y] = Some(x);
                                queue.push_back(y);
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// Moves `last` into forest `f`, then shifts each predecessor into the slot vacated
    /// by its successor.
    fn apply(&mut self, last: usize, f: usize, pred: &[Option<usize>]) {
        let mut target = f;
        let mut x = last;
        loop {
            let vacated = self.owner[x];
            if vacated.is_some() {
                self.remove(x);
            }
            self.insert(target, x);
            match (pred[x], vacated) {
                (Some(p), Some(slot)) => {
                    target = slot;
                    x = p;
                }
                _ => break,
            }
        }
    }

    /// Edge copies reachable in the exchange graph from every uninserted copy.
    fn reachable_from_free(&self) -> Vec<bool> {
        let k = self.adj.len();
        let m = self.h.m();
        let mut seen: Vec<bool> = (0..m).map(|i| self.owner[i].is_none()).collect();
        let mut queue: VecDeque<usize> = (0..m).filter(|&i| seen[i]).collect();
        while let Some(x) = queue.pop_front() {
            let (u, v) = self.h.edges()[x];
            for f in 0..k {
                if self.owner[x] == Some(f) {
                    continue;
                }
                if let Some(cycle) = self.path(f, u, v) {
                    for y in cycle {
                        if !seen[y] {
                            seen[y] = true;
                            queue.push_back(y);
                        }
                    }
                }
            }
        }
        seen
    }
}

/// Packs `k` edge-disjoint spanning trees into `h` by graphic matroid union, or returns a
/// partition certifying that no packing exists.
pub fn tree_packing(h: &Multigraph, k: usize) -> Result<PackingOutcome, PackingError> {
    if k == 0 {
        return Err(PackingError::ZeroTrees);
    }
    let n = h.n();
    let goal = k * n.saturating_sub(1);
    let mut forests = Forests::new(h, k);
    let mut size = 0;
    for i in 0..h.m() {
        if size == goal {
            break;
        }
        if forests.augment(i) {
            size += 1;
        }
    }
    if size == goal {
        return Ok(PackingOutcome::Packed(TreePacking {
            k,
            assignment: forests.owner,
        }));
    }
    // every forest spans each component of the reached copies, so those components
    // have few crossing edges
    let reached = forests.reachable_from_free();
    let mut dsu = Dsu::new(n);
    for (i, &(u, v)) in h.edges().iter().enumerate() {
        if reached[i] {
            dsu.union(u, v);
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<VertexId>> = Vec::new();
    for v in 0..n {
        let r = dsu.find(v);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(v);
    }
    let cross_edges = h
        .edges()
        .iter()
        .filter(|&&(u, v)| dsu.find(u) != dsu.find(v))
        .count();
    Ok(PackingOutcome::Deficient(PartitionWitness {
        k,
        blocks,
        cross_edges,
    }))
}

/// A multigraph whose copies remember the `h` edge they came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expansion {
    pub graph: Multigraph,
    pub origin: Vec<usize>,
}

/// Replaces every edge copy of `h` by `base` copies, except `special = (i, mult)` which
/// gets `mult` copies.
pub fn multiplicity_expand(
    h: &Multigraph,
    base: usize,
    special: Option<(usize, usize)>,
) -> Result<Expansion, PackingError> {
    if let Some((i, _)) = special {
        if i >= h.m() {
            return Err(PackingError::NoSuchEdge(i));
        }
    }
    let mut edges = Vec::new();
    let mut origin = Vec::new();
    for (i, &e) in h.edges().iter().enumerate() {
        let copies = match special {
            Some((s, mult)) if s == i => mult,
            _ => base,
        };
        for _ in 0..copies {
            edges.push(e);
            origin.push(i);
        }
    }
    let graph = Multigraph::new(h.n(), edges).expect("copies of valid edges");
    Ok(Expansion { graph, origin })
}

/// Per-deletion results of a global counting check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalCountReport {
    pub holds: bool,
    /// Outcome for the whole graph (the rigidity count).
    pub base: PackingOutcome,
    /// One entry per parallel class, keyed by its first copy.
    pub per_edge: Vec<(usize, PackingOutcome)>,
}

/// Rigidity of the body-bar graph: `C(d+1, 2)` edge-disjoint spanning trees.
pub fn body_bar_rigid_check(h: &Multigraph, d: usize) -> PackingOutcome {
    tree_packing(h, binom2(d + 1).max(1)).expect("positive tree count")
}

/// Global rigidity of the body-bar graph: `H - e` packs `C(d+1, 2)` trees for every copy
/// `e`. Deleting any copy of a parallel class is equivalent, so one copy per class is
/// tested; the whole graph must also pass, which matters only when `H` has no edges.
pub fn body_bar_global_check(h: &Multigraph, d: usize) -> GlobalCountReport {
    let k = binom2(d + 1).max(1);
    let base = body_bar_rigid_check(h, d);
    let per_edge: Vec<(usize, PackingOutcome)> = h
        .parallel_class_representatives()
        .into_par_iter()
        .map(|i| (i, tree_packing(&h.without_edge(i), k).expect("positive")))
        .collect();
    let holds = base.feasible() && per_edge.iter().all(|(_, o)| o.feasible());
    GlobalCountReport {
        holds,
        base,
        per_edge,
    }
}

/// Rigidity of the body-hinge graph: `(D-1)H` packs `D = C(d+1, 2)` trees.
pub fn body_hinge_rigid_check(h: &Multigraph, d: usize) -> Result<PackingOutcome, PackingError> {
    if d < 2 {
        return Err(PackingError::DimensionTooSmall(d));
    }
    let big_d = binom2(d + 1);
    let ex = multiplicity_expand(h, big_d - 1, None)?;
    tree_packing(&ex.graph, big_d)
}

/// The expanded graph `(D-1)(H-e) + (D-3)e` for edge copy `e`.
pub fn body_hinge_expansion(h: &Multigraph, d: usize, e: usize) -> Result<Expansion, PackingError> {
    if d < 2 {
        return Err(PackingError::DimensionTooSmall(d));
    }
    let big_d = binom2(d + 1);
    multiplicity_expand(h, big_d - 1, Some((e, big_d - 3)))
}

/// Sufficient condition for global rigidity of the body-hinge graph: for every edge `e`,
/// `(D-1)(H-e) + (D-3)e` packs `D` spanning trees.
pub fn body_hinge_global_check(
    h: &Multigraph,
    d: usize,
) -> Result<GlobalCountReport, PackingError> {
    let big_d = binom2(d + 1);
    let base = body_hinge_rigid_check(h, d)?;
    let per_edge = h
        .parallel_class_representatives()
        .into_par_iter()
        .map(|i| {
            let ex = body_hinge_expansion(h, d, i)?;
            Ok((i, tree_packing(&ex.graph, big_d)?))
        })
        .collect::<Result<Vec<_>, PackingError>>()?;
    let holds = base.feasible() && per_edge.iter().all(|(_, o)| o.feasible());
    Ok(GlobalCountReport {
        holds,
        base,
        per_edge,
    })
}

/// Brute-force Nash-Williams test: `h` packs `k` spanning trees iff every partition `P`
/// has at least `k(|P| - 1)` crossing copies. Exponential; for small test graphs only.
pub fn nash_williams_feasible(h: &Multigraph, k: usize) -> bool {
    let n = h.n();
    let mut labels = vec![0usize; n];
    fn rec(h: &Multigraph, k: usize, labels: &mut Vec<usize>, i: usize, blocks: usize) -> bool {
        if i == labels.len() {
            let cross = h
                .edges()
                .iter()
                .filter(|&&(u, v)| labels[u] != labels[v])
                .count();
            return cross >= k * (blocks - 1);
        }
        for b in 0..=blocks {
            labels[i] = b;
            let nb = if b == blocks { blocks + 1 } else { blocks };
            if !rec(h, k, labels, i + 1, nb) {
                return false;
            }
        }
        true
    }
    if n == 0 {
        return true;
    }
    rec(h, k, &mut labels, 1, 1)
}
