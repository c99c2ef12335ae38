//! Graph constructions: body-bar and body-hinge graphs, the standard-basis body-hinge
//! configuration, Henneberg extensions, k-chains and vertex-clique replacement.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Field, Rational};
use crate::graph::{Edge, Multigraph, SimpleGraph, VertexId};
use crate::packing::{
    body_hinge_expansion, tree_packing, PackingError, PackingOutcome, TreePacking,
};
use crate::rigidity::{binom2, infinitesimal_rigidity_exact, Framework};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("expected {expected} vertices, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("vertex {0} does not exist")]
    NoSuchVertex(VertexId),
    #[error("vertices must be distinct (repeated {0})")]
    Repeated(VertexId),
    #[error("edge {0}-{1} does not exist")]
    NoSuchEdge(VertexId, VertexId),
    #[error("body-hinge graphs need d >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("chain needs at least two parts, all nonempty")]
    BadChain,
    #[error("counting condition fails for edge copy {0}: no standard configuration")]
    ConditionFails(usize),
    #[error("packing does not match the expanded graph")]
    BadPacking,
    #[error("{0}")]
    Packing(#[from] PackingError),
}

/// Body-bar graph of a multigraph: each vertex becomes a clique of `d + 1 + deg` vertices
/// and each edge a single bar between two of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyBarLayout {
    pub dim: usize,
    pub graph: SimpleGraph,
    pub body_map: Vec<Vec<VertexId>>,
    pub bar_map: Vec<Edge>,
}

/// Vertices are the `d + 1` core vertices of each body in order, then two bar ends per
/// edge of `h` in edge order.
pub fn body_bar_graph(h: &Multigraph, d: usize) -> BodyBarLayout {
    let core = d + 1;
    let mut body_map: Vec<Vec<VertexId>> = (0..h.n())
        .map(|v| (v * core..(v + 1) * core).collect())
        .collect();
    let mut next = h.n() * core;
    let mut bar_map = Vec::with_capacity(h.m());
    for &(u, v) in h.edges() {
        body_map[u].push(next);
        body_map[v].push(next + 1);
        bar_map.push((next, next + 1));
        next += 2;
    }
    let mut graph = SimpleGraph::new(next);
    for body in &body_map {
        graph.complete_on(body);
    }
    for &(a, b) in &bar_map {
        graph.add_edge(a, b);
    }
    BodyBarLayout {
        dim: d,
        graph,
        body_map,
        bar_map,
    }
}

/// Body-hinge graph: bodies of `d + 1` vertices, hinges of `d - 1` vertices fully joined to
/// both incident bodies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodyHingeLayout {
    pub dim: usize,
    pub graph: SimpleGraph,
    pub body_map: Vec<Vec<VertexId>>,
    pub hinge_map: Vec<Vec<VertexId>>,
}

impl BodyHingeLayout {
    /// Id of `h_{e,i}` (with `1 <= i <= d - 1`).
    pub fn hinge_vertex(&self, e: usize, i: usize) -> VertexId {
        self.hinge_map[e][i - 1]
    }
}

pub fn body_hinge_graph(h: &Multigraph, d: usize) -> Result<BodyHingeLayout, BuildError> {
    if d < 2 {
        return Err(BuildError::DimensionTooSmall(d));
    }
    let body_map: Vec<Vec<VertexId>> = (0..h.n())
        .map(|v| (v * (d + 1)..(v + 1) * (d + 1)).collect())
        .collect();
    let base = h.n() * (d + 1);
    let hinge_map: Vec<Vec<VertexId>> = (0..h.m())
        .map(|e| (base + e * (d - 1)..base + (e + 1) * (d - 1)).collect())
        .collect();
    let mut graph = SimpleGraph::new(base + h.m() * (d - 1));
    for body in &body_map {
        graph.complete_on(body);
    }
    for (e, &(u, v)) in h.edges().iter().enumerate() {
        for &x in &hinge_map[e] {
            for &b in body_map[u].iter().chain(&body_map[v]) {
                graph.add_edge(x, b);
            }
        }
    }
    Ok(BodyHingeLayout {
        dim: d,
        graph,
        body_map,
        hinge_map,
    })
}

/// Rational framework on the body-hinge graph with `h_{e,d-1}` deleted, placed on the
/// standard basis vectors and the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardConfig {
    pub framework: Framework<Rational>,
    /// Layout vertex id to framework vertex id (`None` for the deleted hinge vertex).
    pub vertex_map: Vec<Option<VertexId>>,
    /// Coordinate pair `(k, l)`, 1-based with `l <= d + 1`, assigned to each tree.
    pub tree_pairs: Vec<(usize, usize)>,
    pub layout: BodyHingeLayout,
}

/// `e_i` for `1 <= i <= d`, the origin for `i = d + 1`.
fn basis_point(i: usize, d: usize) -> Vec<Rational> {
    (1..=d)
        .map(|j| {
            if j == i {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Builds the standard configuration for deleted edge copy `e` of `h` (or, when `h` has no
/// edges, the single-body framework). `packing`, if given, must pack `C(d+1, 2)` spanning
/// trees into `body_hinge_expansion(h, d, e)`; otherwise one is computed.
pub fn standard_body_hinge_config(
    h: &Multigraph,
    d: usize,
    e: Option<usize>,
    packing: Option<&TreePacking>,
) -> Result<StandardConfig, BuildError> {
    let layout = body_hinge_graph(h, d)?;
    let big_d = binom2(d + 1);
    let mut config: Vec<Vec<Rational>> = vec![Vec::new(); layout.graph.n()];
    for body in &layout.body_map {
        for (i, &x) in body.iter().enumerate() {
            config[x] = basis_point(i + 1, d);
        }
    }
    let Some(e) = e else {
        if h.m() > 0 {
            return Err(BuildError::WrongCount {
                expected: 1,
                got: 0,
            });
        }
        let framework =
            Framework::new(layout.graph.clone(), d, config).map_err(|_| BuildError::BadPacking)?;
        return Ok(StandardConfig {
            framework,
            vertex_map: (0..layout.graph.n()).map(Some).collect(),
            tree_pairs: Vec::new(),
            layout,
        });
    };
    let ex = body_hinge_expansion(h, d, e)?;
    let packing = match packing {
        Some(p) => p.clone(),
        None => match tree_packing(&ex.graph, big_d)? {
            PackingOutcome::Packed(p) => p,
            PackingOutcome::Deficient(_) => return Err(BuildError::ConditionFails(e)),
        },
    };
    if packing.k != big_d || !packing.verify(&ex.graph) {
        return Err(BuildError::BadPacking);
    }
    // which trees hold a copy of each edge of h
    let mut holds = vec![vec![false; big_d]; h.m()];
    for (copy, t) in packing.assignment.iter().enumerate() {
        if let Some(t) = t {
            holds[ex.origin[copy]][*t] = true;
        }
    }
    let free: Vec<usize> = (0..big_d).filter(|&t| !holds[e][t]).collect();
    if free.len() < 3 {
        return Err(BuildError::BadPacking);
    }
    let special = [(d - 1, d), (d - 1, d + 1), (d, d + 1)];
    let mut rest_pairs = (1..=d + 1)
        .flat_map(|k| (k + 1..=d + 1).map(move |l| (k, l)))
        .filter(|p| !special.contains(p));
    let mut tree_pairs = vec![(0, 0); big_d];
    for t in 0..big_d {
        tree_pairs[t] = match free.iter().position(|&s| s == t) {
            Some(i) if i < 3 => special[i],
            _ => rest_pairs.next().expect("pair count matches tree count"),
        };
    }
    for (f, hinge) in layout.hinge_map.iter().enumerate() {
        let coords: Vec<usize> = if f == e {
            (1..=d - 2).collect()
        } else {
            let mut options: Vec<(usize, usize)> = (0..big_d)
                .filter(|&t| !holds[f][t])
                .map(|t| tree_pairs[t])
                .collect();
            options.sort_unstable();
            let (k, l) = *options.first().ok_or(BuildError::BadPacking)?;
            (1..=d + 1).filter(|&i| i != k && i != l).collect()
        };
        for (&x, &i) in hinge.iter().zip(&coords) {
            config[x] = basis_point(i, d);
        }
    }
    let removed = layout.hinge_vertex(e, d - 1);
    let vertex_map: Vec<Option<VertexId>> = (0..layout.graph.n())
        .map(|x| match x.cmp(&removed) {
            std::cmp::Ordering::Less => Some(x),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(x - 1),
        })
        .collect();
    config.remove(removed);
    let graph = layout.graph.without_vertex(removed);
    let framework = Framework::new(graph, d, config).map_err(|_| BuildError::BadPacking)?;
    Ok(StandardConfig {
        framework,
        vertex_map,
        tree_pairs,
        layout,
    })
}

/// Exact infinitesimal rigidity of the standard configuration.
pub fn verify_standard_config_rigid(cfg: &StandardConfig) -> bool {
    infinitesimal_rigidity_exact(&cfg.framework)
        .map(|r| r.rigid)
        .unwrap_or(false)
}

fn check_distinct(g: &SimpleGraph, vs: &[VertexId]) -> Result<(), BuildError> {
    for (i, &v) in vs.iter().enumerate() {
        if v >= g.n() {
            return Err(BuildError::NoSuchVertex(v));
        }
        if vs[..i].contains(&v) {
            return Err(BuildError::Repeated(v));
        }
    }
    Ok(())
}

/// Adds a vertex joined to the `d` vertices `nbrs`.
pub fn zero_extension(
    g: &SimpleGraph,
    d: usize,
    nbrs: &[VertexId],
) -> Result<SimpleGraph, BuildError> {
    if nbrs.len() != d {
        return Err(BuildError::WrongCount {
            expected: d,
            got: nbrs.len(),
        });
    }
    check_distinct(g, nbrs)?;
    let mut out = g.clone();
    let x = out.add_vertex();
    for &v in nbrs {
        out.add_edge(x, v);
    }
    Ok(out)
}

/// Deletes `uv` and adds a vertex joined to `u`, `v` and the `d - 1` vertices `extra`.
pub fn one_extension(
    g: &SimpleGraph,
    d: usize,
    (u, v): Edge,
    extra: &[VertexId],
) -> Result<SimpleGraph, BuildError> {
    if !g.has_edge(u, v) {
        return Err(BuildError::NoSuchEdge(u, v));
    }
    if extra.len() + 1 != d {
        return Err(BuildError::WrongCount {
            expected: d.saturating_sub(1),
            got: extra.len(),
        });
    }
    let all: Vec<VertexId> = [u, v].into_iter().chain(extra.iter().copied()).collect();
    check_distinct(g, &all)?;
    let mut out = g.without_edge(u, v);
    let x = out.add_vertex();
    for &w in &all {
        out.add_edge(x, w);
    }
    Ok(out)
}

/// Part sizes of a k-chain: consecutive parts are joined completely, nothing else.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub sizes: Vec<usize>,
}

impl ChainSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self, BuildError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(BuildError::BadChain);
        }
        Ok(ChainSpec { sizes })
    }

    /// Vertex ids of each part.
    pub fn parts(&self) -> Vec<Vec<VertexId>> {
        let mut start = 0;
        self.sizes
            .iter()
            .map(|&s| {
                let part = (start..start + s).collect();
                start += s;
                part
            })
            .collect()
    }
}

pub fn k_chain(spec: &ChainSpec) -> SimpleGraph {
    let parts = spec.parts();
    let mut g = SimpleGraph::new(spec.sizes.iter().sum());
    for w in parts.windows(2) {
        for &a in &w[0] {
            for &b in &w[1] {
                g.add_edge(a, b);
            }
        }
    }
    g
}

/// `G - v` with the neighbourhood of `v` made complete. Ids above `v` shift down by one.
pub fn vertex_clique_replace(g: &SimpleGraph, v: VertexId) -> SimpleGraph {
    let nbrs: Vec<VertexId> = g
        .neighbors(v)
        .iter()
        .map(|&w| if w > v { w - 1 } else { w })
        .collect();
    let mut out = g.without_vertex(v);
    out.complete_on(&nbrs);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparsity::{is_circuit_r2, is_laman_rigid};

    fn parallel(k: usize) -> Multigraph {
        Multigraph::new(2, vec![(0, 1); k]).unwrap()
    }

    #[test]
    fn body_bar_examples() {
        let l = body_bar_graph(&parallel(1), 3);
        assert_eq!((l.graph.n(), l.graph.m()), (10, 21));
        let l = body_bar_graph(&Multigraph::new(1, vec![]).unwrap(), 2);
        assert_eq!(l.graph, SimpleGraph::complete(3));
        let l = body_bar_graph(&parallel(2), 2);
        assert_eq!((l.graph.n(), l.graph.m()), (10, 22));
        assert!(l.body_map.iter().all(|b| b.len() == 5));
        let json = serde_json::to_string(&l).unwrap();
        let back: BodyBarLayout = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn body_hinge_examples() {
        let l = body_hinge_graph(&parallel(1), 3).unwrap();
        assert_eq!((l.graph.n(), l.graph.m()), (10, 28));
        assert_eq!(l.hinge_vertex(0, 1), 8);
        let l = body_hinge_graph(&Multigraph::new(1, vec![]).unwrap(), 3).unwrap();
        assert_eq!(l.graph, SimpleGraph::complete(4));
        let p = Multigraph::from_simple(&SimpleGraph::path(3), 1);
        let l = body_hinge_graph(&p, 2).unwrap();
        assert_eq!((l.graph.n(), l.graph.m()), (11, 21));
        assert_eq!(
            body_hinge_graph(&p, 1),
            Err(BuildError::DimensionTooSmall(1))
        );
    }

    #[test]
    fn standard_config_examples() {
        let h = parallel(2);
        for e in 0..2 {
            let cfg = standard_body_hinge_config(&h, 3, Some(e), None).unwrap();
            assert_eq!(cfg.framework.graph.n(), 8 + 2 * 2 - 1);
            // e's remaining hinge vertex sits on e_1
            let kept = cfg.vertex_map[cfg.layout.hinge_vertex(e, 1)].unwrap();
            assert_eq!(cfg.framework.config[kept], basis_point(1, 3));
            assert!(verify_standard_config_rigid(&cfg));
        }
        // d = 2: two parallel hinges leave only 2 copies for 3 trees
        assert_eq!(
            standard_body_hinge_config(&h, 2, Some(0), None),
            Err(BuildError::ConditionFails(0))
        );
        // with three, e keeps no hinge vertex at all
        let cfg = standard_body_hinge_config(&parallel(3), 2, Some(0), None).unwrap();
        assert_eq!(cfg.framework.graph.n(), 6 + 3 - 1);
        assert!(verify_standard_config_rigid(&cfg));

        let k3 = Multigraph::from_simple(&SimpleGraph::complete(3), 1);
        for e in 0..3 {
            let cfg = standard_body_hinge_config(&k3, 3, Some(e), None).unwrap();
            assert!(verify_standard_config_rigid(&cfg));
        }
        assert_eq!(
            standard_body_hinge_config(&parallel(1), 3, Some(0), None),
            Err(BuildError::ConditionFails(0))
        );
        let single = Multigraph::new(1, vec![]).unwrap();
        let cfg = standard_body_hinge_config(&single, 3, None, None).unwrap();
        assert_eq!(cfg.framework.graph, SimpleGraph::complete(4));
        assert!(verify_standard_config_rigid(&cfg));
    }

    #[test]
    fn extension_examples() {
        let k3 = SimpleGraph::complete(3);
        let g = zero_extension(&k3, 2, &[0, 1]).unwrap();
        assert_eq!(g, SimpleGraph::complete(4).without_edge(2, 3));
        assert!(is_laman_rigid(&g));
        let g = zero_extension(&SimpleGraph::complete(4), 3, &[0, 1, 2]).unwrap();
        assert_eq!(g, SimpleGraph::complete(5).without_edge(3, 4));
        assert!(zero_extension(&k3, 2, &[0]).is_err());
        assert!(zero_extension(&k3, 2, &[0, 0]).is_err());

        let g = one_extension(&SimpleGraph::complete(4), 2, (0, 1), &[2]).unwrap();
        assert_eq!((g.n(), g.m()), (5, 8));
        assert!(is_circuit_r2(&g));
        let g = one_extension(&SimpleGraph::complete(5), 3, (0, 1), &[2, 3]).unwrap();
        assert_eq!((g.n(), g.m()), (6, 13));
        assert!(one_extension(&g, 3, (0, 1), &[2, 3]).is_err());
        assert!(one_extension(&SimpleGraph::complete(5), 3, (0, 1), &[1, 3]).is_err());
    }

    #[test]
    fn chain_examples() {
        let k33 = k_chain(&ChainSpec::new(vec![3, 3]).unwrap());
        assert_eq!(k33, SimpleGraph::complete_bipartite(3, 3));
        let g = k_chain(&ChainSpec::new(vec![4, 4, 4]).unwrap());
        assert_eq!((g.n(), g.m()), (12, 32));
        let g = k_chain(&ChainSpec::new(vec![2, 2, 2, 2]).unwrap());
        assert_eq!((g.n(), g.m()), (8, 12));
        assert!(ChainSpec::new(vec![3]).is_err());
        assert!(ChainSpec::new(vec![3, 0]).is_err());
    }

    #[test]
    fn clique_replace_examples() {
        assert_eq!(
            vertex_clique_replace(&SimpleGraph::complete(4), 2),
            SimpleGraph::complete(3)
        );
        let star = SimpleGraph::complete_bipartite(1, 4);
        assert_eq!(vertex_clique_replace(&star, 0), SimpleGraph::complete(4));
        let oct = SimpleGraph::complete_multipartite(&[2, 2, 2]);
        assert_eq!(vertex_clique_replace(&oct, 0), SimpleGraph::complete(5));
    }
}
