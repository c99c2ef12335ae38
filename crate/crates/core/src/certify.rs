//! Global rigidity decisions with certificates.
//!
//! Every verdict carries a list of [`CertificateStep`]s. Exact statuses are backed only by
//! exact rules: combinatorial facts, or rigidity claims witnessed by a full-rank rigidity
//! matrix at some point (a nonzero minor mod p is a nonzero integer polynomial, so full
//! rank at one point proves generic rigidity). Stress-rank evidence yields only the
//! `Probably*` statuses.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builders::{k_chain, vertex_clique_replace, ChainSpec};
use crate::graph::{
    verify_rooted_minor, vertex_connectivity, Edge, GraphError, RootedMinorWitness,
    SeparationWitness, SimpleGraph, VertexId,
};
use crate::rigidity::{
    error_bound, ght_global_rigidity_test, is_redundantly_rigid, is_rigid,
    is_vertex_redundantly_rigid, GhtVerdict, DEFAULT_TRIALS,
};
use crate::sparsity::{
    find_reduction, is_laman_rigid, redundantly_rigid_2d, Reduction, SparsityError,
};

pub mod checker;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("vertex {0} out of range")]
    NoSuchVertex(VertexId),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("separator mismatch: X must equal V(G1) ∩ V(G2), which is {0:?}")]
    SeparatorMismatch(Vec<VertexId>),
    #[error("invariant fault: {0}")]
    InvariantFault(String),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Sparsity(#[from] SparsityError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    GloballyRigid,
    NotGloballyRigid,
    ProbablyGloballyRigid,
    ProbablyNot,
    Unknown,
}

impl Status {
    pub fn is_exact(self) -> bool {
        matches!(self, Status::GloballyRigid | Status::NotGloballyRigid)
    }

    /// Rigid either exactly or probably.
    pub fn is_positive(self) -> bool {
        matches!(self, Status::GloballyRigid | Status::ProbablyGloballyRigid)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HendricksonFailure {
    /// Connectivity below `d + 1`, with a separator (empty when disconnected).
    LowConnectivity {
        connectivity: usize,
        witness: Option<SeparationWitness>,
    },
    /// Some `G - e` is not rigid (`edge` is the first such edge).
    NotRedundantlyRigid { edge: Option<Edge> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HendricksonResult {
    Pass,
    Fail(HendricksonFailure),
}

/// A vertex subset with edges, in the ids of an ambient graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
}

impl Piece {
    pub fn new(vertices: Vec<VertexId>, edges: Vec<Edge>) -> Result<Self, CertifyError> {
        let set: BTreeSet<VertexId> = vertices.iter().copied().collect();
        for &(u, v) in &edges {
            for w in [u, v] {
                if !set.contains(&w) {
                    return Err(CertifyError::NoSuchVertex(w));
                }
            }
        }
        Ok(Piece {
            vertices: set.into_iter().collect(),
            edges,
        })
    }

    /// The piece plus `extra` edges, relabeled to `0..k` in increasing id order.
    pub fn local_graph(&self, extra: &[Edge]) -> Result<SimpleGraph, CertifyError> {
        let mut g = SimpleGraph::new(self.vertices.len());
        for &(u, v) in self.edges.iter().chain(extra) {
            let (a, b) = (self.local(u)?, self.local(v)?);
            if a == b {
                return Err(GraphError::SelfLoop(u).into());
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn local(&self, v: VertexId) -> Result<VertexId, CertifyError> {
        self.vertices
            .binary_search(&v)
            .map_err(|_| CertifyError::NoSuchVertex(v))
    }
}

/// Which pair of graphs the combination step requires to be globally rigid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombinationVariant {
    /// `G1 ∪ H` and `G2 ∪ K(X)`.
    FirstWithMinor,
    /// `G1 ∪ K(X)` and `G2 ∪ H`.
    SecondWithMinor,
}

/// One rule application. The payload is enough to re-check the rule in isolation; premise
/// graphs are recomputed from it and must be established by later steps of the list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "payload")]
pub enum CertificateStep {
    /// Complete graphs are globally rigid in every dimension.
    CompleteSmall { graph: SimpleGraph },
    /// Necessary conditions: (d+1)-connectivity and redundant rigidity.
    HendricksonFail {
        graph: SimpleGraph,
        dim: usize,
        failure: HendricksonFailure,
    },
    /// Plane: complete on at most three vertices, or 3-connected and redundantly rigid.
    D2Characterization { graph: SimpleGraph },
    /// Plane: `graph - edge` is 3-connected, redundantly rigid and (premise) globally rigid.
    EdgeDeletion { graph: SimpleGraph, edge: Edge },
    /// `deg(v) > d`, `G - v` rigid, and (premise) `G - v + K(N(v))` globally rigid.
    VertexRemovalLemma {
        graph: SimpleGraph,
        dim: usize,
        vertex: VertexId,
    },
    /// `G - v` rigid for every vertex `v`.
    VertexRedundant { graph: SimpleGraph, dim: usize },
    /// Gluing two graphs along `X` using a rooted minor `H` of the second.
    Combination {
        g1: Piece,
        g2: Piece,
        separator: Vec<VertexId>,
        minor: Vec<Edge>,
        witness: RootedMinorWitness,
        dim: usize,
        variant: CombinationVariant,
    },
    /// k-chain proof plan: `v` from the smaller end part, `G - v` rigid, and the
    /// replacement grown from `K(A_2)` by vertices with at least `d + 1` earlier neighbours.
    KChain {
        spec: ChainSpec,
        dim: usize,
        vertex: VertexId,
    },
    /// Body-bar graph: globally rigid iff `H - e` packs `C(d+1,2)` trees for every `e`.
    BodyBar {
        h: crate::graph::Multigraph,
        dim: usize,
        globally_rigid: bool,
    },
    /// Body-hinge graph: the `(D-1)(H-e) + (D-3)e` packing condition for every `e`.
    BodyHinge {
        h: crate::graph::Multigraph,
        dim: usize,
    },
    /// Randomized stress-matrix rank test.
    StressRank {
        graph: SimpleGraph,
        dim: usize,
        seed: u64,
        trials: usize,
        max_rank: usize,
        target: usize,
        verdict: GhtVerdict,
    },
}

impl CertificateStep {
    pub fn rule_name(&self) -> &'static str {
        match self {
            CertificateStep::CompleteSmall { .. } => "CompleteSmall",
            CertificateStep::HendricksonFail { .. } => "HendricksonFail",
            CertificateStep::D2Characterization { .. } => "D2Characterization",
            CertificateStep::EdgeDeletion { .. } => "EdgeDeletion",
            CertificateStep::VertexRemovalLemma { .. } => "VertexRemovalLemma",
            CertificateStep::VertexRedundant { .. } => "VertexRedundant",
            CertificateStep::Combination { .. } => "Combination",
            CertificateStep::KChain { .. } => "KChain",
            CertificateStep::BodyBar { .. } => "BodyBar",
            CertificateStep::BodyHinge { .. } => "BodyHinge",
            CertificateStep::StressRank { .. } => "StressRank",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub dim: usize,
    pub steps: Vec<CertificateStep>,
    pub seed: u64,
    pub error_bound: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NdOptions {
    pub depth: usize,
    pub trials: usize,
}

impl Default for NdOptions {
    fn default() -> Self {
        NdOptions {
            depth: 8,
            trials: DEFAULT_TRIALS,
        }
    }
}

/// Redundant rigidity in `R^d`; exact in the plane.
fn redundancy_failure(g: &SimpleGraph, d: usize, seed: u64) -> Option<Option<Edge>> {
    let r = if d == 2 {
        redundantly_rigid_2d(g)
    } else {
        is_redundantly_rigid(g, d, seed)
    };
    (!r.holds).then_some(r.first_failure)
}

fn rigid(g: &SimpleGraph, d: usize, seed: u64) -> bool {
    if d == 2 {
        is_laman_rigid(g)
    } else {
        is_rigid(g, d, seed)
    }
}

/// Necessary conditions for global rigidity: complete on at most `d + 1` vertices, or
/// `(d+1)`-connected and redundantly rigid.
pub fn hendrickson_check(g: &SimpleGraph, d: usize, seed: u64) -> HendricksonResult {
    let n = g.n();
    if g.is_complete() && n <= d + 1 {
        return HendricksonResult::Pass;
    }
    let (k, witness) = if n >= 2 {
        vertex_connectivity(g).expect("n >= 2")
    } else {
        (0, None)
    };
    if k < d + 1 {
        return HendricksonResult::Fail(HendricksonFailure::LowConnectivity {
            connectivity: k,
            witness,
        });
    }
    match redundancy_failure(g, d, seed) {
        Some(edge) => HendricksonResult::Fail(HendricksonFailure::NotRedundantlyRigid { edge }),
        None => HendricksonResult::Pass,
    }
}

fn exact_bound() -> String {
    "exact".to_string()
}

/// Exact planar decision.
pub fn global_rigidity_2d(g: &SimpleGraph) -> Verdict {
    let (status, step) = if g.is_complete() && g.n() <= 3 {
        (
            Status::GloballyRigid,
            CertificateStep::CompleteSmall { graph: g.clone() },
        )
    } else {
        match hendrickson_check(g, 2, 0) {
            HendricksonResult::Pass => (
                Status::GloballyRigid,
                CertificateStep::D2Characterization { graph: g.clone() },
            ),
            HendricksonResult::Fail(failure) => (
                Status::NotGloballyRigid,
                CertificateStep::HendricksonFail {
                    graph: g.clone(),
                    dim: 2,
                    failure,
                },
            ),
        }
    };
    Verdict {
        status,
        dim: 2,
        steps: vec![step],
        seed: 0,
        error_bound: exact_bound(),
    }
}

/// Reduces a globally rigid plane graph to `K4` by edge deletions and degree-3 vertex
/// removals, re-verifying each step.
pub fn deconstruction_certificate_2d(
    g: &SimpleGraph,
) -> Result<Vec<CertificateStep>, CertifyError> {
    if g.n() < 4 || global_rigidity_2d(g).status != Status::GloballyRigid {
        return Err(CertifyError::Precondition(
            "needs a globally rigid plane graph on at least 4 vertices".into(),
        ));
    }
    let mut steps = Vec::new();
    let mut cur = g.clone();
    while cur.n() > 4 {
        match find_reduction(&cur)? {
            Reduction::Degree3Vertex(v) => {
                if !is_laman_rigid(&cur.without_vertex(v)) {
                    return Err(CertifyError::InvariantFault(format!(
                        "G - {v} is not rigid for a degree-3 vertex"
                    )));
                }
                let next = vertex_clique_replace(&cur, v);
                if global_rigidity_2d(&next).status != Status::GloballyRigid {
                    return Err(CertifyError::InvariantFault(format!(
                        "replacement at vertex {v} is not 3-connected and redundantly rigid"
                    )));
                }
                steps.push(CertificateStep::VertexRemovalLemma {
                    graph: cur,
                    dim: 2,
                    vertex: v,
                });
                cur = next;
            }
            Reduction::RemovableEdge((a, b)) => {
                steps.push(CertificateStep::EdgeDeletion {
                    graph: cur.clone(),
                    edge: (a, b),
                });
                cur = cur.without_edge(a, b);
            }
        }
    }
    if !cur.is_complete() {
        return Err(CertifyError::InvariantFault(
            "reduction ended on a 4-vertex graph other than K4".into(),
        ));
    }
    Ok(steps)
}

#[derive(Clone, Debug)]
enum Exact {
    Proven(Vec<CertificateStep>),
    Refuted(Vec<CertificateStep>),
    Open,
}

/// Exact-rule search with a per-invocation memo on labeled graphs.
struct Engine {
    d: usize,
    seed: u64,
    memo: HashMap<SimpleGraph, (usize, Exact)>,
}

impl Engine {
    fn new(d: usize, seed: u64) -> Self {
        Engine {
            d,
            seed,
            memo: HashMap::new(),
        }
    }

    fn exact(&mut self, g: &SimpleGraph, depth: usize) -> Exact {
        if let Some((seen_depth, out)) = self.memo.get(g) {
            if !matches!(out, Exact::Open) || *seen_depth >= depth {
                return out.clone();
            }
        }
        let out = self.exact_uncached(g, depth);
        self.memo.insert(g.clone(), (depth, out.clone()));
        out
    }

    fn exact_uncached(&mut self, g: &SimpleGraph, depth: usize) -> Exact {
        let d = self.d;
        if g.is_complete() {
            return Exact::Proven(vec![CertificateStep::CompleteSmall { graph: g.clone() }]);
        }
        if let HendricksonResult::Fail(failure) = hendrickson_check(g, d, self.seed) {
            return Exact::Refuted(vec![CertificateStep::HendricksonFail {
                graph: g.clone(),
                dim: d,
                failure,
            }]);
        }
        // full rank at a random point proves rigidity, so this step is exact
        if is_vertex_redundantly_rigid(g, d, self.seed).holds {
            return Exact::Proven(vec![CertificateStep::VertexRedundant {
                graph: g.clone(),
                dim: d,
            }]);
        }
        if d == 2 {
            return Exact::Proven(vec![CertificateStep::D2Characterization {
                graph: g.clone(),
            }]);
        }
        if depth == 0 {
            return Exact::Open;
        }
        for v in removal_order(g) {
            if let Some(rest) = self.lemma_at(g, v, depth) {
                let mut steps = vec![CertificateStep::VertexRemovalLemma {
                    graph: g.clone(),
                    dim: d,
                    vertex: v,
                }];
                steps.extend(rest);
                return Exact::Proven(steps);
            }
        }
        Exact::Open
    }

    /// Certificate for the replacement graph when the lemma applies at `v`.
    fn lemma_at(
        &mut self,
        g: &SimpleGraph,
        v: VertexId,
        depth: usize,
    ) -> Option<Vec<CertificateStep>> {
        self.lemma_reason(g, v, depth).ok()
    }

    fn lemma_reason(
        &mut self,
        g: &SimpleGraph,
        v: VertexId,
        depth: usize,
    ) -> Result<Vec<CertificateStep>, LemmaFailure> {
        if g.degree(v) <= self.d {
            return Err(LemmaFailure::DegreeTooSmall {
                degree: g.degree(v),
            });
        }
        if !rigid(&g.without_vertex(v), self.d, self.seed) {
            return Err(LemmaFailure::RemainderNotRigid);
        }
        let replacement = vertex_clique_replace(g, v);
        match self.exact(&replacement, depth.saturating_sub(1)) {
            Exact::Proven(steps) => Ok(steps),
            _ => Err(LemmaFailure::ReplacementNotCertified),
        }
    }
}

/// Vertices by decreasing degree, ties by id.
fn removal_order(g: &SimpleGraph) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = (0..g.n()).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    order
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum LemmaFailure {
    DegreeTooSmall { degree: usize },
    RemainderNotRigid,
    ReplacementNotCertified,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaOutcome {
    /// The steps certify the replacement graph `G - v + K(N(v))`.
    Applicable {
        replacement: SimpleGraph,
        steps: Vec<CertificateStep>,
    },
    NotApplicable(LemmaFailure),
}

pub fn vertex_removal_lemma_check(
    g: &SimpleGraph,
    d: usize,
    v: VertexId,
    seed: u64,
) -> Result<LemmaOutcome, CertifyError> {
    if v >= g.n() {
        return Err(CertifyError::NoSuchVertex(v));
    }
    if d == 0 {
        return Err(CertifyError::ZeroDimension);
    }
    let mut engine = Engine::new(d, seed);
    let depth = NdOptions::default().depth;
    Ok(match engine.lemma_reason(g, v, depth) {
        Ok(steps) => LemmaOutcome::Applicable {
            replacement: vertex_clique_replace(g, v),
            steps,
        },
        Err(reason) => LemmaOutcome::NotApplicable(reason),
    })
}

fn stress_step(
    g: &SimpleGraph,
    d: usize,
    seed: u64,
    trials: usize,
) -> Option<(Status, CertificateStep)> {
    let out = ght_global_rigidity_test(g, d, seed, trials).ok()?;
    let status = match out.verdict {
        GhtVerdict::ProbablyGloballyRigid => Status::ProbablyGloballyRigid,
        GhtVerdict::ProbablyNot => Status::ProbablyNot,
        GhtVerdict::Inapplicable => return None,
    };
    Some((
        status,
        CertificateStep::StressRank {
            graph: g.clone(),
            dim: d,
            seed,
            trials: out.trials,
            max_rank: out.max_rank,
            target: out.target,
            verdict: out.verdict,
        },
    ))
}

/// The decision pipeline for any dimension: complete graphs, necessary conditions, the
/// exact planar characterization, vertex-redundant rigidity, a bounded search for vertices
/// where the vertex-removal lemma applies, then the stress-rank test.
pub fn global_rigidity_nd(
    g: &SimpleGraph,
    d: usize,
    opts: NdOptions,
    seed: u64,
) -> Result<Verdict, CertifyError> {
    if d == 0 {
        return Err(CertifyError::ZeroDimension);
    }
    let mut engine = Engine::new(d, seed);
    let bound = error_bound(g, d, opts.trials);
    let verdict = |status, steps| Verdict {
        status,
        dim: d,
        steps,
        seed,
        error_bound: bound.clone(),
    };
    Ok(match engine.exact(g, opts.depth) {
        Exact::Proven(steps) => verdict(Status::GloballyRigid, steps),
        Exact::Refuted(steps) => verdict(Status::NotGloballyRigid, steps),
        Exact::Open => match stress_step(g, d, seed, opts.trials) {
            Some((status, step)) => verdict(status, vec![step]),
            None => verdict(Status::Unknown, Vec::new()),
        },
    })
}

/// Sufficient conditions for gluing `G1` and `G2` along `X = V(G1) ∩ V(G2)`. Both pieces
/// use ids of the union, which must be exactly `0..N`. The witness assigns each vertex of
/// `G2` (by union id) to a root; other entries are ignored.
pub fn combine_check(
    g1: &Piece,
    g2: &Piece,
    minor: &[Edge],
    x: &[VertexId],
    w: &RootedMinorWitness,
    d: usize,
    seed: u64,
) -> Result<Verdict, CertifyError> {
    if d == 0 {
        return Err(CertifyError::ZeroDimension);
    }
    let v1: BTreeSet<VertexId> = g1.vertices.iter().copied().collect();
    let v2: BTreeSet<VertexId> = g2.vertices.iter().copied().collect();
    let common: Vec<VertexId> = v1.intersection(&v2).copied().collect();
    let xs: Vec<VertexId> = x
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if xs != common {
        return Err(CertifyError::SeparatorMismatch(common));
    }
    let union: BTreeSet<VertexId> = v1.union(&v2).copied().collect();
    if union.iter().copied().ne(0..union.len()) {
        return Err(CertifyError::Precondition("pieces must cover 0..N".into()));
    }
    for &(a, b) in minor {
        if !common.contains(&a) || !common.contains(&b) {
            return Err(CertifyError::Precondition(format!(
                "minor edge {a}-{b} not on X"
            )));
        }
    }
    let unknown = |steps| Verdict {
        status: Status::Unknown,
        dim: d,
        steps,
        seed,
        error_bound: error_bound(&SimpleGraph::new(union.len()), d, DEFAULT_TRIALS),
    };
    let step = match combination_premises(g1, g2, minor, &xs, w, d, seed)? {
        None => return Ok(unknown(Vec::new())),
        Some(s) => s,
    };
    let (variant, premises) = step;
    let mut steps = vec![CertificateStep::Combination {
        g1: g1.clone(),
        g2: g2.clone(),
        separator: xs.clone(),
        minor: minor.to_vec(),
        witness: w.clone(),
        dim: d,
        variant,
    }];
    let mut status = Status::GloballyRigid;
    for v in premises {
        if v.status == Status::ProbablyGloballyRigid {
            status = Status::ProbablyGloballyRigid;
        }
        steps.extend(v.steps);
    }
    let bound = error_bound(&SimpleGraph::new(union.len()), d, DEFAULT_TRIALS);
    Ok(Verdict {
        status,
        dim: d,
        steps,
        seed,
        error_bound: bound,
    })
}

/// Checks the first three conditions and finds a variant whose two premise graphs come
/// out (probably) globally rigid.
fn combination_premises(
    g1: &Piece,
    g2: &Piece,
    minor: &[Edge],
    x: &[VertexId],
    w: &RootedMinorWitness,
    d: usize,
    seed: u64,
) -> Result<Option<(CombinationVariant, Vec<Verdict>)>, CertifyError> {
    if x.len() < d + 1 {
        return Ok(None);
    }
    let local1 = g1.local_graph(&[])?;
    if !rigid(&local1, d, seed) {
        return Ok(None);
    }
    if !minor_holds(g2, minor, x, w)? {
        return Ok(None);
    }
    let clique: Vec<Edge> = x
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| x[i + 1..].iter().map(move |&b| (a, b)))
        .collect();
    let opts = NdOptions::default();
    for variant in [
        CombinationVariant::FirstWithMinor,
        CombinationVariant::SecondWithMinor,
    ] {
        let (e1, e2) = match variant {
            CombinationVariant::FirstWithMinor => (minor, clique.as_slice()),
            CombinationVariant::SecondWithMinor => (clique.as_slice(), minor),
        };
        let a = global_rigidity_nd(&g1.local_graph(e1)?, d, opts, seed)?;
        if !a.status.is_positive() {
            continue;
        }
        let b = global_rigidity_nd(&g2.local_graph(e2)?, d, opts, seed)?;
        if b.status.is_positive() {
            return Ok(Some((variant, vec![a, b])));
        }
    }
    Ok(None)
}

/// Rooted-minor condition on `G2` in its local ids.
pub(crate) fn minor_holds(
    g2: &Piece,
    minor: &[Edge],
    x: &[VertexId],
    w: &RootedMinorWitness,
) -> Result<bool, CertifyError> {
    let local = g2.local_graph(&[])?;
    let roots: Vec<VertexId> = x.iter().map(|&v| g2.local(v)).collect::<Result<_, _>>()?;
    let h: Vec<Edge> = minor
        .iter()
        .map(|&(a, b)| Ok((g2.local(a)?, g2.local(b)?)))
        .collect::<Result<_, CertifyError>>()?;
    let mut assignment = Vec::with_capacity(g2.vertices.len());
    for &v in &g2.vertices {
        let root = w.assignment.get(v).copied().flatten();
        assignment.push(root.map(|r| g2.local(r).unwrap_or(usize::MAX)));
    }
    Ok(verify_rooted_minor(
        &local,
        &roots,
        &h,
        &RootedMinorWitness { assignment },
    )?)
}

/// The k-chain proof obligations for vertex `v` of the smaller end part. Returns `None`
/// when any fails.
pub(crate) fn kchain_plan(spec: &ChainSpec, d: usize, seed: u64) -> Option<VertexId> {
    let g = k_chain(spec);
    let parts = spec.parts();
    let k = parts.len();
    let (k_ok, _) = vertex_connectivity(&g).ok()?;
    if k_ok < d + 1 {
        return None;
    }
    let end = if spec.sizes[0] <= spec.sizes[k - 1] {
        0
    } else {
        k - 1
    };
    let next = if end == 0 { 1 } else { k - 2 };
    let v = parts[end][0];
    if !rigid(&g.without_vertex(v), d, seed) {
        return None;
    }
    let replacement = vertex_clique_replace(&g, v);
    let shift = |w: VertexId| if w > v { w - 1 } else { w };
    let seedset: Vec<VertexId> = parts[next].iter().map(|&w| shift(w)).collect();
    grows_from_clique(&replacement, &seedset, d + 1).then_some(v)
}

/// Whether `g` is obtained from the clique on `start` by repeatedly adding a vertex with at
/// least `min_deg` neighbours among the vertices already present.
pub fn grows_from_clique(g: &SimpleGraph, start: &[VertexId], min_deg: usize) -> bool {
    let mut inside = vec![false; g.n()];
    for &v in start {
        inside[v] = true;
    }
    if start
        .iter()
        .enumerate()
        .any(|(i, &a)| start[i + 1..].iter().any(|&b| !g.has_edge(a, b)))
    {
        return false;
    }
    let mut count = start.len();
    loop {
        let pick = (0..g.n()).find(|&v| {
            !inside[v] && g.neighbors(v).iter().filter(|&&w| inside[w]).count() >= min_deg
        });
        match pick {
            Some(v) => {
                inside[v] = true;
                count += 1;
            }
            None => return count == g.n(),
        }
    }
}

/// Global rigidity of a k-chain: necessary conditions first, then the proof plan of the
/// k-chain theorem checked directly, then the general pipeline.
pub fn kchain_global_check(spec: &ChainSpec, d: usize, seed: u64) -> Result<Verdict, CertifyError> {
    if d == 0 {
        return Err(CertifyError::ZeroDimension);
    }
    let g = k_chain(spec);
    if let HendricksonResult::Fail(failure) = hendrickson_check(&g, d, seed) {
        return Ok(Verdict {
            status: Status::NotGloballyRigid,
            dim: d,
            steps: vec![CertificateStep::HendricksonFail {
                graph: g.clone(),
                dim: d,
                failure,
            }],
            seed,
            error_bound: error_bound(&g, d, DEFAULT_TRIALS),
        });
    }
    if let Some(vertex) = kchain_plan(spec, d, seed) {
        return Ok(Verdict {
            status: Status::GloballyRigid,
            dim: d,
            steps: vec![CertificateStep::KChain {
                spec: spec.clone(),
                dim: d,
                vertex,
            }],
            seed,
            error_bound: error_bound(&g, d, DEFAULT_TRIALS),
        });
    }
    global_rigidity_nd(&g, d, NdOptions::default(), seed)
}
