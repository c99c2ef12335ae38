//! Independent certificate checker. It reads only step payloads, recomputes each rule's
//! conditions from the primitives, and never consults engine state.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{minor_holds, CertificateStep, CombinationVariant, HendricksonFailure, Status};
use crate::builders::{body_bar_graph, body_hinge_graph, k_chain, vertex_clique_replace};
use crate::certify::grows_from_clique;
use crate::graph::{vertex_connectivity, SimpleGraph};
use crate::packing::{body_bar_global_check, body_hinge_global_check};
use crate::rigidity::{
    ght_global_rigidity_test, is_rigid, is_vertex_redundantly_rigid, GhtVerdict,
};
use crate::sparsity::{is_laman_rigid, redundantly_rigid_2d};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("step {index} ({rule}): {msg}")]
    Step {
        index: usize,
        rule: &'static str,
        msg: String,
    },
    #[error("target graph ends with status {found:?}, claimed {claimed:?}")]
    WrongConclusion {
        claimed: Status,
        found: Option<Status>,
    },
}

fn rigid(g: &SimpleGraph, d: usize, seed: u64) -> bool {
    if d == 2 {
        is_laman_rigid(g)
    } else {
        is_rigid(g, d, seed)
    }
}

fn connectivity(g: &SimpleGraph) -> usize {
    if g.n() < 2 {
        0
    } else {
        vertex_connectivity(g).map(|(k, _)| k).unwrap_or(0)
    }
}

fn three_connected_redundant_2d(g: &SimpleGraph) -> bool {
    connectivity(g) >= 3 && redundantly_rigid_2d(g).holds
}

/// Accumulated facts: graph -> established status.
struct Facts(HashMap<SimpleGraph, Status>);

impl Facts {
    fn get(&self, g: &SimpleGraph) -> Option<Status> {
        if g.is_complete() {
            return Some(Status::GloballyRigid);
        }
        self.0.get(g).copied()
    }

    /// Weakest of the premises, which must all be (probably) globally rigid.
    fn premises(&self, gs: &[SimpleGraph]) -> Result<Status, String> {
        let mut out = Status::GloballyRigid;
        for g in gs {
            match self.get(g) {
                Some(Status::GloballyRigid) => {}
                Some(Status::ProbablyGloballyRigid) => out = Status::ProbablyGloballyRigid,
                other => return Err(format!("premise not established (found {other:?})")),
            }
        }
        Ok(out)
    }

    fn record(&mut self, g: SimpleGraph, s: Status) {
        // an exact fact is never weakened by a later probabilistic one
        let entry = self.0.entry(g).or_insert(s);
        if !entry.is_exact() {
            *entry = s;
        }
    }
}

fn check_step(
    step: &CertificateStep,
    facts: &Facts,
    seed: u64,
) -> Result<(SimpleGraph, Status), String> {
    let fail = |msg: &str| Err(msg.to_string());
    match step {
        CertificateStep::CompleteSmall { graph } => {
            if !graph.is_complete() {
                return fail("graph is not complete");
            }
            Ok((graph.clone(), Status::GloballyRigid))
        }
        CertificateStep::HendricksonFail {
            graph,
            dim,
            failure,
        } => {
            if graph.is_complete() && graph.n() <= dim + 1 {
                return fail("small complete graphs pass");
            }
            match failure {
                HendricksonFailure::LowConnectivity {
                    connectivity: k,
                    witness,
                } => {
                    let Some(w) = witness else {
                        return fail("missing separator witness");
                    };
                    if !w.verify(graph) || w.separator.len() != *k || *k > *dim {
                        return fail("separator witness does not show connectivity <= d");
                    }
                }
                HendricksonFailure::NotRedundantlyRigid { edge } => {
                    let Some((a, b)) = *edge else {
                        return fail("missing failing edge");
                    };
                    if !graph.has_edge(a, b) || rigid(&graph.without_edge(a, b), *dim, seed) {
                        return fail("graph minus the named edge is rigid");
                    }
                }
            }
            Ok((graph.clone(), Status::NotGloballyRigid))
        }
        CertificateStep::D2Characterization { graph } => {
            let small = graph.is_complete() && graph.n() <= 3;
            if !small && !three_connected_redundant_2d(graph) {
                return fail("not 3-connected and redundantly rigid in the plane");
            }
            Ok((graph.clone(), Status::GloballyRigid))
        }
        CertificateStep::EdgeDeletion {
            graph,
            edge: (a, b),
        } => {
            if !graph.has_edge(*a, *b) {
                return fail("edge not in graph");
            }
            let rest = graph.without_edge(*a, *b);
            if !three_connected_redundant_2d(&rest) {
                return fail("graph minus edge is not 3-connected and redundantly rigid");
            }
            Ok((graph.clone(), facts.premises(&[rest])?))
        }
        CertificateStep::VertexRemovalLemma { graph, dim, vertex } => {
            let v = *vertex;
            if v >= graph.n() || graph.degree(v) <= *dim {
                return fail("vertex degree is not above d");
            }
            if !rigid(&graph.without_vertex(v), *dim, seed) {
                return fail("G - v is not rigid");
            }
            let replacement = vertex_clique_replace(graph, v);
            Ok((graph.clone(), facts.premises(&[replacement])?))
        }
        CertificateStep::VertexRedundant { graph, dim } => {
            if !is_vertex_redundantly_rigid(graph, *dim, seed).holds {
                return fail("not vertex-redundantly rigid");
            }
            Ok((graph.clone(), Status::GloballyRigid))
        }
        CertificateStep::Combination {
            g1,
            g2,
            separator,
            minor,
            witness,
            dim,
            variant,
        } => {
            let v1: BTreeSet<_> = g1.vertices.iter().copied().collect();
            let v2: BTreeSet<_> = g2.vertices.iter().copied().collect();
            let common: Vec<_> = v1.intersection(&v2).copied().collect();
            if *separator != common || separator.len() < dim + 1 {
                return fail("X must be the common vertex set with at least d + 1 vertices");
            }
            let local1 = g1.local_graph(&[]).map_err(|e| e.to_string())?;
            if !rigid(&local1, *dim, seed) {
                return fail("G1 is not rigid");
            }
            if !minor_holds(g2, minor, separator, witness).map_err(|e| e.to_string())? {
                return fail("rooted minor witness fails");
            }
            let clique: Vec<_> = separator
                .iter()
                .enumerate()
                .flat_map(|(i, &a)| separator[i + 1..].iter().map(move |&b| (a, b)))
                .collect();
            let (e1, e2) = match variant {
                CombinationVariant::FirstWithMinor => (minor.as_slice(), clique.as_slice()),
                CombinationVariant::SecondWithMinor => (clique.as_slice(), minor.as_slice()),
            };
            let p1 = g1.local_graph(e1).map_err(|e| e.to_string())?;
            let p2 = g2.local_graph(e2).map_err(|e| e.to_string())?;
            let status = facts.premises(&[p1, p2])?;
            let n = v1.union(&v2).count();
            let mut union = SimpleGraph::new(n);
            for &(a, b) in g1.edges.iter().chain(&g2.edges) {
                if a >= n || b >= n {
                    return fail("pieces do not cover 0..N");
                }
                union.add_edge(a, b);
            }
            Ok((union, status))
        }
        CertificateStep::KChain { spec, dim, vertex } => {
            let g = k_chain(spec);
            let parts = spec.parts();
            let k = parts.len();
            if connectivity(&g) < dim + 1 {
                return fail("chain is not (d+1)-connected");
            }
            let (end, next) = if spec.sizes[0] <= spec.sizes[k - 1] {
                (0, 1)
            } else {
                (k - 1, k - 2)
            };
            let v = *vertex;
            if !parts[end].contains(&v) {
                return fail("vertex is not in the smaller end part");
            }
            if !rigid(&g.without_vertex(v), *dim, seed) {
                return fail("G - v is not rigid");
            }
            let replacement = vertex_clique_replace(&g, v);
            let start: Vec<_> = parts[next]
                .iter()
                .map(|&w| if w > v { w - 1 } else { w })
                .collect();
            if !grows_from_clique(&replacement, &start, dim + 1) {
                return fail("replacement does not grow from K(A_2) by degree > d additions");
            }
            Ok((g, Status::GloballyRigid))
        }
        CertificateStep::BodyBar {
            h,
            dim,
            globally_rigid,
        } => {
            if body_bar_global_check(h, *dim).holds != *globally_rigid {
                return fail("packing condition disagrees with the claim");
            }
            let status = if *globally_rigid {
                Status::GloballyRigid
            } else {
                Status::NotGloballyRigid
            };
            Ok((body_bar_graph(h, *dim).graph, status))
        }
        CertificateStep::BodyHinge { h, dim } => {
            let holds = body_hinge_global_check(h, *dim)
                .map_err(|e| e.to_string())?
                .holds;
            if !holds {
                return fail("packing condition fails");
            }
            let layout = body_hinge_graph(h, *dim).map_err(|e| e.to_string())?;
            Ok((layout.graph, Status::GloballyRigid))
        }
        CertificateStep::StressRank {
            graph,
            dim,
            seed,
            trials,
            max_rank,
            target,
            verdict,
        } => {
            let out =
                ght_global_rigidity_test(graph, *dim, *seed, *trials).map_err(|e| e.to_string())?;
            if out.verdict != *verdict || out.max_rank != *max_rank || out.target != *target {
                return fail("stress rank test does not reproduce");
            }
            let status = match verdict {
                GhtVerdict::ProbablyGloballyRigid => Status::ProbablyGloballyRigid,
                GhtVerdict::ProbablyNot => Status::ProbablyNot,
                GhtVerdict::Inapplicable => return fail("inapplicable stress test proves nothing"),
            };
            Ok((graph.clone(), status))
        }
    }
}

/// Verifies every step (last to first, so premises are established before use) and that
/// `target` ends with the claimed status. `Unknown` claims need only valid steps.
pub fn check_chain(
    target: &SimpleGraph,
    _dim: usize,
    seed: u64,
    steps: &[CertificateStep],
    claimed: Status,
) -> Result<(), CheckError> {
    let mut facts = Facts(HashMap::new());
    for (index, step) in steps.iter().enumerate().rev() {
        let (g, s) = check_step(step, &facts, seed).map_err(|msg| CheckError::Step {
            index,
            rule: step.rule_name(),
            msg,
        })?;
        facts.record(g, s);
    }
    if claimed == Status::Unknown {
        return Ok(());
    }
    let found = facts.get(target);
    if found != Some(claimed) {
        return Err(CheckError::WrongConclusion { claimed, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_forged_steps() {
        let k4e = SimpleGraph::complete(4).without_edge(0, 1);
        let forged = vec![CertificateStep::D2Characterization { graph: k4e.clone() }];
        assert!(check_chain(&k4e, 2, 0, &forged, Status::GloballyRigid).is_err());
        let forged = vec![CertificateStep::CompleteSmall { graph: k4e.clone() }];
        assert!(check_chain(&k4e, 2, 0, &forged, Status::GloballyRigid).is_err());
        // premise never established
        let c5 = SimpleGraph::cycle(5);
        let forged = vec![CertificateStep::VertexRemovalLemma {
            graph: c5.clone(),
            dim: 1,
            vertex: 0,
        }];
        assert!(check_chain(&c5, 1, 0, &forged, Status::GloballyRigid).is_err());
        // a true step does not prove a different target
        let k4 = SimpleGraph::complete(4);
        let ok = vec![CertificateStep::CompleteSmall { graph: k4 }];
        assert!(matches!(
            check_chain(&k4e, 2, 0, &ok, Status::GloballyRigid),
            Err(CheckError::WrongConclusion { .. })
        ));
    }
}
