//! Floating-point realization explorer. Solves the squared edge-length system from many
//! random starts and counts congruence classes among the solutions found. The count is a
//! lower bound only; this module never decides anything on its own.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::SimpleGraph;
use crate::rigidity::{is_rigid, trial_rng, Framework};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph is not rigid in dimension {0}; the realization space is not finite")]
    NotRigid(usize),
    #[error("dimension must be positive")]
    ZeroDimension,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest accepted `| |q_u - q_v|^2 - L_uv |` for a converged solve.
    pub residual: f64,
    /// Largest fingerprint difference for two solutions to count as one class.
    pub merge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            merge: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationClass {
    /// Vertex 0 at the origin, frame fixed by Gram-Schmidt on the later vertices.
    pub representative: Vec<Vec<f64>>,
    /// Distances `|q_i - q_j|` for all pairs `i < j` in lexicographic order.
    pub fingerprint: Vec<f64>,
    /// Number of converged restarts that landed in this class.
    pub hits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub classes: Vec<RealizationClass>,
    pub restarts: usize,
    pub converged: usize,
    pub tolerance: Tolerances,
    pub flexible_flag: bool,
    pub seed: u64,
}

impl EnumerationReport {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

pub fn fingerprint(config: &[Vec<f64>]) -> Vec<f64> {
    let n = config.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(dist(&config[i], &config[j]));
        }
    }
    out
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Quotients out congruence: translate vertex 0 to the origin, then express every point in
/// the orthonormal frame obtained by Gram-Schmidt on `q_1 - q_0, q_2 - q_0, ...`. Each
/// frame vector points towards the vertex that created it, which also fixes reflections.
pub fn pin(config: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(origin) = config.first() else {
        return Vec::new();
    };
    let d = origin.len();
    let shifted: Vec<Vec<f64>> = config
        .iter()
        .map(|p| p.iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();
    let scale = shifted
        .iter()
        .map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d);
    let candidates = shifted.iter().skip(1).cloned().chain((0..d).map(|i| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    }));
    for mut v in candidates {
        if frame.len() == d {
            break;
        }
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for b in &frame {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // reject vectors that are (numerically) in the span already
        if norm > 1e-8 * scale.max(norm0) && norm > 1e-12 {
            frame.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    shifted
        .iter()
        .map(|p| {
            frame
                .iter()
                .map(|b| p.iter().zip(b).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}

struct System<'a> {
    edges: &'a [(usize, usize)],
    lengths: Vec<f64>,
    d: usize,
}

impl System<'_> {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = self.d;
        DVector::from_iterator(
            self.edges.len(),
            self.edges.iter().zip(&self.lengths).map(|(&(u, v), l)| {
                (0..d)
                    .map(|k| (x[u * d + k] - x[v * d + k]).powi(2))
                    .sum::<f64>()
                    - l
            }),
        )
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.d;
        let mut j = DMatrix::zeros(self.edges.len(), x.len());
        for (r, &(u, v)) in self.edges.iter().enumerate() {
            for k in 0..d {
                let diff = 2.0 * (x[u * d + k] - x[v * d + k]);
                j[(r, u * d + k)] = diff;
                j[(r, v * d + k)] = -diff;
            }
        }
        j
    }

    /// Levenberg-Marquardt with identity damping; the damping also absorbs the
    /// rank deficiency caused by the rigid-motion gauge.
    fn solve(&self, mut x: DVector<f64>, tol: f64) -> Option<DVector<f64>> {
        let mut lambda = 1e-3;
        let mut r = self.residuals(&x);
        let mut cost = r.norm_squared();
        for _ in 0..1000 {
            if r.amax() < tol {
                return Some(x);
            }
            let j = self.jacobian(&x);
            let jt = j.transpose();
            let a = &jt * &j;
            let g = &jt * &r;
            loop {
                let mut damped = a.clone();
                for i in 0..damped.nrows() {
                    damped[(i, i)] += lambda;
                }
                let step = damped.cholesky().map(|c| c.solve(&(-&g)));
                if let Some(step) = step {
                    let cand = &x + &step;
                    let rc = self.residuals(&cand);
                    let cc = rc.norm_squared();
                    if cc < cost {
                        x = cand;
                        r = rc;
                        cost = cc;
                        lambda = (lambda / 3.0).max(1e-15);
                        break;
                    }
                    if step.norm() < 1e-15 * (1.0 + x.norm()) {
                        return (r.amax() < tol).then_some(x);
                    }
                }
                lambda *= 4.0;
                if lambda > 1e16 {
                    return None;
                }
            }
        }
        (r.amax() < tol).then_some(x)
    }
}

/// Searches for frameworks equivalent to `fw` (same edge lengths) and groups the ones
/// found into congruence classes. Flexible graphs skip the search, since their
/// realization space is a continuum.
pub fn enumerate_equivalent(
    fw: &Framework<f64>,
    restarts: usize,
    tol: Tolerances,
    seed: u64,
) -> EnumerationReport {
    let (n, d) = (fw.graph.n(), fw.dim);
    let flexible = d == 0 || !is_rigid(&fw.graph, d, seed);
    let mut report = EnumerationReport {
        classes: Vec::new(),
        restarts,
        converged: 0,
        tolerance: tol,
        flexible_flag: flexible,
        seed,
    };
    if flexible {
        return report;
    }
    let edges = fw.graph.edges();
    let lengths: Vec<f64> = edges
        .iter()
        .map(|&(u, v)| dist(&fw.config[u], &fw.config[v]).powi(2))
        .collect();
    let longest = lengths.iter().copied().fold(1.0, f64::max);
    let spread = fw
        .config
        .iter()
        .map(|p| dist(p, &fw.config[0]))
        .fold(0.0, f64::max)
        .max(1.0);
    let sys = System {
        edges: &edges,
        lengths,
        d,
    };
    let residual_tol = tol.residual * longest;
    let solutions: Vec<Option<Vec<Vec<f64>>>> = (0..restarts)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let x0 =
                DVector::from_iterator(n * d, (0..n * d).map(|_| rng.gen_range(-spread..spread)));
            sys.solve(x0, residual_tol)
                .map(|x| x.as_slice().chunks(d).map(<[f64]>::to_vec).collect())
        })
        .collect();
    // merge sequentially in restart order so the report is deterministic
    for q in solutions.into_iter().flatten() {
        report.converged += 1;
        let fp = fingerprint(&q);
        match report
            .classes
            .iter_mut()
            .find(|c| max_diff(&c.fingerprint, &fp) < tol.merge)
        {
            Some(c) => c.hits += 1,
            None => report.classes.push(RealizationClass {
                representative: pin(&q),
                fingerprint: fp,
                hits: 1,
            }),
        }
    }
    report.classes.sort_by(|a, b| {
        a.fingerprint
            .partial_cmp(&b.fingerprint)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    report
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ProbeOutcome {
    ConsistentWithGR {
        report: EnumerationReport,
    },
    FoundSecondClass {
        original: Vec<Vec<f64>>,
        other: Vec<Vec<f64>>,
        report: EnumerationReport,
    },
}

impl ProbeOutcome {
    pub fn report(&self) -> &EnumerationReport {
        match self {
            ProbeOutcome::ConsistentWithGR { report }
            | ProbeOutcome::FoundSecondClass { report, .. } => report,
        }
    }
}

/// A random configuration with coordinates on the grid `2^-20 Z` inside `[-1, 1]`.
pub fn rounded_random_config(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = trial_rng(seed, usize::MAX);
    let grid = (1u64 << 20) as f64;
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| (rng.gen_range(-1.0..1.0) * grid).round() / grid)
                .collect()
        })
        .collect()
}

/// Looks for an equivalent but non-congruent framework at a random configuration.
pub fn numeric_globally_rigid_probe(
    g: &SimpleGraph,
    d: usize,
    restarts: usize,
    seed: u64,
) -> Result<ProbeOutcome, OracleError> {
    if d == 0 {
        return Err(OracleError::ZeroDimension);
    }
    if !is_rigid(g, d, seed) {
        return Err(OracleError::NotRigid(d));
    }
    let config = rounded_random_config(g.n(), d, seed);
    let fw = Framework::new(g.clone(), d, config.clone()).expect("config sized to graph");
    let report = enumerate_equivalent(&fw, restarts, Tolerances::default(), seed);
    let own = fingerprint(&config);
    let merge = report.tolerance.merge;
    let other = report
        .classes
        .iter()
        .find(|c| max_diff(&c.fingerprint, &own) >= merge)
        .map(|c| c.representative.clone());
    Ok(match other {
        Some(other) => ProbeOutcome::FoundSecondClass {
            original: pin(&config),
            other,
            report,
        },
        None => ProbeOutcome::ConsistentWithGR { report },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::one_extension;

    fn framework(g: SimpleGraph, d: usize, seed: u64) -> Framework<f64> {
        let config = rounded_random_config(g.n(), d, seed);
        Framework::new(g, d, config).unwrap()
    }

    fn residual(g: &SimpleGraph, original: &[Vec<f64>], q: &[Vec<f64>]) -> f64 {
        g.edges()
            .iter()
            .map(|&(u, v)| {
                (dist(&q[u], &q[v]).powi(2) - dist(&original[u], &original[v]).powi(2)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn triangle_has_one_class() {
        let fw = framework(SimpleGraph::complete(3), 2, 4);
        let r = enumerate_equivalent(&fw, 50, Tolerances::default(), 4);
        assert!(!r.flexible_flag);
        assert_eq!(r.class_count(), 1);
        assert!(r.converged > 0);
    }

    #[test]
    fn k4_minus_edge_has_two_classes() {
        let g = SimpleGraph::complete(4).without_edge(0, 1);
        let fw = framework(g.clone(), 2, 9);
        let r = enumerate_equivalent(&fw, 200, Tolerances::default(), 9);
        assert_eq!(r.class_count(), 2);
        for c in &r.classes {
            assert!(residual(&g, &fw.config, &c.representative) < 1e-9);
            assert_eq!(c.representative[0], vec![0.0, 0.0]);
        }
        // independent construction of the second class: reflect vertex 0 across the line 23
        let (a, b) = (&fw.config[2], &fw.config[3]);
        let dir: Vec<f64> = vec![b[0] - a[0], b[1] - a[1]];
        let len2 = dir[0] * dir[0] + dir[1] * dir[1];
        let p = &fw.config[0];
        let t = ((p[0] - a[0]) * dir[0] + (p[1] - a[1]) * dir[1]) / len2;
        let foot = [a[0] + t * dir[0], a[1] + t * dir[1]];
        let mut reflected = fw.config.clone();
        reflected[0] = vec![2.0 * foot[0] - p[0], 2.0 * foot[1] - p[1]];
        let fp = fingerprint(&reflected);
        assert!(r
            .classes
            .iter()
            .any(|c| max_diff(&c.fingerprint, &fp) < 1e-6));
    }

    #[test]
    fn cycle_is_flagged_flexible() {
        let r = enumerate_equivalent(
            &framework(SimpleGraph::cycle(4), 2, 1),
            10,
            Tolerances::default(),
            1,
        );
        assert!(r.flexible_flag);
        assert!(r.classes.is_empty());
    }

    #[test]
    fn fingerprint_is_congruence_invariant() {
        let config = rounded_random_config(5, 3, 2);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        // rotation about z, reflection in x, then a translation
        let moved: Vec<Vec<f64>> = config
            .iter()
            .map(|p| {
                vec![
                    -(c * p[0] - s * p[1]) + 1.5,
                    s * p[0] + c * p[1] - 2.0,
                    p[2] + 0.25,
                ]
            })
            .collect();
        assert!(max_diff(&fingerprint(&config), &fingerprint(&moved)) < 1e-9);
        assert!(max_diff(&pin(&config).concat(), &pin(&moved).concat()) < 1e-9);
    }

    #[test]
    fn probe_examples() {
        let k4 = SimpleGraph::complete(4);
        assert!(matches!(
            numeric_globally_rigid_probe(&k4, 2, 100, 3).unwrap(),
            ProbeOutcome::ConsistentWithGR { .. }
        ));
        let k4e = k4.without_edge(0, 1);
        match numeric_globally_rigid_probe(&k4e, 2, 200, 3).unwrap() {
            ProbeOutcome::FoundSecondClass {
                original, other, ..
            } => {
                assert!(residual(&k4e, &original, &other) < 1e-9);
                assert!(max_diff(&fingerprint(&original), &fingerprint(&other)) > 1e-6);
            }
            o => panic!("expected a second class, got {o:?}"),
        }
        let ext = one_extension(&k4, 2, (0, 1), &[2]).unwrap();
        assert!(matches!(
            numeric_globally_rigid_probe(&ext, 2, 300, 3).unwrap(),
            ProbeOutcome::ConsistentWithGR { .. }
        ));
        assert_eq!(
            numeric_globally_rigid_probe(&SimpleGraph::cycle(4), 2, 10, 3),
            Err(OracleError::NotRigid(2))
        );
    }
}
