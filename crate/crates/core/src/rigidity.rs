//! Rigidity matrices and everything computed from their rank: generic rigidity,
//! edge and vertex redundancy, exact infinitesimal rigidity, equilibrium stresses,
//! and the stress-matrix rank test for global rigidity.
//!
//! "Generic" means a configuration drawn uniformly from `Fp^{dn}`. A rank measured
//! there never exceeds the generic rank, and by Schwartz-Zippel it falls short with
//! probability at most `rank / p` per draw. Every routine takes the maximum over
//! [`DEFAULT_TRIALS`] independent draws, so errors are one-sided and tiny.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Field, Fp, Rational, SparseMatrix, MODULUS};
use crate::graph::{Edge, SimpleGraph, VertexId};

pub const DEFAULT_TRIALS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RigidityError {
    #[error("configuration has {got} points for {n} vertices")]
    WrongPointCount { n: usize, got: usize },
    #[error("point {v} has dimension {got}, expected {dim}")]
    WrongDimension { v: VertexId, dim: usize, got: usize },
    #[error("all {0} points coincide")]
    DegenerateConfiguration(usize),
    #[error("edge set is independent: no nonzero equilibrium stress")]
    NoStress,
    #[error("stress matrix rank {rank} exceeds n - d - 1 = {bound}")]
    StressRankFault { rank: usize, bound: usize },
}

/// A graph with a point in `F^d` for every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework<T> {
    pub graph: SimpleGraph,
    pub dim: usize,
    pub config: Vec<Vec<T>>,
}

impl<T> Framework<T> {
    pub fn new(graph: SimpleGraph, dim: usize, config: Vec<Vec<T>>) -> Result<Self, RigidityError> {
        if config.len() != graph.n() {
            return Err(RigidityError::WrongPointCount {
                n: graph.n(),
                got: config.len(),
            });
        }
        if let Some((v, p)) = config.iter().enumerate().find(|(_, p)| p.len() != dim) {
            return Err(RigidityError::WrongDimension {
                v,
                dim,
                got: p.len(),
            });
        }
        Ok(Framework { graph, dim, config })
    }
}

/// An assignment of a velocity vector to every vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Motion<F> {
    pub velocities: Vec<Vec<F>>,
}

impl<F: Field> Motion<F> {
    fn from_flat(flat: &[F], dim: usize) -> Self {
        Motion {
            velocities: flat.chunks(dim).map(<[F]>::to_vec).collect(),
        }
    }

    pub fn flat(&self) -> Vec<F> {
        self.velocities.iter().flatten().cloned().collect()
    }
}

/// `|E| x dn` matrix; the row of `uv` holds `p_u - p_v` in u's block and `p_v - p_u` in v's.
pub fn rigidity_matrix<F: Field>(fw: &Framework<F>) -> SparseMatrix<F> {
    let d = fw.dim;
    let edges = fw.graph.edges();
    let mut trips = Vec::with_capacity(edges.len() * 2 * d);
    for (row, &(u, v)) in edges.iter().enumerate() {
        for k in 0..d {
            let diff = fw.config[u][k].clone() - fw.config[v][k].clone();
            trips.push((row, d * u + k, diff.clone()));
            trips.push((row, d * v + k, -diff));
        }
    }
    SparseMatrix::from_triplets(edges.len(), d * fw.graph.n(), trips)
        .expect("indices in range by construction")
}

/// Deterministic RNG for trial `trial` of a computation seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut z = seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

pub fn random_config<R: rand::Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<Fp>> {
    (0..n)
        .map(|_| (0..d).map(|_| Fp::random(rng)).collect())
        .collect()
}

pub fn random_framework(g: &SimpleGraph, d: usize, seed: u64, trial: usize) -> Framework<Fp> {
    let mut rng = trial_rng(seed, trial);
    let config = random_config(g.n(), d, &mut rng);
    Framework {
        graph: g.clone(),
        dim: d,
        config,
    }
}

pub fn binom2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Rank a rigid graph on `n` vertices reaches in dimension `d`.
pub fn rigid_rank_target(n: usize, d: usize) -> usize {
    if n > d {
        d * n - binom2(d + 1)
    } else {
        binom2(n)
    }
}

/// Generic rank of the rigidity matroid, measured at random points (max over trials).
pub fn generic_rank(g: &SimpleGraph, d: usize, seed: u64) -> usize {
    (0..DEFAULT_TRIALS)
        .map(|t| rigidity_matrix(&random_framework(g, d, seed, t)).rank())
        .max()
        .unwrap_or(0)
}

/// Complete graphs are rigid; otherwise `n >= d + 1` and the generic rank is `dn - C(d+1, 2)`.
pub fn is_rigid(g: &SimpleGraph, d: usize, seed: u64) -> bool {
    if g.is_complete() {
        return true;
    }
    let n = g.n();
    if n <= d {
        return false;
    }
    let target = rigid_rank_target(n, d);
    g.m() >= target && generic_rank(g, d, seed) == target
}

/// Outcome of an "every deletion stays rigid" test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Redundancy<T> {
    pub holds: bool,
    /// First element (in id order) whose deletion destroys rigidity.
    pub first_failure: Option<T>,
}

/// Rank and edge-wise stress support at one configuration.
fn rank_and_stress_support(fw: &Framework<Fp>) -> (usize, Vec<bool>) {
    let r = rigidity_matrix(fw);
    let rank = r.rank();
    let mut support = vec![false; r.rows()];
    if rank < r.rows() {
        for w in r.transpose().nullspace_basis() {
            for (s, x) in support.iter_mut().zip(&w) {
                *s |= !x.is_zero();
            }
        }
    }
    (rank, support)
}

/// `G - e` rigid for every edge `e`.
///
/// An edge can be deleted without losing rank exactly when some equilibrium stress is
/// nonzero on it, so one elimination per trial covers all deletions.
pub fn is_redundantly_rigid(g: &SimpleGraph, d: usize, seed: u64) -> Redundancy<Edge> {
    let edges = g.edges();
    if edges.is_empty() {
        return Redundancy {
            holds: true,
            first_failure: None,
        };
    }
    let n = g.n();
    if n <= d {
        // G - e is never complete, and non-complete graphs this small are flexible.
        return Redundancy {
            holds: false,
            first_failure: Some(edges[0]),
        };
    }
    let target = rigid_rank_target(n, d);
    let mut best = vec![0usize; edges.len()];
    for t in 0..DEFAULT_TRIALS {
        let (rank, support) = rank_and_stress_support(&random_framework(g, d, seed, t));
        for (b, s) in best.iter_mut().zip(&support) {
            *b = (*b).max(if *s { rank } else { rank.saturating_sub(1) });
        }
    }
    let first_failure = edges
        .iter()
        .zip(&best)
        .find(|(_, &r)| r < target)
        .map(|(e, _)| *e);
    Redundancy {
        holds: first_failure.is_none(),
        first_failure,
    }
}

/// `G - v` rigid for every vertex `v`.
pub fn is_vertex_redundantly_rigid(g: &SimpleGraph, d: usize, seed: u64) -> Redundancy<VertexId> {
    let flags: Vec<bool> = (0..g.n())
        .into_par_iter()
        .map(|v| is_rigid(&g.without_vertex(v), d, seed))
        .collect();
    let first_failure = flags.iter().position(|ok| !ok);
    Redundancy {
        holds: first_failure.is_none(),
        first_failure,
    }
}

/// Exact infinitesimal rigidity report for a rational framework.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinitesimalReport {
    pub rigid: bool,
    pub kernel_dim: usize,
    pub trivial_dim: usize,
    pub affine_span_dim: usize,
    /// A motion outside the span of the trivial ones, when not rigid.
    pub motion: Option<Motion<Rational>>,
}

pub fn affine_span_dim<F: Field>(points: &[Vec<F>]) -> usize {
    let Some(p0) = points.first() else {
        return 0;
    };
    let rows: Vec<Vec<F>> = points[1..]
        .iter()
        .map(|p| {
            p.iter()
                .zip(p0)
                .map(|(a, b)| a.clone() - b.clone())
                .collect()
        })
        .collect();
    if rows.is_empty() {
        return 0;
    }
    SparseMatrix::from_dense(&rows, p0.len()).rank()
}

/// Basis of trivial motions `m(v) = S p_v + t`: `d` translations, then one rotation per
/// coordinate pair `i < j`.
pub fn trivial_motion_basis<F: Field>(points: &[Vec<F>], d: usize) -> Vec<Vec<F>> {
    let n = points.len();
    let mut basis = Vec::new();
    for i in 0..d {
        let mut m = vec![F::zero(); n * d];
        for v in 0..n {
            m[v * d + i] = F::one();
        }
        basis.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut m = vec![F::zero(); n * d];
            for (v, p) in points.iter().enumerate() {
                m[v * d + i] = p[j].clone();
                m[v * d + j] = -p[i].clone();
            }
            basis.push(m);
        }
    }
    basis
}

/// Kernel of the rigidity matrix compared with the trivial motions, over the rationals.
///
/// The trivial motions of points spanning an affine subspace of dimension `k` form a
/// space of dimension `C(d+1, 2) - C(d-k, 2)`.
pub fn infinitesimal_rigidity_exact(
    fw: &Framework<Rational>,
) -> Result<InfinitesimalReport, RigidityError> {
    let n = fw.graph.n();
    let d = fw.dim;
    if n >= 2 && fw.config.iter().all(|p| *p == fw.config[0]) {
        return Err(RigidityError::DegenerateConfiguration(n));
    }
    let k = affine_span_dim(&fw.config);
    let trivial_dim = binom2(d + 1) - binom2(d - k);
    let r = rigidity_matrix(fw);
    let kernel_dim = d * n - r.rank();
    if kernel_dim == trivial_dim {
        return Ok(InfinitesimalReport {
            rigid: true,
            kernel_dim,
            trivial_dim,
            affine_span_dim: k,
            motion: None,
        });
    }
    let mut span = trivial_motion_basis(&fw.config, d);
    let base_rank = SparseMatrix::from_dense(&span, d * n).rank();
    let motion = r.nullspace_basis().into_iter().find(|m| {
        span.push(m.clone());
        let grows = SparseMatrix::from_dense(&span, d * n).rank() > base_rank;
        span.pop();
        grows
    });
    Ok(InfinitesimalReport {
        rigid: false,
        kernel_dim,
        trivial_dim,
        affine_span_dim: k,
        motion: motion.map(|m| Motion::from_flat(&m, d)),
    })
}

/// An equilibrium stress together with the configuration it was sampled at.
#[derive(Clone, Debug, PartialEq)]
pub struct StressSample {
    pub framework: Framework<Fp>,
    pub edges: Vec<Edge>,
    pub stress: Vec<Fp>,
}

impl StressSample {
    /// Symmetric `n x n` stress matrix: `-w_uv` off the diagonal, row sums on it.
    pub fn stress_matrix(&self) -> Vec<Vec<Fp>> {
        stress_matrix(self.framework.graph.n(), &self.edges, &self.stress)
    }

    /// Checks equilibrium at every vertex.
    pub fn is_equilibrium(&self) -> bool {
        let r = rigidity_matrix(&self.framework);
        r.transpose().mul_vec(&self.stress).iter().all(Fp::is_zero)
    }
}

pub fn stress_matrix<F: Field>(n: usize, edges: &[Edge], stress: &[F]) -> Vec<Vec<F>> {
    let mut m = vec![vec![F::zero(); n]; n];
    for (&(u, v), w) in edges.iter().zip(stress) {
        m[u][v] = m[u][v].clone() - w.clone();
        m[v][u] = m[v][u].clone() - w.clone();
        m[u][u] = m[u][u].clone() + w.clone();
        m[v][v] = m[v][v].clone() + w.clone();
    }
    m
}

/// Random element of the space of equilibrium stresses at a random configuration.
pub fn equilibrium_stress_sample(
    g: &SimpleGraph,
    d: usize,
    seed: u64,
) -> Result<StressSample, RigidityError> {
    stress_sample_at_trial(g, d, seed, 0)
}

fn stress_sample_at_trial(
    g: &SimpleGraph,
    d: usize,
    seed: u64,
    trial: usize,
) -> Result<StressSample, RigidityError> {
    let fw = random_framework(g, d, seed, trial);
    let rt = rigidity_matrix(&fw).transpose();
    let mut rng = trial_rng(seed ^ 0x0515_7E55, trial);
    let stress = rt
        .nullspace_sample(&mut rng)
        .map_err(|_| RigidityError::NoStress)?;
    Ok(StressSample {
        edges: g.edges(),
        framework: fw,
        stress,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GhtVerdict {
    ProbablyGloballyRigid,
    ProbablyNot,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GhtOutcome {
    pub verdict: GhtVerdict,
    /// Largest stress-matrix rank seen over the trials.
    pub max_rank: usize,
    /// `n - d - 1`.
    pub target: usize,
    pub trials: usize,
}

/// Randomized global rigidity test: a rigid graph is generically globally rigid iff a
/// generic equilibrium stress has a stress matrix of rank `n - d - 1`.
///
/// Measured ranks can only fall short of the generic one, so `ProbablyNot` is the only
/// verdict that can be wrong, with the probability reported by [`error_bound`].
pub fn ght_global_rigidity_test(
    g: &SimpleGraph,
    d: usize,
    seed: u64,
    trials: usize,
) -> Result<GhtOutcome, RigidityError> {
    let n = g.n();
    let target = n.saturating_sub(d + 1);
    let outcome = |verdict, max_rank| GhtOutcome {
        verdict,
        max_rank,
        target,
        trials,
    };
    if n <= d + 1 {
        let v = if g.is_complete() {
            GhtVerdict::ProbablyGloballyRigid
        } else {
            GhtVerdict::Inapplicable
        };
        return Ok(outcome(v, 0));
    }
    if !is_rigid(g, d, seed) {
        return Ok(outcome(GhtVerdict::Inapplicable, 0));
    }
    let mut best = 0;
    for t in 0..trials.max(1) {
        let rank = match stress_sample_at_trial(g, d, seed, t) {
            Ok(s) => SparseMatrix::from_dense(&s.stress_matrix(), n).rank(),
            Err(RigidityError::NoStress) => 0,
            Err(e) => return Err(e),
        };
        if rank > target {
            return Err(RigidityError::StressRankFault {
                rank,
                bound: target,
            });
        }
        best = best.max(rank);
        if best == target {
            break;
        }
    }
    let v = if best == target {
        GhtVerdict::ProbablyGloballyRigid
    } else {
        GhtVerdict::ProbablyNot
    };
    Ok(outcome(v, best))
}

/// Human-readable Schwartz-Zippel bound on a one-sided randomized error for a graph.
///
/// Every minor of the rigidity matrix (and of a stress matrix built from a
/// polynomial parametrization of the stress space) is a polynomial whose degree is
/// bounded by `2 * d * n * (|E| + n)`.
pub fn error_bound(g: &SimpleGraph, d: usize, trials: usize) -> String {
    let deg = 2.0 * (d * g.n()) as f64 * (g.m() + g.n()) as f64;
    let per = (deg / MODULUS as f64).min(1.0);
    format!(
        "one-sided; per-trial false negative <= {per:.3e} (degree {deg:.0} / p = 2^61-1), {trials} trials"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn qfw(g: SimpleGraph, d: usize, pts: &[&[i64]]) -> Framework<Rational> {
        let config = pts
            .iter()
            .map(|p| p.iter().map(|&x| q(x)).collect())
            .collect();
        Framework::new(g, d, config).unwrap()
    }

    #[test]
    fn single_edge_rigidity_row() {
        let fw = qfw(SimpleGraph::complete(2), 2, &[&[0, 0], &[1, 0]]);
        let r = rigidity_matrix(&fw);
        assert_eq!(r.to_dense(), vec![vec![q(-1), q(0), q(1), q(0)]]);
    }

    #[test]
    fn triangle_and_k4_ranks() {
        let fw = qfw(SimpleGraph::complete(3), 2, &[&[0, 0], &[1, 0], &[0, 1]]);
        let r = rigidity_matrix(&fw);
        assert_eq!((r.rows(), r.cols(), r.rank()), (3, 6, 3));
        let k4 = SimpleGraph::complete(4);
        let fw = random_framework(&k4, 2, 5, 0);
        let r = rigidity_matrix(&fw);
        assert_eq!((r.rows(), r.cols(), r.rank()), (6, 8, 5));
    }

    #[test]
    fn generic_rank_examples() {
        assert_eq!(generic_rank(&SimpleGraph::complete(4), 2, 1), 5);
        assert_eq!(generic_rank(&SimpleGraph::cycle(4), 2, 1), 4);
        let k45 = SimpleGraph::complete_bipartite(4, 5);
        assert_eq!(k45.m(), 20);
        assert_eq!(generic_rank(&k45, 3, 1), 20);
    }

    #[test]
    fn rigidity_examples() {
        let k4e = SimpleGraph::complete(4).without_edge(0, 1);
        assert!(is_rigid(&k4e, 2, 1));
        assert!(!is_rigid(&SimpleGraph::cycle(4), 2, 1));
        assert!(is_rigid(&SimpleGraph::complete_bipartite(5, 5), 3, 1));
        assert!(is_rigid(&SimpleGraph::complete(2), 3, 1));
        assert!(!is_rigid(&SimpleGraph::path(3), 3, 1));
    }

    #[test]
    fn redundancy_examples() {
        assert!(is_redundantly_rigid(&SimpleGraph::complete(4), 2, 1).holds);
        let k4e = SimpleGraph::complete(4).without_edge(0, 1);
        let r = is_redundantly_rigid(&k4e, 2, 1);
        assert!(!r.holds);
        assert_eq!(r.first_failure, Some((0, 2)));
        assert!(is_redundantly_rigid(&SimpleGraph::complete_bipartite(5, 5), 3, 1).holds);
    }

    #[test]
    fn redundancy_matches_per_edge_deletion() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..60 {
            let n = rng.gen_range(3..8);
            let mut g = SimpleGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.7) {
                        g.add_edge(u, v);
                    }
                }
            }
            for d in 2..=3 {
                let fast = is_redundantly_rigid(&g, d, 4);
                let slow = g
                    .edges()
                    .into_iter()
                    .find(|&(u, v)| !is_rigid(&g.without_edge(u, v), d, 4));
                assert_eq!(fast.first_failure, slow);
            }
        }
    }

    #[test]
    fn vertex_redundancy_examples() {
        assert!(is_vertex_redundantly_rigid(&SimpleGraph::complete(4), 2, 1).holds);
        let oct = SimpleGraph::complete_multipartite(&[2, 2, 2]);
        assert!(is_vertex_redundantly_rigid(&oct, 2, 1).holds);
        let r = is_vertex_redundantly_rigid(&SimpleGraph::complete_bipartite(5, 5), 3, 1);
        assert!(!r.holds);
        assert_eq!(r.first_failure, Some(0));
    }

    #[test]
    fn infinitesimal_examples() {
        let tri = qfw(SimpleGraph::complete(3), 2, &[&[0, 0], &[1, 0], &[0, 1]]);
        let rep = infinitesimal_rigidity_exact(&tri).unwrap();
        assert!(rep.rigid);
        assert_eq!(rep.kernel_dim, 3);

        let sq = qfw(
            SimpleGraph::cycle(4),
            2,
            &[&[0, 0], &[1, 0], &[1, 1], &[0, 1]],
        );
        let rep = infinitesimal_rigidity_exact(&sq).unwrap();
        assert!(!rep.rigid);
        assert_eq!(rep.kernel_dim, 4);
        let m = rep.motion.unwrap();
        let r = rigidity_matrix(&sq);
        assert!(r.mul_vec(&m.flat()).iter().all(|x| x.is_zero()));

        // collinear pair: 2 translations + 1 rotation, all realized
        let edge = qfw(SimpleGraph::complete(2), 2, &[&[0, 0], &[1, 0]]);
        let rep = infinitesimal_rigidity_exact(&edge).unwrap();
        assert_eq!(
            (rep.kernel_dim, rep.trivial_dim, rep.affine_span_dim),
            (3, 3, 1)
        );
        assert!(rep.rigid);

        let same = qfw(SimpleGraph::complete(2), 2, &[&[1, 1], &[1, 1]]);
        assert_eq!(
            infinitesimal_rigidity_exact(&same),
            Err(RigidityError::DegenerateConfiguration(2))
        );
    }

    #[test]
    fn stress_examples() {
        let s = equilibrium_stress_sample(&SimpleGraph::complete(4), 2, 9).unwrap();
        assert!(s.is_equilibrium());
        assert!(s.stress.iter().all(|w| !w.is_zero()));
        let k4e = SimpleGraph::complete(4).without_edge(0, 1);
        assert_eq!(
            equilibrium_stress_sample(&k4e, 2, 9),
            Err(RigidityError::NoStress)
        );
        let k5 = SimpleGraph::complete(5);
        let fw = random_framework(&k5, 3, 9, 0);
        let r = rigidity_matrix(&fw);
        assert_eq!(r.rows() - r.rank(), 1);
    }

    #[test]
    fn stress_matrix_kills_ones_and_coordinates() {
        let s = equilibrium_stress_sample(&SimpleGraph::complete(5), 2, 3).unwrap();
        let om = s.stress_matrix();
        for row in &om {
            assert!(row.iter().fold(Fp::zero(), |a, &b| a + b).is_zero());
            for k in 0..2 {
                let dot = row
                    .iter()
                    .zip(&s.framework.config)
                    .fold(Fp::zero(), |a, (&w, p)| a + w * p[k]);
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn ght_examples() {
        let out = ght_global_rigidity_test(&SimpleGraph::complete(4), 2, 1, 3).unwrap();
        assert_eq!(
            (out.verdict, out.max_rank, out.target),
            (GhtVerdict::ProbablyGloballyRigid, 1, 1)
        );
        let k4e = SimpleGraph::complete(4).without_edge(0, 1);
        let out = ght_global_rigidity_test(&k4e, 2, 1, 3).unwrap();
        assert_eq!((out.verdict, out.max_rank), (GhtVerdict::ProbablyNot, 0));
        let k55 = SimpleGraph::complete_bipartite(5, 5);
        let out = ght_global_rigidity_test(&k55, 3, 1, 3).unwrap();
        assert_eq!(out.verdict, GhtVerdict::ProbablyNot);
        assert!(out.max_rank < 6);
        let out = ght_global_rigidity_test(&SimpleGraph::cycle(5), 2, 1, 3).unwrap();
        assert_eq!(out.verdict, GhtVerdict::Inapplicable);
    }
}
