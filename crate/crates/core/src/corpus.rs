//! Small-graph corpora: exhaustive isomorphism-free generation and seeded random families.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::builders::one_extension;
use crate::graph::{Edge, Multigraph, SimpleGraph};
use crate::rigidity::is_vertex_redundantly_rigid;
use crate::sparsity::{is_3connected_redundant_2d, is_m_connected};

/// Isomorphism-invariant ordered partition of the vertices (colour refinement).
fn refined_cells(g: &SimpleGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut colour: Vec<usize> = vec![0; n];
    let mut classes = 1;
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut around: Vec<usize> = g.neighbors(v).iter().map(|&w| colour[w]).collect();
                around.sort_unstable();
                (colour[v], around)
            })
            .collect();
        let distinct: BTreeSet<_> = sigs.iter().cloned().collect();
        let index: BTreeMap<_, usize> = distinct
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, i))
            .collect();
        colour = sigs.iter().map(|s| index[s]).collect();
        if index.len() == classes {
            break;
        }
        classes = index.len();
    }
    let mut cells = vec![Vec::new(); classes];
    for (v, &c) in colour.iter().enumerate() {
        cells[c].push(v);
    }
    cells
}

fn for_each_ordering(cells: &[Vec<usize>], prefix: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    let Some((first, rest)) = cells.split_first() else {
        f(prefix);
        return;
    };
    let mut cell = first.clone();
    permute(&mut cell, 0, &mut |perm| {
        let len = prefix.len();
        prefix.extend_from_slice(perm);
        for_each_ordering(rest, prefix, f);
        prefix.truncate(len);
    });
}

fn permute(items: &mut [usize], k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

/// Canonical adjacency code; two graphs on at most 11 vertices are isomorphic iff their
/// codes are equal.
pub fn canonical_code(g: &SimpleGraph) -> u64 {
    let n = g.n();
    assert!(n <= 11, "canonical codes are limited to 11 vertices");
    let cells = refined_cells(g);
    let mut best = 0u64;
    for_each_ordering(&cells, &mut Vec::with_capacity(n), &mut |order| {
        let mut code = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                code = (code << 1) | u64::from(g.has_edge(order[i], order[j]));
            }
        }
        best = best.max(code);
    });
    best
}

/// One representative of every isomorphism class of graphs on `n` vertices.
pub fn nonisomorphic_graphs(n: usize) -> Vec<SimpleGraph> {
    let mut level = vec![SimpleGraph::new(0)];
    for k in 1..=n {
        let mut seen = BTreeMap::new();
        for g in &level {
            for mask in 0u32..(1 << (k - 1)) {
                let mut h = g.clone();
                let v = h.add_vertex();
                for w in 0..k - 1 {
                    if mask >> w & 1 == 1 {
                        h.add_edge(v, w);
                    }
                }
                seen.entry(canonical_code(&h)).or_insert(h);
            }
        }
        level = seen.into_values().collect();
    }
    level
}

/// Every graph on `n` vertices, labelled (`2^(n choose 2)` of them).
pub fn all_labelled_graphs(n: usize) -> impl Iterator<Item = SimpleGraph> {
    let pairs: Vec<Edge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        let mut g = SimpleGraph::new(n);
        for (b, &(u, v)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                g.add_edge(u, v);
            }
        }
        g
    })
}

fn pair_index(n: usize) -> Vec<Vec<usize>> {
    let mut idx = vec![vec![usize::MAX; n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            idx[i][j] = k;
            idx[j][i] = k;
            k += 1;
        }
    }
    idx
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut |p| out.push(p.to_vec()));
    out
}

/// One representative per isomorphism class of loopless multigraphs on exactly `n`
/// vertices with at most `max_copies` edges and every multiplicity at most `max_mult`.
pub fn nonisomorphic_multigraphs(n: usize, max_copies: usize, max_mult: usize) -> Vec<Multigraph> {
    let pairs: Vec<Edge> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let idx = pair_index(n);
    // for each permutation, where pair k lands
    let images: Vec<Vec<usize>> = all_permutations(n)
        .into_iter()
        .map(|p| pairs.iter().map(|&(u, v)| idx[p[u]][p[v]]).collect())
        .collect();
    let mut out = Vec::new();
    let mut mult = vec![0usize; pairs.len()];
    let mut image = vec![0usize; pairs.len()];
    let mut visit = |mult: &[usize]| {
        // keep the lexicographically largest vector of each orbit
        let canonical = images.iter().all(|map| {
            for (k, &t) in map.iter().enumerate() {
                image[t] = mult[k];
            }
            image.as_slice() <= mult
        });
        if canonical {
            let edges = pairs
                .iter()
                .zip(mult)
                .flat_map(|(&e, &c)| std::iter::repeat(e).take(c))
                .collect();
            out.push(Multigraph::new(n, edges).expect("pairs are in range"));
        }
    };
    fn rec(
        k: usize,
        left: usize,
        max_mult: usize,
        mult: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if k == mult.len() {
            visit(mult);
            return;
        }
        for c in 0..=left.min(max_mult) {
            mult[k] = c;
            rec(k + 1, left - c, max_mult, mult, visit);
        }
        mult[k] = 0;
    }
    rec(0, max_copies, max_mult, &mut mult, &mut visit);
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A vertex-redundantly rigid graph built from overlapping random `(d+2)`-cliques plus
/// random extra edges, retried until the property holds.
pub fn random_vertex_redundant<R: Rng>(
    d: usize,
    max_n: usize,
    rng: &mut R,
    seed: u64,
) -> SimpleGraph {
    let min_n = d + 3;
    loop {
        let n = rng.gen_range(min_n..=max_n.max(min_n));
        let mut g = SimpleGraph::new(n);
        let verts: Vec<usize> = (0..n).collect();
        let mut covered = vec![false; n];
        while covered.iter().any(|c| !c) {
            let mut clique: Vec<usize> = verts.choose_multiple(rng, d + 2).copied().collect();
            // make sure progress is made
            if let Some(v) = covered.iter().position(|c| !c) {
                if !clique.contains(&v) {
                    clique[0] = v;
                }
            }
            g.complete_on(&clique);
            for &v in &clique {
                covered[v] = true;
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(0.25) {
                    g.add_edge(u, v);
                }
            }
        }
        if is_vertex_redundantly_rigid(&g, d, seed).holds {
            return g;
        }
    }
}

/// `K_{d+2}` followed by `1..=max_len` random 1-extensions.
pub fn random_one_extension_sequence<R: Rng>(d: usize, max_len: usize, rng: &mut R) -> SimpleGraph {
    let mut g = SimpleGraph::complete(d + 2);
    let len = rng.gen_range(1..=max_len.max(1));
    for _ in 0..len {
        let edges = g.edges();
        let &(u, v) = edges.choose(rng).expect("complete start has edges");
        let others: Vec<usize> = (0..g.n()).filter(|&w| w != u && w != v).collect();
        let extra: Vec<usize> = others.choose_multiple(rng, d - 1).copied().collect();
        g = one_extension(&g, d, (u, v), &extra).expect("valid 1-extension");
    }
    g
}

/// Random dense graph on `4..=max_n` vertices, retried until it is M-connected.
pub fn random_m_connected<R: Rng>(max_n: usize, rng: &mut R) -> SimpleGraph {
    loop {
        let g = random_dense(max_n, rng);
        if g.n() >= 4 && is_m_connected(&g) {
            return g;
        }
    }
}

/// Random graph that is 3-connected and redundantly rigid in the plane.
pub fn random_3connected_redundant<R: Rng>(max_n: usize, rng: &mut R) -> SimpleGraph {
    loop {
        let g = random_dense(max_n, rng);
        if is_3connected_redundant_2d(&g) {
            return g;
        }
    }
}

fn random_dense<R: Rng>(max_n: usize, rng: &mut R) -> SimpleGraph {
    let n = rng.gen_range(4..=max_n.max(4));
    let p = rng.gen_range(0.35..0.8);
    let mut g = SimpleGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_counts_match_known_sequence() {
        // number of graphs on n unlabeled vertices
        let counts: Vec<usize> = (0..=6).map(|n| nonisomorphic_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34, 156]);
    }

    #[test]
    fn canonical_code_is_invariant() {
        let g =
            SimpleGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5)]).unwrap();
        let perm = [3, 5, 0, 1, 4, 2];
        let edges: Vec<Edge> = g.edges().iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let h = SimpleGraph::from_edges(6, &edges).unwrap();
        assert_eq!(canonical_code(&g), canonical_code(&h));
        assert_ne!(canonical_code(&g), canonical_code(&SimpleGraph::cycle(6)));
    }

    #[test]
    fn multigraph_counts() {
        // two vertices: multiplicity 0..=4
        assert_eq!(nonisomorphic_multigraphs(2, 4, 4).len(), 5);
        // three vertices, at most two copies: 0; one edge; a double edge; a path
        assert_eq!(nonisomorphic_multigraphs(3, 2, 2).len(), 4);
        // orbit count by brute force: collect the orbit maximum of every labelled vector
        let n = 4;
        let pairs: Vec<Edge> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let perms = all_permutations(n);
        let mut orbits = BTreeSet::new();
        for code in 0..4usize.pow(6) {
            let mult: Vec<usize> = (0..6).map(|k| code / 4usize.pow(k) % 4).collect();
            if mult.iter().sum::<usize>() > 3 {
                continue;
            }
            let best = perms
                .iter()
                .map(|p| {
                    let mut m = BTreeMap::new();
                    for (k, &(u, v)) in pairs.iter().enumerate() {
                        if mult[k] > 0 {
                            m.insert(crate::graph::ordered(p[u], p[v]), mult[k]);
                        }
                    }
                    m
                })
                .max()
                .unwrap();
            orbits.insert(best);
        }
        assert_eq!(nonisomorphic_multigraphs(4, 3, 3).len(), orbits.len());
    }

    #[test]
    fn random_families_have_their_property() {
        let mut r = rng(5);
        let g = random_vertex_redundant(2, 7, &mut r, 5);
        assert!(is_vertex_redundantly_rigid(&g, 2, 5).holds);
        let g = random_one_extension_sequence(3, 4, &mut r);
        assert!(g.n() >= 6);
        assert!(is_m_connected(&random_m_connected(8, &mut r)));
        assert!(is_3connected_redundant_2d(&random_3connected_redundant(
            8, &mut r
        )));
    }
}
