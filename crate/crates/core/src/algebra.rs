//! Exact linear algebra over a 61-bit Mersenne prime field and over the rationals.
//!
//! Every rank-based test in the crate goes through [`SparseMatrix::rank`]. Random
//! evaluations happen over [`Fp`]; exact configurations (basis-vector placements,
//! small certificates) use [`Rational`], where elimination is fraction-free.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

/// Modulus of [`Fp`]: the Mersenne prime 2^61 - 1.
pub const MODULUS: u64 = (1u64 << 61) - 1;

/// Fill ratio above which sparse elimination hands the remaining rows to dense elimination.
const DENSE_FALLBACK_FILL: f64 = 0.30;

/// Half-width of the integer box random rationals are drawn from.
const RATIONAL_BOX: i64 = 1 << 20;

pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("matrix has trivial nullspace (rank {rank} = cols {cols})")]
    TrivialNullspace { rank: usize, cols: usize },
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

/// A field the elimination routines can run over.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;
    /// Uniform field element for `Fp`; uniform integer from a large box for rationals.
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Rank of a dense row-major matrix. Overridden where a better elimination exists.
    fn dense_rank(rows: Vec<Vec<Self>>) -> usize {
        gaussian_rank(rows)
    }

    /// Rank of a sparse matrix.
    fn sparse_rank(m: &SparseMatrix<Self>) -> usize {
        sparse_rank_with_fallback(m)
    }
}

/// Residue modulo [`MODULUS`]. Always stored reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp(u64);

impl Fp {
    pub fn new(v: u64) -> Self {
        Fp(reduce128(v as u128))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn pow(self, mut e: u64) -> Fp {
        let mut base = self;
        let mut acc = Fp(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

#[inline]
fn reduce128(x: u128) -> u64 {
    // x = hi * 2^61 + lo  ==>  x = hi + lo (mod 2^61 - 1)
    let lo = (x as u64) & MODULUS;
    let hi = (x >> 61) as u64;
    let mut s = lo + (hi & MODULUS) + (hi >> 61);
    while s >= MODULUS {
        s -= MODULUS;
    }
    s
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        let mut s = self.0 + rhs.0;
        if s >= MODULUS {
            s -= MODULUS;
        }
        Fp(s)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        if self.0 >= rhs.0 {
            Fp(self.0 - rhs.0)
        } else {
            Fp(self.0 + MODULUS - rhs.0)
        }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        Fp(reduce128(self.0 as u128 * rhs.0 as u128))
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        if self.0 == 0 {
            self
        } else {
            Fp(MODULUS - self.0)
        }
    }
}

impl Field for Fp {
    fn zero() -> Self {
        Fp(0)
    }
    fn one() -> Self {
        Fp(1)
    }
    fn from_i64(v: i64) -> Self {
        if v >= 0 {
            Fp::new(v as u64)
        } else {
            -Fp::new(v.unsigned_abs())
        }
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(MODULUS - 2))
        }
    }
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Fp(rng.gen_range(0..MODULUS))
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_i64(rng.gen_range(-RATIONAL_BOX..=RATIONAL_BOX))
    }

    fn dense_rank(rows: Vec<Vec<Self>>) -> usize {
        bareiss_rank(rational_rows_to_integer(rows))
    }

    fn sparse_rank(m: &SparseMatrix<Self>) -> usize {
        Self::dense_rank(m.to_dense())
    }
}

/// Sparse matrix in sorted triplet form.
///
/// Entries are kept sorted by `(row, col)` with no duplicates and no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<F> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, F)>,
}

impl<F: Field> SparseMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    /// Builds a matrix from triplets; duplicate positions are summed and zeros dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, F)>,
    ) -> Result<Self, AlgebraError> {
        let mut acc: Vec<(usize, usize, F)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(AlgebraError::OutOfBounds {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            acc.push((r, c, v));
        }
        acc.sort_by_key(|a| (a.0, a.1));
        let mut entries: Vec<(usize, usize, F)> = Vec::with_capacity(acc.len());
        for (r, c, v) in acc {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => {
                    last.2 = last.2.clone() + v;
                }
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| !e.2.is_zero());
        Ok(SparseMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_dense(rows: &[Vec<F>], cols: usize) -> Self {
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(move |(c, v)| (r, c, v.clone()))
            })
            .collect();
        SparseMatrix {
            rows: rows.len(),
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, F)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> F {
        self.entries
            .binary_search_by_key(&(row, col), |e| (e.0, e.1))
            .map(|i| self.entries[i].2.clone())
            .unwrap_or_else(|_| F::zero())
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|(r, c, v)| (*c, *r, v.clone()))
            .collect();
        entries.sort_by_key(|a| (a.0, a.1));
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<F>> {
        let mut out = vec![vec![F::zero(); self.cols]; self.rows];
        for (r, c, v) in &self.entries {
            out[*r][*c] = v.clone();
        }
        out
    }

    /// Sparse rows: for each row, its `(col, value)` pairs in column order.
    pub fn row_lists(&self) -> Vec<Vec<(usize, F)>> {
        let mut out = vec![Vec::new(); self.rows];
        for (r, c, v) in &self.entries {
            out[*r].push((*c, v.clone()));
        }
        out
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let lists = self.row_lists();
        let entries = keep
            .iter()
            .enumerate()
            .flat_map(|(new_r, &old_r)| {
                lists[old_r]
                    .iter()
                    .map(move |(c, v)| (new_r, *c, v.clone()))
            })
            .collect();
        SparseMatrix {
            rows: keep.len(),
            cols: self.cols,
            entries,
        }
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.rows];
        for (r, c, x) in &self.entries {
            out[*r] = out[*r].clone() + x.clone() * v[*c].clone();
        }
        out
    }

    /// Exact rank over `F`.
    pub fn rank(&self) -> usize {
        F::sparse_rank(self)
    }

    /// Basis of the right nullspace, from the reduced row echelon form.
    pub fn nullspace_basis(&self) -> Vec<Vec<F>> {
        let (rref, pivots) = rref(self.to_dense(), self.cols);
        let pivot_of_col: HashMap<usize, usize> =
            pivots.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivot_of_col.contains_key(c)) {
            let mut v = vec![F::zero(); self.cols];
            v[free] = F::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rref[i][free].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Random nonzero vector of the right nullspace: a combination of a nullspace basis
    /// with independent coefficients from [`Field::random`].
    pub fn nullspace_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<F>, AlgebraError> {
        let basis = self.nullspace_basis();
        if basis.is_empty() {
            return Err(AlgebraError::TrivialNullspace {
                rank: self.cols,
                cols: self.cols,
            });
        }
        loop {
            let mut v = vec![F::zero(); self.cols];
            for b in &basis {
                let c = F::random(rng);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = vi.clone() + c.clone() * bi.clone();
                }
            }
            if v.iter().any(|x| !x.is_zero()) {
                return Ok(v);
            }
        }
    }
}

/// Gaussian elimination rank over any field.
pub fn gaussian_rank<F: Field>(mut rows: Vec<Vec<F>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].inv().expect("nonzero pivot");
        let pivot_row: Vec<F> = rows[rank].iter().map(|x| x.clone() * inv.clone()).collect();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for c in col..ncols {
                if !pivot_row[c].is_zero() {
                    rows[r][c] = rows[r][c].clone() - f.clone() * pivot_row[c].clone();
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn rref<F: Field>(mut rows: Vec<Vec<F>>, ncols: usize) -> (Vec<Vec<F>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].inv().expect("nonzero pivot");
        for c in 0..ncols {
            rows[rank][c] = rows[rank][c].clone() * inv.clone();
        }
        for r in 0..rows.len() {
            if r == rank || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for c in 0..ncols {
                if !rows[rank][c].is_zero() {
                    rows[r][c] = rows[r][c].clone() - f.clone() * rows[rank][c].clone();
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    (rows, pivots)
}

/// Row-echelon elimination on sparse rows, switching to dense elimination when the
/// stored pivot rows exceed [`DENSE_FALLBACK_FILL`] of a dense block.
fn sparse_rank_with_fallback<F: Field>(m: &SparseMatrix<F>) -> usize {
    let cols = m.cols;
    let mut pending = m.row_lists().into_iter();
    let mut pivots: HashMap<usize, Vec<(usize, F)>> = HashMap::new();
    let mut stored = 0usize;

    while let Some(mut row) = pending.next() {
        loop {
            let Some((lead, lead_val)) = row.first().cloned() else {
                break;
            };
            match pivots.get(&lead) {
                Some(pivot) => row = axpy_sparse(&row, &(-lead_val), pivot),
                None => {
                    let inv = lead_val.inv().expect("nonzero lead");
                    let normalized: Vec<(usize, F)> =
                        row.into_iter().map(|(c, v)| (c, v * inv.clone())).collect();
                    stored += normalized.len();
                    pivots.insert(lead, normalized);
                    break;
                }
            }
        }
        if cols > 0 && stored as f64 > DENSE_FALLBACK_FILL * (pivots.len() * cols) as f64 {
            let mut dense: Vec<Vec<F>> = pivots
                .values()
                .chain(pending.as_slice().iter())
                .map(|r| {
                    let mut d = vec![F::zero(); cols];
                    for (c, v) in r {
                        d[*c] = v.clone();
                    }
                    d
                })
                .collect();
            dense.retain(|r| r.iter().any(|x| !x.is_zero()));
            return gaussian_rank(dense);
        }
    }
    pivots.len()
}

/// `row + scale * pivot`, dropping cancellations.
fn axpy_sparse<F: Field>(row: &[(usize, F)], scale: &F, pivot: &[(usize, F)]) -> Vec<(usize, F)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j >= pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_piv = i >= row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_piv {
            out.push((pivot[j].0, scale.clone() * pivot[j].1.clone()));
            j += 1;
        } else {
            let v = row[i].1.clone() + scale.clone() * pivot[j].1.clone();
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn rational_rows_to_integer(rows: Vec<Vec<BigRational>>) -> Vec<Vec<BigInt>> {
    rows.into_iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.into_iter()
                .map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer())
                .collect()
        })
        .collect()
}

/// Fraction-free (Bareiss) elimination rank of an integer matrix.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for r in rank + 1..nrows {
            let factor = a[r][col].clone();
            for c in col + 1..ncols {
                let v = &pivot * &a[r][c] - &factor * &a[rank][c];
                // Exact by Sylvester's identity.
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn fp_arithmetic_is_modular() {
        let a = Fp::new(MODULUS - 1);
        assert_eq!(a + Fp::new(1), Fp::zero());
        assert_eq!(Fp::from_i64(-1), a);
        let x = Fp::new(123_456_789_012_345);
        assert_eq!(x * x.inv().unwrap(), Fp::one());
        assert_eq!(Fp::zero().inv(), None);
        assert_eq!(Fp::new(3) - Fp::new(5), Fp::from_i64(-2));
    }

    #[test]
    fn identity_and_zero_rank() {
        let id = SparseMatrix::from_triplets(2, 2, [(0, 0, Fp::one()), (1, 1, Fp::one())]).unwrap();
        assert_eq!(id.rank(), 2);
        let z: SparseMatrix<Fp> = SparseMatrix::zeros(3, 3);
        assert_eq!(z.rank(), 0);
        let zq: SparseMatrix<Rational> = SparseMatrix::zeros(3, 3);
        assert_eq!(zq.rank(), 0);
    }

    #[test]
    fn triplets_merge_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(
            1,
            2,
            [
                (0, 0, Fp::one()),
                (0, 0, Fp::from_i64(-1)),
                (0, 1, Fp::new(2)),
            ],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), Fp::new(2));
        assert!(SparseMatrix::from_triplets(1, 1, [(1, 0, Fp::one())]).is_err());
    }

    #[test]
    fn triangle_rigidity_matrix_rank_by_hand() {
        // points (0,0),(1,0),(0,1); rows for edges 01, 02, 12.
        let rows = vec![
            vec![q(-1), q(0), q(1), q(0), q(0), q(0)],
            vec![q(0), q(-1), q(0), q(0), q(0), q(1)],
            vec![q(0), q(0), q(1), q(-1), q(-1), q(1)],
        ];
        let m = SparseMatrix::from_dense(&rows, 6);
        assert_eq!(m.rank(), 3);
        assert_eq!(gaussian_rank(rows), 3);
    }

    #[test]
    fn nullspace_of_row_one_one() {
        let m = SparseMatrix::from_dense(&[vec![q(1), q(1)]], 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = m.nullspace_sample(&mut rng).unwrap();
        assert!(!Field::is_zero(&v[0]));
        assert_eq!(v[0].clone() + v[1].clone(), q(0));
        let z: SparseMatrix<Fp> = SparseMatrix::zeros(1, 2);
        let w = z.nullspace_sample(&mut rng).unwrap();
        assert!(w.iter().any(|x| !x.is_zero()));
        let id = SparseMatrix::from_dense(&[vec![q(1), q(0)], vec![q(0), q(1)]], 2);
        assert!(matches!(
            id.nullspace_sample(&mut rng),
            Err(AlgebraError::TrivialNullspace { .. })
        ));
    }

    #[test]
    fn bareiss_matches_gaussian_on_small_integer_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r = rng.gen_range(1..6);
            let c = rng.gen_range(1..6);
            let rank_target = rng.gen_range(0..=r.min(c));
            // product of random r x k and k x c integer matrices has rank <= k
            let left: Vec<Vec<i64>> = (0..r)
                .map(|_| (0..rank_target).map(|_| rng.gen_range(-5..=5)).collect())
                .collect();
            let right: Vec<Vec<i64>> = (0..rank_target)
                .map(|_| (0..c).map(|_| rng.gen_range(-5..=5)).collect())
                .collect();
            let prod: Vec<Vec<i64>> = (0..r)
                .map(|i| {
                    (0..c)
                        .map(|j| (0..rank_target).map(|k| left[i][k] * right[k][j]).sum())
                        .collect()
                })
                .collect();
            let qrows: Vec<Vec<Rational>> = prod
                .iter()
                .map(|row| row.iter().map(|&x| q(x)).collect())
                .collect();
            let frows: Vec<Vec<Fp>> = prod
                .iter()
                .map(|row| row.iter().map(|&x| Fp::from_i64(x)).collect())
                .collect();
            let bq = Rational::dense_rank(qrows.clone());
            assert_eq!(bq, gaussian_rank(qrows));
            assert_eq!(bq, gaussian_rank(frows));
        }
    }

    #[test]
    fn sparse_path_agrees_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let rows = rng.gen_range(1..12);
            let cols = rng.gen_range(1..12);
            let trips: Vec<_> = (0..rng.gen_range(0..20))
                .map(|_| {
                    (
                        rng.gen_range(0..rows),
                        rng.gen_range(0..cols),
                        Fp::from_i64(rng.gen_range(-3..=3)),
                    )
                })
                .collect();
            let m = SparseMatrix::from_triplets(rows, cols, trips).unwrap();
            assert_eq!(m.rank(), gaussian_rank(m.to_dense()));
        }
    }
}
