//! Exact linear algebra over a [`Field`]: dense matrices, incremental reduced
//! row echelon forms over sparse rows, kernels, and fraction-free ranks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::field::Field;
use super::poly::Poly;
use super::scalar::Scalar;

pub type SparseVec<F> = BTreeMap<usize, F>;

/// Adds `c * src` into `dst`, dropping entries that cancel.
pub fn axpy<F: Field>(dst: &mut SparseVec<F>, c: &F, src: &SparseVec<F>) {
    if c.is_zero() {
        return;
    }
    for (&j, x) in src {
        let delta = c.times(x);
        match dst.get_mut(&j) {
            Some(v) => {
                let nv = v.plus(&delta);
                if nv.is_zero() {
                    dst.remove(&j);
                } else {
                    *v = nv;
                }
            }
            None => {
                dst.insert(j, delta);
            }
        }
    }
}

pub fn scale_sparse<F: Field>(v: &SparseVec<F>, c: &F) -> SparseVec<F> {
    if c.is_zero() {
        return SparseVec::new();
    }
    v.iter().map(|(&j, x)| (j, x.times(c))).collect()
}

pub fn to_sparse<F: Field>(v: &[F]) -> SparseVec<F> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(j, x)| (j, x.clone()))
        .collect()
}

pub fn to_dense<F: Field>(v: &SparseVec<F>, n: usize) -> Vec<F> {
    let mut out = vec![F::zero(); n];
    for (&j, x) in v {
        out[j] = x.clone();
    }
    out
}

/// Reduced row echelon form of a row space, grown one vector at a time.
///
/// Pivots are the leftmost nonzero column of each row, so the result depends
/// only on the spanned subspace and the column order, never on insertion order.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    ncols: usize,
    rows: BTreeMap<usize, SparseVec<F>>,
}

impl<F: Field> Echelon<F> {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            rows: BTreeMap::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec<F>> {
        self.rows.values()
    }

    /// Columns without a pivot, in increasing order: coordinates on the
    /// complement of the row space.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.ncols)
            .filter(|c| !self.rows.contains_key(c))
            .collect()
    }

    /// Reduces `v` modulo the row space; the result has no pivot-column entries.
    pub fn reduce(&self, v: &SparseVec<F>) -> SparseVec<F> {
        let mut out = v.clone();
        let mut cursor = 0usize;
        loop {
            let next = out
                .range(cursor..)
                .map(|(&k, _)| k)
                .find(|k| self.rows.contains_key(k));
            let Some(k) = next else { break };
            let c = out.remove(&k).unwrap();
            let row = &self.rows[&k];
            let neg = c.negated();
            for (&j, x) in row.range(k + 1..) {
                let delta = neg.times(x);
                match out.get_mut(&j) {
                    Some(v) => {
                        let nv = v.plus(&delta);
                        if nv.is_zero() {
                            out.remove(&j);
                        } else {
                            *v = nv;
                        }
                    }
                    None => {
                        out.insert(j, delta);
                    }
                }
            }
            cursor = k + 1;
        }
        out
    }

    pub fn contains(&self, v: &SparseVec<F>) -> bool {
        self.reduce(v).is_empty()
    }

    /// Inserts `v`; returns `false` if it was already in the span.
    pub fn insert(&mut self, v: &SparseVec<F>) -> bool {
        let r = self.reduce(v);
        let Some((&p, lead)) = r.iter().next() else {
            return false;
        };
        let inv = lead.inverse().unwrap();
        let r = scale_sparse(&r, &inv);
        for row in self.rows.values_mut() {
            if let Some(c) = row.get(&p).cloned() {
                axpy(row, &c.negated(), &r);
            }
        }
        self.rows.insert(p, r);
        true
    }

    pub fn extend<'a, I>(&mut self, vs: I)
    where
        I: IntoIterator<Item = &'a SparseVec<F>>,
    {
        for v in vs {
            self.insert(v);
        }
    }

    /// Kernel basis of the linear map whose matrix rows span this echelon form:
    /// one vector per free column, with a 1 in that column.
    pub fn kernel_basis(&self) -> Vec<SparseVec<F>> {
        self.complement()
            .into_iter()
            .map(|f| {
                let mut v = SparseVec::new();
                v.insert(f, F::one());
                for (&p, row) in &self.rows {
                    if let Some(x) = row.get(&f) {
                        v.insert(p, x.negated());
                    }
                }
                v
            })
            .collect()
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Debug)]
pub struct Mat<F: Field> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_columns(cols: &[Vec<F>], nrows: usize) -> Self {
        let mut m = Mat::zeros(nrows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nrows);
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn diagonal(d: &[F]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: F) {
        self.data[i * self.cols + j] = x;
    }

    pub fn add_to(&mut self, i: usize, j: usize, x: &F) {
        let k = i * self.cols + j;
        self.data[k] = self.data[k].plus(x);
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn sparse_column(&self, j: usize) -> SparseVec<F> {
        (0..self.rows)
            .filter(|&i| !self.get(i, j).is_zero())
            .map(|i| (i, self.get(i, j).clone()))
            .collect()
    }

    pub fn sparse_rows(&self) -> Vec<SparseVec<F>> {
        (0..self.rows).map(|i| to_sparse(self.row(i))).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_to(i, j, &a.times(b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(F::zero(), |acc, (a, b)| acc.plus(&a.times(b)))
            })
            .collect()
    }

    pub fn plus(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.plus(b))
                .collect(),
        }
    }

    pub fn minus(&self, other: &Mat<F>) -> Mat<F> {
        self.plus(&other.scale(&F::from_int(-1)))
    }

    pub fn scale(&self, c: &F) -> Mat<F> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.times(c)).collect(),
        }
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Mat<G> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<G: Field, E>(&self, f: impl Fn(&F) -> Result<G, E>) -> Result<Mat<G>, E> {
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn entries(&self) -> &[F] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Kronecker product; row `(i, k)` of the result is `i * other.nrows() + k`.
    pub fn kron(&self, other: &Mat<F>) -> Mat<F> {
        let (r2, c2) = (other.rows, other.cols);
        let mut out = Mat::zeros(self.rows * r2, self.cols * c2);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * r2 + k, j * c2 + l, a.times(b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> Mat<F> {
        let mut out = Mat::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                out.set(i, jj, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Mat<F> {
        let mut out = Mat::zeros(rows.len(), self.cols);
        for (ii, &i) in rows.iter().enumerate() {
            for j in 0..self.cols {
                out.set(ii, j, self.get(i, j).clone());
            }
        }
        out
    }

    /// Row echelon form of the row space.
    pub fn row_echelon(&self) -> Echelon<F> {
        let mut e = Echelon::new(self.cols);
        for r in self.sparse_rows() {
            e.insert(&r);
        }
        e
    }

    /// Rank via Gauss-Jordan elimination.
    pub fn rank(&self) -> usize {
        self.row_echelon().rank()
    }

    /// Basis of `{v : self * v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<F>> {
        self.row_echelon()
            .kernel_basis()
            .iter()
            .map(|v| to_dense(v, self.cols))
            .collect()
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<Mat<F>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = self.hstack(&Mat::identity(n));
        let e = aug.row_echelon();
        if e.rank() < n || e.pivots().take(n).collect::<Vec<_>>() != (0..n).collect::<Vec<_>>() {
            return None;
        }
        let mut inv = Mat::zeros(n, n);
        for (i, row) in e.rows().enumerate().take(n) {
            for (&j, x) in row.range(n..) {
                inv.set(i, j - n, x.clone());
            }
        }
        Some(inv)
    }

    /// Solves `self * x = b`; `None` if inconsistent. Free variables are set to zero.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows);
        let bcol = Mat::from_columns(&[b.to_vec()], self.rows);
        let e = self.hstack(&bcol).row_echelon();
        if e.pivots().any(|p| p == self.cols) {
            return None;
        }
        let mut x = vec![F::zero(); self.cols];
        for row in e.rows() {
            let (&p, _) = row.iter().next().unwrap();
            x[p] = row.get(&self.cols).cloned().unwrap_or_else(F::zero);
        }
        Some(x)
    }
}

/// Integral domain underlying a field of fractions, used by fraction-free elimination.
pub trait FractionFree: Field {
    type Ring: Clone + PartialEq;
    /// Scales a row by a common denominator so all entries lie in the ring.
    fn clear_row(row: &[Self]) -> Vec<Self::Ring>;
    fn ring_is_zero(x: &Self::Ring) -> bool;
    fn ring_mul(a: &Self::Ring, b: &Self::Ring) -> Self::Ring;
    fn ring_sub(a: &Self::Ring, b: &Self::Ring) -> Self::Ring;
    fn ring_div_exact(a: &Self::Ring, b: &Self::Ring) -> Self::Ring;
    fn ring_size(x: &Self::Ring) -> usize;
    fn ring_one() -> Self::Ring;
}

impl FractionFree for Scalar {
    type Ring = Poly;

    fn clear_row(row: &[Self]) -> Vec<Poly> {
        let parts: Vec<(Poly, Poly)> = row.iter().map(|x| x.numer_denom()).collect();
        let mut l = Poly::one();
        for (_, d) in &parts {
            let g = l.gcd(d);
            l = l.mul(&d.div_exact(&g));
        }
        parts
            .into_iter()
            .map(|(n, d)| n.mul(&l.div_exact(&d)))
            .collect()
    }
    fn ring_is_zero(x: &Poly) -> bool {
        x.is_zero()
    }
    fn ring_mul(a: &Poly, b: &Poly) -> Poly {
        a.mul(b)
    }
    fn ring_sub(a: &Poly, b: &Poly) -> Poly {
        a.sub(b)
    }
    fn ring_div_exact(a: &Poly, b: &Poly) -> Poly {
        a.div_exact(b)
    }
    fn ring_size(x: &Poly) -> usize {
        x.degree().unwrap_or(0)
    }
    fn ring_one() -> Poly {
        Poly::one()
    }
}

impl FractionFree for BigRational {
    type Ring = BigInt;

    fn clear_row(row: &[Self]) -> Vec<BigInt> {
        let mut l = BigInt::one();
        for x in row {
            l = num_integer::Integer::lcm(&l, x.denom());
        }
        row.iter()
            .map(|x| (x * BigRational::from_integer(l.clone())).to_integer())
            .collect()
    }
    fn ring_is_zero(x: &BigInt) -> bool {
        x.is_zero()
    }
    fn ring_mul(a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn ring_sub(a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn ring_div_exact(a: &BigInt, b: &BigInt) -> BigInt {
        a / b
    }
    fn ring_size(x: &BigInt) -> usize {
        x.bits() as usize
    }
    fn ring_one() -> BigInt {
        BigInt::one()
    }
}

/// Rank by Bareiss fraction-free elimination: rows are cleared of
/// denominators once, and every later division is exact in the ring.
pub fn bareiss_rank<F: FractionFree>(m: &Mat<F>) -> usize {
    let mut a: Vec<Vec<F::Ring>> = (0..m.nrows()).map(|i| F::clear_row(m.row(i))).collect();
    let ncols = m.ncols();
    let mut prev = F::ring_one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == a.len() {
            break;
        }
        // smallest nonzero pivot in this column
        let piv = (rank..a.len())
            .filter(|&r| !F::ring_is_zero(&a[r][col]))
            .min_by_key(|&r| F::ring_size(&a[r][col]));
        let Some(p) = piv else { continue };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for r in rank + 1..a.len() {
            let factor = a[r][col].clone();
            for c in col + 1..ncols {
                let v = F::ring_sub(
                    &F::ring_mul(&pivot, &a[r][c]),
                    &F::ring_mul(&factor, &a[rank][c]),
                );
                a[r][c] = F::ring_div_exact(&v, &prev);
            }
            a[r][col] = F::ring_div_exact(&F::ring_sub(&F::ring_mul(&pivot, &a[r][col]), &F::ring_mul(&factor, &pivot)), &prev);
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// What [`solve_linear`] should return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    Kernel,
    Rank,
    Image,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solution<F: Field> {
    Kernel(Vec<Vec<F>>),
    Rank(usize),
    /// Basis of the column space, as reduced vectors.
    Image(Vec<Vec<F>>),
}

/// Kernel, rank, or image of `m` by exact elimination.
pub fn solve_linear<F: FractionFree>(m: &Mat<F>, mode: SolveMode) -> Solution<F> {
    match mode {
        SolveMode::Kernel => Solution::Kernel(m.kernel()),
        SolveMode::Rank => Solution::Rank(bareiss_rank(m)),
        SolveMode::Image => {
            let e = m.transpose().row_echelon();
            Solution::Image(e.rows().map(|r| to_dense(r, m.nrows())).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    #[test]
    fn kernel_of_row_vector() {
        let m = Mat::from_rows(vec![vec![Scalar::one(), s("-1")]]);
        match solve_linear(&m, SolveMode::Kernel) {
            Solution::Kernel(k) => {
                assert_eq!(k, vec![vec![Scalar::one(), Scalar::one()]]);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = Mat::from_rows(vec![vec![s("q"), s("1")], vec![s("q^2"), s("q")]]);
        assert_eq!(solve_linear(&m, SolveMode::Rank), Solution::Rank(1));
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let m: Mat<Scalar> = Mat::identity(3);
        assert_eq!(solve_linear(&m, SolveMode::Kernel), Solution::Kernel(vec![]));
    }

    #[test]
    fn inverse_and_solve() {
        let m = Mat::from_rows(vec![vec![s("q"), s("1")], vec![s("1"), s("q")]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(2));
        let x = m.solve(&[s("q+1"), s("q+1")]).unwrap();
        assert_eq!(x, vec![Scalar::one(), Scalar::one()]);
        let sing = Mat::from_rows(vec![vec![s("1"), s("1")], vec![s("1"), s("1")]]);
        assert!(sing.inverse().is_none());
        assert!(sing.solve(&[s("1"), s("2")]).is_none());
    }

    #[test]
    fn echelon_is_insertion_order_independent() {
        let a: SparseVec<Scalar> = to_sparse(&[s("1"), s("q"), s("0")]);
        let b: SparseVec<Scalar> = to_sparse(&[s("0"), s("1"), s("q^2")]);
        let mut e1 = Echelon::new(3);
        e1.insert(&a);
        e1.insert(&b);
        let mut e2 = Echelon::new(3);
        e2.insert(&b);
        e2.insert(&a);
        let r1: Vec<_> = e1.rows().cloned().collect();
        let r2: Vec<_> = e2.rows().cloned().collect();
        assert_eq!(r1, r2);
    }
}
