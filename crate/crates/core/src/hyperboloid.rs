//! The quantum hyperboloid: the quotient of the tensor algebra on the spin-1
//! module `V` by the relations `v_0 = c`, `v_1 = ħ v` and their `F`-descendants,
//! truncated at a filtered degree.
//!
//! Elements of the tensor algebra are sparse maps from words in the letters
//! `0, 1, 2` (the weight basis `e_0, e_1, e_2` of `V`) to coefficients.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::qfield::linalg::{to_dense, SparseVec};
use crate::qfield::{Echelon, Field, Mat, QCtx};
use crate::uqsl2::{hom_basis, irrep, tensor, EquivariantMap, Generator, Spin};

pub type Word = Vec<u8>;
pub type Tensor<F> = BTreeMap<Word, F>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HyperboloidError {
    #[error("relation vectors are linearly dependent (rank {0} of 4)")]
    DegenerateRelations(usize),
    #[error("quotient has dimension {got}, expected {expected}")]
    FlatnessViolation { expected: usize, got: usize },
    #[error("product of degrees {0} and {1} exceeds the truncation degree {2}")]
    TruncationOverflow(usize, usize, usize),
    #[error("truncation degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QHParams {
    #[serde(with = "crate::qfield::rational_string")]
    pub c: BigRational,
    #[serde(with = "crate::qfield::rational_string")]
    pub hbar: BigRational,
    pub degree: usize,
}

impl QHParams {
    pub fn new(c: BigRational, hbar: BigRational, degree: usize) -> Self {
        QHParams { c, hbar, degree }
    }

    pub fn from_ints(c: i64, hbar: i64, degree: usize) -> Self {
        QHParams::new(
            BigRational::from_integer(c.into()),
            BigRational::from_integer(hbar.into()),
            degree,
        )
    }
}

pub fn letter_weight(a: u8) -> i64 {
    2 - 2 * a as i64
}

pub fn word_weight(w: &[u8]) -> i64 {
    w.iter().map(|&a| letter_weight(a)).sum()
}

fn add_term<F: Field>(t: &mut Tensor<F>, w: Word, x: F) {
    if x.is_zero() {
        return;
    }
    match t.get_mut(&w) {
        Some(v) => {
            let nv = v.plus(&x);
            if nv.is_zero() {
                t.remove(&w);
            } else {
                *v = nv;
            }
        }
        None => {
            t.insert(w, x);
        }
    }
}

pub fn tensor_add<F: Field>(a: &Tensor<F>, b: &Tensor<F>, scale: &F) -> Tensor<F> {
    let mut out = a.clone();
    for (w, x) in b {
        add_term(&mut out, w.clone(), x.times(scale));
    }
    out
}

pub fn tensor_scale<F: Field>(a: &Tensor<F>, s: &F) -> Tensor<F> {
    if s.is_zero() {
        return Tensor::new();
    }
    a.iter().map(|(w, x)| (w.clone(), x.times(s))).collect()
}

/// Concatenation product in the tensor algebra.
pub fn concat<F: Field>(a: &Tensor<F>, b: &Tensor<F>) -> Tensor<F> {
    let mut out = Tensor::new();
    for (wa, xa) in a {
        for (wb, xb) in b {
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            add_term(&mut out, w, xa.times(xb));
        }
    }
    out
}

pub fn word<F: Field>(w: &[u8]) -> Tensor<F> {
    let mut t = Tensor::new();
    t.insert(w.to_vec(), F::one());
    t
}

/// Action of a generator on tensors through the iterated coproduct: `E` at a
/// position is preceded by `K` on every earlier letter, `F` is followed by
/// `K⁻¹` on every later letter.
pub fn act_tensor<F: Field>(ctx: &QCtx<F>, g: Generator, t: &Tensor<F>) -> Tensor<F> {
    let mut out = Tensor::new();
    for (w, x) in t {
        match g {
            Generator::K => add_term(&mut out, w.clone(), x.times(&ctx.qpow(word_weight(w)))),
            Generator::E => {
                let mut before = 0i64;
                for p in 0..w.len() {
                    let a = w[p];
                    if a > 0 {
                        let mut nw = w.clone();
                        nw[p] = a - 1;
                        let c = ctx.qint(3 - a as i64).times(&ctx.qpow(before));
                        add_term(&mut out, nw, x.times(&c));
                    }
                    before += letter_weight(a);
                }
            }
            Generator::F => {
                let mut after: i64 = word_weight(w);
                for p in 0..w.len() {
                    let a = w[p];
                    after -= letter_weight(a);
                    if a < 2 {
                        let mut nw = w.clone();
                        nw[p] = a + 1;
                        let c = ctx.qint(a as i64 + 1).times(&ctx.qpow(-after));
                        add_term(&mut out, nw, x.times(&c));
                    }
                }
            }
        }
    }
    out
}

/// Converts a vector in `V^{⊗n}` (index `Σ a_p 3^{n-1-p}`) to a tensor.
pub fn tensor_from_vec<F: Field>(v: &[F], n: usize) -> Tensor<F> {
    let mut t = Tensor::new();
    for (idx, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let mut w = vec![0u8; n];
        let mut r = idx;
        for p in (0..n).rev() {
            w[p] = (r % 3) as u8;
            r /= 3;
        }
        t.insert(w, x.clone());
    }
    t
}

/// Normalized highest-weight vectors `v_0, v_1, v_2` of the spin 0, 1, 2
/// components of `V ⊗ V`.
pub fn quadratic_highest_weights<F: Field>(ctx: &QCtx<F>) -> [Tensor<F>; 3] {
    let v = irrep(Spin(2), ctx);
    let vv = tensor(&v, &v);
    let hw = |w: i64| tensor_from_vec(&vv.highest_weight_vectors(w)[0], 2);
    [hw(0), hw(2), hw(4)]
}

/// The four defining relations `v_0 - c` and `F^k (v_1 - ħ e_0)`, `k = 0, 1, 2`.
pub fn relation_space<F: Field>(
    params: &QHParams,
    ctx: &QCtx<F>,
) -> Result<Vec<Tensor<F>>, HyperboloidError> {
    let [v0, v1, _] = quadratic_highest_weights(ctx);
    let mut r0 = v0;
    add_term(&mut r0, Vec::new(), F::from_rational(&params.c).negated());
    let mut r1 = v1;
    add_term(&mut r1, vec![0], F::from_rational(&params.hbar).negated());
    let r2 = act_tensor(ctx, Generator::F, &r1);
    let r3 = act_tensor(ctx, Generator::F, &r2);
    let rels = vec![r0, r1, r2, r3];
    // independence: distinct weights except nothing, so check each is nonzero
    // and compare within the shared ambient basis
    let words: Vec<Word> = {
        let mut all: Vec<Word> = rels.iter().flat_map(|r| r.keys().cloned()).collect();
        all.sort();
        all.dedup();
        all
    };
    let rows: Vec<Vec<F>> = rels
        .iter()
        .map(|r| {
            words
                .iter()
                .map(|w| r.get(w).cloned().unwrap_or_else(F::zero))
                .collect()
        })
        .collect();
    let rank = Mat::from_rows(rows).rank();
    if rank != 4 {
        return Err(HyperboloidError::DegenerateRelations(rank));
    }
    Ok(rels)
}

/// All words of length at most `n`, grouped by weight; within a weight,
/// longer words come first and words of equal length are in lex order.
#[derive(Clone, Debug)]
pub struct WordSpace {
    degree: usize,
    blocks: BTreeMap<i64, Vec<Word>>,
    index: HashMap<Word, (i64, usize)>,
}

impl WordSpace {
    pub fn new(degree: usize) -> Self {
        let mut all: Vec<Word> = vec![Vec::new()];
        let mut layer: Vec<Word> = vec![Vec::new()];
        for _ in 0..degree {
            let mut next = Vec::new();
            for w in &layer {
                for a in 0..3u8 {
                    let mut nw = w.clone();
                    nw.push(a);
                    next.push(nw);
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let mut blocks: BTreeMap<i64, Vec<Word>> = BTreeMap::new();
        for w in all {
            blocks.entry(word_weight(&w)).or_default().push(w);
        }
        let mut index = HashMap::new();
        for (&wt, ws) in &blocks {
            for (i, w) in ws.iter().enumerate() {
                index.insert(w.clone(), (wt, i));
            }
        }
        WordSpace {
            degree,
            blocks,
            index,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn block(&self, weight: i64) -> &[Word] {
        self.blocks.get(&weight).map_or(&[], |v| v.as_slice())
    }

    pub fn weights(&self) -> impl Iterator<Item = i64> + '_ {
        self.blocks.keys().copied()
    }

    pub fn locate(&self, w: &[u8]) -> Option<(i64, usize)> {
        self.index.get(w).copied()
    }

    /// Splits a tensor into per-weight sparse vectors.
    pub fn split<F: Field>(&self, t: &Tensor<F>) -> BTreeMap<i64, SparseVec<F>> {
        let mut out: BTreeMap<i64, SparseVec<F>> = BTreeMap::new();
        for (w, x) in t {
            let (wt, i) = self.locate(w).expect("word beyond truncation");
            out.entry(wt).or_default().insert(i, x.clone());
        }
        out
    }
}

/// Index of the canonical basis element `(spin i, position k)`.
pub fn basis_index(i: usize, k: usize) -> usize {
    i * i + k
}

/// Inverse of [`basis_index`].
pub fn basis_label(idx: usize) -> (usize, usize) {
    let i = (idx as f64).sqrt() as usize;
    let i = if (i + 1) * (i + 1) <= idx { i + 1 } else { i };
    let i = if i * i > idx { i - 1 } else { i };
    (i, idx - i * i)
}

pub fn basis_weight(idx: usize) -> i64 {
    let (i, k) = basis_label(idx);
    2 * i as i64 - 2 * k as i64
}

/// Dimension of the span of canonical components of spin at most `n`.
pub fn canonical_dim(n: usize) -> usize {
    (n + 1) * (n + 1)
}

/// Representative `F^k (e_0^{⊗i}) / [k]!` of a canonical basis element.
pub fn canonical_representative<F: Field>(ctx: &QCtx<F>, i: usize, k: usize) -> Tensor<F> {
    let mut t = word::<F>(&vec![0u8; i]);
    for step in 1..=k {
        t = act_tensor(ctx, Generator::F, &t);
        t = tensor_scale(&t, &ctx.qint(step as i64).inverse().unwrap());
    }
    t
}

/// Relation span reduced weight block by weight block.
pub struct RelationSpan<F: Field> {
    space: WordSpace,
    echelons: BTreeMap<i64, Echelon<F>>,
}

impl<F: Field> RelationSpan<F> {
    /// Span of `x r y` over relations `r` and words with `|x| + |y| <= N - 2`.
    pub fn build(params: &QHParams, ctx: &QCtx<F>) -> Result<Self, HyperboloidError> {
        if params.degree < 2 {
            return Err(HyperboloidError::DegreeTooSmall(params.degree));
        }
        let rels = relation_space(params, ctx)?;
        let space = WordSpace::new(params.degree);
        let short = WordSpace::new(params.degree - 2);
        let mut short_words: Vec<Word> = short.index.keys().cloned().collect();
        short_words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let mut rows: BTreeMap<i64, Vec<SparseVec<F>>> = BTreeMap::new();
        for x in &short_words {
            for y in &short_words {
                if x.len() + y.len() + 2 > params.degree {
                    continue;
                }
                for r in &rels {
                    let t = concat(&concat(&word(x), r), &word(y));
                    for (wt, v) in space.split(&t) {
                        rows.entry(wt).or_default().push(v);
                    }
                }
            }
        }
        let echelons: BTreeMap<i64, Echelon<F>> = space
            .blocks
            .par_iter()
            .map(|(&wt, ws)| {
                let mut e = Echelon::new(ws.len());
                if let Some(rs) = rows.get(&wt) {
                    for r in rs {
                        e.insert(r);
                    }
                }
                (wt, e)
            })
            .collect();
        Ok(RelationSpan { space, echelons })
    }

    pub fn space(&self) -> &WordSpace {
        &self.space
    }

    pub fn rank(&self) -> usize {
        self.echelons.values().map(|e| e.rank()).sum()
    }

    pub fn quotient_dim(&self) -> usize {
        self.space.dim() - self.rank()
    }

    /// `dim T_{≤n} / (span ∩ T_{≤n})` for `n = 0..=N`. Rows whose pivot is a
    /// word of length at most `n` span the part of the relation span
    /// supported on such words, since longer words come first.
    pub fn quotient_dims_by_degree(&self) -> Vec<usize> {
        (0..=self.space.degree)
            .map(|n| {
                let mut dim = 0;
                for (wt, ws) in &self.space.blocks {
                    let e = &self.echelons[wt];
                    let short = ws.iter().filter(|w| w.len() <= n).count();
                    let pivots = e.pivots().filter(|&p| ws[p].len() <= n).count();
                    dim += short - pivots;
                }
                dim
            })
            .collect()
    }

    pub fn reduce(&self, t: &Tensor<F>) -> BTreeMap<i64, SparseVec<F>> {
        self.space
            .split(t)
            .into_iter()
            .map(|(wt, v)| (wt, self.echelons[&wt].reduce(&v)))
            .filter(|(_, v)| !v.is_empty())
            .collect()
    }

    pub fn contains(&self, t: &Tensor<F>) -> bool {
        self.reduce(t).is_empty()
    }
}

/// Element of the truncated algebra in canonical coordinates: entry
/// [`basis_index`]`(i, k)` is the coefficient of the `k`-th basis vector of
/// the spin-`i` component.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalElement<F: Field> {
    pub coeffs: Vec<F>,
}

impl<F: Field> CanonicalElement<F> {
    pub fn zero(degree: usize) -> Self {
        CanonicalElement {
            coeffs: vec![F::zero(); canonical_dim(degree)],
        }
    }

    pub fn basis(degree: usize, idx: usize) -> Self {
        let mut e = Self::zero(degree);
        e.coeffs[idx] = F::one();
        e
    }

    pub fn one(degree: usize) -> Self {
        Self::basis(degree, 0)
    }

    pub fn component(&self, i: usize) -> &[F] {
        &self.coeffs[i * i..(i + 1) * (i + 1)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }

    /// Highest spin with a nonzero component.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|x| !x.is_zero()).map(|i| basis_label(i).0)
    }

    pub fn plus(&self, other: &Self) -> Self {
        CanonicalElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.plus(b)).collect(),
        }
    }

    pub fn scale(&self, s: &F) -> Self {
        CanonicalElement {
            coeffs: self.coeffs.iter().map(|a| a.times(s)).collect(),
        }
    }

    pub fn to_sparse(&self) -> SparseVec<F> {
        crate::qfield::linalg::to_sparse(&self.coeffs)
    }

    pub fn from_sparse(degree: usize, v: &SparseVec<F>) -> Self {
        CanonicalElement {
            coeffs: to_dense(v, canonical_dim(degree)),
        }
    }
}

/// The algebra truncated at spin `degree` as a module: the direct sum of
/// the irreducibles of spins `0..=degree`, in canonical coordinates.
pub fn algebra_rep<F: Field>(degree: usize, ctx: &QCtx<F>) -> crate::uqsl2::Rep<F> {
    let reps: Vec<_> = (0..=degree as u32).map(|i| irrep(Spin::integer(i), ctx)).collect();
    crate::uqsl2::direct_sum(&reps)
}

/// Action of `E`, `F`, `K` on canonical coordinates, component by component.
pub fn act_canonical<F: Field>(ctx: &QCtx<F>, g: Generator, a: &CanonicalElement<F>) -> CanonicalElement<F> {
    let degree = basis_label(a.coeffs.len() - 1).0;
    let mut out = CanonicalElement::zero(degree);
    for i in 0..=degree {
        let comp = a.component(i);
        if comp.iter().all(|x| x.is_zero()) {
            continue;
        }
        let r = irrep(Spin::integer(i as u32), ctx);
        let image = r.act(g, comp);
        out.coeffs[i * i..(i + 1) * (i + 1)].clone_from_slice(&image);
    }
    out
}

/// Structure constants of the truncated algebra on canonical basis elements.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTable<F: Field> {
    pub params: QHParams,
    entries: BTreeMap<(usize, usize), SparseVec<F>>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    params: QHParams,
    entries: Vec<(usize, usize, Vec<(usize, String)>)>,
}

impl<F: Field> ProductTable<F> {
    pub fn from_entries(params: QHParams, entries: BTreeMap<(usize, usize), SparseVec<F>>) -> Self {
        ProductTable { params, entries }
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), SparseVec<F>> {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.params.degree
    }

    pub fn dim(&self) -> usize {
        canonical_dim(self.params.degree)
    }

    /// Product of two canonical basis elements.
    pub fn basis_product(&self, a: usize, b: usize) -> Result<&SparseVec<F>, HyperboloidError> {
        self.entries.get(&(a, b)).ok_or_else(|| {
            HyperboloidError::TruncationOverflow(basis_label(a).0, basis_label(b).0, self.degree())
        })
    }

    pub fn multiply(
        &self,
        a: &CanonicalElement<F>,
        b: &CanonicalElement<F>,
    ) -> Result<CanonicalElement<F>, HyperboloidError> {
        let da = a.degree().unwrap_or(0);
        let db = b.degree().unwrap_or(0);
        if da + db > self.degree() {
            return Err(HyperboloidError::TruncationOverflow(da, db, self.degree()));
        }
        let mut acc: SparseVec<F> = SparseVec::new();
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                crate::qfield::linalg::axpy(&mut acc, &x.times(y), self.basis_product(i, j)?);
            }
        }
        Ok(CanonicalElement::from_sparse(self.degree(), &acc))
    }

    /// Matrix of left multiplication by `a`, from canonical coordinates of
    /// spin at most `from` to canonical coordinates of the full truncation.
    pub fn left_mul_matrix(&self, a: &CanonicalElement<F>, from: usize) -> Mat<F> {
        let n = canonical_dim(from);
        let mut m = Mat::zeros(self.dim(), n);
        for j in 0..n {
            let prod = self
                .multiply(a, &CanonicalElement::basis(self.degree(), j))
                .expect("left multiplication within truncation");
            for (i, x) in prod.coeffs.iter().enumerate() {
                if !x.is_zero() {
                    m.set(i, j, x.clone());
                }
            }
        }
        m
    }

    /// Stable digest of the table contents.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_json().as_bytes());
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> String {
        let file = TableFile {
            params: self.params.clone(),
            entries: self
                .entries
                .iter()
                .map(|(&(a, b), v)| {
                    (a, b, v.iter().map(|(&k, x)| (k, x.canonical_string())).collect())
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Option<Self> {
        let file: TableFile = serde_json::from_str(s).ok()?;
        let mut entries = BTreeMap::new();
        for (a, b, v) in file.entries {
            let mut sv = SparseVec::new();
            for (k, x) in v {
                sv.insert(k, F::parse_canonical(&x)?);
            }
            entries.insert((a, b), sv);
        }
        Some(ProductTable {
            params: file.params,
            entries,
        })
    }
}

/// The truncated quantum hyperboloid with its canonical basis.
pub struct QHAlgebra<F: Field> {
    params: QHParams,
    ctx: QCtx<F>,
    span: RelationSpan<F>,
    representatives: Vec<Tensor<F>>,
    word_coords: HashMap<Word, SparseVec<F>>,
    table: ProductTable<F>,
}

impl<F: Field> QHAlgebra<F> {
    pub fn params(&self) -> &QHParams {
        &self.params
    }

    pub fn ctx(&self) -> &QCtx<F> {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.params.degree
    }

    pub fn relation_span(&self) -> &RelationSpan<F> {
        &self.span
    }

    pub fn table(&self) -> &ProductTable<F> {
        &self.table
    }

    pub fn into_table(self) -> ProductTable<F> {
        self.table
    }

    /// Representative tensor of a canonical basis element.
    pub fn representative(&self, idx: usize) -> &Tensor<F> {
        &self.representatives[idx]
    }

    pub fn lift(&self, a: &CanonicalElement<F>) -> Tensor<F> {
        let mut t = Tensor::new();
        for (i, x) in a.coeffs.iter().enumerate() {
            if !x.is_zero() {
                t = tensor_add(&t, &self.representatives[i], x);
            }
        }
        t
    }

    /// Canonical coordinates of a tensor of degree at most `N`.
    pub fn canonical_form(&self, t: &Tensor<F>) -> CanonicalElement<F> {
        let mut acc = SparseVec::new();
        for (w, x) in t {
            let coords = self.word_coords.get(w).expect("word beyond truncation");
            crate::qfield::linalg::axpy(&mut acc, x, coords);
        }
        CanonicalElement::from_sparse(self.degree(), &acc)
    }

    pub fn multiply(
        &self,
        a: &CanonicalElement<F>,
        b: &CanonicalElement<F>,
    ) -> Result<CanonicalElement<F>, HyperboloidError> {
        self.table.multiply(a, b)
    }
}

/// Builds the relation span, checks the quotient has dimension `(N+1)²`, and
/// computes canonical coordinates and the product table.
pub fn build_algebra<F: Field>(params: &QHParams, ctx: &QCtx<F>) -> Result<QHAlgebra<F>, HyperboloidError> {
    let span = RelationSpan::build(params, ctx)?;
    let n = params.degree;
    let expected = canonical_dim(n);
    let got = span.quotient_dim();
    if got != expected {
        return Err(HyperboloidError::FlatnessViolation { expected, got });
    }
    let representatives: Vec<Tensor<F>> = (0..expected)
        .map(|idx| {
            let (i, k) = basis_label(idx);
            canonical_representative(ctx, i, k)
        })
        .collect();
    let mut word_coords = HashMap::new();
    for wt in span.space.weights() {
        let words = span.space.block(wt);
        let ech = &span.echelons[&wt];
        let complement = ech.complement();
        let canon: Vec<usize> = (0..expected).filter(|&i| basis_weight(i) == wt).collect();
        if canon.len() != complement.len() {
            return Err(HyperboloidError::FlatnessViolation { expected, got });
        }
        // column c of `m`: reduced coordinates of canonical element canon[c]
        let mut m = Mat::zeros(complement.len(), canon.len());
        let pos: HashMap<usize, usize> = complement.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        for (c, &idx) in canon.iter().enumerate() {
            let split = span.space.split(&representatives[idx]);
            if let Some(v) = split.get(&wt) {
                for (col, x) in ech.reduce(v) {
                    m.set(pos[&col], c, x);
                }
            }
        }
        let inv = m.inverse().ok_or(HyperboloidError::FlatnessViolation { expected, got })?;
        let column_of = |r: usize| -> SparseVec<F> {
            (0..canon.len())
                .filter(|&c| !inv.get(c, r).is_zero())
                .map(|c| (canon[c], inv.get(c, r).clone()))
                .collect()
        };
        let comp_coords: Vec<SparseVec<F>> = (0..complement.len()).map(column_of).collect();
        let pivot_rows: HashMap<usize, &SparseVec<F>> = ech.pivots().zip(ech.rows()).collect();
        for (i, w) in words.iter().enumerate() {
            let coords = if let Some(&r) = pos.get(&i) {
                comp_coords[r].clone()
            } else {
                let row = pivot_rows[&i];
                let mut acc = SparseVec::new();
                for (&col, x) in row.range(i + 1..) {
                    crate::qfield::linalg::axpy(&mut acc, &x.negated(), &comp_coords[pos[&col]]);
                }
                acc
            };
            word_coords.insert(w.clone(), coords);
        }
    }
    let pairs: Vec<(usize, usize)> = (0..expected)
        .flat_map(|a| (0..expected).map(move |b| (a, b)))
        .filter(|&(a, b)| basis_label(a).0 + basis_label(b).0 <= n)
        .collect();
    let entries: BTreeMap<(usize, usize), SparseVec<F>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = SparseVec::new();
            for (wa, xa) in &representatives[a] {
                for (wb, xb) in &representatives[b] {
                    let mut w = wa.clone();
                    w.extend_from_slice(wb);
                    crate::qfield::linalg::axpy(&mut acc, &xa.times(xb), &word_coords[&w]);
                }
            }
            ((a, b), acc)
        })
        .collect();
    Ok(QHAlgebra {
        params: params.clone(),
        ctx: ctx.clone(),
        span,
        representatives,
        word_coords,
        table: ProductTable {
            params: params.clone(),
            entries,
        },
    })
}

/// The intertwiner `V ⊗ V -> V`, scaled so that `e_0 ⊗ e_1 ↦ 2 e_0`; at
/// `q = 1` this is the sl(2) bracket in the basis `e_0 = E`, `e_1 = -H`,
/// `e_2 = -F`.
pub fn qlie_bracket<F: Field>(ctx: &QCtx<F>) -> EquivariantMap<F> {
    let v = irrep(Spin(2), ctx);
    let vv = tensor(&v, &v);
    let mut maps = hom_basis(&vv, &v);
    assert_eq!(maps.len(), 1, "bracket is unique up to scale");
    let mut m = maps.pop().unwrap();
    let s = F::from_int(2).over(m.matrix.get(0, 1));
    m.matrix = m.matrix.scale(&s);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::{parse_rational, Scalar};

    fn rq(s: &str) -> QCtx<BigRational> {
        QCtx::new(parse_rational(s).unwrap())
    }

    #[test]
    fn basis_labels_round_trip() {
        for idx in 0..100 {
            let (i, k) = basis_label(idx);
            assert!(k <= 2 * i);
            assert_eq!(basis_index(i, k), idx);
        }
    }

    #[test]
    fn coproduct_action_matches_tensor_rep() {
        let ctx = QCtx::new(Scalar::q());
        let v = irrep(Spin(2), &ctx);
        let vv = tensor(&v, &v);
        for idx in 0..9 {
            let mut e = vec![Scalar::zero(); 9];
            e[idx] = Scalar::one();
            for g in [Generator::E, Generator::F, Generator::K] {
                let expect = tensor_from_vec(&vv.act(g, &e), 2);
                assert_eq!(act_tensor(&ctx, g, &tensor_from_vec(&e, 2)), expect);
            }
        }
    }

    #[test]
    fn small_quotients_are_flat() {
        let ctx = rq("3/2");
        for (c, h, n) in [(1, 0, 2), (1, 0, 3), (0, 1, 3), (1, 1, 3)] {
            let span = RelationSpan::build(&QHParams::from_ints(c, h, n), &ctx).unwrap();
            assert_eq!(span.quotient_dim(), canonical_dim(n));
            let by_degree = span.quotient_dims_by_degree();
            assert_eq!(by_degree, (0..=n).map(canonical_dim).collect::<Vec<_>>());
        }
    }

    #[test]
    fn canonical_forms() {
        let ctx = rq("2/3");
        let alg = build_algebra(&QHParams::from_ints(1, 0, 3), &ctx).unwrap();
        let vv = alg.canonical_form(&word(&[0, 0]));
        assert_eq!(vv, CanonicalElement::basis(3, basis_index(2, 0)));
        let [v0, v1, _] = quadratic_highest_weights(&ctx);
        assert_eq!(alg.canonical_form(&v0), CanonicalElement::one(3));
        assert!(alg.canonical_form(&v1).is_zero());
        let b = CanonicalElement::basis(3, basis_index(1, 2));
        assert_eq!(alg.multiply(&CanonicalElement::one(3), &b).unwrap(), b);
        let x = alg.canonical_form(&alg.lift(&b));
        assert_eq!(x, b);
    }

    #[test]
    fn bracket_is_classical_at_one() {
        let br = qlie_bracket(&QCtx::<BigRational>::classical());
        let two = BigRational::from_integer(2.into());
        let one = BigRational::from_integer(1.into());
        // [e0, e1] = 2 e0, [e0, e2] = e1, [e1, e2] = 2 e2, antisymmetric
        assert_eq!(br.matrix.get(0, 1), &two);
        assert_eq!(br.matrix.get(0, 3), &(-two.clone()));
        assert_eq!(br.matrix.get(1, 2), &one);
        assert_eq!(br.matrix.get(1, 6), &(-one));
        assert_eq!(br.matrix.get(2, 5), &two);
        assert_eq!(br.matrix.get(2, 7), &(-two));
    }
}
