//! Quadratic algebras `T(V)/{I}`, their Koszul complexes and the standard
//! Hecke symmetries, as graded linear algebra on tensor powers of `V`.
//!
//! Tensor words are indexed lexicographically: `e_{w_1} ⊗ … ⊗ e_{w_k}` sits
//! at `Σ w_i n^{k-i}`.

use serde::{Deserialize, Serialize};

use crate::qfield::linalg::{axpy, to_dense, SparseVec};
use crate::qfield::{Echelon, Field, Mat, QCtx};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuadraticError {
    #[error("matrix has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("unparseable entry {0:?}")]
    Entry(String),
    #[error("not a Hecke symmetry: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Json(#[from] JsonError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct JsonError(String);

/// A Yang-Baxter operator on `V ⊗ V` with `(S - q)(S + q⁻¹) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeckeSymmetry<F: Field> {
    pub n: usize,
    pub matrix: Mat<F>,
}

#[derive(Serialize, Deserialize)]
struct HeckeFile {
    n: usize,
    entries: Vec<String>,
}

fn pow(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

/// The Drinfeld-Jimbo symmetry: `q` on `e_i ⊗ e_i`, the flip on `e_i ⊗ e_j`
/// for `i < j`, and `e_j ⊗ e_i ↦ e_i ⊗ e_j + (q - q⁻¹) e_j ⊗ e_i`.
pub fn standard_hecke<F: Field>(n: usize, ctx: &QCtx<F>) -> HeckeSymmetry<F> {
    assert!(n >= 2, "standard Hecke symmetry needs n ≥ 2");
    let q = ctx.q().clone();
    let lambda = q.minus(&ctx.qpow(-1));
    let mut m = Mat::zeros(n * n, n * n);
    for i in 0..n {
        m.set(i * n + i, i * n + i, q.clone());
        for j in i + 1..n {
            let (a, b) = (i * n + j, j * n + i);
            m.set(b, a, F::one());
            m.set(a, b, F::one());
            m.set(b, b, lambda.clone());
        }
    }
    HeckeSymmetry { n, matrix: m }
}

impl<F: Field> HeckeSymmetry<F> {
    /// Validates a user-supplied matrix.
    pub fn new(n: usize, matrix: Mat<F>, ctx: &QCtx<F>) -> Result<Self, QuadraticError> {
        if matrix.nrows() != n * n || matrix.ncols() != n * n {
            return Err(QuadraticError::Shape {
                expected: n.pow(4),
                got: matrix.nrows() * matrix.ncols(),
            });
        }
        let s = HeckeSymmetry { n, matrix };
        if !s.satisfies_braid_relation() {
            return Err(QuadraticError::Invalid("Yang-Baxter equation fails"));
        }
        if !s.satisfies_hecke_condition(ctx) {
            return Err(QuadraticError::Invalid("(S - q)(S + 1/q) != 0"));
        }
        Ok(s)
    }

    /// `S₁₂ = S ⊗ 1` and `S₂₃ = 1 ⊗ S` on `V^{⊗3}`.
    pub fn legs(&self) -> (Mat<F>, Mat<F>) {
        let id = Mat::identity(self.n);
        (self.matrix.kron(&id), id.kron(&self.matrix))
    }

    pub fn satisfies_braid_relation(&self) -> bool {
        let (a, b) = self.legs();
        a.mul(&b).mul(&a) == b.mul(&a).mul(&b)
    }

    pub fn satisfies_hecke_condition(&self, ctx: &QCtx<F>) -> bool {
        let id = Mat::identity(self.n * self.n);
        let p = self.matrix.minus(&id.scale(ctx.q()));
        let m = self.matrix.plus(&id.scale(&ctx.qpow(-1)));
        p.mul(&m).is_zero()
    }

    /// `ker(S - q)`, the q-symmetric tensors.
    pub fn symmetric_part(&self, ctx: &QCtx<F>) -> Vec<Vec<F>> {
        let id = Mat::identity(self.n * self.n);
        self.matrix.minus(&id.scale(ctx.q())).kernel()
    }

    /// `ker(S + q⁻¹)`, the q-skew tensors.
    pub fn skew_part(&self, ctx: &QCtx<F>) -> Vec<Vec<F>> {
        let id = Mat::identity(self.n * self.n);
        self.matrix.plus(&id.scale(&ctx.qpow(-1))).kernel()
    }

    /// The split `(I₊, I₋)`.
    pub fn quadratic_data(&self, ctx: &QCtx<F>) -> QuadraticData<F> {
        QuadraticData::with_split(self.n, self.symmetric_part(ctx), self.skew_part(ctx))
    }

    pub fn to_json(&self) -> String {
        let file = HeckeFile {
            n: self.n,
            entries: self.matrix.entries().iter().map(|x| x.canonical_string()).collect(),
        };
        serde_json::to_string(&file).expect("serializable")
    }

    pub fn from_json(s: &str, ctx: &QCtx<F>) -> Result<Self, QuadraticError> {
        let file: HeckeFile = serde_json::from_str(s).map_err(|e| JsonError(e.to_string()))?;
        let n2 = file.n * file.n;
        if file.entries.len() != n2 * n2 {
            return Err(QuadraticError::Shape {
                expected: n2 * n2,
                got: file.entries.len(),
            });
        }
        let entries = file
            .entries
            .iter()
            .map(|e| F::parse_canonical(e).ok_or_else(|| QuadraticError::Entry(e.clone())))
            .collect::<Result<Vec<F>, _>>()?;
        let rows = entries.chunks(n2).map(|r| r.to_vec()).collect();
        HeckeSymmetry::new(file.n, Mat::from_rows(rows), ctx)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Plus,
    Minus,
}

/// A subspace `I ⊂ V ⊗ V`, optionally with a complementary pair.
#[derive(Clone, Debug)]
pub struct QuadraticData<F: Field> {
    pub n: usize,
    pub relations: Vec<Vec<F>>,
    pub split: Option<(Vec<Vec<F>>, Vec<Vec<F>>)>,
}

fn independent<F: Field>(vs: &[Vec<F>]) -> bool {
    let mut e = Echelon::new(vs.first().map_or(0, Vec::len));
    vs.iter().all(|v| e.insert(&crate::qfield::linalg::to_sparse(v)))
}

impl<F: Field> QuadraticData<F> {
    pub fn new(n: usize, relations: Vec<Vec<F>>) -> Self {
        assert!(relations.iter().all(|r| r.len() == n * n));
        assert!(independent(&relations), "relation basis must be independent");
        QuadraticData {
            n,
            relations,
            split: None,
        }
    }

    /// `A₊ = T(V)/{I₋}` as the algebra of the data; the split is kept for
    /// the other constructions.
    pub fn with_split(n: usize, plus: Vec<Vec<F>>, minus: Vec<Vec<F>>) -> Self {
        assert_eq!(plus.len() + minus.len(), n * n, "split must fill V ⊗ V");
        let mut all = plus.clone();
        all.extend(minus.iter().cloned());
        assert!(independent(&all), "split parts must be complementary");
        QuadraticData {
            n,
            relations: minus.clone(),
            split: Some((plus, minus)),
        }
    }

    pub fn part(&self, which: Which) -> &[Vec<F>] {
        let (p, m) = self.split.as_ref().expect("quadratic data without a split");
        match which {
            Which::Plus => p,
            Which::Minus => m,
        }
    }

    /// Quadratic data with relations `I₊` or `I₋` of the split.
    pub fn restrict(&self, which: Which) -> QuadraticData<F> {
        QuadraticData::new(self.n, self.part(which).to_vec())
    }
}

/// `I ⊗ V^{n-2} + V ⊗ I ⊗ V^{n-3} + … + V^{n-2} ⊗ I` in echelon form.
pub fn sum_of_shifts<F: Field>(dim: usize, gens: &[Vec<F>], k: usize) -> Echelon<F> {
    let mut e = Echelon::new(pow(dim, k));
    if k < 2 {
        return e;
    }
    for p in 0..=k - 2 {
        let s = k - 2 - p;
        for pre in 0..pow(dim, p) {
            for g in gens {
                for suf in 0..pow(dim, s) {
                    let mut v = SparseVec::new();
                    for (r, x) in g.iter().enumerate() {
                        if !x.is_zero() {
                            v.insert((pre * dim * dim + r) * pow(dim, s) + suf, x.clone());
                        }
                    }
                    e.insert(&v);
                }
            }
        }
    }
    e
}

/// `Iⁿ`, the degree-`n` part of the ideal generated by `I`.
pub fn sum_space<F: Field>(data: &QuadraticData<F>, which: Option<Which>, k: usize) -> Echelon<F> {
    let gens = which.map_or(&data.relations[..], |w| data.part(w));
    sum_of_shifts(data.n, gens, k)
}

/// `I^(k) = ∩_p V^p ⊗ I ⊗ V^{k-2-p}`, computed as the annihilator of the
/// sum of shifts of the annihilator of `I`; `I^(0) = k`, `I^(1) = V`.
pub fn intersection_space<F: Field>(data: &QuadraticData<F>, which: Option<Which>, k: usize) -> Echelon<F> {
    let n = data.n;
    let gens = which.map_or(&data.relations[..], |w| data.part(w));
    let mut out = Echelon::new(pow(n, k));
    if k < 2 {
        for i in 0..pow(n, k) {
            let mut v = SparseVec::new();
            v.insert(i, F::one());
            out.insert(&v);
        }
        return out;
    }
    let rel = if gens.is_empty() {
        Mat::zeros(0, n * n)
    } else {
        Mat::from_rows(gens.to_vec())
    };
    let annihilator = if gens.is_empty() {
        (0..n * n)
            .map(|i| {
                let mut v = vec![F::zero(); n * n];
                v[i] = F::one();
                v
            })
            .collect()
    } else {
        rel.kernel()
    };
    let dual_sum = sum_of_shifts(n, &annihilator, k);
    for v in dual_sum.kernel_basis() {
        out.insert(&v);
    }
    out
}

/// Dimensions of `A^(k) = V^{⊗k}/Iᵏ` for `k = 0..=top`.
pub fn graded_dims<F: Field>(n: usize, relations: &[Vec<F>], top: usize) -> Vec<usize> {
    (0..=top)
        .map(|k| pow(n, k) - sum_of_shifts(n, relations, k).rank())
        .collect()
}

/// `I^(n)₊ ⊕ Iⁿ₋ = V^{⊗n}` and `I^(n)₋ ⊕ Iⁿ₊ = V^{⊗n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Complementarity {
    pub degree: usize,
    pub plus_intersection: usize,
    pub minus_sum: usize,
    pub minus_intersection: usize,
    pub plus_sum: usize,
    pub complementary: bool,
}

fn direct_sum_is_total<F: Field>(a: &Echelon<F>, b: &Echelon<F>) -> bool {
    let total = a.ncols();
    if a.rank() + b.rank() != total {
        return false;
    }
    let mut e = a.clone();
    b.rows().all(|r| e.insert(r)) && e.rank() == total
}

pub fn complementarity_check<F: Field>(data: &QuadraticData<F>, k: usize) -> Complementarity {
    let pi = intersection_space(data, Some(Which::Plus), k);
    let ms = sum_space(data, Some(Which::Minus), k);
    let mi = intersection_space(data, Some(Which::Minus), k);
    let ps = sum_space(data, Some(Which::Plus), k);
    Complementarity {
        degree: k,
        plus_intersection: pi.rank(),
        minus_sum: ms.rank(),
        minus_intersection: mi.rank(),
        plus_sum: ps.rank(),
        complementary: direct_sum_is_total(&pi, &ms) && direct_sum_is_total(&mi, &ps),
    }
}

/// The Koszul complex `A ⊗ I^(•)` of `A = T(V)/{I}`, with bases chosen once
/// per degree: `A^(m)` on the pivot-free words of `Iᵐ`, `I^(n)` on the rows
/// of its reduced echelon form.
#[derive(Clone, Debug)]
pub struct KoszulComplex<F: Field> {
    n: usize,
    ideal: Vec<Echelon<F>>,
    words: Vec<Vec<usize>>,
    duals: Vec<Echelon<F>>,
}

impl<F: Field> KoszulComplex<F> {
    /// Bases for all bidegrees with `m + n ≤ top`.
    pub fn new(data: &QuadraticData<F>, top: usize) -> Self {
        let ideal: Vec<Echelon<F>> = (0..=top + 1).map(|k| sum_space(data, None, k)).collect();
        let words = ideal.iter().map(|e| e.complement()).collect();
        let duals = (0..=top).map(|k| intersection_space(data, None, k)).collect();
        KoszulComplex {
            n: data.n,
            ideal,
            words,
            duals,
        }
    }

    pub fn algebra_dim(&self, m: usize) -> usize {
        self.words[m].len()
    }

    pub fn dual_dim(&self, n: usize) -> usize {
        self.duals[n].rank()
    }

    pub fn term_dim(&self, m: usize, n: usize) -> usize {
        self.algebra_dim(m) * self.dual_dim(n)
    }

    /// Coordinates in `A^(m)` of a tensor of degree `m`.
    fn algebra_coords(&self, m: usize, v: &SparseVec<F>) -> Vec<F> {
        let r = self.ideal[m].reduce(v);
        self.words[m]
            .iter()
            .map(|w| r.get(w).cloned().unwrap_or_else(F::zero))
            .collect()
    }

    /// `A^(m) ⊗ I^(n) → A^(m+1) ⊗ I^(n-1)`, `a ⊗ x ⊗ y ↦ ax ⊗ y`.
    pub fn differential(&self, m: usize, n: usize) -> Mat<F> {
        assert!(n >= 1);
        let nv = self.n;
        let rest = pow(nv, n - 1);
        let target_rows: Vec<&SparseVec<F>> = self.duals[n - 1].rows().collect();
        let pivots: Vec<usize> = self.duals[n - 1].pivots().collect();
        let da1 = self.algebra_dim(m + 1);
        let dd1 = target_rows.len();
        let mut out = Mat::zeros(da1 * dd1, self.term_dim(m, n));
        let mut col = 0;
        for &w in &self.words[m] {
            for z in self.duals[n].rows() {
                // image as a map from A^(m+1)-coordinates to V^{⊗(n-1)}
                let mut image: Vec<SparseVec<F>> = vec![SparseVec::new(); da1];
                for (&pos, c) in z {
                    let (x, y) = (pos / rest, pos % rest);
                    let mut word = SparseVec::new();
                    word.insert(w * nv + x, F::one());
                    for (alpha, a) in self.algebra_coords(m + 1, &word).iter().enumerate() {
                        if !a.is_zero() {
                            let mut e = SparseVec::new();
                            e.insert(y, F::one());
                            axpy(&mut image[alpha], &a.times(c), &e);
                        }
                    }
                }
                for (alpha, v) in image.iter().enumerate() {
                    for (j, p) in pivots.iter().enumerate() {
                        if let Some(x) = v.get(p) {
                            out.set(alpha * dd1 + j, col, x.clone());
                        }
                    }
                }
                col += 1;
            }
        }
        out
    }

    /// Homology dimension at `A^(m) ⊗ I^(n)`.
    pub fn homology(&self, m: usize, n: usize) -> usize {
        let dim = self.term_dim(m, n);
        let out = if n >= 1 { self.differential(m, n).rank() } else { 0 };
        let inc = if m >= 1 {
            self.differential(m - 1, n + 1).rank()
        } else {
            0
        };
        dim - out - inc
    }
}

/// `Σ a_k t^k · Σ b_k (-t)^k ≡ 1 mod t^{N+1}`.
pub fn poincare_product_is_one(plus: &[usize], minus: &[usize], top: usize) -> bool {
    (0..=top).all(|k| {
        let c: i64 = (0..=k)
            .map(|i| {
                let a = plus.get(i).copied().unwrap_or(0) as i64;
                let b = minus.get(k - i).copied().unwrap_or(0) as i64;
                if (k - i) % 2 == 0 {
                    a * b
                } else {
                    -a * b
                }
            })
            .sum();
        c == i64::from(k == 0)
    })
}

/// Graded dimensions of `A₊ = T/{I₋}` and `A₋ = T/{I₊}` up to `top`, and
/// whether their Poincaré series satisfy `P₊(t) P₋(-t) = 1` to that order.
pub fn poincare_identity<F: Field>(data: &QuadraticData<F>, top: usize) -> (Vec<usize>, Vec<usize>, bool) {
    let plus = graded_dims(data.n, data.part(Which::Minus), top);
    let minus = graded_dims(data.n, data.part(Which::Plus), top);
    let ok = poincare_product_is_one(&plus, &minus, top);
    (plus, minus, ok)
}

/// The degree-2 relations `S L₁ S L₁ - L₁ S L₁ S = 0` of the reflection
/// equation algebra on generators `l_i^j` (index `i n + j`).
pub fn re_relations<F: Field>(s: &HeckeSymmetry<F>) -> Vec<Vec<F>> {
    let n = s.n;
    let nn = n * n;
    let g = |i: usize, j: usize| i * n + j;
    // (L₁)_{(i,k),(j,l)} = l_i^j δ_kl; a product of two L₁ entries is a
    // vector in W ⊗ W.
    let l1 = |r: usize, c: usize| -> Option<usize> {
        let (i, k) = (r / n, r % n);
        let (j, l) = (c / n, c % n);
        (k == l).then(|| g(i, j))
    };
    let sm = &s.matrix;
    let mut e = Echelon::new(nn * nn);
    for a in 0..nn {
        for b in 0..nn {
            let mut v = SparseVec::new();
            // S L₁ S L₁
            for c in 0..nn {
                let s1 = sm.get(a, c);
                if s1.is_zero() {
                    continue;
                }
                for d in 0..nn {
                    let Some(x) = l1(c, d) else { continue };
                    for ee in 0..nn {
                        let s2 = sm.get(d, ee);
                        if s2.is_zero() {
                            continue;
                        }
                        if let Some(y) = l1(ee, b) {
                            let mut t = SparseVec::new();
                            t.insert(x * nn + y, s1.times(s2));
                            axpy(&mut v, &F::one(), &t);
                        }
                    }
                }
            }
            // - L₁ S L₁ S
            for c in 0..nn {
                let Some(x) = l1(a, c) else { continue };
                for d in 0..nn {
                    let s1 = sm.get(c, d);
                    if s1.is_zero() {
                        continue;
                    }
                    for ee in 0..nn {
                        let Some(y) = l1(d, ee) else { continue };
                        let s2 = sm.get(ee, b);
                        if s2.is_zero() {
                            continue;
                        }
                        let mut t = SparseVec::new();
                        t.insert(x * nn + y, s1.times(s2).negated());
                        axpy(&mut v, &F::one(), &t);
                    }
                }
            }
            e.insert(&v);
        }
    }
    e.rows().map(|r| to_dense(r, nn * nn)).collect()
}

/// Graded dimensions of the reflection equation algebra for the standard
/// symmetry on `n` generators, degrees `0..=top`.
pub fn re_algebra_dims<F: Field>(n: usize, top: usize, ctx: &QCtx<F>) -> Vec<usize> {
    let s = standard_hecke(n, ctx);
    graded_dims(n * n, &re_relations(&s), top)
}

/// `C(m + k - 1, k)`, the dimension of `Sym^k` of an `m`-dimensional space.
pub fn symmetric_power_dim(m: usize, k: usize) -> usize {
    if k == 0 {
        return 1;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (m + i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}

/// `C(m, k)`.
pub fn exterior_power_dim(m: usize, k: usize) -> usize {
    if k > m {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (m - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}
