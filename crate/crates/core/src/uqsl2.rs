//! Finite-dimensional modules over U_q(sl(2)): irreducibles, tensor products,
//! highest-weight decompositions, intertwiners and isotypic projectors.
//!
//! Conventions: the irreducible module of spin `j` has basis `v_0 .. v_{2j}`
//! with `v_k` of weight `2j - 2k`, `K v_k = q^{2j-2k} v_k`,
//! `F v_k = [k+1] v_{k+1}` and `E v_k = [2j-k+1] v_{k-1}`. Tensor products use
//! the coproduct `Δ(E) = E⊗1 + K⊗E`, `Δ(F) = F⊗K⁻¹ + 1⊗F`, `Δ(K) = K⊗K`.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::json;

use crate::qfield::linalg::to_sparse;
use crate::qfield::{Field, Mat, QCtx};

/// A spin, stored as the integer `2j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin(pub u32);

impl Spin {
    pub fn integer(j: u32) -> Self {
        Spin(2 * j)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RepError {
    #[error("highest-weight vectors span {spanned} of {dim} dimensions")]
    IncompleteDecomposition { spanned: usize, dim: usize },
}

/// A module given by the matrices of `E`, `F`, `K` in a weight basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Rep<F: Field> {
    weights: Vec<i64>,
    e: Mat<F>,
    f: Mat<F>,
    k: Mat<F>,
    k_inv: Mat<F>,
}

impl<F: Field> Rep<F> {
    pub fn from_parts(weights: Vec<i64>, e: Mat<F>, f: Mat<F>, ctx: &QCtx<F>) -> Self {
        let k: Vec<F> = weights.iter().map(|&w| ctx.qpow(w)).collect();
        let k_inv: Vec<F> = weights.iter().map(|&w| ctx.qpow(-w)).collect();
        Rep {
            weights,
            e,
            f,
            k: Mat::diagonal(&k),
            k_inv: Mat::diagonal(&k_inv),
        }
    }

    /// Assembles a module from all four generator matrices.
    pub fn from_matrices(weights: Vec<i64>, e: Mat<F>, f: Mat<F>, k: Mat<F>, k_inv: Mat<F>) -> Self {
        Rep {
            weights,
            e,
            f,
            k,
            k_inv,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn e(&self) -> &Mat<F> {
        &self.e
    }

    pub fn f(&self) -> &Mat<F> {
        &self.f
    }

    pub fn k(&self) -> &Mat<F> {
        &self.k
    }

    pub fn k_inv(&self) -> &Mat<F> {
        &self.k_inv
    }

    /// Basis indices of the given weight, in increasing order.
    pub fn weight_space(&self, w: i64) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.weights[i] == w).collect()
    }

    /// Checks `KEK⁻¹ = q²E`, `KFK⁻¹ = q⁻²F` and `EF - FE = [H]`, where `[H]`
    /// is the diagonal of q-numbers of the weights (this is
    /// `(K - K⁻¹)/(q - q⁻¹)` and stays meaningful at `q = 1`).
    pub fn check_relations(&self, ctx: &QCtx<F>) -> bool {
        let q2 = ctx.qpow(2);
        let qm2 = ctx.qpow(-2);
        let kek = self.k.mul(&self.e).mul(&self.k_inv);
        let kfk = self.k.mul(&self.f).mul(&self.k_inv);
        let h: Vec<F> = self.weights.iter().map(|&w| ctx.qint(w)).collect();
        let comm = self.e.mul(&self.f).minus(&self.f.mul(&self.e));
        kek == self.e.scale(&q2) && kfk == self.f.scale(&qm2) && comm == Mat::diagonal(&h)
    }

    /// Kernel of `E` on the weight-`w` subspace, each vector scaled so that
    /// its first nonzero coordinate is 1.
    pub fn highest_weight_vectors(&self, w: i64) -> Vec<Vec<F>> {
        let cols = self.weight_space(w);
        if cols.is_empty() {
            return Vec::new();
        }
        let rows = self.weight_space(w + 2);
        let kernel = if rows.is_empty() {
            (0..cols.len())
                .map(|i| {
                    let mut v = vec![F::zero(); cols.len()];
                    v[i] = F::one();
                    v
                })
                .collect()
        } else {
            self.e.select_rows(&rows).select_columns(&cols).kernel()
        };
        kernel
            .into_iter()
            .map(|kv| {
                let mut full = vec![F::zero(); self.dim()];
                for (c, x) in cols.iter().zip(kv) {
                    full[*c] = x;
                }
                normalize_first(&mut full);
                full
            })
            .collect()
    }

    /// The `F`-orbit `h, F h/[1]!, F² h/[2]!, ...` of a highest-weight vector
    /// of spin `s`, as the columns of an embedding of `irrep(s)`.
    pub fn embedding(&self, h: &[F], s: Spin, ctx: &QCtx<F>) -> Mat<F> {
        let mut cols = vec![h.to_vec()];
        for k in 1..s.dim() {
            let next = self.f.mul_vec(cols.last().unwrap());
            let inv = ctx.qint(k as i64).inverse().expect("q is a root of unity");
            cols.push(next.iter().map(|x| x.times(&inv)).collect());
        }
        Mat::from_columns(&cols, self.dim())
    }

    /// Sparse action of `E`, `F`, `K` on a vector.
    pub fn act(&self, g: Generator, v: &[F]) -> Vec<F> {
        match g {
            Generator::E => self.e.mul_vec(v),
            Generator::F => self.f.mul_vec(v),
            Generator::K => self.k.mul_vec(v),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m = |m: &Mat<F>| -> Vec<Vec<String>> {
            (0..m.nrows())
                .map(|i| m.row(i).iter().map(|x| x.canonical_string()).collect())
                .collect()
        };
        json!({
            "dim": self.dim(),
            "weights": self.weights,
            "E": m(&self.e),
            "F": m(&self.f),
            "K": m(&self.k),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    E,
    F,
    K,
}

fn normalize_first<F: Field>(v: &mut [F]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        let inv = lead.inverse().unwrap();
        for x in v.iter_mut() {
            *x = x.times(&inv);
        }
    }
}

/// The irreducible module of spin `s`.
pub fn irrep<F: Field>(s: Spin, ctx: &QCtx<F>) -> Rep<F> {
    let n = s.dim();
    let tj = s.twice() as i64;
    let weights: Vec<i64> = (0..n as i64).map(|k| tj - 2 * k).collect();
    let mut e = Mat::zeros(n, n);
    let mut f = Mat::zeros(n, n);
    for k in 0..n {
        if k + 1 < n {
            f.set(k + 1, k, ctx.qint(k as i64 + 1));
        }
        if k > 0 {
            e.set(k - 1, k, ctx.qint(tj - k as i64 + 1));
        }
    }
    Rep::from_parts(weights, e, f, ctx)
}

/// Block-diagonal direct sum.
pub fn direct_sum<F: Field>(reps: &[Rep<F>]) -> Rep<F> {
    let n: usize = reps.iter().map(|r| r.dim()).sum();
    let mut out = Rep {
        weights: Vec::with_capacity(n),
        e: Mat::zeros(n, n),
        f: Mat::zeros(n, n),
        k: Mat::zeros(n, n),
        k_inv: Mat::zeros(n, n),
    };
    let mut off = 0;
    for r in reps {
        out.weights.extend_from_slice(&r.weights);
        for i in 0..r.dim() {
            for j in 0..r.dim() {
                out.e.set(off + i, off + j, r.e.get(i, j).clone());
                out.f.set(off + i, off + j, r.f.get(i, j).clone());
                out.k.set(off + i, off + j, r.k.get(i, j).clone());
                out.k_inv.set(off + i, off + j, r.k_inv.get(i, j).clone());
            }
        }
        off += r.dim();
    }
    out
}

/// Tensor product; basis vector `(i, k)` has index `i * b.dim() + k`.
pub fn tensor<F: Field>(a: &Rep<F>, b: &Rep<F>) -> Rep<F> {
    let ia = Mat::identity(a.dim());
    let ib = Mat::identity(b.dim());
    let weights = a
        .weights
        .iter()
        .flat_map(|wa| b.weights.iter().map(move |wb| wa + wb))
        .collect();
    Rep {
        weights,
        e: a.e.kron(&ib).plus(&a.k.kron(&b.e)),
        f: a.f.kron(&b.k_inv).plus(&ia.kron(&b.f)),
        k: a.k.kron(&b.k),
        k_inv: a.k_inv.kron(&b.k_inv),
    }
}

/// One isotypic component of a decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Isotypic<F: Field> {
    pub spin: Spin,
    pub multiplicity: usize,
    /// One embedding of `irrep(spin)` per copy, columns `F^k h / [k]!`.
    pub embeddings: Vec<Mat<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<F: Field> {
    pub components: Vec<Isotypic<F>>,
}

impl<F: Field> Decomposition<F> {
    pub fn multiplicity(&self, s: Spin) -> usize {
        self.components
            .iter()
            .find(|c| c.spin == s)
            .map_or(0, |c| c.multiplicity)
    }

    /// `(2j, multiplicity)` pairs in increasing spin order.
    pub fn multiplicities(&self) -> Vec<(Spin, usize)> {
        self.components.iter().map(|c| (c.spin, c.multiplicity)).collect()
    }

    /// All embeddings side by side: a change of basis to irreducible blocks.
    pub fn basis_matrix(&self, dim: usize) -> Mat<F> {
        let mut cols = Vec::new();
        for c in &self.components {
            for e in &c.embeddings {
                for j in 0..e.ncols() {
                    cols.push(e.column(j));
                }
            }
        }
        Mat::from_columns(&cols, dim)
    }
}

/// Decomposes a module into isotypic components by solving for
/// highest-weight vectors weight by weight.
pub fn decompose<F: Field>(m: &Rep<F>, ctx: &QCtx<F>) -> Result<Decomposition<F>, RepError> {
    let mut by_weight: BTreeMap<i64, ()> = BTreeMap::new();
    for &w in m.weights() {
        if w >= 0 {
            by_weight.insert(w, ());
        }
    }
    let mut components = Vec::new();
    let mut spanned = 0;
    for &w in by_weight.keys() {
        let hws = m.highest_weight_vectors(w);
        if hws.is_empty() {
            continue;
        }
        let spin = Spin(w as u32);
        let embeddings: Vec<Mat<F>> = hws.iter().map(|h| m.embedding(h, spin, ctx)).collect();
        spanned += embeddings.len() * spin.dim();
        components.push(Isotypic {
            spin,
            multiplicity: embeddings.len(),
            embeddings,
        });
    }
    let d = Decomposition { components };
    if spanned != m.dim() || (m.dim() > 0 && d.basis_matrix(m.dim()).rank() != m.dim()) {
        return Err(RepError::IncompleteDecomposition {
            spanned,
            dim: m.dim(),
        });
    }
    Ok(d)
}

/// A module map with its source and target.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantMap<F: Field> {
    pub source: Rep<F>,
    pub target: Rep<F>,
    pub matrix: Mat<F>,
}

impl<F: Field> EquivariantMap<F> {
    pub fn is_intertwiner(&self) -> bool {
        intertwines(&self.matrix, &self.source, &self.target)
    }
}

/// `m E_src = E_tgt m` and likewise for `F` and `K`.
pub fn intertwines<F: Field>(m: &Mat<F>, src: &Rep<F>, tgt: &Rep<F>) -> bool {
    m.mul(&src.e) == tgt.e.mul(m) && m.mul(&src.f) == tgt.f.mul(m) && m.mul(&src.k) == tgt.k.mul(m)
}

/// Basis of the space of intertwiners `a -> b`. Unknowns are restricted to
/// weight-preserving entries, which is what commuting with `K` means at
/// generic `q` and also pins the classical weight grading at `q = 1`.
pub fn hom_basis<F: Field>(a: &Rep<F>, b: &Rep<F>) -> Vec<EquivariantMap<F>> {
    let mut unknowns = Vec::new();
    for i in 0..b.dim() {
        for j in 0..a.dim() {
            if b.weights[i] == a.weights[j] {
                unknowns.push((i, j));
            }
        }
    }
    if unknowns.is_empty() {
        return Vec::new();
    }
    let index: BTreeMap<(usize, usize), usize> =
        unknowns.iter().enumerate().map(|(n, &p)| (p, n)).collect();
    // (M X_a - X_b M)[r][c] = sum_j M[r][j] X_a[j][c] - sum_i X_b[r][i] M[i][c]
    let mut rows = Vec::new();
    for (xa, xb) in [(&a.e, &b.e), (&a.f, &b.f)] {
        for r in 0..b.dim() {
            for c in 0..a.dim() {
                let mut row = vec![F::zero(); unknowns.len()];
                for j in 0..a.dim() {
                    let x = xa.get(j, c);
                    if let (false, Some(&n)) = (x.is_zero(), index.get(&(r, j))) {
                        row[n] = row[n].plus(x);
                    }
                }
                for i in 0..b.dim() {
                    let x = xb.get(r, i);
                    if let (false, Some(&n)) = (x.is_zero(), index.get(&(i, c))) {
                        row[n] = row[n].minus(x);
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let kernel = if rows.is_empty() {
        Mat::<F>::zeros(0, unknowns.len()).kernel()
    } else {
        Mat::from_rows(rows).kernel()
    };
    kernel
        .into_iter()
        .map(|v| {
            let mut m = Mat::zeros(b.dim(), a.dim());
            for (n, &(i, j)) in unknowns.iter().enumerate() {
                m.set(i, j, v[n].clone());
            }
            EquivariantMap {
                source: a.clone(),
                target: b.clone(),
                matrix: m,
            }
        })
        .collect()
}

/// Idempotent endomorphism with image the spin-`s` isotypic component.
pub fn isotypic_projector<F: Field>(m: &Rep<F>, d: &Decomposition<F>, s: Spin) -> EquivariantMap<F> {
    let basis = d.basis_matrix(m.dim());
    let inv = basis.inverse().expect("decomposition basis is invertible");
    let mut sel = vec![F::zero(); m.dim()];
    let mut offset = 0;
    for c in &d.components {
        let width = c.multiplicity * c.spin.dim();
        if c.spin == s {
            for x in &mut sel[offset..offset + width] {
                *x = F::one();
            }
        }
        offset += width;
    }
    EquivariantMap {
        source: m.clone(),
        target: m.clone(),
        matrix: basis.mul(&Mat::diagonal(&sel)).mul(&inv),
    }
}

/// Projection of `irrep(a) ⊗ irrep(b)` onto its `irrep(s)` summand, sending
/// the normalized highest-weight vector of that summand to `v_0`. Zero rows
/// when `s` does not occur.
pub fn cg_projection<F: Field>(a: Spin, b: Spin, s: Spin, ctx: &QCtx<F>) -> Mat<F> {
    let t = tensor(&irrep(a, ctx), &irrep(b, ctx));
    let d = decompose(&t, ctx).expect("tensor products of irreducibles decompose at generic q");
    let inv = d.basis_matrix(t.dim()).inverse().unwrap();
    let mut offset = 0;
    for c in &d.components {
        if c.spin == s {
            let rows: Vec<usize> = (offset..offset + s.dim()).collect();
            return inv.select_rows(&rows);
        }
        offset += c.multiplicity * c.spin.dim();
    }
    Mat::zeros(s.dim(), t.dim())
}

/// Normalized highest-weight vector of the `irrep(s)` summand of
/// `irrep(a) ⊗ irrep(b)`, if it occurs.
pub fn cg_highest_weight<F: Field>(a: Spin, b: Spin, s: Spin, ctx: &QCtx<F>) -> Option<Vec<F>> {
    let t = tensor(&irrep(a, ctx), &irrep(b, ctx));
    t.highest_weight_vectors(s.twice() as i64).into_iter().next()
}

/// Classical Clebsch-Gordan multiplicities from characters, for testing.
pub fn classical_fusion(spins: &[Spin]) -> BTreeMap<Spin, usize> {
    let mut weights: BTreeMap<i64, usize> = BTreeMap::new();
    weights.insert(0, 1);
    for s in spins {
        let mut next = BTreeMap::new();
        for (&w, &m) in &weights {
            for k in 0..s.dim() as i64 {
                *next.entry(w + s.twice() as i64 - 2 * k).or_insert(0) += m;
            }
        }
        weights = next;
    }
    let mut out = BTreeMap::new();
    for (&w, &m) in &weights {
        if w < 0 {
            continue;
        }
        let above = weights.get(&(w + 2)).copied().unwrap_or(0);
        if m > above {
            out.insert(Spin(w as u32), m - above);
        }
    }
    out
}

/// `true` if every entry of a vector is zero.
pub fn is_zero_vec<F: Field>(v: &[F]) -> bool {
    to_sparse(v).is_empty()
}
