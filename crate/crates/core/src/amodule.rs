//! Free modules `A ⊗ W` and `W ⊗ A` over the truncated hyperboloid algebra,
//! submodules generated by low-degree elements, and their quotients.
//!
//! The algebra factor is truncated at spin `top`; coordinates on `A` are the
//! canonical ones of [`ProductTable`].

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::hyperboloid::{algebra_rep, basis_label, canonical_dim, CanonicalElement, ProductTable};
use crate::qfield::linalg::{axpy, to_dense, to_sparse, SparseVec};
use crate::qfield::{Echelon, Field, Mat, QCtx};
use crate::uqsl2::{irrep, tensor, Generator, Rep, Spin};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `A_{≤top} ⊗ W` (left) or `W ⊗ A_{≤top}` (right) with the tensor-product
/// module structure.
#[derive(Clone, Debug)]
pub struct FreeModule<F: Field> {
    table: Arc<ProductTable<F>>,
    side: Side,
    top: usize,
    fiber: Rep<F>,
    rep: Rep<F>,
}

impl<F: Field> FreeModule<F> {
    pub fn new(table: Arc<ProductTable<F>>, ctx: &QCtx<F>, side: Side, top: usize, fiber: Rep<F>) -> Self {
        assert!(top <= table.degree(), "module truncation exceeds the product table");
        let a = reversed(&algebra_rep(top, ctx));
        let rep = match side {
            Side::Left => tensor(&a, &fiber),
            Side::Right => tensor(&fiber, &a),
        };
        FreeModule {
            table,
            side,
            top,
            fiber,
            rep,
        }
    }

    pub fn table(&self) -> &ProductTable<F> {
        &self.table
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn fiber(&self) -> &Rep<F> {
        &self.fiber
    }

    pub fn rep(&self) -> &Rep<F> {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    fn algebra_dim(&self) -> usize {
        canonical_dim(self.top)
    }

    /// Position of `a ⊗ w_b` (or `w_b ⊗ a`) for canonical index `a`.
    ///
    /// The algebra factor is stored in decreasing order, so echelon pivots of
    /// a submodule sit in the highest degree available and reduction modulo
    /// the submodule never raises the degree.
    pub fn index(&self, a: usize, b: usize) -> usize {
        let r = self.algebra_dim() - 1 - a;
        match self.side {
            Side::Left => r * self.fiber.dim() + b,
            Side::Right => b * self.algebra_dim() + r,
        }
    }

    /// Inverse of [`FreeModule::index`].
    pub fn split(&self, pos: usize) -> (usize, usize) {
        let (r, b) = match self.side {
            Side::Left => (pos / self.fiber.dim(), pos % self.fiber.dim()),
            Side::Right => (pos % self.algebra_dim(), pos / self.algebra_dim()),
        };
        (self.algebra_dim() - 1 - r, b)
    }

    /// Highest spin of the algebra factor among the nonzero entries.
    pub fn algebra_degree(&self, v: &SparseVec<F>) -> usize {
        v.keys().map(|&p| basis_label(self.split(p).0).0).max().unwrap_or(0)
    }

    /// The module action of a canonical basis element: `f · v` on the left
    /// side, `v · f` on the right.
    pub fn multiply_basis(&self, f: usize, v: &SparseVec<F>) -> SparseVec<F> {
        let mut out = SparseVec::new();
        for (&p, x) in v {
            let (a, b) = self.split(p);
            let prod = match self.side {
                Side::Left => self.table.basis_product(f, a),
                Side::Right => self.table.basis_product(a, f),
            }
            .expect("product within the table truncation");
            for (&k, y) in prod {
                assert!(k < self.algebra_dim(), "product leaves the module truncation");
                axpy(&mut out, &x.times(y), &single(self.index(k, b)));
            }
        }
        out
    }

    pub fn multiply(&self, f: &CanonicalElement<F>, v: &SparseVec<F>) -> SparseVec<F> {
        let mut out = SparseVec::new();
        for (i, c) in f.coeffs.iter().enumerate() {
            if !c.is_zero() {
                axpy(&mut out, c, &self.multiply_basis(i, v));
            }
        }
        out
    }

    /// Places a vector of `irrep(i) ⊗ W` (left) or `W ⊗ irrep(i)` (right),
    /// indexed as by [`tensor`], into the module.
    pub fn embed_component(&self, i: usize, v: &[F]) -> SparseVec<F> {
        let di = 2 * i + 1;
        let dw = self.fiber.dim();
        let mut out = SparseVec::new();
        for (n, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let (k, b) = match self.side {
                Side::Left => (n / dw, n % dw),
                Side::Right => (n % di, n / di),
            };
            out.insert(self.index(i * i + k, b), x.clone());
        }
        out
    }

    /// Normalized highest-weight vectors of spin `s` inside the product of
    /// the spin-`i` algebra component with the fiber.
    pub fn component_highest_weights(&self, ctx: &QCtx<F>, i: usize, s: Spin) -> Vec<SparseVec<F>> {
        let vi = irrep(Spin::integer(i as u32), ctx);
        let t = match self.side {
            Side::Left => tensor(&vi, &self.fiber),
            Side::Right => tensor(&self.fiber, &vi),
        };
        t.highest_weight_vectors(s.twice() as i64)
            .iter()
            .map(|h| self.embed_component(i, h))
            .collect()
    }

    /// `F^k h / [k]!` for `k = 0 .. 2s`.
    pub fn orbit(&self, ctx: &QCtx<F>, h: &SparseVec<F>, s: Spin) -> Vec<SparseVec<F>> {
        let mut out = vec![h.clone()];
        for k in 1..s.dim() {
            let next = self.rep.f().mul_vec(&to_dense(out.last().unwrap(), self.dim()));
            let inv = ctx.qint(k as i64).inverse().expect("q is a root of unity");
            out.push(to_sparse(&next).into_iter().map(|(p, x)| (p, x.times(&inv))).collect());
        }
        out
    }

    pub fn act(&self, g: Generator, v: &SparseVec<F>) -> SparseVec<F> {
        to_sparse(&self.rep.act(g, &to_dense(v, self.dim())))
    }

    /// Span of `f · g` over canonical `f` with `deg f + deg g ≤ top`.
    pub fn generated_submodule(&self, gens: &[SparseVec<F>]) -> Echelon<F> {
        let mut jobs = Vec::new();
        for g in gens {
            let d = self.algebra_degree(g);
            if d <= self.top {
                for f in 0..canonical_dim(self.top - d) {
                    jobs.push((f, g));
                }
            }
        }
        let products: Vec<SparseVec<F>> = jobs
            .par_iter()
            .map(|(f, g)| self.multiply_basis(*f, g))
            .collect();
        let mut e = Echelon::new(self.dim());
        e.extend(products.iter());
        e
    }
}

/// The same module with its basis listed in reverse order.
fn reversed<F: Field>(r: &Rep<F>) -> Rep<F> {
    let n = r.dim();
    let perm: Vec<usize> = (0..n).rev().collect();
    let flip = |m: &Mat<F>| m.select_rows(&perm).select_columns(&perm);
    Rep::from_matrices(
        perm.iter().map(|&i| r.weights()[i]).collect(),
        flip(r.e()),
        flip(r.f()),
        flip(r.k()),
        flip(r.k_inv()),
    )
}

fn single<F: Field>(p: usize) -> SparseVec<F> {
    let mut v = SparseVec::new();
    v.insert(p, F::one());
    v
}

/// A free module modulo a submodule, with coordinates on the pivot-free
/// columns of the submodule's echelon form.
#[derive(Clone, Debug)]
pub struct QuotientModule<F: Field> {
    free: FreeModule<F>,
    sub: Echelon<F>,
    complement: Vec<usize>,
    position: HashMap<usize, usize>,
}

impl<F: Field> QuotientModule<F> {
    pub fn new(free: FreeModule<F>, gens: &[SparseVec<F>]) -> Self {
        let sub = free.generated_submodule(gens);
        let complement = sub.complement();
        let position = complement.iter().enumerate().map(|(n, &c)| (c, n)).collect();
        QuotientModule {
            free,
            sub,
            complement,
            position,
        }
    }

    pub fn free(&self) -> &FreeModule<F> {
        &self.free
    }

    pub fn submodule(&self) -> &Echelon<F> {
        &self.sub
    }

    pub fn dim(&self) -> usize {
        self.complement.len()
    }

    pub fn reduce(&self, v: &SparseVec<F>) -> SparseVec<F> {
        self.sub.reduce(v)
    }

    pub fn is_zero(&self, v: &SparseVec<F>) -> bool {
        self.sub.contains(v)
    }

    /// Coordinates of the class of `v`.
    pub fn coords(&self, v: &SparseVec<F>) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim()];
        for (p, x) in self.reduce(v) {
            out[self.position[&p]] = x;
        }
        out
    }

    /// Dimension of the weight-`w` subspace of the quotient.
    pub fn weight_dim(&self, w: i64) -> usize {
        let weights = self.free.rep().weights();
        self.complement.iter().filter(|&&c| weights[c] == w).count()
    }

    /// Number of copies of `irrep(s)` in the quotient, from weight dimensions.
    pub fn multiplicity(&self, s: Spin) -> usize {
        let w = s.twice() as i64;
        self.weight_dim(w) - self.weight_dim(w + 2)
    }

    /// Matrix of a generator on quotient coordinates.
    pub fn action(&self, g: Generator) -> Mat<F> {
        let cols: Vec<Vec<F>> = self
            .complement
            .par_iter()
            .map(|&c| self.coords(&self.free.act(g, &single(c))))
            .collect();
        Mat::from_columns(&cols, self.dim())
    }

    /// `true` if `E h` vanishes in the quotient.
    pub fn is_highest_weight(&self, h: &SparseVec<F>) -> bool {
        self.is_zero(&self.free.act(Generator::E, h))
    }

    /// Rank of the classes of `vs`.
    pub fn rank_of(&self, vs: &[SparseVec<F>]) -> usize {
        let mut e = Echelon::new(self.dim());
        for v in vs {
            e.insert(&to_sparse(&self.coords(v)));
        }
        e.rank()
    }

    /// Coefficients `x` with `v ≡ Σ x_i basis_i`, if the classes of `basis`
    /// are independent and the combination exists.
    pub fn express(&self, v: &SparseVec<F>, basis: &[SparseVec<F>]) -> Option<Vec<F>> {
        let cols: Vec<Vec<F>> = basis.iter().map(|b| self.coords(b)).collect();
        let m = Mat::from_columns(&cols, self.dim());
        if m.rank() < basis.len() {
            return None;
        }
        let x = m.solve(&self.coords(v))?;
        Some(x)
    }
}
