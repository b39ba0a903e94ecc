//! The tangent module `T = A ⊗ V′ / A·(V ⊗ V′)_0` (and its right-handed twin
//! `V′ ⊗ A / (V′ ⊗ V)_0·A`), the braided action `β: T ⊗ A → A`, the symmetric
//! metric, the left-right identification `α`, a partial connection and a
//! projector certifying that `T` is projective.
//!
//! Every structure is parametrized by equivariant maps (one scalar per
//! irreducible component) and pinned by linear constraints solved exactly.

use std::sync::Arc;

use num_rational::BigRational;
use serde_json::{json, Value};

use crate::amodule::Side;
use crate::classical::{rotation_field, rotation_gram, ClassicalHyperboloid};
use crate::derham::{build_sided, DeRhamError, OmegaModule};
use crate::hyperboloid::{
    basis_label, basis_weight, canonical_dim, qlie_bracket, CanonicalElement, ProductTable,
};
use crate::qfield::linalg::{axpy, to_dense, to_sparse, SparseVec};
use crate::qfield::{Echelon, Field, Mat, QCtx};
use crate::uqsl2::{cg_projection, irrep, tensor, Spin};

/// The tangent module has the same shape as `Ω¹`.
pub type TangentModule<F> = OmegaModule<F>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TangentError {
    #[error(transparent)]
    Module(#[from] DeRhamError),
    #[error("no solution: the {block} constraints are inconsistent")]
    NoSolution { block: String },
    #[error("solution space modulo scale has dimension {dim}")]
    AmbiguousSolution { dim: usize },
    #[error("product table of degree {got} is too small, need {need}")]
    TableTooSmall { need: usize, got: usize },
    #[error("classical oracle: {0}")]
    Classical(String),
}

/// Builds `T` on the given side, with its isotypic table up to `cutoff`.
pub fn build_tangent<F: Field>(
    table: Arc<ProductTable<F>>,
    ctx: &QCtx<F>,
    side: Side,
    cutoff: usize,
) -> Result<TangentModule<F>, TangentError> {
    Ok(build_sided(table, ctx, side, 1, cutoff)?)
}

fn need_degree<F: Field>(table: &ProductTable<F>, need: usize) -> Result<(), TangentError> {
    if table.degree() < need {
        return Err(TangentError::TableTooSmall {
            need,
            got: table.degree(),
        });
    }
    Ok(())
}

fn spin(j: usize) -> Spin {
    Spin::integer(j as u32)
}

/// Normalized highest-weight vector of the spin-`s` part of `V ⊗ V`.
fn vv_highest_weight<F: Field>(ctx: &QCtx<F>, s: usize) -> Vec<F> {
    let v = irrep(Spin(2), ctx);
    tensor(&v, &v).highest_weight_vectors(2 * s as i64).remove(0)
}

/// The `F`-orbit `F^k h / [k]!` of a highest-weight vector of `V ⊗ V`.
fn vv_orbit<F: Field>(ctx: &QCtx<F>, s: usize) -> Vec<Vec<F>> {
    let v = irrep(Spin(2), ctx);
    let vv = tensor(&v, &v);
    let mut out = vec![vv_highest_weight(ctx, s)];
    for k in 1..=2 * s {
        let next = vv.f().mul_vec(out.last().unwrap());
        let inv = ctx.qint(k as i64).inverse().expect("q is a root of unity");
        out.push(next.iter().map(|x| x.times(&inv)).collect());
    }
    out
}

fn add_scaled<F: Field>(dst: &mut [F], c: &F, src: &[F]) {
    if c.is_zero() {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d = d.plus(&c.times(s));
        }
    }
}

/// Kernel of the system whose `j`-th column is `cols[j]`, with the number of
/// nonzero constraint rows.
fn column_kernel<F: Field>(cols: &[Vec<F>]) -> (Vec<Vec<F>>, usize) {
    let n = cols.len();
    let m = cols.first().map_or(0, Vec::len);
    let mut e = Echelon::new(n);
    let mut count = 0;
    for r in 0..m {
        let row: SparseVec<F> = (0..n)
            .filter(|&j| !cols[j][r].is_zero())
            .map(|j| (j, cols[j][r].clone()))
            .collect();
        if !row.is_empty() {
            count += 1;
            e.insert(&row);
        }
    }
    (e.kernel_basis().iter().map(|v| to_dense(v, n)).collect(), count)
}

/// Left multiplication `x_a · y` in canonical coordinates.
fn times_generator<F: Field>(table: &ProductTable<F>, a: usize, y: &[F]) -> Vec<F> {
    let mut out = vec![F::zero(); table.dim()];
    for (idx, c) in y.iter().enumerate() {
        if !c.is_zero() {
            let prod = table.basis_product(1 + a, idx).expect("product within the table truncation");
            for (&k, x) in prod {
                out[k] = out[k].plus(&c.times(x));
            }
        }
    }
    out
}

/// Equivariant maps `V′ ⊗ V_i → V_s`, `s ∈ {i-1, i, i+1}`, as projection
/// matrices indexed by `[i][s - i + 1]`.
#[derive(Clone, Debug)]
struct FusionMaps<F: Field> {
    maps: Vec<[Mat<F>; 3]>,
}

impl<F: Field> FusionMaps<F> {
    fn new(ctx: &QCtx<F>, top: usize) -> Self {
        let maps = (0..=top)
            .map(|i| {
                let proj = |s: usize| cg_projection(Spin(2), spin(i), spin(s), ctx);
                let down = if i == 0 {
                    Mat::zeros(1, 3)
                } else {
                    proj(i - 1)
                };
                let same = if i == 0 { Mat::zeros(1, 3) } else { proj(i) };
                [down, same, proj(i + 1)]
            })
            .collect();
        FusionMaps { maps }
    }

    /// `Σ_i Σ_t consts[i][t] P^{i→s}(e′_b ⊗ h_i)` on canonical coordinates.
    fn apply(&self, consts: &[[F; 3]], b: usize, h: &[F], out_dim: usize) -> Vec<F> {
        let mut out = vec![F::zero(); out_dim];
        for idx in 0..h.len() {
            if h[idx].is_zero() {
                continue;
            }
            let (i, k) = basis_label(idx);
            assert!(i < consts.len(), "argument of spin {i} outside the domain of the action");
            let d = 2 * i + 1;
            for (t, u) in consts[i].iter().enumerate() {
                if u.is_zero() || (i == 0 && t != 2) {
                    continue;
                }
                let s = i + t - 1;
                let col = self.maps[i][t].column(b * d + k);
                let c = u.times(&h[idx]);
                for (m, x) in col.iter().enumerate() {
                    if !x.is_zero() {
                        let pos = s * s + m;
                        assert!(pos < out_dim, "image leaves the truncation");
                        out[pos] = out[pos].plus(&c.times(x));
                    }
                }
            }
        }
        out
    }
}

/// The slot `(i, t)` of the structure constant `V′ ⊗ V_i → V_{i+t-1}`.
fn slots(top: usize) -> Vec<(usize, usize)> {
    let mut out = vec![(0, 2)];
    for i in 1..=top {
        out.extend([(i, 0), (i, 1), (i, 2)]);
    }
    out
}

fn unit_consts<F: Field>(len: usize, slot: (usize, usize)) -> Vec<[F; 3]> {
    let mut c = vec![[F::zero(), F::zero(), F::zero()]; len];
    c[slot.0][slot.1] = F::one();
    c
}

/// Structure constants of the classical rotation action `e′_b ↦ ad(e_b)` on
/// polynomials of spin `≤ top`, relative to the `q = 1` fusion maps.
pub fn classical_rotation_constants(top: usize) -> Result<Vec<[BigRational; 3]>, TangentError> {
    let ctx = QCtx::<BigRational>::classical();
    let hyper = ClassicalHyperboloid::new(BigRational::from_integer(1.into()), top + 1);
    let fusion = FusionMaps::new(&ctx, top);
    let dim = canonical_dim(top + 1);
    let mut out = Vec::new();
    for i in 0..=top {
        let active: Vec<usize> = if i == 0 { vec![2] } else { vec![0, 1, 2] };
        let mut cols = vec![Vec::new(); active.len()];
        let mut rhs = Vec::new();
        for b in 0..3 {
            for k in 0..=2 * i {
                let idx = i * i + k;
                let mut h = vec![BigRational::from_integer(0.into()); canonical_dim(i)];
                h[idx] = BigRational::from_integer(1.into());
                for (n, &t) in active.iter().enumerate() {
                    let u = unit_consts(i + 1, (i, t));
                    cols[n].extend(fusion.apply(&u, b, &h, dim));
                }
                let mut img = hyper.coords(&rotation_field(b, hyper.basis_poly(idx)));
                img.resize(dim, BigRational::from_integer(0.into()));
                rhs.extend(img);
            }
        }
        let m = Mat::from_columns(&cols, rhs.len());
        let x = m
            .solve(&rhs)
            .ok_or_else(|| TangentError::Classical(format!("rotations are not equivariant on spin {i}")))?;
        let mut row = [BigRational::from_integer(0.into()), BigRational::from_integer(0.into()), BigRational::from_integer(0.into())];
        for (n, &t) in active.iter().enumerate() {
            row[t] = x[n].clone();
        }
        out.push(row);
    }
    Ok(out)
}

/// `β` on `V′ ⊗ V_i` for `i ≤ cap + 1`, with the factor `σ` of the closure
/// relation and the diagnostics of the solve.
#[derive(Clone, Debug)]
pub struct BraidedAction<F: Field> {
    pub cap: usize,
    /// `constants[i] = [to V_{i-1}, to V_i, to V_{i+1}]`.
    pub constants: Vec<[F; 3]>,
    pub sigma: F,
    pub nu: F,
    /// Unknowns and nonzero rows of the system "the submodule acts as zero".
    pub unknown_count: usize,
    pub constraint_count: usize,
    /// Dimension of the solution space of that linear system.
    pub linear_solution_dim: usize,
    /// First-order deformations of the full solution modulo scale.
    pub deformation_dim: usize,
    fusion: FusionMaps<F>,
}

struct BraidedSystem<'a, F: Field> {
    table: &'a ProductTable<F>,
    fusion: FusionMaps<F>,
    /// `(V ⊗ V′)_0` generator of the submodule.
    generator: Vec<F>,
    /// `F`-orbit of the spin-1 part of `V′ ⊗ V′` and its bracket images.
    pairs: Vec<Vec<F>>,
    brackets: Vec<Vec<F>>,
    dim: usize,
}

impl<'a, F: Field> BraidedSystem<'a, F> {
    fn new(table: &'a ProductTable<F>, ctx: &QCtx<F>, top: usize) -> Self {
        let br = qlie_bracket(ctx).matrix;
        let pairs = vv_orbit(ctx, 1);
        let brackets = pairs.iter().map(|y| br.mul_vec(y)).collect();
        BraidedSystem {
            table,
            fusion: FusionMaps::new(ctx, top),
            generator: vv_highest_weight(ctx, 0),
            pairs,
            brackets,
            dim: table.dim(),
        }
    }

    fn act(&self, consts: &[[F; 3]], b: usize, h: &[F]) -> Vec<F> {
        self.fusion.apply(consts, b, h, self.dim)
    }

    /// `Σ g_ab x_a β(e′_b ⊗ h)`.
    fn annihilation(&self, consts: &[[F; 3]], h: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for b in 0..3 {
            let img = self.act(consts, b, h);
            for a in 0..3 {
                let g = &self.generator[a * 3 + b];
                if !g.is_zero() {
                    add_scaled(&mut out, g, &times_generator(self.table, a, &img));
                }
            }
        }
        out
    }

    /// `Σ y_ab β_outer(e′_a ⊗ β_inner(e′_b ⊗ h))`.
    fn composite(&self, outer: &[[F; 3]], inner: &[[F; 3]], y: &[F], h: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for b in 0..3 {
            let img = self.act(inner, b, h);
            for a in 0..3 {
                add_scaled(&mut out, &y[a * 3 + b], &self.act(outer, a, &img));
            }
        }
        out
    }

    /// `Σ_c [y]_c β(e′_c ⊗ h)`.
    fn bracket_term(&self, consts: &[[F; 3]], m: usize, h: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for c in 0..3 {
            add_scaled(&mut out, &self.brackets[m][c], &self.act(consts, c, h));
        }
        out
    }

    fn closure_residual(&self, consts: &[[F; 3]], sigma: &F, m: usize, h: &[F]) -> Vec<F> {
        let mut r = self.composite(consts, consts, &self.pairs[m], h);
        add_scaled(&mut r, &sigma.negated(), &self.bracket_term(consts, m, h));
        r
    }
}

fn basis_vec<F: Field>(dim: usize, idx: usize) -> Vec<F> {
    let mut v = vec![F::zero(); dim];
    v[idx] = F::one();
    v
}

/// Solves for `β` on `A_{≤cap+1}` from: the submodule acts as zero on
/// `A_{≤cap}`, the closure relation `Σ y_ab β_a β_b = σ β([y]_q)` on
/// `A_{≤cap+1}`, and the classical limit (rotation fields; only the
/// spin-preserving constants survive there, which selects the branch with
/// vanishing spin-changing constants and fixes the scale through spin 1).
pub fn solve_braided_action<F: Field>(
    table: &ProductTable<F>,
    ctx: &QCtx<F>,
    cap: usize,
) -> Result<BraidedAction<F>, TangentError> {
    need_degree(table, cap + 2)?;
    let top = cap + 1;
    let len = top + 1;
    let sys = BraidedSystem::new(table, ctx, top);
    let dim = sys.dim;

    // linear stage: the submodule acts as zero on A_{≤cap}
    let lin_slots = slots(cap);
    let cols: Vec<Vec<F>> = lin_slots
        .iter()
        .map(|&slot| {
            let u = unit_consts::<F>(len, slot);
            (0..canonical_dim(cap))
                .flat_map(|idx| sys.annihilation(&u, &basis_vec(canonical_dim(cap), idx)))
                .collect()
        })
        .collect();
    let (kernel, constraint_count) = column_kernel(&cols);
    let spin_preserving = |slot: &(usize, usize)| slot.1 == 1;
    let preserving_ok = lin_slots.iter().enumerate().all(|(j, s)| {
        !spin_preserving(s) || {
            let mut e = Echelon::new(lin_slots.len());
            for v in &kernel {
                e.insert(&to_sparse(v));
            }
            e.contains(&to_sparse(&basis_vec::<F>(lin_slots.len(), j)))
        }
    });
    if !preserving_ok {
        return Err(TangentError::NoSolution {
            block: "submodule annihilation".into(),
        });
    }

    // closure relation per spin with spin-preserving constants only:
    // b_i² μ_i = σ b_i ρ_i, i.e. b_i = σ / κ_i with κ_i = ρ_i / μ_i
    let mut kappa = vec![F::zero(); len];
    for i in 1..=top {
        let u = unit_consts::<F>(len, (i, 1));
        let mut quad = Vec::new();
        let mut lin = Vec::new();
        for m in 0..3 {
            for k in 0..=2 * i {
                let h = basis_vec(canonical_dim(top), i * i + k);
                quad.extend(sys.composite(&u, &u, &sys.pairs[m], &h));
                lin.extend(sys.bracket_term(&u, m, &h));
            }
        }
        let pivot = lin.iter().position(|x| !x.is_zero()).ok_or_else(|| TangentError::NoSolution {
            block: format!("closure relation (spin {i})"),
        })?;
        let ratio = quad[pivot].over(&lin[pivot]);
        if quad.iter().zip(&lin).any(|(a, b)| *a != ratio.times(b)) || ratio.is_zero() {
            return Err(TangentError::NoSolution {
                block: format!("closure relation (spin {i})"),
            });
        }
        kappa[i] = ratio;
    }
    let classical = classical_rotation_constants(1)?;
    let b1 = F::from_rational(&classical[1][1]);
    let sigma = b1.times(&kappa[1]);
    let mut constants = vec![[F::zero(), F::zero(), F::zero()]; len];
    for i in 1..=top {
        constants[i][1] = sigma.over(&kappa[i]);
    }

    // exact verification of every block
    for idx in 0..canonical_dim(cap) {
        let h = basis_vec(canonical_dim(cap), idx);
        if sys.annihilation(&constants, &h).iter().any(|x| !x.is_zero()) {
            return Err(TangentError::NoSolution {
                block: "submodule annihilation".into(),
            });
        }
    }
    for idx in 0..canonical_dim(top) {
        let h = basis_vec(canonical_dim(top), idx);
        for m in 0..3 {
            if sys.closure_residual(&constants, &sigma, m, &h).iter().any(|x| !x.is_zero()) {
                return Err(TangentError::NoSolution {
                    block: "closure relation".into(),
                });
            }
        }
    }

    // first-order deformations: all constants except the spin-changing ones
    // at the boundary spin, plus σ
    let def_slots: Vec<(usize, usize)> = slots(top).into_iter().filter(|&(i, t)| i < top || t == 1).collect();
    let hs: Vec<Vec<F>> = (0..canonical_dim(top)).map(|idx| basis_vec(canonical_dim(top), idx)).collect();
    let mut cols: Vec<Vec<F>> = def_slots
        .iter()
        .map(|&slot| {
            let u = unit_consts::<F>(len, slot);
            let mut col = Vec::new();
            for h in &hs[..canonical_dim(cap)] {
                col.extend(sys.annihilation(&u, h));
            }
            for h in &hs {
                for m in 0..3 {
                    let mut r = sys.composite(&u, &constants, &sys.pairs[m], h);
                    add_scaled(&mut r, &F::one(), &sys.composite(&constants, &u, &sys.pairs[m], h));
                    add_scaled(&mut r, &sigma.negated(), &sys.bracket_term(&u, m, h));
                    col.extend(r);
                }
            }
            col
        })
        .collect();
    let mut sigma_col = vec![F::zero(); canonical_dim(cap) * dim];
    for h in &hs {
        for m in 0..3 {
            sigma_col.extend(sys.bracket_term(&constants, m, h).iter().map(|x| x.negated()));
        }
    }
    cols.push(sigma_col);
    let (tangent_kernel, _) = column_kernel(&cols);
    let deformation_dim = tangent_kernel.len().saturating_sub(1);

    Ok(BraidedAction {
        cap,
        constants,
        nu: sigma.clone(),
        sigma,
        unknown_count: lin_slots.len(),
        constraint_count,
        linear_solution_dim: kernel.len(),
        deformation_dim,
        fusion: sys.fusion,
    })
}

impl<F: Field> BraidedAction<F> {
    /// `β(e′_b ⊗ h)` for `h` of spin at most `cap + 1`.
    pub fn act(&self, b: usize, h: &CanonicalElement<F>, out_degree: usize) -> CanonicalElement<F> {
        let n = h.degree().map_or(1, |d| canonical_dim(d));
        CanonicalElement {
            coeffs: self.fusion.apply(&self.constants, b, &h.coeffs[..n], canonical_dim(out_degree)),
        }
    }

    /// `β(t ⊗ g)` for `t` a representative in the left free module `A ⊗ V′`,
    /// extended by `β(f·t ⊗ g) = f·β(t ⊗ g)`.
    pub fn act_on(&self, t: &TangentModule<F>, rep: &SparseVec<F>, g: &CanonicalElement<F>) -> CanonicalElement<F> {
        let table = t.free().table();
        let d = table.degree();
        let mut out = CanonicalElement::zero(d);
        for (&p, x) in rep {
            let (f, b) = t.free().split(p);
            let img = self.act(b, g, d);
            let prod = table
                .multiply(&CanonicalElement::basis(d, f), &img)
                .expect("product within the table truncation");
            out = out.plus(&prod.scale(x));
        }
        out
    }

    /// Checks `β(f·e′_b ⊗ g) = f·β(e′_b ⊗ g)` with `f·e′_b` reduced modulo the
    /// submodule, for all canonical `f`, `g` with `deg f + deg g < degree`
    /// and `deg g ≤ cap`.
    pub fn module_compatible(&self, t: &TangentModule<F>) -> bool {
        let table = t.free().table();
        let d = table.degree();
        let mut jobs = Vec::new();
        for f in 0..canonical_dim(d - 1) {
            let df = basis_label(f).0;
            for g in 0..canonical_dim(self.cap.min(d - 1 - df)) {
                for b in 0..3 {
                    jobs.push((f, g, b));
                }
            }
        }
        use rayon::prelude::*;
        jobs.par_iter().all(|&(f, g, b)| {
            let mut e = SparseVec::new();
            e.insert(t.free().index(0, b), F::one());
            let ft = t.quotient().reduce(&t.free().multiply_basis(f, &e));
            let gel = CanonicalElement::basis(d, g);
            let lhs = self.act_on(t, &ft, &gel);
            let rhs = table
                .multiply(&CanonicalElement::basis(d, f), &self.act(b, &gel, d))
                .expect("product within the table truncation");
            lhs == rhs
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cap": self.cap,
            "constants": self.constants.iter().map(|c| c.iter().map(|x| x.canonical_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "sigma": self.sigma.canonical_string(),
            "nu": self.nu.canonical_string(),
            "unknown_count": self.unknown_count,
            "constraint_count": self.constraint_count,
            "solution_dim": self.linear_solution_dim,
            "deformation_dim": self.deformation_dim,
        })
    }
}

/// The action of the quantum group generators `E`, `-[H]`, `-F` on `A` in
/// place of `e′_0, e′_1, e′_2`. Returns `true` if it kills the submodule on
/// `A_{≤cap}` (it does at `q = 1` only).
pub fn generator_action_annihilates<F: Field>(table: &ProductTable<F>, ctx: &QCtx<F>, cap: usize) -> bool {
    let d = table.degree();
    assert!(cap + 2 <= d);
    let g = vv_highest_weight(ctx, 0);
    let arep = crate::hyperboloid::algebra_rep(d, ctx);
    let op = |b: usize, h: &[F]| -> Vec<F> {
        match b {
            0 => arep.e().mul_vec(h),
            1 => h
                .iter()
                .enumerate()
                .map(|(i, x)| x.times(&ctx.qint(basis_weight(i))).negated())
                .collect(),
            _ => arep.f().mul_vec(h).iter().map(|x| x.negated()).collect(),
        }
    };
    (0..canonical_dim(cap)).all(|idx| {
        let h = basis_vec::<F>(table.dim(), idx);
        let mut out = vec![F::zero(); table.dim()];
        for b in 0..3 {
            let img = op(b, &h);
            for a in 0..3 {
                add_scaled(&mut out, &g[a * 3 + b], &times_generator(table, a, &img));
            }
        }
        out.iter().all(|x| x.is_zero())
    })
}

/// The symmetric metric `<,>: T_l ⊗ T_r → A` on generators:
/// `<e′_a, e′_b> = a·P₂(e′_a ⊗ e′_b) + b·P₀(e′_a ⊗ e′_b)`.
#[derive(Clone, Debug)]
pub struct MetricData<F: Field> {
    pub cap: usize,
    pub a: F,
    pub b: F,
    /// Dimension of the equivariant family before and after the constraints.
    pub family_dim: usize,
    pub solution_dim: usize,
    /// The right-handed constraint holds once the left-handed one is imposed.
    pub right_constraint_automatic: bool,
    /// `<e′_a, e′_b>` at index `3a + b`.
    pub pairing: Vec<CanonicalElement<F>>,
}

fn metric_entries<F: Field>(ctx: &QCtx<F>, u: &[F], degree: usize) -> Vec<CanonicalElement<F>> {
    let mut out = vec![CanonicalElement::<F>::zero(degree); 9];
    for (t, c) in u.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let p = cg_projection(Spin(2), Spin(2), spin(t), ctx);
        for (n, entry) in out.iter_mut().enumerate() {
            for m in 0..=2 * t {
                let x = p.get(m, n);
                if !x.is_zero() {
                    entry.coeffs[t * t + m] = entry.coeffs[t * t + m].plus(&c.times(x));
                }
            }
        }
    }
    out
}

/// `Σ g_ab x_a <e′_b, e′_c>` and `Σ g_bc <e′_a, e′_b> x_c` for `c` resp. `a`.
fn metric_residuals<F: Field>(
    table: &ProductTable<F>,
    g: &[F],
    entries: &[CanonicalElement<F>],
) -> (Vec<F>, Vec<F>) {
    let d = table.degree();
    let x = |a: usize| CanonicalElement::basis(d, 1 + a);
    let mut left = Vec::new();
    let mut right = Vec::new();
    for fixed in 0..3 {
        let mut l = CanonicalElement::zero(d);
        let mut r = CanonicalElement::zero(d);
        for a in 0..3 {
            for b in 0..3 {
                let gab = &g[a * 3 + b];
                if gab.is_zero() {
                    continue;
                }
                l = l.plus(&table.multiply(&x(a), &entries[b * 3 + fixed]).unwrap().scale(gab));
                r = r.plus(&table.multiply(&entries[fixed * 3 + a], &x(b)).unwrap().scale(gab));
            }
        }
        left.extend(l.coeffs);
        right.extend(r.coeffs);
    }
    (left, right)
}

/// Spin-2 and spin-0 coefficients of the classical Gram matrix of the
/// rotation fields on the hyperboloid with Casimir `c`.
pub fn classical_gram_coefficients(c: &BigRational) -> Result<(BigRational, BigRational), TangentError> {
    let ctx = QCtx::<BigRational>::classical();
    let hyper = ClassicalHyperboloid::new(c.clone(), 2);
    let gram = rotation_gram();
    let mut rhs = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            rhs.extend(hyper.coords(&gram[a][b]));
        }
    }
    let cols: Vec<Vec<BigRational>> = (0..3)
        .map(|t| {
            let mut u = vec![BigRational::from_integer(0.into()); 3];
            u[t] = BigRational::from_integer(1.into());
            metric_entries(&ctx, &u, 2).into_iter().flat_map(|e| e.coeffs).collect()
        })
        .collect();
    let x = Mat::from_columns(&cols, rhs.len())
        .solve(&rhs)
        .ok_or_else(|| TangentError::Classical("Gram matrix is not equivariant".into()))?;
    if !x[1].is_zero() {
        return Err(TangentError::Classical("Gram matrix has a spin-1 part".into()));
    }
    Ok((x[2].clone(), x[0].clone()))
}

/// Solves for the symmetric metric on generators, normalized so that its
/// `q = 1` limit is the classical Gram matrix for the given `c`.
pub fn solve_metric<F: Field>(
    table: &ProductTable<F>,
    ctx: &QCtx<F>,
    c: &BigRational,
    cap: usize,
) -> Result<MetricData<F>, TangentError> {
    need_degree(table, cap.max(3))?;
    let d = table.degree();
    let g = vv_highest_weight(ctx, 0);
    let unit = |t: usize| basis_vec::<F>(3, t);
    let mut cols = Vec::new();
    for t in 0..3 {
        let (l, _) = metric_residuals(table, &g, &metric_entries(ctx, &unit(t), d));
        let mut col = l;
        // symmetry: no spin-1 part
        col.push(if t == 1 { F::one() } else { F::zero() });
        cols.push(col);
    }
    let (kernel, _) = column_kernel(&cols);
    let family_dim = 2;
    if kernel.is_empty() {
        return Err(TangentError::NoSolution {
            block: "metric".into(),
        });
    }
    if kernel.len() > 1 {
        return Err(TangentError::AmbiguousSolution { dim: kernel.len() });
    }
    let v = &kernel[0];
    let (a_cl, b_cl) = classical_gram_coefficients(c)?;
    let scale = if !b_cl.is_zero() {
        F::from_rational(&b_cl).over(&v[0])
    } else {
        F::from_rational(&a_cl).over(&v[2])
    };
    let u: Vec<F> = v.iter().map(|x| x.times(&scale)).collect();
    let pairing = metric_entries(ctx, &u, d);
    let (_, right) = metric_residuals(table, &g, &pairing);
    Ok(MetricData {
        cap,
        a: u[2].clone(),
        b: u[0].clone(),
        family_dim,
        solution_dim: kernel.len(),
        right_constraint_automatic: right.iter().all(|x| x.is_zero()),
        pairing,
    })
}

impl<F: Field> MetricData<F> {
    pub fn a_over_b(&self) -> Option<F> {
        self.b.inverse().map(|inv| self.a.times(&inv))
    }

    /// `<Σ f_a e′_a, Σ e′_b h_b> = Σ f_a <e′_a, e′_b> h_b` on representatives.
    pub fn pair(&self, tl: &TangentModule<F>, tr: &TangentModule<F>, left: &SparseVec<F>, right: &SparseVec<F>) -> CanonicalElement<F> {
        let table = tl.free().table();
        let d = table.degree();
        let mut out = CanonicalElement::zero(d);
        for (&p, x) in left {
            let (f, a) = tl.free().split(p);
            for (&r, y) in right {
                let (h, b) = tr.free().split(r);
                let inner = table.multiply(&CanonicalElement::basis(d, f), &self.pairing[a * 3 + b]).expect("pairing within the truncation");
                let full = table.multiply(&inner, &CanonicalElement::basis(d, h)).expect("pairing within the truncation");
                out = out.plus(&full.scale(&x.times(y)));
            }
        }
        out
    }

    /// The pairing vanishes when either argument lies in the defining
    /// submodule, for all generator multiples and test vectors whose total
    /// degree fits the truncation.
    pub fn vanishes_on_submodules(&self, tl: &TangentModule<F>, tr: &TangentModule<F>, ctx: &QCtx<F>) -> bool {
        let d = tl.free().table().degree();
        let gl = tl.free().component_highest_weights(ctx, 1, Spin(0)).remove(0);
        let gr = tr.free().component_highest_weights(ctx, 1, Spin(0)).remove(0);
        let budget = d.saturating_sub(3);
        for f in 0..canonical_dim(budget) {
            let rest = budget - basis_label(f).0;
            let nl = tl.free().multiply_basis(f, &gl);
            let nr = tr.free().multiply_basis(f, &gr);
            for h in 0..canonical_dim(rest) {
                for b in 0..3 {
                    let mut e = SparseVec::new();
                    e.insert(tr.free().index(0, b), F::one());
                    let y = tr.free().multiply_basis(h, &e);
                    if !self.pair(tl, tr, &nl, &y).is_zero() {
                        return false;
                    }
                    let mut e = SparseVec::new();
                    e.insert(tl.free().index(0, b), F::one());
                    let x = tl.free().multiply_basis(h, &e);
                    if !self.pair(tl, tr, &x, &nr).is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cap": self.cap,
            "a": self.a.canonical_string(),
            "b": self.b.canonical_string(),
            "a_over_b": self.a_over_b().map(|x| x.canonical_string()),
            "family_dim": self.family_dim,
            "solution_dim": self.solution_dim,
            "right_constraint_automatic": self.right_constraint_automatic,
        })
    }
}

/// One scalar of `α` on a pair of matching components.
#[derive(Clone, Debug)]
pub struct AlphaEntry<F: Field> {
    pub spin: usize,
    pub algebra_spin: usize,
    pub left: String,
    pub right: String,
    pub value: F,
}

/// `α: T_l → T_r` on spins `1..=cutoff`, one scalar per component.
#[derive(Clone, Debug)]
pub struct AlphaMap<F: Field> {
    pub entries: Vec<AlphaEntry<F>>,
}

/// Spin-`s` highest-weight coefficient of the image of a component vector
/// under `V′ → V`, using the product of `table`.
fn replaced_image<F: Field>(t: &TangentModule<F>, product: &ProductTable<F>, h: &SparseVec<F>, s: usize) -> F {
    let d = product.degree();
    let mut out = CanonicalElement::zero(d);
    for (&p, x) in h {
        let (f, b) = t.free().split(p);
        let (l, r) = match t.free().side() {
            Side::Left => (f, 1 + b),
            Side::Right => (1 + b, f),
        };
        let prod = product
            .multiply(&CanonicalElement::basis(d, l), &CanonicalElement::basis(d, r))
            .expect("product within the table truncation");
        out = out.plus(&prod.scale(x));
    }
    out.coeffs[s * s].clone()
}

/// Builds `α`: identity on `V′`; on `(V_i⊗V′)_{i+1}` the scalar making the
/// images under `V′ → V` agree, on `(V_i⊗V′)_i` the scalar making them
/// opposite. Images are taken in `product`, the algebra with `ħ = 1`.
pub fn build_alpha<F: Field>(
    tl: &TangentModule<F>,
    tr: &TangentModule<F>,
    product: &ProductTable<F>,
) -> Result<AlphaMap<F>, TangentError> {
    let cutoff = tl.cutoff.min(tr.cutoff);
    need_degree(product, cutoff + 1)?;
    let mut entries = Vec::new();
    for j in 1..=cutoff {
        for (cl, cr) in tl.components(j).iter().zip(tr.components(j)) {
            let i = cl.algebra_spin;
            let value = if i == 0 {
                F::one()
            } else {
                let l = replaced_image(tl, product, &cl.highest_weight, j);
                let r = replaced_image(tr, product, &cr.highest_weight, j);
                let inv = r.inverse().ok_or_else(|| TangentError::NoSolution {
                    block: format!("alpha (spin {j}, {})", cr.label),
                })?;
                let ratio = l.times(&inv);
                if j == i {
                    ratio.negated()
                } else {
                    ratio
                }
            };
            if value.is_zero() {
                return Err(TangentError::NoSolution {
                    block: format!("alpha (spin {j}, {})", cl.label),
                });
            }
            entries.push(AlphaEntry {
                spin: j,
                algebra_spin: i,
                left: cl.label.clone(),
                right: cr.label.clone(),
                value,
            });
        }
    }
    Ok(AlphaMap { entries })
}

impl<F: Field> AlphaMap<F> {
    pub fn is_invertible(&self) -> bool {
        self.entries.iter().all(|e| !e.value.is_zero())
    }

    /// Applies `α` to a class in `T_l` given in the isotypic basis of
    /// spins `1..=cutoff`, returning coordinates in the same basis of `T_r`.
    pub fn apply_isotypic(&self, v: &[F]) -> Vec<F> {
        let mut out = Vec::with_capacity(v.len());
        let mut pos = 0;
        for e in &self.entries {
            for x in &v[pos..pos + 2 * e.spin + 1] {
                out.push(x.times(&e.value));
            }
            pos += 2 * e.spin + 1;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|e| json!({"spin": e.spin, "left": e.left, "right": e.right, "value": e.value.canonical_string()}))
                .collect(),
        )
    }
}

/// Coefficients `ε` with `flip(h_l) ≡ ε h_r` in `T_r`, for each matching
/// pair of highest-weight representatives; `None` if some flip is not a
/// multiple of the matching representative.
pub fn flip_coefficients<F: Field>(tl: &TangentModule<F>, tr: &TangentModule<F>) -> Option<Vec<F>> {
    let cutoff = tl.cutoff.min(tr.cutoff);
    let mut out = Vec::new();
    for j in 1..=cutoff {
        let rights: Vec<SparseVec<F>> = tr.components(j).iter().map(|c| c.highest_weight.clone()).collect();
        for (n, cl) in tl.components(j).iter().enumerate() {
            let flipped: SparseVec<F> = cl
                .highest_weight
                .iter()
                .map(|(&p, x)| {
                    let (f, b) = tl.free().split(p);
                    (tr.free().index(f, b), x.clone())
                })
                .collect();
            let x = tr.quotient().express(&flipped, &rights)?;
            if x.iter().enumerate().any(|(m, y)| m != n && !y.is_zero()) {
                return None;
            }
            out.push(x[n].clone());
        }
    }
    Some(out)
}

/// `∇(e′_a ⊗ e′_b)` as a combination of the spin-1 and spin-2 components of
/// `T_l`, one scalar per component.
#[derive(Clone, Debug)]
pub struct ConnectionData<F: Field> {
    pub cap: usize,
    pub labels: Vec<String>,
    pub constants: Vec<F>,
    pub solution_dim: usize,
    pub unknown_count: usize,
    pub constraint_count: usize,
    /// `∇(e′_a ⊗ e′_b)` in the free module, index `3a + b`.
    values: Vec<SparseVec<F>>,
}

fn connection_values<F: Field>(
    ctx: &QCtx<F>,
    targets: &[(usize, Vec<SparseVec<F>>)],
    u: &[F],
) -> Vec<SparseVec<F>> {
    let mut out = vec![SparseVec::new(); 9];
    for ((s, orbit), c) in targets.iter().zip(u) {
        if c.is_zero() {
            continue;
        }
        let p = cg_projection(Spin(2), Spin(2), spin(*s), ctx);
        for (n, v) in out.iter_mut().enumerate() {
            for (k, o) in orbit.iter().enumerate() {
                let x = p.get(k, n);
                if !x.is_zero() {
                    axpy(v, &c.times(x), o);
                }
            }
        }
    }
    out
}

/// Constraint vectors of `∇`: the spin-1 part of `V′ ⊗ V′` goes to the
/// q-bracket, and `∇` of the submodule generator vanishes in `T_l`.
fn connection_constraints<F: Field>(t: &TangentModule<F>, ctx: &QCtx<F>, values: &[SparseVec<F>]) -> Vec<F> {
    let q = t.quotient();
    let free = t.free();
    let y = vv_highest_weight(ctx, 1);
    let mut lhs = SparseVec::new();
    for (n, c) in y.iter().enumerate() {
        axpy(&mut lhs, c, &values[n]);
    }
    let mut out = q.coords(&lhs);
    let g = vv_highest_weight(ctx, 0);
    for c in 0..3 {
        let mut acc = SparseVec::new();
        for a in 0..3 {
            for b in 0..3 {
                let gab = &g[a * 3 + b];
                if !gab.is_zero() {
                    axpy(&mut acc, gab, &free.multiply_basis(1 + a, &values[b * 3 + c]));
                }
            }
        }
        out.extend(q.coords(&acc));
    }
    out
}

/// Solves for `∇` on generators. The solution set is affine; its dimension
/// is that of the homogeneous system.
pub fn solve_connection<F: Field>(
    table: Arc<ProductTable<F>>,
    ctx: &QCtx<F>,
    cap: usize,
) -> Result<ConnectionData<F>, TangentError> {
    need_degree(&table, cap.max(3))?;
    let t = build_tangent(table, ctx, Side::Left, 2)?;
    let mut targets = Vec::new();
    let mut labels = Vec::new();
    for s in 1..=2 {
        for comp in t.components(s) {
            targets.push((s, t.free().orbit(ctx, &comp.highest_weight, spin(s))));
            labels.push(comp.label.clone());
        }
    }
    let n = targets.len();
    let cols: Vec<Vec<F>> = (0..n)
        .map(|j| connection_constraints(&t, ctx, &connection_values(ctx, &targets, &basis_vec(n, j))))
        .collect();
    // right-hand side: the bracket of the spin-1 highest weight vector
    let br = qlie_bracket(ctx).matrix;
    let y = vv_highest_weight(ctx, 1);
    let by = br.mul_vec(&y);
    let mut target = SparseVec::new();
    for (cidx, x) in by.iter().enumerate() {
        if !x.is_zero() {
            target.insert(t.free().index(0, cidx), x.clone());
        }
    }
    let mut rhs = t.quotient().coords(&target);
    rhs.resize(cols[0].len(), F::zero());
    let m = Mat::from_columns(&cols, rhs.len());
    let u = m.solve(&rhs).ok_or_else(|| TangentError::NoSolution {
        block: "connection".into(),
    })?;
    let (kernel, constraint_count) = column_kernel(&cols);
    let values = connection_values(ctx, &targets, &u);
    Ok(ConnectionData {
        cap,
        labels,
        constants: u,
        solution_dim: kernel.len(),
        unknown_count: n,
        constraint_count,
        values,
    })
}

impl<F: Field> ConnectionData<F> {
    /// `∇_X e′_b` for `X` a representative in `A ⊗ V′`, extended by
    /// `∇_{fX} Y = f ∇_X Y`.
    pub fn covariant(&self, t: &TangentModule<F>, x: &SparseVec<F>, b: usize) -> SparseVec<F> {
        let mut out = SparseVec::new();
        for (&p, c) in x {
            let (f, a) = t.free().split(p);
            axpy(&mut out, c, &t.free().multiply_basis(f, &self.values[a * 3 + b]));
        }
        out
    }

    /// `∇_{f e′_a} e′_b = f ∇_{e′_a} e′_b` in `T_l` with `f·e′_a` first
    /// reduced modulo the submodule.
    pub fn left_linear(&self, t: &TangentModule<F>, f: &CanonicalElement<F>, a: usize, b: usize) -> bool {
        let mut e = SparseVec::new();
        e.insert(t.free().index(0, a), F::one());
        let fx = t.free().multiply(f, &e);
        let lhs = self.covariant(t, &t.quotient().reduce(&fx), b);
        let rhs = t.free().multiply(f, &self.values[a * 3 + b]);
        let mut diff = lhs;
        axpy(&mut diff, &F::one().negated(), &rhs);
        t.quotient().is_zero(&diff)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cap": self.cap,
            "components": self.labels,
            "constants": self.constants.iter().map(|x| x.canonical_string()).collect::<Vec<_>>(),
            "unknown_count": self.unknown_count,
            "constraint_count": self.constraint_count,
            "solution_dim": self.solution_dim,
        })
    }
}

/// An equivariant left-linear idempotent on `A ⊗ V′` with kernel the
/// defining submodule, given on generators.
#[derive(Clone, Debug)]
pub struct ProjectorCertificate<F: Field> {
    pub cap: usize,
    pub labels: Vec<String>,
    pub constants: Vec<F>,
    pub solution_dim: usize,
    pub idempotent: bool,
    pub kernel_matches: bool,
    pub image_matches: bool,
}

/// Solves for the projector on `A_{≤cap+2} ⊗ V′` and certifies it.
pub fn projectivity_certificate<F: Field>(
    table: Arc<ProductTable<F>>,
    ctx: &QCtx<F>,
    cap: usize,
) -> Result<ProjectorCertificate<F>, TangentError> {
    need_degree(&table, cap + 2)?;
    let d = table.degree();
    let t = build_tangent(table, ctx, Side::Left, 1)?;
    let free = t.free();
    let q = t.quotient();
    let mut targets = Vec::new();
    let mut labels = Vec::new();
    for i in 0..=cap.min(2) {
        for h in free.component_highest_weights(ctx, i, Spin(2)) {
            targets.push(free.orbit(ctx, &h, Spin(2)));
            labels.push(format!("({}⊗V′)_1", ["k", "V", "V_2"][i]));
        }
    }
    let n = targets.len();
    let images = |u: &[F]| -> Vec<SparseVec<F>> {
        (0..3)
            .map(|a| {
                let mut v = SparseVec::new();
                for (o, c) in targets.iter().zip(u) {
                    axpy(&mut v, c, &o[a]);
                }
                v
            })
            .collect()
    };
    let g = free.component_highest_weights(ctx, 1, Spin(0)).remove(0);
    let apply = |imgs: &[SparseVec<F>], v: &SparseVec<F>| -> SparseVec<F> {
        let mut out = SparseVec::new();
        for (&p, c) in v {
            let (f, a) = free.split(p);
            axpy(&mut out, c, &free.multiply_basis(f, &imgs[a]));
        }
        out
    };
    let dim = free.dim();
    let constraints = |u: &[F]| -> Vec<F> {
        let imgs = images(u);
        let mut out = to_dense(&apply(&imgs, &g), dim);
        out.extend(q.coords(&imgs[0]));
        out
    };
    let cols: Vec<Vec<F>> = (0..n).map(|j| constraints(&basis_vec(n, j))).collect();
    let mut e0 = SparseVec::new();
    e0.insert(free.index(0, 0), F::one());
    let mut rhs = vec![F::zero(); dim];
    rhs.extend(q.coords(&e0));
    let m = Mat::from_columns(&cols, rhs.len());
    let u = m.solve(&rhs).ok_or_else(|| TangentError::NoSolution {
        block: "projector".into(),
    })?;
    let (kernel, _) = column_kernel(&cols);
    let imgs = images(&u);

    let basis_elem = |f: usize, a: usize| {
        let mut v = SparseVec::new();
        v.insert(free.index(f, a), F::one());
        v
    };
    let mut idempotent = true;
    for f in 0..canonical_dim(d - 4) {
        for a in 0..3 {
            let p1 = apply(&imgs, &basis_elem(f, a));
            if apply(&imgs, &p1) != p1 {
                idempotent = false;
            }
        }
    }
    let mut image = Echelon::new(dim);
    let mut kernel_matches = true;
    for f in 0..canonical_dim(d - 2) {
        for a in 0..3 {
            let v = basis_elem(f, a);
            let mut r = v.clone();
            axpy(&mut r, &F::one().negated(), &apply(&imgs, &v));
            if !q.is_zero(&r) {
                kernel_matches = false;
            }
            image.insert(&r);
        }
    }
    let n_rows: Vec<SparseVec<F>> = q.submodule().rows().cloned().collect();
    let image_matches = image.rank() == q.submodule().rank() && n_rows.iter().all(|r| image.contains(r));
    Ok(ProjectorCertificate {
        cap,
        labels,
        constants: u,
        solution_dim: kernel.len(),
        idempotent,
        kernel_matches,
        image_matches,
    })
}

impl<F: Field> ProjectorCertificate<F> {
    pub fn certified(&self) -> bool {
        self.idempotent && self.kernel_matches && self.image_matches
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cap": self.cap,
            "components": self.labels,
            "constants": self.constants.iter().map(|x| x.canonical_string()).collect::<Vec<_>>(),
            "solution_dim": self.solution_dim,
            "idempotent": self.idempotent,
            "kernel_matches": self.kernel_matches,
            "image_matches": self.image_matches,
        })
    }
}
