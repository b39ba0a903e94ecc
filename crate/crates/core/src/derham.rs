//! The de Rham type complex `Ω⁰ → Ω¹ → Ω²` on the quantum hyperboloid with
//! `ħ = 0`.
//!
//! `Ω¹ = A ⊗ V′ / A·(V ⊗ V′)_0` and `Ω² = A ⊗ V″ / A·(V ⊗ V″)_1`, where `V′`
//! and `V″` are copies of the spin-1 module. Each spin sector of `Ω¹` has a
//! two-dimensional space of highest-weight vectors, `(V_{j-1}⊗V′)_j` and
//! `(V_j⊗V′)_j`; each sector of `Ω²` has one. The differentials are fixed
//! sector by sector from equivariance, `d₁∘d₀ = 0` and the classical limit.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use serde_json::{json, Value};

use crate::amodule::{FreeModule, QuotientModule, Side};
use crate::classical::{d_form1, d_function, lift_vec, ClassicalHyperboloid, Form1, Poly3};
use crate::hyperboloid::{algebra_rep, canonical_dim, CanonicalElement, ProductTable};
use crate::qfield::linalg::{axpy, scale_sparse, SparseVec};
use crate::qfield::{Field, Mat, QCtx};
use crate::uqsl2::{direct_sum, irrep, Generator, Rep, Spin};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeRhamError {
    #[error("level {level}, spin {spin}: expected multiplicity {expected}, found {got}")]
    MultiplicityMismatch {
        level: usize,
        spin: usize,
        expected: usize,
        got: usize,
    },
    #[error("no differential compatible with the classical limit in spin {spin}")]
    NoSolution { spin: usize },
    #[error("spin cutoff {cutoff} exceeds the truncation degree {degree}")]
    CutoffTooLarge { cutoff: usize, degree: usize },
}

/// One irreducible summand of a spin sector, given by a highest-weight
/// representative in the free module.
#[derive(Clone, Debug)]
pub struct Component<F: Field> {
    pub label: String,
    pub algebra_spin: usize,
    pub highest_weight: SparseVec<F>,
}

/// One of `Ω⁰, Ω¹, Ω²`, truncated, with its isotypic table up to a cutoff.
#[derive(Clone, Debug)]
pub struct OmegaModule<F: Field> {
    pub level: usize,
    pub cutoff: usize,
    quotient: QuotientModule<F>,
    components: BTreeMap<usize, Vec<Component<F>>>,
}

fn prime(level: usize) -> &'static str {
    if level == 1 {
        "′"
    } else {
        "″"
    }
}

fn factor(i: usize) -> String {
    match i {
        0 => "k".to_string(),
        1 => "V".to_string(),
        _ => format!("V_{i}"),
    }
}

/// Algebra spins of the summands of `Ω^level` in spin `j`.
fn expected_components(level: usize, j: usize) -> Vec<usize> {
    match (level, j) {
        (0, _) => vec![j],
        (1, 0) => vec![],
        (1, _) => vec![j - 1, j],
        (2, 0) => vec![1],
        (2, _) => vec![j - 1],
        _ => unreachable!("levels are 0, 1, 2"),
    }
}

/// The generator of the denominator: the spin-0 part of `V ⊗ V′` at level 1,
/// the `F`-orbit of the spin-1 part of `V ⊗ V″` at level 2.
pub fn denominator_generators<F: Field>(free: &FreeModule<F>, ctx: &QCtx<F>, level: usize) -> Vec<SparseVec<F>> {
    match level {
        0 => Vec::new(),
        1 => free.component_highest_weights(ctx, 1, Spin(0)),
        2 => {
            let h = free.component_highest_weights(ctx, 1, Spin(2)).remove(0);
            free.orbit(ctx, &h, Spin(2))
        }
        _ => unreachable!("levels are 0, 1, 2"),
    }
}

/// Builds `Ω^level` over the algebra truncated at the table degree.
pub fn build_omega<F: Field>(
    table: Arc<ProductTable<F>>,
    ctx: &QCtx<F>,
    level: usize,
    cutoff: usize,
) -> Result<OmegaModule<F>, DeRhamError> {
    build_sided(table, ctx, Side::Left, level, cutoff)
}

/// [`build_omega`] with the fiber on either side of the algebra.
pub fn build_sided<F: Field>(
    table: Arc<ProductTable<F>>,
    ctx: &QCtx<F>,
    side: Side,
    level: usize,
    cutoff: usize,
) -> Result<OmegaModule<F>, DeRhamError> {
    let top = table.degree();
    if cutoff > top {
        return Err(DeRhamError::CutoffTooLarge { cutoff, degree: top });
    }
    let fiber = if level == 0 {
        irrep(Spin(0), ctx)
    } else {
        irrep(Spin(2), ctx)
    };
    let free = FreeModule::new(table, ctx, side, top, fiber);
    let gens = denominator_generators(&free, ctx, level);
    let quotient = QuotientModule::new(free, &gens);
    let mut components = BTreeMap::new();
    for j in 0..=cutoff {
        let s = Spin::integer(j as u32);
        let mut comps = Vec::new();
        for i in expected_components(level, j) {
            let h = quotient.free().component_highest_weights(ctx, i, s).remove(0);
            let label = if level == 0 {
                format!("V_{j}")
            } else if side == Side::Left {
                format!("({}⊗V{})_{j}", factor(i), prime(level))
            } else {
                format!("(V{}⊗{})_{j}", prime(level), factor(i))
            };
            comps.push(Component {
                label,
                algebra_spin: i,
                highest_weight: h,
            });
        }
        let got = quotient.multiplicity(s);
        let hws: Vec<SparseVec<F>> = comps.iter().map(|c| c.highest_weight.clone()).collect();
        let independent = quotient.rank_of(&hws);
        let all_hw = hws.iter().all(|h| quotient.is_highest_weight(h));
        if got != comps.len() || independent != comps.len() || !all_hw {
            return Err(DeRhamError::MultiplicityMismatch {
                level,
                spin: j,
                expected: comps.len(),
                got: if got != comps.len() { got } else { independent },
            });
        }
        components.insert(j, comps);
    }
    Ok(OmegaModule {
        level,
        cutoff,
        quotient,
        components,
    })
}

impl<F: Field> OmegaModule<F> {
    pub fn quotient(&self) -> &QuotientModule<F> {
        &self.quotient
    }

    pub fn free(&self) -> &FreeModule<F> {
        self.quotient.free()
    }

    pub fn components(&self, spin: usize) -> &[Component<F>] {
        self.components.get(&spin).map_or(&[], |v| v.as_slice())
    }

    /// Multiplicities of spins `0..=cutoff` read off the quotient dimensions.
    pub fn multiplicities(&self) -> Vec<usize> {
        (0..=self.cutoff)
            .map(|j| self.quotient.multiplicity(Spin::integer(j as u32)))
            .collect()
    }

    /// `F`-orbits of all highest-weight representatives of spins `lo..=hi`,
    /// concatenated, together with the module they span.
    pub fn isotypic_basis(&self, ctx: &QCtx<F>, lo: usize, hi: usize) -> (Vec<SparseVec<F>>, Rep<F>) {
        let mut vecs = Vec::new();
        let mut reps = Vec::new();
        for j in lo..=hi {
            let s = Spin::integer(j as u32);
            for c in self.components(j) {
                vecs.extend(self.free().orbit(ctx, &c.highest_weight, s));
                reps.push(irrep(s, ctx));
            }
        }
        (vecs, direct_sum(&reps))
    }
}

/// Per-spin structure constants of `d₀` and `d₁` relative to the
/// highest-weight representatives of [`OmegaModule`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSector<F: Field> {
    pub spin: usize,
    /// `d₀(x_0^j) = Σ d0[c] h_c`.
    pub d0: Vec<F>,
    /// `d₁(h_c) = d1[c] ω_j`.
    pub d1: Vec<F>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialData<F: Field> {
    pub sectors: Vec<SpinSector<F>>,
}

impl<F: Field> DifferentialData<F> {
    pub fn sector(&self, spin: usize) -> Option<&SpinSector<F>> {
        self.sectors.iter().find(|s| s.spin == spin)
    }

    /// `d₁∘d₀` sector by sector.
    pub fn composites(&self) -> Vec<F> {
        self.sectors
            .iter()
            .map(|s| {
                s.d0.iter()
                    .zip(&s.d1)
                    .fold(F::zero(), |acc, (a, b)| acc.plus(&a.times(b)))
            })
            .collect()
    }
}

/// A polynomial 1-form as a vector of `A ⊗ V′`.
pub fn form1_to_vec(hyper: &ClassicalHyperboloid, free: &FreeModule<BigRational>, form: &Form1) -> SparseVec<BigRational> {
    let mut out = SparseVec::new();
    for (b, f) in form.iter().enumerate() {
        for (a, x) in hyper.coords(f).into_iter().enumerate() {
            if x != BigRational::from_integer(0.into()) {
                out.insert(free.index(a, b), x);
            }
        }
    }
    out
}

/// A vector of `A ⊗ V′` as a polynomial 1-form.
pub fn vec_to_form1(hyper: &ClassicalHyperboloid, free: &FreeModule<BigRational>, v: &SparseVec<BigRational>) -> Form1 {
    let mut out: Form1 = Default::default();
    for (&p, x) in v {
        let (a, b) = free.split(p);
        out[b] = out[b].add(&hyper.basis_poly(a).scale(x));
    }
    out
}

/// 2-form coefficients of `w_0, w_1, w_2` as a vector of `A ⊗ V″`.
pub fn form2_to_vec(hyper: &ClassicalHyperboloid, free: &FreeModule<BigRational>, form: &[Poly3; 3]) -> SparseVec<BigRational> {
    form1_to_vec(hyper, free, form)
}

/// Differentials of the commutative hyperboloid computed with the Leibniz
/// rule on polynomials and projected onto the highest-weight bases.
pub fn classical_differential(c: &BigRational, degree: usize, cutoff: usize) -> Result<DifferentialData<BigRational>, DeRhamError> {
    let hyper = ClassicalHyperboloid::new(c.clone(), degree);
    let table = Arc::new(hyper.product_table());
    let ctx = QCtx::classical();
    let om1 = build_omega(table.clone(), &ctx, 1, cutoff)?;
    let om2 = build_omega(table, &ctx, 2, cutoff)?;
    let mut sectors = vec![SpinSector {
        spin: 0,
        d0: Vec::new(),
        d1: Vec::new(),
    }];
    for j in 1..=cutoff {
        let h1: Vec<SparseVec<BigRational>> = om1.components(j).iter().map(|c| c.highest_weight.clone()).collect();
        let w: Vec<SparseVec<BigRational>> = om2.components(j).iter().map(|c| c.highest_weight.clone()).collect();
        let f = Poly3::var(0).pow(j as u32);
        let df = form1_to_vec(&hyper, om1.free(), &d_function(&f));
        let d0 = om1
            .quotient()
            .express(&df, &h1)
            .ok_or(DeRhamError::NoSolution { spin: j })?;
        let mut d1 = Vec::new();
        for h in &h1 {
            let form = vec_to_form1(&hyper, om1.free(), h);
            let dh = form2_to_vec(&hyper, om2.free(), &d_form1(&form));
            let x = om2
                .quotient()
                .express(&dh, &w)
                .ok_or(DeRhamError::NoSolution { spin: j })?;
            d1.push(x[0].clone());
        }
        sectors.push(SpinSector { spin: j, d0, d1 });
    }
    Ok(DifferentialData { sectors })
}

/// Per spin: `d₀` is the classical constant vector, `d₁` spans the
/// annihilator of `d₀` and is scaled to its classical value.
pub fn synthesize_differential<F: Field>(classical: &DifferentialData<BigRational>) -> Result<DifferentialData<F>, DeRhamError> {
    let mut sectors = Vec::new();
    for sec in &classical.sectors {
        let d0: Vec<F> = lift_vec(&sec.d0);
        if d0.is_empty() {
            sectors.push(SpinSector {
                spin: sec.spin,
                d0,
                d1: Vec::new(),
            });
            continue;
        }
        let kernel = Mat::from_rows(vec![d0.clone()]).kernel();
        if kernel.len() != 1 {
            return Err(DeRhamError::NoSolution { spin: sec.spin });
        }
        let target: Vec<F> = lift_vec(&sec.d1);
        let t = Mat::from_columns(&kernel, d0.len())
            .solve(&target)
            .ok_or(DeRhamError::NoSolution { spin: sec.spin })?;
        let d1: Vec<F> = kernel[0].iter().map(|x| x.times(&t[0])).collect();
        sectors.push(SpinSector {
            spin: sec.spin,
            d0,
            d1,
        });
    }
    Ok(DifferentialData { sectors })
}

/// Ranks and cohomology of one spin sector.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SectorCohomology {
    pub spin: usize,
    pub mults: [usize; 3],
    pub ranks: [usize; 2],
    pub cohomology: [usize; 3],
}

#[derive(Clone, Debug)]
pub struct Cohomology<F: Field> {
    pub dims: [usize; 3],
    pub sectors: Vec<SectorCohomology>,
    pub h0_generators: Vec<CanonicalElement<F>>,
    /// Labels of the `Ω²` summands not hit by `d₁`.
    pub h2_generators: Vec<String>,
}

/// The complex with full matrices of the differentials on spins `0..=limit`.
pub struct DeRhamComplex<F: Field> {
    pub omega: [OmegaModule<F>; 3],
    pub differential: DifferentialData<F>,
    pub limit: usize,
    ctx: QCtx<F>,
}

impl<F: Field> DeRhamComplex<F> {
    /// Builds `Ω⁰, Ω¹, Ω²` up to spin `cutoff` and synthesizes the
    /// differentials; full matrices cover spins `≤ cutoff - 1`.
    pub fn build(
        table: Arc<ProductTable<F>>,
        ctx: &QCtx<F>,
        cutoff: usize,
    ) -> Result<Self, DeRhamError> {
        let c = table.params.c.clone();
        let degree = table.degree();
        let omega = [
            build_omega(table.clone(), ctx, 0, cutoff)?,
            build_omega(table.clone(), ctx, 1, cutoff)?,
            build_omega(table, ctx, 2, cutoff)?,
        ];
        let classical = classical_differential(&c, degree, cutoff)?;
        let differential = synthesize_differential(&classical)?;
        Ok(DeRhamComplex {
            omega,
            differential,
            limit: cutoff.saturating_sub(1),
            ctx: ctx.clone(),
        })
    }

    /// Same modules and differentials with full matrices on a smaller range.
    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit.min(self.omega[1].cutoff);
        self
    }

    fn sector(&self, j: usize) -> &SpinSector<F> {
        self.differential.sector(j).expect("sector within cutoff")
    }

    /// `d₀` from canonical coordinates of spin `≤ limit` to `Ω¹` coordinates.
    pub fn d0_matrix(&self) -> Mat<F> {
        let om1 = &self.omega[1];
        let q1 = om1.quotient();
        let mut cols = vec![vec![F::zero(); q1.dim()]];
        for j in 1..=self.limit {
            let s = Spin::integer(j as u32);
            let sec = self.sector(j);
            let mut image = SparseVec::new();
            for (c, x) in om1.components(j).iter().zip(&sec.d0) {
                axpy(&mut image, x, &c.highest_weight);
            }
            for v in om1.free().orbit(&self.ctx, &image, s) {
                cols.push(q1.coords(&v));
            }
        }
        Mat::from_columns(&cols, q1.dim())
    }

    /// `d₁` from the isotypic basis of `Ω¹` (spins `1..=limit`) to `Ω²`
    /// coordinates.
    pub fn d1_matrix(&self) -> Mat<F> {
        let om2 = &self.omega[2];
        let q2 = om2.quotient();
        let mut cols = Vec::new();
        for j in 1..=self.limit {
            let s = Spin::integer(j as u32);
            let omega = om2.free().orbit(&self.ctx, &om2.components(j)[0].highest_weight, s);
            for x in &self.sector(j).d1 {
                for w in &omega {
                    cols.push(q2.coords(&scale_sparse(w, x)));
                }
            }
        }
        Mat::from_columns(&cols, q2.dim())
    }

    fn basis_matrix(&self, level: usize, lo: usize) -> (Mat<F>, Rep<F>) {
        let om = &self.omega[level];
        let (vecs, rep) = om.isotypic_basis(&self.ctx, lo, self.limit);
        let cols: Vec<Vec<F>> = vecs.iter().map(|v| om.quotient().coords(v)).collect();
        (Mat::from_columns(&cols, om.quotient().dim()), rep)
    }

    /// `d₁∘d₀ = 0` as full matrices: `d₀` is re-expressed in the isotypic
    /// basis of `Ω¹` before composing.
    pub fn composite_vanishes(&self) -> bool {
        let (b, _) = self.basis_matrix(1, 1);
        let d0 = self.d0_matrix();
        let mut x_cols = Vec::new();
        for k in 0..d0.ncols() {
            match b.solve(&d0.column(k)) {
                Some(x) => x_cols.push(x),
                None => return false,
            }
        }
        let x = Mat::from_columns(&x_cols, b.ncols());
        self.d1_matrix().mul(&x).is_zero()
    }

    /// Both differentials and the isotypic bases intertwine `E`, `F`, `K`.
    pub fn is_equivariant(&self) -> bool {
        let (b1, r1) = self.basis_matrix(1, 1);
        let (b2, r2) = self.basis_matrix(2, 0);
        let r0 = algebra_rep(self.limit, &self.ctx);
        let a1: Vec<Mat<F>> = [Generator::E, Generator::F, Generator::K]
            .iter()
            .map(|&g| self.omega[1].quotient().action(g))
            .collect();
        let a2: Vec<Mat<F>> = [Generator::E, Generator::F, Generator::K]
            .iter()
            .map(|&g| self.omega[2].quotient().action(g))
            .collect();
        let d0 = self.d0_matrix();
        let d1 = self.d1_matrix();
        let gens = |r: &Rep<F>| [r.e().clone(), r.f().clone(), r.k().clone()];
        let (g0, g1) = (gens(&r0), gens(&r1));
        let g2 = gens(&r2);
        (0..3).all(|n| {
            a1[n].mul(&b1) == b1.mul(&g1[n])
                && a2[n].mul(&b2) == b2.mul(&g2[n])
                && a1[n].mul(&d0) == d0.mul(&g0[n])
                && a2[n].mul(&d1) == d1.mul(&g1[n])
        })
    }

    /// Sector-by-sector ranks and cohomology on spins `0..=limit`, with the
    /// totals recomputed from the full matrices.
    pub fn cohomology(&self) -> Cohomology<F> {
        let mut sectors = Vec::new();
        let mut h2_generators = Vec::new();
        for j in 0..=self.limit {
            let mults = [
                self.omega[0].components(j).len(),
                self.omega[1].components(j).len(),
                self.omega[2].components(j).len(),
            ];
            let sec = self.sector(j);
            let r0 = Mat::from_columns(&[sec.d0.clone()], sec.d0.len()).rank().min(mults[0]);
            let r1 = if sec.d1.is_empty() {
                0
            } else {
                Mat::from_rows(vec![sec.d1.clone()]).rank()
            };
            let cohomology = [mults[0] - r0, mults[1] - r0 - r1, mults[2] - r1];
            if cohomology[2] > 0 {
                h2_generators.extend(self.omega[2].components(j).iter().map(|c| c.label.clone()));
            }
            sectors.push(SectorCohomology {
                spin: j,
                mults,
                ranks: [r0, r1],
                cohomology,
            });
        }
        let d0 = self.d0_matrix();
        let d1 = self.d1_matrix();
        let (rank0, rank1) = (d0.rank(), d1.rank());
        let dim0 = canonical_dim(self.limit);
        let dim1: usize = (1..=self.limit).map(|j| 2 * (2 * j + 1)).sum();
        let dim2: usize = (0..=self.limit).map(|j| 2 * j + 1).sum();
        let dims = [dim0 - rank0, dim1 - rank0 - rank1, dim2 - rank1];
        let h0_generators = d0
            .kernel()
            .into_iter()
            .map(|v| {
                let mut e = CanonicalElement::zero(self.omega[0].free().top());
                e.coeffs[..v.len()].clone_from_slice(&v);
                e
            })
            .collect();
        Cohomology {
            dims,
            sectors,
            h0_generators,
            h2_generators,
        }
    }

    pub fn to_json(&self) -> Value {
        let coh = self.cohomology();
        let s = |v: &[F]| -> Vec<String> { v.iter().map(|x| x.canonical_string()).collect() };
        let sectors: Vec<Value> = coh
            .sectors
            .iter()
            .map(|c| {
                let sec = self.sector(c.spin);
                json!({
                    "spin": c.spin,
                    "mults": c.mults,
                    "d0_coeffs": s(&sec.d0),
                    "d1_coeffs": s(&sec.d1),
                    "ranks": c.ranks,
                    "cohomology": c.cohomology,
                })
            })
            .collect();
        json!({
            "sectors": sectors,
            "cohomology": coh.dims,
            "h0_generators": coh.h0_generators.iter().map(|e| s(&e.coeffs)).collect::<Vec<_>>(),
            "h2_generators": coh.h2_generators,
        })
    }
}

/// Multiplicities of `Ω^level` for spins `0..=cutoff` at `q = 1`, from the
/// commutative model.
pub fn classical_multiplicities(c: &BigRational, degree: usize, level: usize, cutoff: usize) -> Result<Vec<usize>, DeRhamError> {
    let hyper = ClassicalHyperboloid::new(c.clone(), degree);
    let om = build_omega(Arc::new(hyper.product_table()), &QCtx::classical(), level, cutoff)?;
    Ok(om.multiplicities())
}
