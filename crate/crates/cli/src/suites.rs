use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use qgeom::classical::ClassicalHyperboloid;
use qgeom::amodule::Side;
use qgeom::derham::{classical_multiplicities, DeRhamComplex};
use qgeom::hyperboloid::{build_algebra, canonical_dim, CanonicalElement, HyperboloidError, ProductTable, QHParams, RelationSpan};
use qgeom::quadratic::{
    complementarity_check, exterior_power_dim, poincare_identity, re_algebra_dims, standard_hecke, symmetric_power_dim,
    KoszulComplex,
};
use qgeom::tangent::{
    build_alpha, build_tangent, classical_gram_coefficients, classical_rotation_constants, flip_coefficients,
    generator_action_annihilates, projectivity_certificate, solve_braided_action, solve_connection, solve_metric,
    TangentError,
};
use qgeom::{Field, QCtx, Scalar};
use serde_json::{json, Value};

use crate::cache::{CacheError, TableCache, TableKey};
use crate::config::{RunConfig, Suite};
use crate::report::{Recorder, SuiteReport};

/// Coefficient fields the CLI can run over.
pub trait Coefficient: Field {
    const SYMBOLIC: bool;
    /// Value at `q = 1` of a symbolic coefficient.
    fn at_one(&self) -> Option<BigRational>;
}

impl Coefficient for Scalar {
    const SYMBOLIC: bool = true;
    fn at_one(&self) -> Option<BigRational> {
        self.limit_q1().ok()
    }
}

impl Coefficient for BigRational {
    const SYMBOLIC: bool = false;
    fn at_one(&self) -> Option<BigRational> {
        None
    }
}

fn strings<F: Field>(xs: &[F]) -> Vec<String> {
    xs.iter().map(|x| x.canonical_string()).collect()
}

fn limits<F: Coefficient>(xs: &[F]) -> Option<Vec<BigRational>> {
    xs.iter().map(|x| x.at_one()).collect()
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub struct Runner<'a, F: Coefficient> {
    cfg: &'a RunConfig,
    ctx: QCtx<F>,
    cache: Option<&'a TableCache>,
}

impl<'a, F: Coefficient> Runner<'a, F> {
    pub fn new(cfg: &'a RunConfig, ctx: QCtx<F>, cache: Option<&'a TableCache>) -> Self {
        Runner { cfg, ctx, cache }
    }

    fn params(&self, hbar: &BigRational, degree: usize) -> QHParams {
        QHParams::new(self.cfg.c.clone(), hbar.clone(), degree)
    }

    fn table(&self, params: &QHParams) -> Result<Result<Arc<ProductTable<F>>, HyperboloidError>, CacheError> {
        let key = TableKey::new(&self.cfg.q.label(), &params.c, &params.hbar, params.degree);
        if let Some(cache) = self.cache {
            if let Some(t) = cache.load::<F>(&key)? {
                return Ok(Ok(Arc::new(t)));
            }
        }
        let table = match build_algebra(params, &self.ctx) {
            Ok(alg) => alg.into_table(),
            Err(e) => return Ok(Err(e)),
        };
        if let Some(cache) = self.cache {
            cache.store(&key, &table)?;
        }
        Ok(Ok(Arc::new(table)))
    }

    pub fn run(&self, suite: Suite) -> Result<SuiteReport, CacheError> {
        let mut rec = Recorder::new(suite.name(), self.cfg.timings);
        match suite {
            Suite::Flatness => self.flatness(&mut rec)?,
            Suite::Koszul => self.koszul(&mut rec),
            Suite::Derham => self.derham(&mut rec)?,
            Suite::Tangent => self.tangent(&mut rec)?,
            Suite::Metric => self.metric(&mut rec)?,
            Suite::Connection => self.connection(&mut rec)?,
            Suite::All => unreachable!("expanded by the caller"),
        }
        Ok(rec.finish())
    }

    /// The `ħ = 0` table, or `None` after recording why the suite cannot run.
    fn base_table(&self, rec: &mut Recorder) -> Result<Option<Arc<ProductTable<F>>>, CacheError> {
        if !Zero::is_zero(&self.cfg.hbar) {
            rec.skip("suite", "defined for hbar = 0");
            return Ok(None);
        }
        match self.table(&self.params(&self.cfg.hbar, self.cfg.degree))? {
            Ok(t) => Ok(Some(t)),
            Err(e) => {
                rec.check("algebra", || (false, json!({ "error": e.to_string() })));
                Ok(None)
            }
        }
    }

    fn flatness(&self, rec: &mut Recorder) -> Result<(), CacheError> {
        let params = self.params(&self.cfg.hbar, self.cfg.degree);
        let n = params.degree;
        let span = match RelationSpan::build(&params, &self.ctx) {
            Ok(s) => s,
            Err(e) => {
                rec.check("flat", || (false, json!({ "params": params, "error": e.to_string() })));
                return Ok(());
            }
        };
        let dims = span.quotient_dims_by_degree();
        let flat = span.quotient_dim() == canonical_dim(n);
        let table = if flat { self.table(&params)?.ok() } else { None };
        let digest = table.as_ref().map(|t| t.digest());
        rec.check("flat", || {
            let by_degree = dims.iter().enumerate().all(|(k, &d)| d == canonical_dim(k));
            (
                flat && by_degree && digest.is_some(),
                json!({
                    "params": params,
                    "quotient_dims_by_degree": dims,
                    "flat": flat,
                    "product_table_digest": digest,
                }),
            )
        });
        let Some(table) = table else {
            return Ok(());
        };
        if !Zero::is_zero(&params.hbar) {
            rec.skip("classical_limit", "commutative oracle needs hbar = 0");
            return Ok(());
        }
        rec.check("classical_limit", || {
            let oracle = ClassicalHyperboloid::new(params.c.clone(), n).product_table();
            let special = if F::SYMBOLIC {
                table
                    .entries()
                    .iter()
                    .map(|(&k, v)| {
                        let vals: Vec<F> = v.values().cloned().collect();
                        limits(&vals).map(|l| (k, v.keys().copied().zip(l).filter(|(_, x)| !Zero::is_zero(x)).collect()))
                    })
                    .collect::<Option<_>>()
                    .map(|e| ProductTable::from_entries(params.clone(), e))
            } else {
                build_algebra(&params, &QCtx::classical()).ok().map(|a| a.into_table())
            };
            let regular = special.is_some();
            let matches = special.is_some_and(|t| t.entries() == oracle.entries());
            (matches, json!({ "regular": regular, "matches_commutative_oracle": matches }))
        });
        Ok(())
    }

    fn koszul(&self, rec: &mut Recorder) {
        let (n, top) = (self.cfg.n, self.cfg.degree);
        let s = standard_hecke(n, &self.ctx);
        rec.check("hecke_symmetry", || {
            let braid = s.satisfies_braid_relation();
            let hecke = s.satisfies_hecke_condition(&self.ctx);
            let sym = s.symmetric_part(&self.ctx).len();
            let skew = s.skew_part(&self.ctx).len();
            (
                braid && hecke && sym == n * (n + 1) / 2 && skew == n * (n - 1) / 2,
                json!({ "braid_relation": braid, "hecke_condition": hecke, "symmetric_dim": sym, "skew_dim": skew }),
            )
        });
        let data = s.quadratic_data(&self.ctx);
        rec.check("complementarity", || {
            let rows: Vec<_> = (2..=top).map(|k| complementarity_check(&data, k)).collect();
            (rows.iter().all(|r| r.complementary), json!(rows))
        });
        rec.check("poincare_identity", || {
            let (plus, minus, ok) = poincare_identity(&data, top);
            let sym: Vec<usize> = (0..=top).map(|k| symmetric_power_dim(n, k)).collect();
            let ext: Vec<usize> = (0..=top).map(|k| exterior_power_dim(n, k)).collect();
            (
                ok && plus == sym && minus == ext,
                json!({ "plus": plus, "minus": minus, "product_is_one": ok }),
            )
        });
        let complex = KoszulComplex::new(&data, top);
        rec.check("differential_squares_to_zero", || {
            let mut ok = true;
            for m in 0..top {
                for k in 2..=top - m {
                    let first = complex.differential(m, k);
                    let second = complex.differential(m + 1, k - 1);
                    ok &= second.mul(&first).is_zero();
                }
            }
            (ok, json!({ "top": top }))
        });
        rec.check("koszul_homology", || {
            let mut rows = Vec::new();
            let mut ok = true;
            for total in 0..=top {
                for m in 0..=total {
                    let h = complex.homology(m, total - m);
                    ok &= h == usize::from(total == 0);
                    rows.push(json!({ "m": m, "n": total - m, "dim": h }));
                }
            }
            (ok, json!(rows))
        });
        if n == 2 {
            rec.check("reflection_equation_dims", || {
                let k = top.min(4);
                let dims = re_algebra_dims(2, k, &self.ctx);
                let expected: Vec<usize> = (0..=k).map(|d| symmetric_power_dim(4, d)).collect();
                (dims == expected, json!({ "dims": dims, "expected": expected }))
            });
        } else {
            rec.skip("reflection_equation_dims", "checked for n = 2");
        }
    }

    fn derham(&self, rec: &mut Recorder) -> Result<(), CacheError> {
        let Some(table) = self.base_table(rec)? else {
            return Ok(());
        };
        let s = self.cfg.spin_cutoff;
        let complex = match DeRhamComplex::build(table, &self.ctx, s + 1) {
            Ok(c) => c.with_limit(s),
            Err(e) => {
                rec.check("complex", || (false, json!({ "error": e.to_string() })));
                return Ok(());
            }
        };
        for level in 1..=2 {
            rec.check(&format!("omega{level}_multiplicities"), || {
                let got: Vec<usize> = complex.omega[level].multiplicities()[..=s].to_vec();
                let expected: Vec<usize> = (0..=s)
                    .map(|j| match level {
                        1 => 2 * usize::from(j > 0),
                        _ => 1,
                    })
                    .collect();
                let classical = classical_multiplicities(&self.cfg.c, self.cfg.degree, level, s + 1)
                    .map(|m| m[..=s].to_vec())
                    .ok();
                let ok = got == expected && classical.as_ref() == Some(&got);
                (ok, json!({ "multiplicities": got, "classical": classical }))
            });
        }
        rec.check("composite_vanishes", || (complex.composite_vanishes(), Value::Null));
        rec.check("equivariant", || (complex.is_equivariant(), Value::Null));
        let coh = complex.cohomology();
        rec.check("d0_injective", || {
            let bad: Vec<usize> = coh
                .sectors
                .iter()
                .filter(|c| c.spin >= 1 && c.ranks[0] != c.mults[0])
                .map(|c| c.spin)
                .collect();
            (bad.is_empty(), json!({ "failing_spins": bad }))
        });
        rec.check("kernel_d1_equals_image_d0", || {
            let bad: Vec<usize> = coh
                .sectors
                .iter()
                .filter(|c| c.spin >= 1 && c.mults[1] - c.ranks[1] != c.ranks[0])
                .map(|c| c.spin)
                .collect();
            (bad.is_empty(), json!({ "failing_spins": bad }))
        });
        rec.check("cohomology", || (coh.dims == [1, 0, 1], complex.to_json()));
        Ok(())
    }

    fn tangent(&self, rec: &mut Recorder) -> Result<(), CacheError> {
        let Some(table) = self.base_table(rec)? else {
            return Ok(());
        };
        let d = self.cfg.degree;
        let cap = d - 2;
        let tl = match build_tangent(table.clone(), &self.ctx, Side::Left, 1) {
            Ok(t) => t,
            Err(e) => {
                rec.check("tangent_module", || (false, json!({ "error": e.to_string() })));
                return Ok(());
            }
        };
        let braided = solve_braided_action(&table, &self.ctx, cap);
        rec.check("braided_action", || match &braided {
            Ok(b) => (b.deformation_dim == 0, b.to_json()),
            Err(e) => (false, json!({ "error": e.to_string() })),
        });
        if let Ok(b) = &braided {
            rec.check("braided_module_compatible", || (b.module_compatible(&tl), Value::Null));
            rec.check("braided_classical_limit", || {
                let oracle = match classical_rotation_constants(cap + 1) {
                    Ok(o) => o,
                    Err(e) => return (false, json!({ "error": e.to_string() })),
                };
                let flat: Vec<F> = b.constants.iter().flatten().cloned().collect();
                let special = if F::SYMBOLIC {
                    limits(&flat)
                } else {
                    self.classical_table(d)
                        .and_then(|t| solve_braided_action(&t, &QCtx::classical(), cap).ok())
                        .map(|c| c.constants.into_iter().flatten().collect())
                };
                let expected: Vec<BigRational> = oracle.into_iter().flatten().collect();
                let ok = special.as_ref() == Some(&expected);
                (ok, json!({ "limit": special.map(|v| strings(&v)), "oracle": strings(&expected) }))
            });
        }
        rec.check("qg_generators_violate_annihilation", || {
            let at_q = generator_action_annihilates(&table, &self.ctx, cap);
            let at_one = self
                .classical_table(d)
                .map(|t| generator_action_annihilates(&t, &QCtx::classical(), cap));
            (
                !at_q && at_one == Some(true),
                json!({ "annihilates": at_q, "annihilates_at_q1": at_one }),
            )
        });
        if cap < 2 {
            rec.skip("projectivity", "certificate needs degree cap at least 2");
            return self.alpha(rec, &table);
        }
        rec.check("projectivity", || {
            let cert = projectivity_certificate(table.clone(), &self.ctx, cap);
            let expect = !Zero::is_zero(&self.cfg.c);
            match cert {
                Ok(p) => (p.certified() == expect, p.to_json()),
                Err(TangentError::NoSolution { block }) => (!expect, json!({ "no_solution": block })),
                Err(e) => (false, json!({ "error": e.to_string() })),
            }
        });
        self.alpha(rec, &table)
    }

    fn alpha(&self, rec: &mut Recorder, table: &Arc<ProductTable<F>>) -> Result<(), CacheError> {
        let d = self.cfg.degree;
        let cutoff = self.cfg.spin_cutoff.min(d - 1).max(1);
        let product = match self.table(&self.params(&rat(1), d))? {
            Ok(t) => t,
            Err(e) => {
                rec.check("alpha", || (false, json!({ "error": e.to_string() })));
                return Ok(());
            }
        };
        rec.check("alpha", || {
            let sides = build_tangent(table.clone(), &self.ctx, Side::Left, cutoff)
                .and_then(|l| Ok((l, build_tangent(table.clone(), &self.ctx, Side::Right, cutoff)?)));
            let (tl, tr) = match sides {
                Ok(x) => x,
                Err(e) => return (false, json!({ "error": e.to_string() })),
            };
            let alpha = match build_alpha(&tl, &tr, &product) {
                Ok(a) => a,
                Err(e) => return (false, json!({ "error": e.to_string() })),
            };
            let values: Vec<F> = alpha.entries.iter().map(|e| e.value.clone()).collect();
            let special = if F::SYMBOLIC {
                limits(&values)
            } else {
                self.classical_alpha(cutoff)
            };
            let flip = self.classical_flip(cutoff);
            let ok = alpha.is_invertible() && special.is_some() && special == flip;
            (
                ok,
                json!({
                    "entries": alpha.to_json(),
                    "limit": special.map(|v| strings(&v)),
                    "flip_at_q1": flip.map(|v| strings(&v)),
                }),
            )
        });
        Ok(())
    }

    fn classical_table(&self, degree: usize) -> Option<Arc<ProductTable<BigRational>>> {
        self.classical_table_with(&self.cfg.hbar, degree)
    }

    fn classical_table_with(&self, hbar: &BigRational, degree: usize) -> Option<Arc<ProductTable<BigRational>>> {
        build_algebra(&self.params(hbar, degree), &QCtx::classical())
            .ok()
            .map(|a| Arc::new(a.into_table()))
    }

    fn classical_sides(&self, cutoff: usize) -> Option<[qgeom::tangent::TangentModule<BigRational>; 2]> {
        let t = self.classical_table(self.cfg.degree)?;
        let ctx = QCtx::classical();
        Some([
            build_tangent(t.clone(), &ctx, Side::Left, cutoff).ok()?,
            build_tangent(t, &ctx, Side::Right, cutoff).ok()?,
        ])
    }

    fn classical_alpha(&self, cutoff: usize) -> Option<Vec<BigRational>> {
        let [tl, tr] = self.classical_sides(cutoff)?;
        let product = self.classical_table_with(&rat(1), self.cfg.degree)?;
        let alpha = build_alpha(&tl, &tr, &product).ok()?;
        Some(alpha.entries.into_iter().map(|e| e.value).collect())
    }

    fn classical_flip(&self, cutoff: usize) -> Option<Vec<BigRational>> {
        let [tl, tr] = self.classical_sides(cutoff)?;
        flip_coefficients(&tl, &tr)
    }

    fn metric(&self, rec: &mut Recorder) -> Result<(), CacheError> {
        let Some(table) = self.base_table(rec)? else {
            return Ok(());
        };
        let cap = self.cfg.degree;
        let metric = match solve_metric(&table, &self.ctx, &self.cfg.c, cap) {
            Ok(m) => m,
            Err(e) => {
                rec.check("metric_unique", || (false, json!({ "error": e.to_string() })));
                return Ok(());
            }
        };
        rec.check("metric_unique", || (metric.solution_dim == 1, metric.to_json()));
        rec.check("right_constraint_automatic", || (metric.right_constraint_automatic, Value::Null));
        rec.check("vanishes_on_submodules", || {
            let sides = build_tangent(table.clone(), &self.ctx, Side::Left, 1)
                .and_then(|l| Ok((l, build_tangent(table.clone(), &self.ctx, Side::Right, 1)?)));
            match sides {
                Ok((tl, tr)) => (metric.vanishes_on_submodules(&tl, &tr, &self.ctx), Value::Null),
                Err(e) => (false, json!({ "error": e.to_string() })),
            }
        });
        rec.check("metric_classical_limit", || {
            let (a_cl, b_cl) = match classical_gram_coefficients(&self.cfg.c) {
                Ok(x) => x,
                Err(e) => return (false, json!({ "error": e.to_string() })),
            };
            let special = if F::SYMBOLIC {
                limits(&[metric.a.clone(), metric.b.clone()])
            } else {
                self.classical_table(cap)
                    .and_then(|t| solve_metric(&t, &QCtx::classical(), &self.cfg.c, cap).ok())
                    .map(|m| vec![m.a, m.b])
            };
            let expected = vec![a_cl, b_cl];
            (
                special.as_ref() == Some(&expected),
                json!({ "limit": special.map(|v| strings(&v)), "gram": strings(&expected) }),
            )
        });
        Ok(())
    }

    fn connection(&self, rec: &mut Recorder) -> Result<(), CacheError> {
        let Some(table) = self.base_table(rec)? else {
            return Ok(());
        };
        let cap = self.cfg.degree;
        let conn = match solve_connection(table.clone(), &self.ctx, cap) {
            Ok(c) => c,
            Err(e) => {
                rec.check("connection", || (false, json!({ "error": e.to_string() })));
                return Ok(());
            }
        };
        rec.check("connection", || (conn.solution_dim == 0, conn.to_json()));
        rec.check("left_linear", || {
            let t = match build_tangent(table.clone(), &self.ctx, Side::Left, 1) {
                Ok(t) => t,
                Err(e) => return (false, json!({ "error": e.to_string() })),
            };
            let d = table.degree();
            let budget = d.saturating_sub(3);
            let ok = (0..canonical_dim(budget)).all(|f| {
                let f = CanonicalElement::basis(d, f);
                (0..3).all(|a| (0..3).all(|b| conn.left_linear(&t, &f, a, b)))
            });
            (ok, json!({ "multiplier_degree": budget }))
        });
        rec.check("connection_classical_limit", || {
            let special = if F::SYMBOLIC {
                limits(&conn.constants)
            } else {
                self.classical_table(cap)
                    .and_then(|t| solve_connection(t, &QCtx::classical(), cap).ok())
                    .map(|c| c.constants)
            };
            (special.is_some(), json!({ "limit": special.map(|v| strings(&v)) }))
        });
        Ok(())
    }
}
