//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use num_rational::BigRational;
use qgeom::amodule::Side;
use qgeom::classical::{bracket_table, ClassicalHyperboloid};
use qgeom::derham::{classical_differential, synthesize_differential, DeRhamComplex};
use qgeom::hyperboloid::{build_algebra, canonical_dim, qlie_bracket, CanonicalElement, ProductTable, QHParams, RelationSpan};
use qgeom::quadratic::{
    complementarity_check, exterior_power_dim, poincare_identity, re_algebra_dims, standard_hecke, symmetric_power_dim,
    KoszulComplex,
};
use qgeom::tangent::{
    build_alpha, build_tangent, classical_gram_coefficients, classical_rotation_constants, flip_coefficients,
    generator_action_annihilates, projectivity_certificate, solve_braided_action, solve_connection, solve_metric,
    TangentError,
};
use qgeom::{Field, Mat, QCtx, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn ratio(p: i64, r: i64) -> BigRational {
    BigRational::new(p.into(), r.into())
}

/// Three rationals `p/r` with `p, r ∈ [2, 97]`, `p ≠ r`, from a fixed seed.
fn random_points() -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    while out.len() < 3 {
        let (p, r): (i64, i64) = (rng.gen_range(2..=97), rng.gen_range(2..=97));
        let x = ratio(p, r);
        if p != r && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn symbolic() -> QCtx<Scalar> {
    QCtx::new(Scalar::q())
}

fn table<F: Field>(c: i64, hbar: i64, degree: usize, ctx: &QCtx<F>) -> Result<Arc<ProductTable<F>>, String> {
    build_algebra(&QHParams::from_ints(c, hbar, degree), ctx)
        .map(|a| Arc::new(a.into_table()))
        .map_err(|e| format!("algebra (c={c}, hbar={hbar}, N={degree}): {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn limits(xs: &[Scalar]) -> Result<Vec<BigRational>, String> {
    xs.iter().map(|x| x.limit_q1().map_err(|e| format!("{x}: {e}"))).collect()
}

fn limit_mat(m: &Mat<Scalar>) -> Result<Mat<BigRational>, String> {
    m.try_map(|x| x.limit_q1().map_err(|e| format!("{x}: {e}")))
}

fn complex<F: Field>(ctx: &QCtx<F>) -> Result<DeRhamComplex<F>, String> {
    let t = table(1, 0, 5, ctx)?;
    DeRhamComplex::build(t, ctx, 4)
        .map(|c| c.with_limit(3))
        .map_err(|e| e.to_string())
}

fn cohomology_at<F: Field>(ctx: &QCtx<F>) -> Result<[usize; 3], String> {
    let c = complex(ctx)?;
    ensure(c.composite_vanishes(), || "d1 d0 != 0".into())?;
    Ok(c.cohomology().dims)
}

fn criterion_1() -> Outcome {
    let mut seen = vec![format!("symbolic {:?}", cohomology_at(&symbolic())?)];
    ensure(seen[0].ends_with("[1, 0, 1]"), || seen[0].clone())?;
    for q in random_points() {
        let dims = cohomology_at(&QCtx::new(q.clone()))?;
        ensure(dims == [1, 0, 1], || format!("q={q}: {dims:?}"))?;
        seen.push(format!("q={q} {dims:?}"));
    }
    Ok(seen.join(", "))
}

fn criterion_2() -> Outcome {
    let points = random_points();
    let mut count = 0;
    for (c, hbar) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        for q in &points {
            let ctx = QCtx::new(q.clone());
            for n in 2..=5 {
                let span = RelationSpan::build(&QHParams::from_ints(c, hbar, n), &ctx).map_err(|e| e.to_string())?;
                let got = span.quotient_dim();
                ensure(got == (n + 1) * (n + 1), || format!("(c,hbar)=({c},{hbar}) q={q} N={n}: dim {got}"))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} parameter points, all (N+1)^2"))
}

fn multiplicities_at<F: Field>(ctx: &QCtx<F>) -> Result<(Vec<usize>, Vec<usize>), String> {
    let c = complex(ctx)?;
    Ok((c.omega[1].multiplicities()[..=3].to_vec(), c.omega[2].multiplicities()[..=3].to_vec()))
}

fn criterion_3() -> Outcome {
    let expect = (vec![0, 2, 2, 2], vec![1, 1, 1, 1]);
    let sym = multiplicities_at(&symbolic())?;
    ensure(sym == expect, || format!("symbolic {sym:?}"))?;
    let rat = multiplicities_at(&QCtx::new(ratio(3, 2)))?;
    ensure(rat == expect, || format!("q=3/2 {rat:?}"))?;
    Ok(format!("Omega1 {:?}, Omega2 {:?}", sym.0, sym.1))
}

fn kernel_structure<F: Field>(ctx: &QCtx<F>) -> Result<String, String> {
    let c = complex(ctx)?;
    let coh = c.cohomology();
    let mut out = Vec::new();
    for s in coh.sectors.iter().filter(|s| (1..=3).contains(&s.spin)) {
        ensure(s.ranks[0] == s.mults[0], || format!("spin {}: d0 rank {} of {}", s.spin, s.ranks[0], s.mults[0]))?;
        ensure(s.mults[1] - s.ranks[1] == s.ranks[0], || {
            format!("spin {}: dim ker d1 = {} but rank d0 = {}", s.spin, s.mults[1] - s.ranks[1], s.ranks[0])
        })?;
        out.push(format!("j={}: rk d0={} ker d1={}", s.spin, s.ranks[0], s.mults[1] - s.ranks[1]));
    }
    ensure(out.len() == 3, || "missing spin sectors".into())?;
    Ok(out.join("; "))
}

fn criterion_4() -> Outcome {
    let detail = kernel_structure(&symbolic())?;
    kernel_structure(&QCtx::new(ratio(3, 2)))?;
    Ok(detail)
}

fn koszul_suite<F: Field>(ctx: &QCtx<F>, n: usize, comp_top: usize) -> Result<String, String> {
    let top = 5;
    let s = standard_hecke(n, ctx);
    ensure(s.satisfies_braid_relation() && s.satisfies_hecke_condition(ctx), || format!("n={n}: not a Hecke symmetry"))?;
    let data = s.quadratic_data(ctx);
    let kc = KoszulComplex::new(&data, top);
    for m in 0..top {
        for k in 2..=top - m {
            ensure(kc.differential(m + 1, k - 1).mul(&kc.differential(m, k)).is_zero(), || {
                format!("n={n}: d d != 0 at ({m},{k})")
            })?;
        }
    }
    for total in 1..=top {
        for m in 0..=total {
            let h = kc.homology(m, total - m);
            ensure(h == 0, || format!("n={n}: homology {h} at ({m},{})", total - m))?;
        }
    }
    ensure(kc.homology(0, 0) == 1, || format!("n={n}: H(0,0) != 1"))?;
    for k in 2..=comp_top {
        let c = complementarity_check(&data, k);
        ensure(c.complementary, || format!("n={n}: complementarity fails at {k}: {c:?}"))?;
    }
    let (plus, minus, ok) = poincare_identity(&data, top);
    ensure(ok, || format!("n={n}: P+ {plus:?} P- {minus:?}"))?;
    let sym: Vec<usize> = (0..=top).map(|k| symmetric_power_dim(n, k)).collect();
    let ext: Vec<usize> = (0..=top).map(|k| exterior_power_dim(n, k)).collect();
    ensure(plus == sym && minus == ext, || format!("n={n}: P+ {plus:?} P- {minus:?}"))?;
    Ok(format!("n={n}: P+ {plus:?} P- {minus:?}"))
}

fn criterion_5() -> Outcome {
    let ctx = symbolic();
    let a = koszul_suite(&ctx, 2, 5)?;
    let b = koszul_suite(&ctx, 3, 4)?;
    Ok(format!("{a}; {b}"))
}

fn criterion_6() -> Outcome {
    let expect: Vec<usize> = (0..=3).map(|k| symmetric_power_dim(4, k)).collect();
    ensure(expect == [1, 4, 10, 20], || "oracle".into())?;
    let sym = re_algebra_dims(2, 3, &symbolic());
    ensure(sym == expect, || format!("symbolic {sym:?}"))?;
    let at = re_algebra_dims(2, 3, &QCtx::new(ratio(3, 2)));
    ensure(at == expect, || format!("q=3/2 {at:?}"))?;
    Ok(format!("{sym:?}"))
}

fn criterion_7() -> Outcome {
    let c = rat(1);
    let (a_cl, b_cl) = classical_gram_coefficients(&c).map_err(|e| e.to_string())?;
    let ctx = symbolic();
    let t = table(1, 0, 4, &ctx)?;
    let m = solve_metric(&t, &ctx, &c, 4).map_err(|e| e.to_string())?;
    ensure(m.solution_dim == 1 && m.right_constraint_automatic, || format!("symbolic: {}", m.to_json()))?;
    let lim = limits(&[m.a.clone(), m.b.clone()])?;
    ensure(lim == [a_cl.clone(), b_cl.clone()], || format!("limit {lim:?} vs Gram ({a_cl}, {b_cl})"))?;
    let ratio_limit = m.a_over_b().ok_or("b = 0")?.limit_q1().map_err(|e| e.to_string())?;
    ensure(ratio_limit == &a_cl / &b_cl, || format!("a/b -> {ratio_limit}"))?;
    for q in random_points() {
        let ctx = QCtx::new(q.clone());
        let t = table(1, 0, 5, &ctx)?;
        let m = solve_metric(&t, &ctx, &c, 5).map_err(|e| e.to_string())?;
        ensure(m.solution_dim == 1 && m.right_constraint_automatic, || format!("q={q}: {}", m.to_json()))?;
        let tl = build_tangent(t.clone(), &ctx, Side::Left, 1).map_err(|e| e.to_string())?;
        let tr = build_tangent(t, &ctx, Side::Right, 1).map_err(|e| e.to_string())?;
        ensure(m.vanishes_on_submodules(&tl, &tr, &ctx), || format!("q={q}: pairing does not descend"))?;
    }
    Ok(format!("solution dim 1, a/b = {} -> {ratio_limit}", m.a_over_b().unwrap()))
}

fn criterion_8() -> Outcome {
    let cap = 4;
    let oracle: Vec<BigRational> = classical_rotation_constants(cap + 1)
        .map_err(|e| e.to_string())?
        .into_iter()
        .flatten()
        .collect();
    let one = QCtx::<BigRational>::classical();
    let t1 = table(1, 0, cap + 2, &one)?;
    let classical = solve_braided_action(&t1, &one, cap).map_err(|e| format!("q=1: {e}"))?;
    let flat: Vec<BigRational> = classical.constants.iter().flatten().cloned().collect();
    ensure(flat == oracle, || format!("q=1 constants {flat:?} vs rotation fields {oracle:?}"))?;
    ensure(generator_action_annihilates(&t1, &one, cap), || "QG generators fail at q=1".into())?;
    let mut sigmas = Vec::new();
    for q in std::iter::once(ratio(3, 2)).chain(random_points()) {
        let ctx = QCtx::new(q.clone());
        let t = table(1, 0, cap + 2, &ctx)?;
        let b = solve_braided_action(&t, &ctx, cap).map_err(|e| format!("q={q}: {e}"))?;
        ensure(b.deformation_dim == 0, || format!("q={q}: {}", b.to_json()))?;
        let tl = build_tangent(t.clone(), &ctx, Side::Left, 1).map_err(|e| e.to_string())?;
        ensure(b.module_compatible(&tl), || format!("q={q}: not compatible with the module structure"))?;
        ensure(!generator_action_annihilates(&t, &ctx, cap), || {
            format!("q={q}: QG generators unexpectedly satisfy the constraint")
        })?;
        sigmas.push(format!("sigma({q})={}", b.sigma));
    }
    Ok(format!("cap 4, {}, classical limit = rotation fields, QG generators rejected", sigmas.join(" ")))
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/connection.json")
}

fn criterion_9() -> Outcome {
    let cap = 4;
    let mut record = Vec::new();
    for q in std::iter::once(ratio(3, 2)).chain(random_points()) {
        let ctx = QCtx::new(q.clone());
        let t = table(1, 0, cap, &ctx)?;
        let conn = solve_connection(t.clone(), &ctx, cap).map_err(|e| format!("q={q}: {e}"))?;
        let tl = build_tangent(t, &ctx, Side::Left, 1).map_err(|e| e.to_string())?;
        for f in 0..canonical_dim(cap - 3) {
            let f = CanonicalElement::basis(cap, f);
            for a in 0..3 {
                for b in 0..3 {
                    ensure(conn.left_linear(&tl, &f, a, b), || format!("q={q}: not left-linear"))?;
                }
            }
        }
        record.push(json!({
            "solution_dim": conn.solution_dim,
            "unknown_count": conn.unknown_count,
            "components": conn.labels,
        }));
    }
    ensure(record.windows(2).all(|w| w[0] == w[1]), || format!("varies with q: {record:?}"))?;
    let current = json!({ "cap": cap, "connection": record[0] });
    let path = golden_path();
    match fs::read_to_string(&path) {
        Ok(text) => {
            let golden: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            ensure(golden == current, || format!("golden {golden} vs {current}"))?;
            Ok(format!("solution_dim {} matches golden", record[0]["solution_dim"]))
        }
        Err(_) => {
            fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
            fs::write(&path, serde_json::to_string_pretty(&current).unwrap() + "\n").map_err(|e| e.to_string())?;
            Ok(format!("solution_dim {} recorded as golden", record[0]["solution_dim"]))
        }
    }
}

fn criterion_10() -> Outcome {
    let mut out = Vec::new();
    for q in [ratio(3, 2), random_points()[0].clone()] {
        let ctx = QCtx::new(q.clone());
        for cap in 2..=4 {
            let t = table(1, 0, cap + 2, &ctx)?;
            let p = projectivity_certificate(t, &ctx, cap).map_err(|e| format!("c=1 q={q} cap {cap}: {e}"))?;
            ensure(p.certified(), || format!("c=1 q={q} cap {cap}: {}", p.to_json()))?;
            let t0 = table(0, 0, cap + 2, &ctx)?;
            match projectivity_certificate(t0, &ctx, cap) {
                Err(TangentError::NoSolution { .. }) => {}
                Ok(p) if !p.certified() => {}
                other => return Err(format!("c=0 q={q} cap {cap}: {other:?}")),
            }
        }
        out.push(format!("q={q}"));
    }
    Ok(format!("caps 2-4 at {}: c=1 certified, c=0 no projector", out.join(", ")))
}

fn criterion_11() -> Outcome {
    let ctx = symbolic();
    let one = QCtx::<BigRational>::classical();
    let mut done = Vec::new();

    let t = table(1, 0, 4, &ctx)?;
    let oracle = ClassicalHyperboloid::new(rat(1), 4).product_table();
    for (k, v) in t.entries() {
        let vals: Vec<Scalar> = v.values().cloned().collect();
        let lim: Vec<(usize, BigRational)> = v.keys().copied().zip(limits(&vals)?).filter(|(_, x)| !Field::is_zero(x)).collect();
        let expect: Vec<(usize, BigRational)> = oracle.entries()[k].iter().map(|(&i, x)| (i, x.clone())).collect();
        ensure(lim == expect, || format!("product {k:?}: {lim:?} vs {expect:?}"))?;
    }
    done.push("product table");

    let br = limit_mat(&qlie_bracket(&ctx).matrix)?;
    let bt = bracket_table();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                ensure(br.get(c, a * 3 + b) == &bt[a][b][c], || format!("bracket [{a},{b}]_{c}"))?;
            }
        }
    }
    done.push("q-bracket");

    for n in [2, 3] {
        let s = limit_mat(&standard_hecke(n, &ctx).matrix)?;
        let mut flip = Mat::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                flip.set(j * n + i, i * n + j, rat(1));
            }
        }
        ensure(s == flip, || format!("Hecke n={n} limit is not the flip"))?;
    }
    done.push("Hecke symmetry");

    let classical = classical_differential(&rat(1), 5, 4).map_err(|e| e.to_string())?;
    let synth = synthesize_differential::<Scalar>(&classical).map_err(|e| e.to_string())?;
    for (s, c) in synth.sectors.iter().zip(&classical.sectors) {
        ensure(limits(&s.d0)? == c.d0 && limits(&s.d1)? == c.d1, || format!("differential spin {}", s.spin))?;
    }
    done.push("differentials");

    let cap = 2;
    let b = solve_braided_action(&t, &ctx, cap).map_err(|e| e.to_string())?;
    let flat: Vec<Scalar> = b.constants.iter().flatten().cloned().collect();
    let oracle: Vec<BigRational> = classical_rotation_constants(cap + 1).map_err(|e| e.to_string())?.into_iter().flatten().collect();
    ensure(limits(&flat)? == oracle, || "braided action limit".into())?;
    ensure(limits(&[b.sigma.clone()])? == [ratio(1, 2)], || format!("sigma -> {}", b.sigma))?;
    done.push("braided action");

    let m = solve_metric(&t, &ctx, &rat(1), 4).map_err(|e| e.to_string())?;
    let (a_cl, b_cl) = classical_gram_coefficients(&rat(1)).map_err(|e| e.to_string())?;
    ensure(limits(&[m.a.clone(), m.b.clone()])? == [a_cl, b_cl], || "metric limit".into())?;
    done.push("metric");

    let cutoff = 3;
    let th = table(1, 1, 4, &ctx)?;
    let tl = build_tangent(t.clone(), &ctx, Side::Left, cutoff).map_err(|e| e.to_string())?;
    let tr = build_tangent(t.clone(), &ctx, Side::Right, cutoff).map_err(|e| e.to_string())?;
    let alpha = build_alpha(&tl, &tr, &th).map_err(|e| e.to_string())?;
    let values: Vec<Scalar> = alpha.entries.iter().map(|e| e.value.clone()).collect();
    let t1 = table(1, 0, 4, &one)?;
    let cl = build_tangent(t1.clone(), &one, Side::Left, cutoff).map_err(|e| e.to_string())?;
    let cr = build_tangent(t1.clone(), &one, Side::Right, cutoff).map_err(|e| e.to_string())?;
    let flip = flip_coefficients(&cl, &cr).ok_or("flip is not diagonal on components")?;
    ensure(limits(&values)? == flip, || format!("alpha limit vs flip {flip:?}"))?;
    done.push("alpha");

    let conn = solve_connection(t.clone(), &ctx, 4).map_err(|e| e.to_string())?;
    let conn1 = solve_connection(t1.clone(), &one, 4).map_err(|e| e.to_string())?;
    ensure(limits(&conn.constants)? == conn1.constants, || "connection limit".into())?;
    done.push("connection");

    let p = projectivity_certificate(t, &ctx, cap).map_err(|e| e.to_string())?;
    let p1 = projectivity_certificate(t1, &one, cap).map_err(|e| e.to_string())?;
    ensure(limits(&p.constants)? == p1.constants && p1.certified(), || "projector limit".into())?;
    done.push("projector");

    Ok(done.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("de Rham cohomology (1,0,1)", criterion_1),
        ("flatness (N+1)^2", criterion_2),
        ("Omega^1 / Omega^2 multiplicities", criterion_3),
        ("d0 injective, ker d1 = im d0", criterion_4),
        ("Koszul suite", criterion_5),
        ("reflection equation dims", criterion_6),
        ("metric uniqueness", criterion_7),
        ("braided action at cap 4", criterion_8),
        ("connection at cap 4", criterion_9),
        ("projectivity caps 2-4", criterion_10),
        ("classical limits", criterion_11),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s] {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
