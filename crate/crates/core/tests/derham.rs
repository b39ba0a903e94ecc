use std::sync::Arc;

use num_rational::BigRational;
use qgeom::derham::{
    build_omega, classical_differential, classical_multiplicities, synthesize_differential, DeRhamComplex,
};
use qgeom::hyperboloid::{build_algebra, ProductTable, QHParams};
use qgeom::{Field, QCtx, Scalar};

fn ratio(p: i64, r: i64) -> BigRational {
    BigRational::new(p.into(), r.into())
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn table<F: Field>(c: i64, degree: usize, ctx: &QCtx<F>) -> Arc<ProductTable<F>> {
    Arc::new(build_algebra(&QHParams::from_ints(c, 0, degree), ctx).unwrap().into_table())
}

/// Spins of `Ω¹` summands: `(V_i ⊗ V′)_s` for `s ∈ {i, i+1}`, `s ≥ 1`;
/// of `Ω²`: `(V_i ⊗ V″)_{i-1}` for `i ≥ 1`.
fn expected_multiplicity(level: usize, spin: usize, top: usize) -> usize {
    (0..=top)
        .map(|i| match level {
            0 => usize::from(i == spin),
            1 => usize::from(i + 1 == spin) + usize::from(i == spin && i >= 1),
            _ => usize::from(i >= 1 && i - 1 == spin),
        })
        .sum()
}

#[test]
fn multiplicities_match_component_count() {
    let ctx = QCtx::new(ratio(3, 2));
    let t = table(1, 5, &ctx);
    for level in 0..3 {
        let om = build_omega(t.clone(), &ctx, level, 3).unwrap();
        let expect: Vec<usize> = (0..=3).map(|j| expected_multiplicity(level, j, 5)).collect();
        assert_eq!(om.multiplicities(), expect, "level {level}");
        assert_eq!(classical_multiplicities(&rat(1), 5, level, 3).unwrap(), expect);
    }
    assert_eq!(build_omega(t.clone(), &ctx, 1, 3).unwrap().multiplicities(), vec![0, 2, 2, 2]);
    assert_eq!(build_omega(t, &ctx, 2, 3).unwrap().multiplicities(), vec![1, 1, 1, 1]);
}

#[test]
fn euler_characteristic_per_spin() {
    for j in 0..6 {
        let chi = expected_multiplicity(0, j, 8) as i64 - expected_multiplicity(1, j, 8) as i64
            + expected_multiplicity(2, j, 8) as i64;
        assert_eq!(chi, if j == 0 { 2 } else { 0 });
    }
}

#[test]
fn classical_differential_shape() {
    let d = classical_differential(&rat(1), 5, 4).unwrap();
    assert!(d.sector(0).unwrap().d0.is_empty());
    for j in 1..=4 {
        let s = d.sector(j).unwrap();
        assert_eq!((s.d0.len(), s.d1.len()), (2, 2));
        assert!(s.d0.iter().any(|x| !Field::is_zero(x)));
        // the (V_{j-1} ⊗ V′)_j summand is closed
        assert!(Field::is_zero(&s.d1[0]), "spin {j}: {:?}", s.d1);
        assert!(!Field::is_zero(&s.d1[1]));
    }
    // du lies in the fiber V′
    assert!(Field::is_zero(&d.sector(1).unwrap().d0[1]));
    assert!(d.composites().iter().all(Field::is_zero));
}

#[test]
fn synthesized_differential_limits() {
    let classical = classical_differential(&rat(1), 5, 4).unwrap();
    let synth = synthesize_differential::<Scalar>(&classical).unwrap();
    assert!(synth.composites().iter().all(|x| x.is_zero()));
    for (s, c) in synth.sectors.iter().zip(&classical.sectors) {
        let d0: Vec<BigRational> = s.d0.iter().map(|x| x.limit_q1().unwrap()).collect();
        let d1: Vec<BigRational> = s.d1.iter().map(|x| x.limit_q1().unwrap()).collect();
        assert_eq!((d0, d1), (c.d0.clone(), c.d1.clone()));
    }
}

fn check_complex<F: Field>(ctx: &QCtx<F>) {
    let complex = DeRhamComplex::build(table(1, 5, ctx), ctx, 4).unwrap().with_limit(3);
    assert!(complex.composite_vanishes());
    assert!(complex.is_equivariant());
    let coh = complex.cohomology();
    assert_eq!(coh.dims, [1, 0, 1]);
    for s in &coh.sectors {
        let expect = if s.spin == 0 { [1, 0, 1] } else { [0, 0, 0] };
        assert_eq!(s.cohomology, expect, "spin {}", s.spin);
        if s.spin >= 1 {
            assert_eq!(s.ranks, [1, 1]);
        }
    }
    assert_eq!(coh.h0_generators.len(), 1);
    let h0 = &coh.h0_generators[0];
    assert!(!h0.coeffs[0].is_zero());
    assert!(h0.coeffs[1..].iter().all(Field::is_zero));
    assert_eq!(coh.h2_generators, vec!["(V⊗V″)_0".to_string()]);
}

#[test]
fn cohomology_symbolic() {
    check_complex(&QCtx::new(Scalar::q()));
}

#[test]
fn cohomology_at_rational_points() {
    for (p, r) in [(3, 2), (2, 7), (-5, 3)] {
        check_complex(&QCtx::new(ratio(p, r)));
    }
}

#[test]
fn truncation_stability() {
    let ctx = QCtx::new(ratio(5, 4));
    let t = table(1, 5, &ctx);
    let wide = DeRhamComplex::build(t.clone(), &ctx, 4).unwrap().with_limit(3).cohomology();
    let narrow = DeRhamComplex::build(t, &ctx, 3).unwrap().with_limit(2).cohomology();
    assert_eq!(&wide.sectors[..3], &narrow.sectors[..]);
    assert_eq!(wide.dims, narrow.dims);
}

#[test]
fn json_report() {
    let ctx = QCtx::new(ratio(3, 2));
    let complex = DeRhamComplex::build(table(1, 4, &ctx), &ctx, 3).unwrap();
    let v = complex.to_json();
    assert_eq!(v["cohomology"], serde_json::json!([1, 0, 1]));
    assert_eq!(v["sectors"][1]["mults"], serde_json::json!([1, 2, 1]));
}
