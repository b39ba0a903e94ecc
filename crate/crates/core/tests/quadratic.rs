use num_rational::BigRational;
use proptest::prelude::*;
use qgeom::quadratic::{
    complementarity_check, graded_dims, intersection_space, poincare_identity, poincare_product_is_one,
    re_algebra_dims, standard_hecke, sum_space, HeckeSymmetry, KoszulComplex, QuadraticError, Which,
};
use qgeom::{Mat, QCtx, Scalar};

fn ctx() -> QCtx<Scalar> {
    QCtx::new(Scalar::q())
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn sym_dim(n: usize, k: usize) -> usize {
    binomial(n + k - 1, k)
}

#[test]
fn standard_hecke_eigenspaces() {
    let ctx = ctx();
    let s = standard_hecke(2, &ctx);
    assert!(s.satisfies_braid_relation());
    assert!(s.satisfies_hecke_condition(&ctx));
    let id = Mat::identity(4);
    let q_space = s.matrix.minus(&id.scale(ctx.q())).kernel();
    let skew_space = s.matrix.plus(&id.scale(&ctx.qpow(-1))).kernel();
    assert_eq!((q_space.len(), skew_space.len()), (3, 1));
    assert_eq!(s.symmetric_part(&ctx).len(), 3);

    let s3 = standard_hecke(3, &ctx);
    assert!(s3.satisfies_hecke_condition(&ctx) && s3.satisfies_braid_relation());
    assert_eq!(s3.symmetric_part(&ctx).len() + s3.skew_part(&ctx).len(), 9);
}

#[test]
fn hecke_limit_is_flip() {
    let s = standard_hecke(3, &ctx());
    let lim = s.matrix.try_map(|x| x.limit_q1()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..9 {
                let expect = i64::from(k == j * 3 + i);
                assert_eq!(lim.get(k, i * 3 + j), &BigRational::from_integer(expect.into()));
            }
        }
    }
}

#[test]
fn hecke_json_round_trip() {
    let ctx = ctx();
    let s = standard_hecke(2, &ctx);
    let text = s.to_json();
    assert_eq!(HeckeSymmetry::from_json(&text, &ctx).unwrap(), s);

    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["entries"][0] = "(q^2)/(1)".into();
    assert!(HeckeSymmetry::from_json(&v.to_string(), &ctx).is_err());
    v["entries"] = serde_json::json!(["1"]);
    assert!(matches!(
        HeckeSymmetry::from_json(&v.to_string(), &ctx),
        Err(QuadraticError::Shape { expected: 16, got: 1 })
    ));
}

#[test]
fn intersection_and_sum_spaces() {
    let ctx = ctx();
    let data = standard_hecke(2, &ctx).quadratic_data(&ctx);
    for which in [Which::Plus, Which::Minus] {
        assert_eq!(intersection_space(&data, Some(which), 2).rank(), data.part(which).len());
        assert_eq!(sum_space(&data, Some(which), 2).rank(), data.part(which).len());
    }
    assert_eq!(intersection_space(&data, Some(Which::Plus), 3).rank(), sym_dim(2, 3));
    assert_eq!(intersection_space(&data, Some(Which::Minus), 3).rank(), binomial(2, 3));
    assert_eq!(8 - sum_space(&data, Some(Which::Minus), 3).rank(), sym_dim(2, 3));
    assert_eq!(intersection_space(&data, None, 0).rank(), 1);
    assert_eq!(intersection_space(&data, None, 1).rank(), 2);

    let data3 = standard_hecke(3, &ctx).quadratic_data(&ctx);
    assert_eq!(27 - sum_space(&data3, Some(Which::Minus), 3).rank(), sym_dim(3, 3));
}

#[test]
fn complementarity() {
    let ctx = ctx();
    let data = standard_hecke(2, &ctx).quadratic_data(&ctx);
    for k in 2..=4 {
        let c = complementarity_check(&data, k);
        assert!(c.complementary, "{c:?}");
        assert_eq!(c.plus_intersection + c.minus_sum, 1 << k);
    }
    let c = complementarity_check(&standard_hecke(3, &ctx).quadratic_data(&ctx), 3);
    assert!(c.complementary);
    assert_eq!((c.plus_intersection, c.minus_sum), (10, 17));
    assert_eq!(c.minus_intersection, 1);
}

#[test]
fn koszul_complex() {
    let ctx = ctx();
    let data = standard_hecke(2, &ctx).quadratic_data(&ctx);
    let kc = KoszulComplex::new(&data, 4);
    assert_eq!(kc.differential(0, 1), Mat::identity(2));
    for m in 0..3 {
        for n in 2..=4 - m {
            assert!(kc.differential(m + 1, n - 1).mul(&kc.differential(m, n)).is_zero());
        }
    }
    assert_eq!(kc.differential(0, 2).rank() + kc.differential(1, 1).rank(), kc.term_dim(1, 1));
    assert_eq!(kc.term_dim(1, 1), 4);
    assert_eq!(kc.homology(0, 0), 1);
    for total in 1..=4 {
        for m in 0..=total {
            assert_eq!(kc.homology(m, total - m), 0, "({m},{})", total - m);
        }
    }
}

#[test]
fn poincare_series() {
    let ctx = ctx();
    let (plus, minus, ok) = poincare_identity(&standard_hecke(2, &ctx).quadratic_data(&ctx), 6);
    assert!(ok);
    // (1 - t)^-2 and (1 + t)^2
    assert_eq!(plus, (0..=6).map(|k| k + 1).collect::<Vec<_>>());
    assert_eq!(minus, vec![1, 2, 1, 0, 0, 0, 0]);
    let (_, minus3, ok3) = poincare_identity(&standard_hecke(3, &ctx).quadratic_data(&ctx), 5);
    assert!(ok3);
    assert_eq!(minus3, (0..=5).map(|k| binomial(3, k)).collect::<Vec<_>>());
    assert!(poincare_product_is_one(&[1, 5], &[1, 5], 1));
    assert!(!poincare_product_is_one(&[1, 5], &[1, 4], 1));
}

#[test]
fn reflection_equation_dims() {
    let dims = re_algebra_dims(2, 3, &ctx());
    assert_eq!(dims, (0..=3).map(|k| sym_dim(4, k)).collect::<Vec<_>>());
    assert_eq!(&dims[..2], &[1, 4]);
}

#[test]
fn classical_graded_dims() {
    let one = QCtx::<BigRational>::classical();
    let data = standard_hecke(3, &one).quadratic_data(&one);
    assert_eq!(graded_dims(3, data.part(Which::Minus), 4), (0..=4).map(|k| sym_dim(3, k)).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flat_at_rational_points(p in 2i64..60, r in 2i64..60, n in 2usize..=3) {
        prop_assume!(p != r);
        let ctx = QCtx::new(BigRational::new(p.into(), r.into()));
        let s = standard_hecke(n, &ctx);
        prop_assert!(s.satisfies_braid_relation() && s.satisfies_hecke_condition(&ctx));
        let data = s.quadratic_data(&ctx);
        let (plus, minus, ok) = poincare_identity(&data, 4);
        prop_assert!(ok);
        prop_assert_eq!(plus, (0..=4).map(|k| sym_dim(n, k)).collect::<Vec<_>>());
        prop_assert_eq!(minus, (0..=4).map(|k| binomial(n, k)).collect::<Vec<_>>());
        prop_assert!(complementarity_check(&data, 3).complementary);
        prop_assert_eq!(re_algebra_dims(2, 2, &ctx), vec![1, 4, 10]);
    }
}
