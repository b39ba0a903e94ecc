use std::collections::BTreeMap;

use num_rational::BigRational;
use proptest::prelude::*;
use qgeom::classical::{bracket_table, ClassicalHyperboloid};
use qgeom::hyperboloid::{
    act_canonical, basis_index, build_algebra, canonical_dim, qlie_bracket, quadratic_highest_weights, relation_space,
    word, CanonicalElement, HyperboloidError, ProductTable, QHParams, RelationSpan,
};
use qgeom::uqsl2::{isotypic_projector, Generator, Spin};
use qgeom::{decompose, irrep, tensor, Field, Mat, QCtx, Scalar};

fn ratio(p: i64, r: i64) -> BigRational {
    BigRational::new(p.into(), r.into())
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn at(p: i64, r: i64) -> QCtx<BigRational> {
    QCtx::new(ratio(p, r))
}

/// Rank of a set of tensors over their common support.
fn tensor_rank<F: Field>(ts: &[BTreeMap<Vec<u8>, F>]) -> usize {
    let mut words: Vec<&Vec<u8>> = ts.iter().flat_map(|t| t.keys()).collect();
    words.sort();
    words.dedup();
    let rows = ts
        .iter()
        .map(|t| words.iter().map(|w| t.get(*w).cloned().unwrap_or_else(F::zero)).collect())
        .collect();
    Mat::from_rows(rows).rank()
}

#[test]
fn classical_relations_are_commutators_and_casimir() {
    let one = QCtx::<BigRational>::classical();
    let rels = relation_space(&QHParams::from_ints(0, 0, 2), &one).unwrap();
    assert_eq!(rels.len(), 4);
    let mut oracle: Vec<BTreeMap<Vec<u8>, BigRational>> = Vec::new();
    for (a, b) in [(0u8, 1u8), (0, 2), (1, 2)] {
        oracle.push(BTreeMap::from([(vec![a, b], rat(1)), (vec![b, a], rat(-1))]));
    }
    // 2uw + 2wu + vv with u = e0, v = e1, w = -e2
    oracle.push(BTreeMap::from([(vec![0, 2], rat(-2)), (vec![2, 0], rat(-2)), (vec![1, 1], rat(1))]));
    assert_eq!(tensor_rank(&oracle), 4);
    let mut all = oracle.clone();
    all.extend(rels);
    assert_eq!(tensor_rank(&all), 4);
}

#[test]
fn relation_space_constant_term() {
    let ctx = at(3, 2);
    let rels = relation_space(&QHParams::from_ints(1, 0, 2), &ctx).unwrap();
    assert_eq!(rels[0].get(&Vec::new()), Some(&rat(-1)));
    assert!(rels[1..].iter().all(|r| r.keys().all(|w| w.len() == 2)));
    assert_eq!(tensor_rank(&rels), 4);
}

#[test]
fn quotient_dimensions() {
    let ctx = at(5, 7);
    for (c, hbar, n) in [(1, 0, 2), (1, 0, 4), (1, 1, 3)] {
        let span = RelationSpan::build(&QHParams::from_ints(c, hbar, n), &ctx).unwrap();
        assert_eq!(span.quotient_dim(), (n + 1) * (n + 1));
    }
    assert!(matches!(
        build_algebra(&QHParams::from_ints(1, 0, 1), &ctx),
        Err(HyperboloidError::DegreeTooSmall(1))
    ));
}

#[test]
fn quotient_is_multiplicity_free() {
    let ctx = at(3, 2);
    let alg = build_algebra(&QHParams::from_ints(1, 0, 3), &ctx).unwrap();
    // the canonical basis carries exactly one copy of each spin
    let reps: Vec<_> = (0..canonical_dim(3)).map(|i| alg.representative(i).clone()).collect();
    assert_eq!(reps.len(), 16);
    for i in 0..reps.len() {
        let e = CanonicalElement::basis(3, i);
        assert_eq!(alg.canonical_form(&alg.lift(&e)), e);
    }
    let m = qgeom::hyperboloid::algebra_rep(3, &ctx);
    let d = decompose(&m, &ctx).unwrap();
    assert_eq!(d.multiplicities(), (0..=3).map(|i| (Spin::integer(i), 1)).collect::<Vec<_>>());
}

#[test]
fn canonical_form_examples() {
    let ctx = QCtx::new(Scalar::q());
    let alg = build_algebra(&QHParams::from_ints(2, 0, 3), &ctx).unwrap();
    assert_eq!(alg.canonical_form(&word(&[0, 0])), CanonicalElement::basis(3, basis_index(2, 0)));
    let [v0, v1, _] = quadratic_highest_weights(&ctx);
    assert_eq!(alg.canonical_form(&v0), CanonicalElement::one(3).scale(&Scalar::from(2)));
    assert!(alg.canonical_form(&v1).is_zero());

    let with_hbar = build_algebra(&QHParams::from_ints(2, 3, 3), &ctx).unwrap();
    assert_eq!(
        with_hbar.canonical_form(&v1),
        CanonicalElement::basis(3, basis_index(1, 0)).scale(&Scalar::from(3))
    );
}

#[test]
fn spin_zero_part_of_generator_products_scales_with_c() {
    let ctx = at(3, 2);
    let (u, w) = (CanonicalElement::basis(2, basis_index(1, 0)), CanonicalElement::basis(2, basis_index(1, 2)));
    let spin_zero = |c: i64| {
        let alg = build_algebra(&QHParams::from_ints(c, 0, 2), &ctx).unwrap();
        alg.multiply(&u, &w).unwrap().coeffs[0].clone()
    };
    let unit = spin_zero(1);
    assert!(!Field::is_zero(&unit));
    assert_eq!(spin_zero(5), &unit * &rat(5));
    assert!(Field::is_zero(&spin_zero(0)));
}

#[test]
fn unit_and_overflow() {
    let ctx = at(2, 5);
    let alg = build_algebra(&QHParams::from_ints(1, 0, 3), &ctx).unwrap();
    for i in 0..16 {
        let b = CanonicalElement::basis(3, i);
        assert_eq!(alg.multiply(&CanonicalElement::one(3), &b).unwrap(), b);
        assert_eq!(alg.multiply(&b, &CanonicalElement::one(3)).unwrap(), b);
    }
    let x = CanonicalElement::basis(3, basis_index(2, 0));
    assert!(matches!(alg.multiply(&x, &x), Err(HyperboloidError::TruncationOverflow(2, 2, 3))));
}

fn associative<F: Field>(t: &ProductTable<F>) {
    let n = t.degree();
    for a in 0..t.dim() {
        for b in 0..t.dim() {
            for c in 0..t.dim() {
                let (ia, ib, ic) = (label(a), label(b), label(c));
                if ia + ib + ic > n {
                    continue;
                }
                let (ea, eb, ec) = (CanonicalElement::basis(n, a), CanonicalElement::basis(n, b), CanonicalElement::basis(n, c));
                let left = t.multiply(&t.multiply(&ea, &eb).unwrap(), &ec).unwrap();
                let right = t.multiply(&ea, &t.multiply(&eb, &ec).unwrap()).unwrap();
                assert_eq!(left, right, "({a},{b},{c})");
            }
        }
    }
}

fn label(idx: usize) -> usize {
    qgeom::hyperboloid::basis_label(idx).0
}

#[test]
fn associativity() {
    associative(build_algebra(&QHParams::from_ints(1, 0, 3), &QCtx::new(Scalar::q())).unwrap().table());
    associative(build_algebra(&QHParams::from_ints(1, 1, 4), &at(3, 2)).unwrap().table());
}

/// `E(ab) = E(a) b + K(a) E(b)`, `F(ab) = F(a) K⁻¹(b) + a F(b)`, `K(ab) = K(a) K(b)`.
fn covariant<F: Field>(t: &ProductTable<F>, ctx: &QCtx<F>, a: &CanonicalElement<F>, b: &CanonicalElement<F>) {
    let m = |x: &CanonicalElement<F>, y: &CanonicalElement<F>| t.multiply(x, y).unwrap();
    let act = |g, x: &CanonicalElement<F>| act_canonical(ctx, g, x);
    let ab = m(a, b);
    let ka = act(Generator::K, a);
    assert_eq!(act(Generator::E, &ab), m(&act(Generator::E, a), b).plus(&m(&ka, &act(Generator::E, b))));
    assert_eq!(act(Generator::K, &ab), m(&ka, &act(Generator::K, b)));
    let degree = t.degree();
    let mut kinv_b = CanonicalElement::zero(degree);
    for i in 0..=degree {
        let r = irrep(Spin::integer(i as u32), ctx);
        let image = r.k_inv().mul_vec(b.component(i));
        kinv_b.coeffs[i * i..(i + 1) * (i + 1)].clone_from_slice(&image);
    }
    assert_eq!(act(Generator::F, &ab), m(&act(Generator::F, a), &kinv_b).plus(&m(a, &act(Generator::F, b))));
}

#[test]
fn product_is_covariant_symbolically() {
    let ctx = QCtx::new(Scalar::q());
    let alg = build_algebra(&QHParams::from_ints(1, 1, 3), &ctx).unwrap();
    for a in 0..9 {
        for b in 0..4 {
            covariant(alg.table(), &ctx, &CanonicalElement::basis(3, a), &CanonicalElement::basis(3, b));
        }
    }
}

#[test]
fn classical_limit_matches_commutative_oracle() {
    for c in [1, 3] {
        let alg = build_algebra(&QHParams::from_ints(c, 0, 3), &QCtx::new(Scalar::q())).unwrap();
        let oracle = ClassicalHyperboloid::new(rat(c), 3).product_table();
        for (k, v) in alg.table().entries() {
            let lim: BTreeMap<usize, BigRational> = v
                .iter()
                .map(|(&i, x)| (i, x.limit_q1().unwrap()))
                .filter(|(_, x)| !Field::is_zero(x))
                .collect();
            let expect: BTreeMap<usize, BigRational> = oracle.entries()[k].iter().map(|(&i, x)| (i, x.clone())).collect();
            assert_eq!(lim, expect, "{k:?}");
        }
    }
}

#[test]
fn table_json_round_trip_and_digest() {
    let t = build_algebra(&QHParams::from_ints(1, 1, 3), &QCtx::new(Scalar::q())).unwrap().into_table();
    let back = ProductTable::<Scalar>::from_json(&t.to_json()).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.digest(), t.digest());
    let other = build_algebra(&QHParams::from_ints(1, 0, 3), &QCtx::new(Scalar::q())).unwrap().into_table();
    assert_ne!(other.digest(), t.digest());
    assert!(ProductTable::<Scalar>::from_json("{").is_none());
}

#[test]
fn bracket() {
    let ctx = QCtx::new(Scalar::q());
    let br = qlie_bracket(&ctx);
    assert!(br.is_intertwiner());
    let v = irrep(Spin::integer(1), &ctx);
    let vv = tensor(&v, &v);
    let d = decompose(&vv, &ctx).unwrap();
    for s in [0, 2] {
        assert!(br.matrix.mul(&isotypic_projector(&vv, &d, Spin::integer(s)).matrix).is_zero());
    }
    assert!(!br.matrix.mul(&isotypic_projector(&vv, &d, Spin::integer(1)).matrix).is_zero());
    let lim = br.matrix.try_map(|x| x.limit_q1()).unwrap();
    // [e0, e1] = 2 e0, [e0, e2] = e1, [e1, e2] = 2 e2
    let mut oracle = [[[rat(0), rat(0), rat(0)], [rat(0), rat(0), rat(0)], [rat(0), rat(0), rat(0)]], Default::default(), Default::default()];
    oracle[1] = oracle[0].clone();
    oracle[2] = oracle[0].clone();
    for (a, b, c, x) in [(0, 1, 0, 2), (0, 2, 1, 1), (1, 2, 2, 2)] {
        oracle[a][b][c] = rat(x);
        oracle[b][a][c] = rat(-x);
    }
    assert_eq!(oracle, bracket_table());
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                assert_eq!(lim.get(c, a * 3 + b), &oracle[a][b][c]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flat_for_random_parameters(
        p in 2i64..60, r in 2i64..60,
        c in -3i64..=3, hbar in -3i64..=3,
        n in 2usize..=4,
    ) {
        prop_assume!(p != r);
        let ctx = at(p, r);
        let span = RelationSpan::build(&QHParams::from_ints(c, hbar, n), &ctx).unwrap();
        prop_assert_eq!(span.quotient_dim(), canonical_dim(n));
        prop_assert_eq!(span.quotient_dims_by_degree(), (0..=n).map(|k| (k + 1) * (k + 1)).collect::<Vec<_>>());
    }

    #[test]
    fn covariance_on_random_pairs(
        p in 2i64..30, r in 2i64..30,
        a in prop::collection::vec(-3i64..=3, 9),
        b in prop::collection::vec(-3i64..=3, 9),
    ) {
        prop_assume!(p != r);
        let ctx = at(p, r);
        let alg = build_algebra(&QHParams::from_ints(1, 1, 4), &ctx).unwrap();
        let elem = |v: &[i64]| {
            let mut e = CanonicalElement::zero(4);
            for (i, x) in v.iter().enumerate() {
                e.coeffs[i] = rat(*x);
            }
            e
        };
        covariant(alg.table(), &ctx, &elem(&a), &elem(&b));
    }
}
