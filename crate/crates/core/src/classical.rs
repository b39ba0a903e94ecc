//! Classical (`q = 1`, `ħ = 0`) oracles built from commutative polynomial
//! arithmetic in three variables, independent of the tensor-algebra
//! machinery: the hyperboloid as polynomials modulo `Casimir - c`, the sl(2)
//! action by derivations, exterior derivatives, and rotation vector fields.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::hyperboloid::{basis_label, canonical_dim, ProductTable, QHParams};
use crate::qfield::linalg::to_sparse;
use crate::qfield::Mat;

/// Exponent vector of `x_0^a x_1^b x_2^c`.
pub type Monomial = [u32; 3];

/// Commutative polynomial in `x_0, x_1, x_2` over Q.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly3 {
    terms: BTreeMap<Monomial, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

impl Poly3 {
    pub fn zero() -> Self {
        Poly3::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly3::zero();
        p.add_term([0, 0, 0], c);
        p
    }

    pub fn var(a: usize) -> Self {
        let mut m = [0; 3];
        m[a] = 1;
        let mut p = Poly3::zero();
        p.add_term(m, BigRational::one());
        p
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> Poly3 {
        let mut out = Poly3::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c * s);
        }
        out
    }

    pub fn sub(&self, other: &Poly3) -> Poly3 {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn mul(&self, other: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term([m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]], c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly3 {
        (0..n).fold(Poly3::constant(BigRational::one()), |acc, _| acc.mul(self))
    }

    pub fn partial(&self, a: usize) -> Poly3 {
        let mut out = Poly3::zero();
        for (m, c) in &self.terms {
            if m[a] > 0 {
                let mut nm = *m;
                nm[a] -= 1;
                out.add_term(nm, c * rat(m[a] as i64));
            }
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }
}

/// Images of the generators under the classical spin-1 action in the basis
/// `e_0, e_1, e_2`: `F e_0 = e_1`, `F e_1 = 2 e_2`, `E e_1 = 2 e_0`, `E e_2 = e_1`.
fn generator_image(op: char, a: usize) -> Poly3 {
    match (op, a) {
        ('F', 0) => Poly3::var(1),
        ('F', 1) => Poly3::var(2).scale(&rat(2)),
        ('E', 1) => Poly3::var(0).scale(&rat(2)),
        ('E', 2) => Poly3::var(1),
        _ => Poly3::zero(),
    }
}

/// `E` or `F` acting on polynomials as a derivation.
pub fn derive(op: char, p: &Poly3) -> Poly3 {
    let mut out = Poly3::zero();
    for a in 0..3 {
        let img = generator_image(op, a);
        if !img.is_zero() {
            out = out.add(&p.partial(a).mul(&img));
        }
    }
    out
}

/// The invariant quadratic `2 x_0 x_2 - x_1²/2`.
pub fn casimir() -> Poly3 {
    let mut p = Poly3::zero();
    p.add_term([1, 0, 1], rat(2));
    p.add_term([0, 2, 0], BigRational::new(rat(-1).to_integer(), 2.into()));
    p
}

/// Commutative hyperboloid `Q[x_0, x_1, x_2] / (Casimir - c)` truncated at a
/// degree, with the harmonic canonical basis `F^k(x_0^i)/k!`.
pub struct ClassicalHyperboloid {
    c: BigRational,
    degree: usize,
    basis: Vec<Poly3>,
    monomials: Vec<Monomial>,
    to_canonical: Mat<BigRational>,
}

impl ClassicalHyperboloid {
    pub fn new(c: BigRational, degree: usize) -> Self {
        let basis: Vec<Poly3> = (0..canonical_dim(degree))
            .map(|idx| {
                let (i, k) = basis_label(idx);
                let mut p = Poly3::var(0).pow(i as u32);
                for step in 1..=k {
                    p = derive('F', &p).scale(&BigRational::new(1.into(), (step as i64).into()));
                }
                p
            })
            .collect();
        // normal monomials: x_1 exponent at most one
        let mut monomials = Vec::new();
        for d in 0..=degree as u32 {
            for b in 0..=1u32.min(d) {
                for a in 0..=d - b {
                    monomials.push([a, b, d - b - a]);
                }
            }
        }
        let mut h = ClassicalHyperboloid {
            c,
            degree,
            basis,
            monomials,
            to_canonical: Mat::zeros(0, 0),
        };
        let cols: Vec<Vec<BigRational>> = h.basis.iter().map(|p| h.monomial_coords(p)).collect();
        let m = Mat::from_columns(&cols, h.monomials.len());
        h.to_canonical = m.inverse().expect("harmonic basis spans the classical hyperboloid");
        h
    }

    pub fn from_params(p: &QHParams) -> Self {
        ClassicalHyperboloid::new(p.c.clone(), p.degree)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis_poly(&self, idx: usize) -> &Poly3 {
        &self.basis[idx]
    }

    /// Rewrites `x_1² -> 4 x_0 x_2 - 2c` until every monomial is normal.
    pub fn normal_form(&self, p: &Poly3) -> Poly3 {
        let mut cur = p.clone();
        loop {
            let bad: Vec<(Monomial, BigRational)> = cur
                .terms
                .iter()
                .filter(|(m, _)| m[1] >= 2)
                .map(|(m, c)| (*m, c.clone()))
                .collect();
            if bad.is_empty() {
                return cur;
            }
            for (m, coef) in bad {
                cur.add_term(m, -coef.clone());
                let rest = [m[0], m[1] - 2, m[2]];
                cur.add_term([rest[0] + 1, rest[1], rest[2] + 1], &coef * rat(4));
                cur.add_term(rest, &coef * &self.c * rat(-2));
            }
        }
    }

    fn monomial_coords(&self, p: &Poly3) -> Vec<BigRational> {
        let nf = self.normal_form(p);
        let mut v = vec![BigRational::zero(); self.monomials.len()];
        for (m, c) in &nf.terms {
            let i = self
                .monomials
                .iter()
                .position(|x| x == m)
                .expect("polynomial degree exceeds the truncation");
            v[i] = c.clone();
        }
        v
    }

    /// Canonical coordinates of a polynomial of degree at most the truncation.
    pub fn coords(&self, p: &Poly3) -> Vec<BigRational> {
        self.to_canonical.mul_vec(&self.monomial_coords(p))
    }

    pub fn poly(&self, coords: &[BigRational]) -> Poly3 {
        let mut out = Poly3::zero();
        for (i, x) in coords.iter().enumerate() {
            if !x.is_zero() {
                out = out.add(&self.basis[i].scale(x));
            }
        }
        out
    }

    /// Product of two canonical basis elements in canonical coordinates.
    pub fn basis_product(&self, a: usize, b: usize) -> Vec<BigRational> {
        self.coords(&self.basis[a].mul(&self.basis[b]))
    }

    /// The structure constants in the same layout as the quantum tables.
    pub fn product_table(&self) -> ProductTable<BigRational> {
        let n = canonical_dim(self.degree);
        let mut entries = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if basis_label(a).0 + basis_label(b).0 <= self.degree {
                    entries.insert((a, b), to_sparse(&self.basis_product(a, b)));
                }
            }
        }
        let params = QHParams::new(self.c.clone(), BigRational::zero(), self.degree);
        ProductTable::from_entries(params, entries)
    }
}

/// `dx_a ∧ dx_b` as a vector in the spin-1 part of `V ⊗ V` at `q = 1`,
/// in the basis `w_k = F^k (e_0⊗e_1 - e_1⊗e_0) / k!`.
pub fn wedge_coords(a: usize, b: usize) -> [BigRational; 3] {
    // w_0 = e0e1 - e1e0, w_1 = 2(e0e2 - e2e0), w_2 = e1e2 - e2e1
    let z = BigRational::zero;
    let one = BigRational::one;
    let half = || BigRational::new(1.into(), 2.into());
    let (lo, hi, sign) = if a < b { (a, b, one()) } else { (b, a, -one()) };
    let base = match (lo, hi) {
        (0, 1) => [one(), z(), z()],
        (0, 2) => [z(), half(), z()],
        (1, 2) => [z(), z(), one()],
        _ => [z(), z(), z()],
    };
    base.map(|x| x * &sign)
}

/// A polynomial 1-form `Σ f_a dx_a`.
pub type Form1 = [Poly3; 3];

/// Exterior derivative of a function.
pub fn d_function(f: &Poly3) -> Form1 {
    [f.partial(0), f.partial(1), f.partial(2)]
}

/// Exterior derivative of a 1-form, as coefficients `g_k` of `w_k`.
pub fn d_form1(form: &Form1) -> [Poly3; 3] {
    let mut out = [Poly3::zero(), Poly3::zero(), Poly3::zero()];
    for (b, fb) in form.iter().enumerate() {
        for a in 0..3 {
            let da = fb.partial(a);
            if da.is_zero() {
                continue;
            }
            let w = wedge_coords(a, b);
            for k in 0..3 {
                if !w[k].is_zero() {
                    out[k] = out[k].add(&da.scale(&w[k]));
                }
            }
        }
    }
    out
}

/// Classical sl(2) bracket in the basis `e_0 = E`, `e_1 = -H`, `e_2 = -F`:
/// `[e_a, e_b] = Σ_c bracket[a][b][c] e_c`.
pub fn bracket_table() -> [[[BigRational; 3]; 3]; 3] {
    let z = || [BigRational::zero(), BigRational::zero(), BigRational::zero()];
    let mut t: [[[BigRational; 3]; 3]; 3] = [[z(), z(), z()], [z(), z(), z()], [z(), z(), z()]];
    let set = |t: &mut [[[BigRational; 3]; 3]; 3], a: usize, b: usize, c: usize, v: i64| {
        t[a][b][c] = rat(v);
        t[b][a][c] = rat(-v);
    };
    set(&mut t, 0, 1, 0, 2);
    set(&mut t, 0, 2, 1, 1);
    set(&mut t, 1, 2, 2, 2);
    t
}

/// Invariant form with `κ(e_0, e_2) = κ(e_2, e_0) = 1`, `κ(e_1, e_1) = -2`.
pub fn killing(a: usize, b: usize) -> BigRational {
    match (a, b) {
        (0, 2) | (2, 0) => rat(1),
        (1, 1) => rat(-2),
        _ => BigRational::zero(),
    }
}

/// The rotation field `X_a = ad(e_a)` as the derivation sending `x_b` to
/// the coordinate function of `[e_a, e_b]`.
pub fn rotation_field(a: usize, p: &Poly3) -> Poly3 {
    let t = bracket_table();
    let mut out = Poly3::zero();
    for b in 0..3 {
        let mut img = Poly3::zero();
        for c in 0..3 {
            img = img.add(&Poly3::var(c).scale(&t[a][b][c]));
        }
        out = out.add(&p.partial(b).mul(&img));
    }
    out
}

/// Gram matrix of the rotation fields under the metric `B` of the ambient
/// space with `B(x, x)` the Casimir: `G_ab = Σ B_cd X_a(x_c) X_b(x_d)`, as
/// quadratic polynomials.
pub fn rotation_gram() -> [[Poly3; 3]; 3] {
    let cas = casimir();
    let half = BigRational::new(1.into(), 2.into());
    let form = |c: usize, d: usize| -> BigRational {
        cas.partial(c).partial(d).terms().get(&[0, 0, 0]).cloned().unwrap_or_else(BigRational::zero) * &half
    };
    let velocity = |a: usize| -> [Poly3; 3] { [0, 1, 2].map(|c| rotation_field(a, &Poly3::var(c))) };
    let fields = [velocity(0), velocity(1), velocity(2)];
    let mut g: [[Poly3; 3]; 3] = Default::default();
    for a in 0..3 {
        for b in 0..3 {
            let mut acc = Poly3::zero();
            for c in 0..3 {
                for d in 0..3 {
                    let k = form(c, d);
                    if !k.is_zero() {
                        acc = acc.add(&fields[a][c].mul(&fields[b][d]).scale(&k));
                    }
                }
            }
            g[a][b] = acc;
        }
    }
    g
}

/// Converts a rational vector to any field.
pub fn lift_vec<F: crate::qfield::Field>(v: &[BigRational]) -> Vec<F> {
    v.iter().map(F::from_rational).collect()
}
