use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficient domain for every computation in the crate.
///
/// Implemented by [`Scalar`](super::Scalar) (the field of rational functions in `q`)
/// and by `BigRational` (used for specializations at a fixed rational `q`).
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Multiplicative inverse; `None` for zero.
    fn inverse(&self) -> Option<Self>;
    fn from_rational(r: &BigRational) -> Self;
    /// Inverse of [`Field::canonical_string`].
    fn parse_canonical(s: &str) -> Option<Self>;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    /// Panics on division by zero.
    fn over(&self, other: &Self) -> Self {
        self.times(&other.inverse().expect("division by zero"))
    }

    /// Canonical string form, parseable by the corresponding `FromStr`.
    fn canonical_string(&self) -> String {
        self.to_string()
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn parse_canonical(s: &str) -> Option<Self> {
        super::parse_rational(s).ok()
    }
}

/// The deformation parameter together with its inverse, in a chosen field.
#[derive(Clone, Debug)]
pub struct QCtx<F: Field> {
    q: F,
    q_inv: F,
}

impl<F: Field> QCtx<F> {
    /// Panics if `q` is zero.
    pub fn new(q: F) -> Self {
        let q_inv = q.inverse().expect("q must be nonzero");
        QCtx { q, q_inv }
    }

    pub fn q(&self) -> &F {
        &self.q
    }

    /// `q^n` for any integer `n`.
    pub fn qpow(&self, n: i64) -> F {
        let base = if n >= 0 { &self.q } else { &self.q_inv };
        let mut acc = F::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.times(base);
        }
        acc
    }

    /// Symmetric q-number `[n] = (q^n - q^-n)/(q - q^-1)`, expanded as the
    /// Laurent polynomial `q^(n-1) + q^(n-3) + ... + q^(1-n)` so that `q = 1`
    /// is allowed.
    pub fn qint(&self, n: i64) -> F {
        if n < 0 {
            return self.qint(-n).negated();
        }
        (0..n).fold(F::zero(), |acc, k| acc.plus(&self.qpow(n - 1 - 2 * k)))
    }

    /// `[n]! = [1][2]...[n]`.
    pub fn qfact(&self, n: u32) -> F {
        (1..=n as i64).fold(F::one(), |acc, k| acc.times(&self.qint(k)))
    }
}

impl QCtx<BigRational> {
    /// The classical point `q = 1`.
    pub fn classical() -> Self {
        QCtx::new(<BigRational as One>::one())
    }
}
