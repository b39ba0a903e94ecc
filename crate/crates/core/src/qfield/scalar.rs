use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::field::Field;
use super::poly::{format_int_poly, Poly};
use super::QFieldError;

/// Exact element of Q(q).
///
/// Stored as `q^shift * num / den` where neither `num` nor `den` is divisible
/// by `q`, `den` is monic and `gcd(num, den) = 1`. Laurent polynomials therefore
/// always have `den == 1`, which keeps their arithmetic free of gcd work.
/// Equal values have identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    shift: i64,
    num: Poly,
    den: Poly,
}

impl Scalar {
    /// The indeterminate `q`.
    pub fn q() -> Self {
        Scalar {
            shift: 1,
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        Scalar::from_parts(0, p, Poly::one())
    }

    pub fn from_ratio(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Scalar::from_parts(0, num, den)
    }

    fn from_parts(shift: i64, num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return <Scalar as Field>::zero();
        }
        let (kn, num) = num.strip_q();
        let (kd, den) = den.strip_q();
        let shift = shift + kn as i64 - kd as i64;
        let (num, den) = if den.degree() == Some(0) {
            (num, den)
        } else {
            let g = num.gcd(&den);
            if g.is_one() {
                (num, den)
            } else {
                (num.div_exact(&g), den.div_exact(&g))
            }
        };
        let lead = den.lead().unwrap().clone();
        if One::is_one(&lead) {
            Scalar { shift, num, den }
        } else {
            let inv = lead.recip();
            Scalar {
                shift,
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    /// Numerator and denominator as polynomials with `q^shift` folded in.
    pub fn numer_denom(&self) -> (Poly, Poly) {
        if self.shift >= 0 {
            (self.num.shift_up(self.shift as usize), self.den.clone())
        } else {
            (self.num.clone(), self.den.shift_up((-self.shift) as usize))
        }
    }

    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }

    /// Value at `q = x`, or `None` if `x` is a pole.
    pub fn eval(&self, x: &BigRational) -> Option<BigRational> {
        let (n, d) = self.numer_denom();
        let dv = d.eval(x);
        if Zero::is_zero(&dv) {
            return None;
        }
        Some(n.eval(x) / dv)
    }

    /// Classical limit `q -> 1`.
    pub fn limit_q1(&self) -> Result<BigRational, QFieldError> {
        self.eval(&<BigRational as One>::one()).ok_or(QFieldError::PoleAtOne)
    }

    /// Maximum of numerator and denominator degree, a crude size measure
    /// used for pivot selection.
    pub fn weight(&self) -> usize {
        self.num.degree().unwrap_or(0) + self.den.degree().unwrap_or(0) + 1
    }
}

impl Field for Scalar {
    fn zero() -> Self {
        Scalar {
            shift: 0,
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    fn one() -> Self {
        Scalar {
            shift: 0,
            num: Poly::one(),
            den: Poly::one(),
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn is_one(&self) -> bool {
        self.shift == 0 && self.num.is_one() && self.den.is_one()
    }

    fn plus(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let m = self.shift.min(other.shift);
        let a = self.num.shift_up((self.shift - m) as usize);
        let b = other.num.shift_up((other.shift - m) as usize);
        if self.den == other.den {
            return Scalar::from_parts(m, a.add(&b), self.den.clone());
        }
        let g = self.den.gcd(&other.den);
        let (da, db) = if g.is_one() {
            (self.den.clone(), other.den.clone())
        } else {
            (self.den.div_exact(&g), other.den.div_exact(&g))
        };
        let num = a.mul(&db).add(&b.mul(&da));
        let den = self.den.mul(&db);
        Scalar::from_parts(m, num, den)
    }

    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    fn times(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return <Scalar as Field>::zero();
        }
        let shift = self.shift + other.shift;
        if self.is_laurent() && other.is_laurent() {
            return Scalar {
                shift,
                num: self.num.mul(&other.num),
                den: Poly::one(),
            };
        }
        // cross-cancel before multiplying
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let n1 = self.num.div_exact(&g1);
        let d2 = other.den.div_exact(&g1);
        let n2 = other.num.div_exact(&g2);
        let d1 = self.den.div_exact(&g2);
        let num = n1.mul(&n2);
        let den = d1.mul(&d2);
        let lead = den.lead().unwrap().clone();
        if One::is_one(&lead) {
            Scalar { shift, num, den }
        } else {
            let inv = lead.recip();
            Scalar {
                shift,
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    fn negated(&self) -> Self {
        Scalar {
            shift: self.shift,
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let lead = self.num.lead().unwrap().recip();
        Some(Scalar {
            shift: -self.shift,
            num: self.den.scale(&lead),
            den: self.num.scale(&lead),
        })
    }

    fn from_rational(r: &BigRational) -> Self {
        Scalar::from_poly(Poly::constant(r.clone()))
    }

    fn parse_canonical(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl fmt::Display for Scalar {
    /// Canonical `(num)/(den)` form with primitive integer coefficients and a
    /// positive leading denominator coefficient, e.g. `(q^2+1)/(q)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.numer_denom();
        let mut l = BigInt::one();
        for c in n.coeffs().iter().chain(d.coeffs()) {
            l = num_integer::Integer::lcm(&l, c.denom());
        }
        let lr = BigRational::from_integer(l);
        let to_ints = |p: &Poly| -> Vec<BigInt> {
            p.coeffs().iter().map(|c| (c * &lr).to_integer()).collect()
        };
        let mut ni = to_ints(&n);
        let mut di = to_ints(&d);
        let mut g = BigInt::zero();
        for c in ni.iter().chain(di.iter()) {
            g = num_integer::Integer::gcd(&g, c);
        }
        for c in ni.iter_mut().chain(di.iter_mut()) {
            *c /= &g;
        }
        write!(f, "({})/({})", format_int_poly(&ni), format_int_poly(&di))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int_poly(s: &str) -> Result<Poly, QFieldError> {
    let bad = || QFieldError::Parse(s.to_string());
    let mut t = s.trim();
    while t.starts_with('(') && t.ends_with(')') && balanced(&t[1..t.len() - 1]) {
        t = t[1..t.len() - 1].trim();
    }
    if t.is_empty() {
        return Err(bad());
    }
    let chars: Vec<char> = t.chars().filter(|c| !c.is_whitespace()).collect();
    let mut coeffs: Vec<BigInt> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let mut sign = BigInt::one();
        if chars[i] == '+' || chars[i] == '-' {
            if chars[i] == '-' {
                sign = -sign;
            }
            i += 1;
        } else if i > 0 {
            return Err(bad());
        }
        let start = i;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        let mut coeff = if i > start {
            chars[start..i]
                .iter()
                .collect::<String>()
                .parse::<BigInt>()
                .map_err(|_| bad())?
        } else {
            BigInt::one()
        };
        if i < chars.len() && chars[i] == '*' {
            i += 1;
        }
        let mut exp = 0usize;
        if i < chars.len() && chars[i] == 'q' {
            i += 1;
            exp = 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let s0 = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                exp = chars[s0..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| bad())?;
            }
        } else if i == start {
            return Err(bad());
        }
        coeff *= sign;
        if coeffs.len() <= exp {
            coeffs.resize(exp + 1, BigInt::zero());
        }
        coeffs[exp] += coeff;
    }
    Ok(Poly::from_coeffs(
        coeffs.into_iter().map(BigRational::from_integer).collect(),
    ))
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

impl FromStr for Scalar {
    type Err = QFieldError;

    /// Accepts the canonical `(num)/(den)` form as well as bare polynomials
    /// and integer ratios such as `3/2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut depth = 0i32;
        let mut split = None;
        for (idx, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '/' if depth == 0 => {
                    if split.is_some() {
                        return Err(QFieldError::Parse(s.to_string()));
                    }
                    split = Some(idx);
                }
                _ => {}
            }
        }
        match split {
            None => Ok(Scalar::from_poly(parse_int_poly(s)?)),
            Some(idx) => {
                let num = parse_int_poly(&s[..idx])?;
                let den = parse_int_poly(&s[idx + 1..])?;
                if den.is_zero() {
                    return Err(QFieldError::ZeroDenominator);
                }
                Ok(Scalar::from_ratio(num, den))
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                Field::$f(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &'a Scalar) -> Scalar {
                Field::$f(self, rhs)
            }
        }
    };
}

scalar_binop!(Add, add, plus);
scalar_binop!(Sub, sub, minus);
scalar_binop!(Mul, mul, times);
scalar_binop!(Div, div, over);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.negated()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        <Scalar as Field>::from_int(n)
    }
}
