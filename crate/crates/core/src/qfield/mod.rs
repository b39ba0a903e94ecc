//! Exact arithmetic in Q(q), q-numbers, specialization, and linear algebra.

pub mod field;
pub mod linalg;
pub mod poly;
pub mod scalar;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use field::{Field, QCtx};
pub use linalg::{bareiss_rank, solve_linear, Echelon, FractionFree, Mat, Solution, SolveMode, SparseVec};
pub use poly::Poly;
pub use scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QFieldError {
    #[error("pole at q = 1")]
    PoleAtOne,
    #[error("pole at q = {0}")]
    Pole(String),
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("excluded specialization point {0}")]
    ExcludedPoint(String),
}

/// Symmetric q-number `[n]` in Q(q).
pub fn qint(n: i64) -> Scalar {
    QCtx::new(Scalar::q()).qint(n)
}

/// Value of `s` at `q = 1`.
pub fn limit_q1(s: &Scalar) -> Result<BigRational, QFieldError> {
    s.limit_q1()
}

/// Where to evaluate `q`: a concrete rational, or the classical limit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecializationPoint {
    Value(#[serde(with = "rational_string")] BigRational),
    ClassicalLimit,
}

impl SpecializationPoint {
    /// Rejects `0` and `-1`, and `1` unless requested as the classical limit.
    pub fn value(x: BigRational) -> Result<Self, QFieldError> {
        if Zero::is_zero(&x) || One::is_one(&x.abs()) {
            return Err(QFieldError::ExcludedPoint(x.to_string()));
        }
        Ok(SpecializationPoint::Value(x))
    }

    pub fn as_rational(&self) -> BigRational {
        match self {
            SpecializationPoint::Value(x) => x.clone(),
            SpecializationPoint::ClassicalLimit => <BigRational as One>::one(),
        }
    }

    pub fn eval(&self, s: &Scalar) -> Result<BigRational, QFieldError> {
        match self {
            SpecializationPoint::Value(x) => s.eval(x).ok_or_else(|| QFieldError::Pole(x.to_string())),
            SpecializationPoint::ClassicalLimit => s.limit_q1(),
        }
    }

    pub fn eval_matrix(&self, m: &Mat<Scalar>) -> Result<Mat<BigRational>, QFieldError> {
        m.try_map(|s| self.eval(s))
    }
}

impl fmt::Display for SpecializationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecializationPoint::Value(x) => write!(f, "{x}"),
            SpecializationPoint::ClassicalLimit => write!(f, "q->1"),
        }
    }
}

/// Parses `p/r` or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational, QFieldError> {
    let bad = || QFieldError::Parse(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(QFieldError::ZeroDenominator);
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Rank over Q(q) together with the rank at a rational point. The latter can
/// only drop, and does so exactly when the point hits a nongeneric value.
pub fn rank_with_specialization(m: &Mat<Scalar>, at: &BigRational) -> (usize, Option<usize>) {
    let symbolic = bareiss_rank(m);
    let special = SpecializationPoint::Value(at.clone())
        .eval_matrix(m)
        .ok()
        .map(|s| bareiss_rank(&s));
    (symbolic, special)
}

pub(crate) mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qint_small_values() {
        assert!(qint(0).is_zero());
        assert!(qint(1).is_one());
        let q = Scalar::q();
        assert_eq!(qint(2), q.clone() + q.inverse().unwrap());
        assert_eq!(qint(-3), -qint(3));
        assert_eq!(limit_q1(&qint(3)).unwrap(), BigRational::from_integer(3.into()));
        // the defining quotient, divided out symbolically
        let qi = q.inverse().unwrap();
        let quotient = (q.clone() * q.clone() * q.clone() - qi.clone() * qi.clone() * qi.clone())
            / (q.clone() - qi);
        assert_eq!(quotient, qint(3));
    }

    #[test]
    fn specialization_points() {
        assert!(SpecializationPoint::value(<BigRational as Zero>::zero()).is_err());
        assert!(SpecializationPoint::value(-<BigRational as One>::one()).is_err());
        let p = SpecializationPoint::value(parse_rational("3/2").unwrap()).unwrap();
        assert_eq!(p.eval(&qint(2)).unwrap(), parse_rational("13/6").unwrap());
        let m = Mat::from_rows(vec![vec![Scalar::q(), Scalar::one()], vec![Scalar::one(), Scalar::q()]]);
        assert_eq!(rank_with_specialization(&m, &parse_rational("2").unwrap()), (2, Some(2)));
        // q = 1 is nongeneric for this matrix
        assert_eq!(bareiss_rank(&SpecializationPoint::ClassicalLimit.eval_matrix(&m).unwrap()), 1);
    }
}
