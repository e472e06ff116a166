use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{CoeffError, GaussianRational, Scalar};

/// Element of the fraction field Q(i)(s).
///
/// Stored reduced: `gcd(num, den) = 1`, `den` has lowest exponent 0 and leading
/// coefficient 1. Two equal fractions therefore compare equal structurally.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Scalar,
    den: Scalar,
}

impl RatFunc {
    pub fn new(num: Scalar, den: Scalar) -> Result<Self, CoeffError> {
        if den.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Scalar, den: Scalar) -> Self {
        if num.is_zero() {
            return Self { num, den: Scalar::one() };
        }
        let g = num.gcd(&den);
        let mut num = num.exact_div(&g).expect("gcd divides");
        let mut den = den.exact_div(&g).expect("gcd divides");
        let (lo, hi) = den.exponent_range().unwrap();
        let lead = den.coeff(hi).inv().unwrap();
        den = den.shift(-lo).scale(&lead);
        num = num.shift(-lo).scale(&lead);
        Self { num, den }
    }

    pub fn zero() -> Self {
        Self::from(Scalar::zero())
    }

    pub fn one() -> Self {
        Self::from(Scalar::one())
    }

    pub fn numer(&self) -> &Scalar {
        &self.num
    }

    pub fn denom(&self) -> &Scalar {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// The Laurent polynomial this equals, if the denominator is trivial.
    pub fn to_scalar(&self) -> Option<Scalar> {
        if self.den.is_one() {
            Some(self.num.clone())
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<Self, CoeffError> {
        if self.num.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &RatFunc) -> Result<Self, CoeffError> {
        Ok(self * &o.inv()?)
    }

    pub fn conj(&self) -> Self {
        Self::reduce(self.num.conj(), self.den.conj())
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::reduce(self.num.scale(c), self.den.clone())
    }

    /// Multiply by `s^e`; the reduced form is preserved since `s` does not divide the denominator.
    pub fn shift(&self, e: i32) -> Self {
        Self { num: self.num.shift(e), den: self.den.clone() }
    }

    pub fn eval_f64(&self, s: f64) -> (f64, f64) {
        let (a, b) = self.num.eval_f64(s);
        let (c, d) = self.den.eval_f64(s);
        let n = c * c + d * d;
        ((a * c + b * d) / n, (b * c - a * d) / n)
    }
}

impl From<Scalar> for RatFunc {
    fn from(s: Scalar) -> Self {
        Self { num: s, den: Scalar::one() }
    }
}

impl<'a> Add<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::reduce(&self.num + &o.num, self.den.clone());
        }
        RatFunc::reduce(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
    }
}

impl<'a> Sub<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}

impl<'a> Mul<&'a RatFunc> for &'a RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return RatFunc::zero();
        }
        RatFunc::reduce(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_canonical_form() {
        let a = RatFunc::new(Scalar::q() * Scalar::q() - Scalar::one(), Scalar::q() - Scalar::one()).unwrap();
        assert_eq!(a.to_scalar(), Some(Scalar::q() + Scalar::one()));
        let b = RatFunc::new(Scalar::from_int(2), Scalar::from_int(4) * Scalar::q()).unwrap();
        let c = RatFunc::new(Scalar::one(), Scalar::from_int(2) * Scalar::q()).unwrap();
        assert_eq!(b, c);
    }

    #[test]
    fn field_inverse() {
        let a = RatFunc::from(Scalar::q() + Scalar::one());
        let p = &a * &a.inv().unwrap();
        assert!(p.is_one());
        assert!(RatFunc::zero().inv().is_err());
    }
}
