//! Exact coefficient arithmetic.
//!
//! [`Scalar`] is the universal coefficient ring: Laurent polynomials in `s = q^(1/2)`
//! over the Gaussian rationals. [`RatFunc`] is its fraction field, used where
//! projectors and representation matrices need denominators. [`HSeries`] carries
//! truncated expansions in `h` with `q = e^h`.

mod gaussian;
mod ratfunc;
pub(crate) mod scalar;
mod series;

use std::fmt::{Debug, Display};

use thiserror::Error;

pub use gaussian::GaussianRational;
pub use ratfunc::RatFunc;
pub use scalar::Scalar;
pub use series::{expand_q_to_h, HSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("not a unit: {0}")]
    NonUnit(String),
    #[error("not divisible: {0}")]
    NotDivisible(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("series orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("not a Laurent polynomial: {0}")]
    NotLaurent(String),
}

/// Coefficient ring interface used by the rewriting engine.
pub trait Coefficient: Clone + PartialEq + Debug + Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Complex conjugation (`i ↦ -i`, `q` real).
    fn conj(&self) -> Self;
    fn try_inv(&self) -> Option<Self>;
    fn from_scalar(s: &Scalar) -> Self;
    /// True if the printed form is a single signed factor (no parentheses needed).
    fn is_atomic(&self) -> bool;
    /// True if the printed form starts with a minus sign that can be pulled out.
    fn is_negative_display(&self) -> bool;
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

impl Coefficient for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        Scalar::conj(self)
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
    fn is_atomic(&self) -> bool {
        self.len() == 1 && !self.terms().next().unwrap().1.is_compound()
    }
    fn is_negative_display(&self) -> bool {
        self.len() == 1 && self.terms().next().unwrap().1.is_negative_display()
    }
}

impl Coefficient for RatFunc {
    fn zero() -> Self {
        RatFunc::zero()
    }
    fn one() -> Self {
        RatFunc::one()
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        RatFunc::conj(self)
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
    fn from_scalar(s: &Scalar) -> Self {
        RatFunc::from(s.clone())
    }
    fn is_atomic(&self) -> bool {
        self.denom().is_one() && Coefficient::is_atomic(self.numer())
    }
    fn is_negative_display(&self) -> bool {
        self.denom().is_one() && Coefficient::is_negative_display(self.numer())
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn gauss() -> impl Strategy<Value = GaussianRational> {
        (-5i64..=5, 1i64..=4, -5i64..=5).prop_map(|(a, d, b)| {
            GaussianRational::new(
                BigRational::new(BigInt::from(a), BigInt::from(d)),
                BigRational::from_integer(BigInt::from(b)),
            )
        })
    }

    fn scalar() -> impl Strategy<Value = Scalar> {
        prop::collection::vec((-4i32..=4, gauss()), 0..4).prop_map(Scalar::from_terms)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in scalar(), b in scalar(), c in scalar()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn conj_is_antilinear_involution(a in scalar(), b in scalar()) {
            prop_assert_eq!((&a * &b).conj(), &a.conj() * &b.conj());
            prop_assert_eq!(a.conj().conj(), a);
        }

        #[test]
        fn series_expansion_is_multiplicative(a in scalar(), b in scalar(), k in 0usize..6) {
            let lhs = expand_q_to_h(&(&a * &b), k);
            let rhs = expand_q_to_h(&a, k).mul(&expand_q_to_h(&b, k)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn qint_times_s_difference() {
        let d = Scalar::s_pow(1) - Scalar::s_pow(-1);
        for n in -50..=50 {
            assert_eq!(&Scalar::qint(n) * &d, Scalar::s_pow(n) - Scalar::s_pow(-n), "n = {n}");
        }
    }
}
