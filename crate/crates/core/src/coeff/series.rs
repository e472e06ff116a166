use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{CoeffError, GaussianRational, Scalar};

/// Power series in `h` truncated after `h^K`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HSeries {
    coeffs: Vec<GaussianRational>,
}

impl HSeries {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![GaussianRational::zero(); order + 1] }
    }

    pub fn constant(c: GaussianRational, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(GaussianRational::one(), order)
    }

    /// `c · h^k`, zero if `k > order`.
    pub fn monomial(c: GaussianRational, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<GaussianRational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the h^0 coefficient");
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &GaussianRational {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(GaussianRational::is_zero)
    }

    /// Index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    fn check(&self, o: &HSeries) -> Result<(), CoeffError> {
        if self.order() != o.order() {
            return Err(CoeffError::OrderMismatch(self.order(), o.order()));
        }
        Ok(())
    }

    pub fn add(&self, o: &HSeries) -> Result<HSeries, CoeffError> {
        self.check(o)?;
        Ok(Self { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, o: &HSeries) -> Result<HSeries, CoeffError> {
        self.check(o)?;
        Ok(Self { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() })
    }

    pub fn mul(&self, o: &HSeries) -> Result<HSeries, CoeffError> {
        self.check(o)?;
        let k = self.order();
        let mut out = vec![GaussianRational::zero(); k + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in self.coeffs_upto(&o.coeffs, k - i) {
                out[i + j] += &(a * b);
            }
        }
        Ok(Self { coeffs: out })
    }

    fn coeffs_upto<'a>(
        &self,
        c: &'a [GaussianRational],
        max: usize,
    ) -> impl Iterator<Item = (usize, &'a GaussianRational)> {
        c.iter().enumerate().take(max + 1).filter(|(_, b)| !b.is_zero())
    }

    pub fn neg(&self) -> HSeries {
        Self { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &GaussianRational) -> HSeries {
        Self { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn conj(&self) -> HSeries {
        Self { coeffs: self.coeffs.iter().map(GaussianRational::conj).collect() }
    }

    /// Keep orders `0..=k` (requires `k <= order`).
    pub fn truncate(&self, k: usize) -> HSeries {
        assert!(k <= self.order());
        Self { coeffs: self.coeffs[..=k].to_vec() }
    }

    /// Truncated quotient `self / den`. If `den` has valuation `v`, the result has order `K − v`.
    pub fn divide(&self, den: &HSeries) -> Result<HSeries, CoeffError> {
        self.check(den)?;
        let v = den.valuation().ok_or(CoeffError::DivisionByZero)?;
        if let Some(bad) = self.coeffs[..v].iter().position(|c| !c.is_zero()) {
            return Err(CoeffError::NotDivisible(format!(
                "numerator has a nonzero h^{bad} coefficient below the denominator valuation {v}"
            )));
        }
        let k = self.order() - v;
        let num = &self.coeffs[v..];
        let d = &den.coeffs[v..];
        let d0inv = d[0].inv().expect("valuation coefficient is nonzero");
        let mut out: Vec<GaussianRational> = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = num[n].clone();
            for (j, o) in out.iter().enumerate() {
                let dj = &d[n - j];
                if !dj.is_zero() {
                    acc = &acc - &(o * dj);
                }
            }
            out.push(&acc * &d0inv);
        }
        Ok(Self { coeffs: out })
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * BigInt::from(k))
}

/// Substitute `s = e^(h/2)` (so `q = e^h`) and truncate after `h^order`.
pub fn expand_q_to_h(a: &Scalar, order: usize) -> HSeries {
    let mut out = HSeries::zero(order);
    for (e, c) in a.terms() {
        // s^e = exp(e h / 2) = Σ (e/2)^k h^k / k!
        for k in 0..=order {
            let x = BigRational::new(BigInt::from(e).pow(k as u32), BigInt::from(2).pow(k as u32))
                / BigRational::from_integer(factorial(k));
            out.coeffs[k] += &(c * &GaussianRational::real(x));
        }
    }
    out
}

impl fmt::Display for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => "h".to_string(),
                k => format!("h^{k}"),
            };
            super::scalar::write_signed_term(f, c, &mono, first)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(h^{})", self.order() + 1)
    }
}

impl fmt::Debug for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> GaussianRational {
        GaussianRational::from_ratio(n, d)
    }

    fn series(v: &[(i64, i64)]) -> HSeries {
        HSeries::from_coeffs(v.iter().map(|&(n, d)| r(n, d)).collect())
    }

    #[test]
    fn exponential_of_q() {
        assert_eq!(expand_q_to_h(&Scalar::q(), 2), series(&[(1, 1), (1, 1), (1, 2)]));
        assert_eq!(expand_q_to_h(&Scalar::one(), 3), HSeries::one(3));
    }

    #[test]
    fn two_sinh() {
        let a = Scalar::q() - Scalar::q_pow(-1);
        assert_eq!(expand_q_to_h(&a, 4), series(&[(0, 1), (2, 1), (0, 1), (1, 3), (0, 1)]));
    }

    #[test]
    fn division_cases() {
        let d = series(&[(0, 1), (2, 1), (0, 1), (1, 3), (0, 1)]);
        assert_eq!(d.divide(&d).unwrap(), HSeries::one(3));
        // Long division of -2h by 2h + h^3/3: coefficients checked by multiplying back.
        let n = series(&[(0, 1), (-2, 1), (0, 1), (0, 1), (0, 1)]);
        let quo = n.divide(&d).unwrap();
        assert_eq!(quo, series(&[(-1, 1), (0, 1), (1, 6), (0, 1)]));
        let one = HSeries::one(4);
        let two_h = series(&[(0, 1), (2, 1), (0, 1), (0, 1), (0, 1)]);
        assert!(matches!(one.divide(&two_h), Err(CoeffError::NotDivisible(_))));
    }

    #[test]
    fn mismatched_orders_are_rejected() {
        let a = HSeries::one(2);
        let b = HSeries::one(3);
        assert!(matches!(a.add(&b), Err(CoeffError::OrderMismatch(2, 3))));
        assert!(matches!(a.mul(&b), Err(CoeffError::OrderMismatch(2, 3))));
    }
}
