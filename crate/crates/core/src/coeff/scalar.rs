use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{CoeffError, GaussianRational};

/// Laurent polynomial in `s = q^(1/2)` over Q(i).
///
/// The key of `terms` is the exponent of `s`, so the key `e` stands for `q^(e/2)`.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Scalar {
    terms: BTreeMap<i32, GaussianRational>,
}

impl Scalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(GaussianRational::from_int(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(GaussianRational::from_ratio(num, den))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::constant(GaussianRational::i())
    }

    /// `c · s^e`.
    pub fn monomial(c: GaussianRational, e: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    /// `s^e = q^(e/2)`.
    pub fn s_pow(e: i32) -> Self {
        Self::monomial(GaussianRational::one(), e)
    }

    /// `q^k`.
    pub fn q_pow(k: i32) -> Self {
        Self::s_pow(2 * k)
    }

    pub fn q() -> Self {
        Self::q_pow(1)
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, GaussianRational)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out.add_term(e, &c);
        }
        out
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i32, &GaussianRational)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: i32) -> GaussianRational {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Lowest and highest `s`-exponent, or `None` for zero.
    pub fn exponent_range(&self) -> Option<(i32, i32)> {
        let lo = *self.terms.keys().next()?;
        let hi = *self.terms.keys().next_back()?;
        Some((lo, hi))
    }

    /// The value if this is a constant (no `s` dependence).
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub(crate) fn add_term(&mut self, e: i32, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect() }
    }

    /// Multiply by `s^k`.
    pub fn shift(&self, k: i32) -> Self {
        Self { terms: self.terms.iter().map(|(e, v)| (e + k, v.clone())).collect() }
    }

    /// Complex conjugation: `i ↦ -i`, `s` fixed.
    pub fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, v)| (*e, v.conj())).collect() }
    }

    /// Substitute `s ↦ s^-1`.
    pub fn invert_s(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, v)| (-e, v.clone())).collect() }
    }

    /// Inverse of a unit, i.e. a single nonzero monomial.
    pub fn inv(&self) -> Result<Self, CoeffError> {
        if self.terms.len() != 1 {
            return Err(CoeffError::NonUnit(self.to_string()));
        }
        let (e, c) = self.terms.iter().next().unwrap();
        let ci = c.inv().ok_or_else(|| CoeffError::NonUnit(self.to_string()))?;
        Ok(Self::monomial(ci, -e))
    }

    pub fn is_unit(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn pow(&self, n: i32) -> Result<Self, CoeffError> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        Ok(acc)
    }

    /// Value at `s = 1`, i.e. the classical limit `q → 1`.
    pub fn at_q_one(&self) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for c in self.terms.values() {
            acc += c;
        }
        acc
    }

    /// Evaluate at a numeric `s` (complex result as `(re, im)`).
    pub fn eval_f64(&self, s: f64) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (e, c) in &self.terms {
            let (cr, ci) = c.to_f64_pair();
            let p = s.powi(*e);
            re += cr * p;
            im += ci * p;
        }
        (re, im)
    }

    /// Exact division. Fails unless `den` divides `self` in the Laurent ring.
    pub fn exact_div(&self, den: &Scalar) -> Result<Scalar, CoeffError> {
        let (q, r) = self.div_rem(den)?;
        if !r.is_zero() {
            return Err(CoeffError::NotDivisible(format!("({self}) / ({den})")));
        }
        Ok(q)
    }

    /// Polynomial long division after normalising both operands to start at `s^0`.
    /// The remainder is returned in the same (shifted) frame as `self`.
    pub fn div_rem(&self, den: &Scalar) -> Result<(Scalar, Scalar), CoeffError> {
        let (dlo, dhi) = den.exponent_range().ok_or(CoeffError::DivisionByZero)?;
        let dlead = den.terms[&dhi].inv().expect("nonzero leading coefficient");
        let mut rem = self.clone();
        let mut quot = Scalar::zero();
        loop {
            let Some((rlo, rhi)) = rem.exponent_range() else { break };
            // Reduce the top term while it still lies above the span of `den`.
            if rhi - rlo < dhi - dlo {
                break;
            }
            let c = &rem.terms[&rhi] * &dlead;
            let e = rhi - dhi;
            quot.add_term(e, &c);
            let sub = den.shift(e).scale(&c);
            rem = &rem - &sub;
        }
        Ok((quot, rem))
    }

    /// Monic greatest common divisor, normalised to lowest exponent 0.
    pub fn gcd(&self, other: &Scalar) -> Scalar {
        let mut a = self.normalised_poly();
        let mut b = other.normalised_poly();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("b nonzero");
            a = b;
            b = r.normalised_poly();
        }
        if a.is_zero() {
            return a;
        }
        let (_, hi) = a.exponent_range().unwrap();
        let lead = a.terms[&hi].inv().unwrap();
        a.scale(&lead)
    }

    /// Shift so the lowest exponent is zero.
    pub(crate) fn normalised_poly(&self) -> Scalar {
        match self.exponent_range() {
            Some((lo, _)) => self.shift(-lo),
            None => Scalar::zero(),
        }
    }

    /// q-integer `[n] = (s^n − s^−n)/(s − s^−1)`.
    pub fn qint(n: i32) -> Scalar {
        let num = &Scalar::s_pow(n) - &Scalar::s_pow(-n);
        let den = &Scalar::s_pow(1) - &Scalar::s_pow(-1);
        num.exact_div(&den).expect("q-integers divide exactly")
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c);
        }
        out
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, &-c);
        }
        out
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.add_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<GaussianRational> for Scalar {
    fn from(c: GaussianRational) -> Self {
        Scalar::constant(c)
    }
}

/// Renders `q^(e/2)` for the `s`-exponent `e`; empty for `e = 0`.
pub(crate) fn q_power_text(e: i32) -> String {
    match e {
        0 => String::new(),
        2 => "q".to_string(),
        e if e % 2 == 0 => format!("q^{}", e / 2),
        e => format!("q^({e}/2)"),
    }
}

/// Writes `c·m` as a signed term, where `m` is an already-rendered monomial (possibly empty).
/// `first` controls whether a leading `+` is suppressed.
pub(crate) fn write_signed_term(
    f: &mut fmt::Formatter<'_>,
    c: &GaussianRational,
    monomial: &str,
    first: bool,
) -> fmt::Result {
    let negative = c.is_negative_display();
    let mag = if negative { -c } else { c.clone() };
    if first {
        if negative {
            write!(f, "-")?;
        }
    } else if negative {
        write!(f, " - ")?;
    } else {
        write!(f, " + ")?;
    }
    if monomial.is_empty() {
        write!(f, "{mag}")
    } else if mag.is_one() {
        write!(f, "{monomial}")
    } else {
        write!(f, "{mag} {monomial}")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            write_signed_term(f, c, &q_power_text(*e), k == 0)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
