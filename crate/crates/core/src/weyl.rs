//! The Weyl algebra with `p` inverted and truncated h-series coefficients, the series
//! realization of the final q-Heisenberg algebra, and the inner-derivation solver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{self, CatalogError};
use crate::coeff::scalar::write_signed_term;
use crate::coeff::{expand_q_to_h, CoeffError, GaussianRational, HSeries, Scalar};
use crate::freealg::{AlgebraError, Element, Word};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("the derivation images violate the defining relation: residual {0}")]
    InconsistentSpec(String),
    #[error("no inner derivation of degree at most {0} matches")]
    NoSolution(usize),
    #[error("order must be at least 1")]
    BadOrder,
}

/// `Σ c_{a,b}(h) x^a p^b` with `a ≥ 0`, `b ∈ Z`, all series truncated after `h^K`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LocalWeylElement {
    order: usize,
    terms: BTreeMap<(u32, i32), HSeries>,
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::from(1), |acc, j| acc * BigInt::from(n - j) / BigInt::from(j + 1))
}

fn falling(b: i32, j: u32) -> BigInt {
    (0..j as i32).fold(BigInt::from(1), |acc, t| acc * BigInt::from(b - t))
}

/// `(−i)^j`.
fn minus_i_pow(j: u32) -> GaussianRational {
    match j % 4 {
        0 => GaussianRational::one(),
        1 => -GaussianRational::i(),
        2 => GaussianRational::from_int(-1),
        _ => GaussianRational::i(),
    }
}

fn gauss_int(n: BigInt) -> GaussianRational {
    GaussianRational::real(BigRational::from_integer(n))
}

impl LocalWeylElement {
    pub fn zero(order: usize) -> Self {
        Self { order, terms: BTreeMap::new() }
    }

    pub fn monomial(c: HSeries, a: u32, b: i32) -> Self {
        let mut e = Self::zero(c.order());
        e.add_term(a, b, &c);
        e
    }

    pub fn constant(c: HSeries) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn one(order: usize) -> Self {
        Self::constant(HSeries::one(order))
    }

    pub fn x(order: usize) -> Self {
        Self::monomial(HSeries::one(order), 1, 0)
    }

    /// `p^b` for any integer `b`.
    pub fn p_pow(b: i32, order: usize) -> Self {
        Self::monomial(HSeries::one(order), 0, b)
    }

    pub fn p(order: usize) -> Self {
        Self::p_pow(1, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, i32), &HSeries)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, a: u32, b: i32) -> HSeries {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(|| HSeries::zero(self.order))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, a: u32, b: i32, c: &HSeries) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((a, b)).or_insert_with(|| HSeries::zero(c.order()));
        *entry = entry.add(c).expect("terms share one truncation order");
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    fn check(&self, o: &Self) -> Result<(), WeylError> {
        if self.order != o.order {
            return Err(WeylError::OrderMismatch(self.order, o.order));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self, WeylError> {
        self.check(o)?;
        let mut out = self.clone();
        for (&(a, b), c) in &o.terms {
            out.add_term(a, b, c);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, WeylError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self { order: self.order, terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect() }
    }

    pub fn scale(&self, s: &HSeries) -> Result<Self, WeylError> {
        if s.order() != self.order {
            return Err(WeylError::OrderMismatch(self.order, s.order()));
        }
        let mut out = Self::zero(self.order);
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, &c.mul(s)?);
        }
        Ok(out)
    }

    pub fn scale_gauss(&self, g: &GaussianRational) -> Self {
        let mut out = Self::zero(self.order);
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, &c.scale(g));
        }
        out
    }

    /// Normal-ordered product, using `p^b x^c = Σ_j C(c,j) b(b−1)⋯(b−j+1) (−i)^j x^(c−j) p^(b−j)`.
    pub fn mul(&self, o: &Self) -> Result<Self, WeylError> {
        self.check(o)?;
        let mut out = Self::zero(self.order);
        for (&(a, b), c1) in &self.terms {
            for (&(c, d), c2) in &o.terms {
                let prod = c1.mul(c2)?;
                for j in 0..=c {
                    let k = falling(b, j) * binomial(c, j);
                    if k == BigInt::from(0) {
                        continue;
                    }
                    let factor = &gauss_int(k) * &minus_i_pow(j);
                    out.add_term(a + c - j, b - j as i32 + d, &prod.scale(&factor));
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self, WeylError> {
        let mut acc = Self::one(self.order);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn commutator(&self, o: &Self) -> Result<Self, WeylError> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    /// Star with `x` and `p` real: `c x^a p^b ↦ conj(c) p^b x^a`, normal-ordered.
    pub fn star(&self) -> Self {
        let mut out = Self::zero(self.order);
        for (&(a, b), c) in &self.terms {
            let reordered = Self::p_pow(b, self.order).mul(&Self::monomial(c.conj(), a, 0)).expect("same order");
            out = out.add(&reordered).expect("same order");
        }
        out
    }

    /// Keep orders `0..=k` of every coefficient.
    pub fn truncate(&self, k: usize) -> Self {
        let mut out = Self::zero(k);
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, &c.truncate(k));
        }
        out
    }

    /// Divide every coefficient by the series `den`; the result has order `K − val(den)`.
    pub fn div_series(&self, den: &HSeries) -> Result<Self, WeylError> {
        let v = den.valuation().ok_or(CoeffError::DivisionByZero)?;
        let mut out = Self::zero(self.order - v);
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, &c.divide(den)?);
        }
        Ok(out)
    }

    /// Coefficient of `h^k` as a map `(a, b) ↦ c`.
    pub fn order_part(&self, k: usize) -> BTreeMap<(u32, i32), GaussianRational> {
        self.terms.iter().filter(|(_, c)| !c.coeff(k).is_zero()).map(|(key, c)| (*key, c.coeff(k).clone())).collect()
    }

    /// Lowest power of `h` with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.terms.values().filter_map(HSeries::valuation).min()
    }
}

fn monomial_text(k: usize, a: u32, b: i32) -> String {
    let mut parts = Vec::new();
    match k {
        0 => {}
        1 => parts.push("h".to_string()),
        k => parts.push(format!("h^{k}")),
    }
    match a {
        0 => {}
        1 => parts.push("x".to_string()),
        a => parts.push(format!("x^{a}")),
    }
    match b {
        0 => {}
        1 => parts.push("p".to_string()),
        b => parts.push(format!("p^{b}")),
    }
    parts.join(" ")
}

impl fmt::Display for LocalWeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in 0..=self.order {
            for (&(a, b), c) in self.terms.iter().rev() {
                let ck = c.coeff(k);
                if ck.is_zero() {
                    continue;
                }
                write_signed_term(f, ck, &monomial_text(k, a, b), first)?;
                first = false;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(h^{})", self.order + 1)
    }
}

fn series_exp_weyl(gen: &LocalWeylElement, coeff: GaussianRational) -> Result<LocalWeylElement, WeylError> {
    // Σ_n (coeff·h)^n gen^n / n!
    let k = gen.order();
    let mut out = LocalWeylElement::zero(k);
    let mut power = LocalWeylElement::one(k);
    let mut c = GaussianRational::one();
    for n in 0..=k {
        if n > 0 {
            power = power.mul(gen)?;
            c = &(&c * &coeff) * &GaussianRational::from_ratio(1, n as i64);
        }
        let s = HSeries::monomial(c.clone(), n, k);
        out = out.add(&power.scale(&s)?)?;
    }
    Ok(out)
}

/// `u = exp(−i h p x)` truncated after `h^K`.
pub fn build_u(order: usize) -> Result<LocalWeylElement, WeylError> {
    if order == 0 {
        return Err(WeylError::BadOrder);
    }
    let px = LocalWeylElement::p(order).mul(&LocalWeylElement::x(order))?;
    series_exp_weyl(&px, -GaussianRational::i())
}

/// `u⁻¹ = q exp(i h x p)` truncated after `h^K`.
pub fn build_u_inv(order: usize) -> Result<LocalWeylElement, WeylError> {
    if order == 0 {
        return Err(WeylError::BadOrder);
    }
    let xp = LocalWeylElement::x(order).mul(&LocalWeylElement::p(order))?;
    let e = series_exp_weyl(&xp, GaussianRational::i())?;
    e.scale(&expand_q_to_h(&Scalar::q(), order))
}

/// `ξ = i p⁻¹ (u − u⁻¹)/(q − q⁻¹)`. The numerator is built one order higher because the
/// division by `q − q⁻¹ = 2h + O(h³)` lowers the truncation order by one.
pub fn build_xi(order: usize) -> Result<LocalWeylElement, WeylError> {
    if order == 0 {
        return Err(WeylError::BadOrder);
    }
    let num = build_u(order + 1)?.sub(&build_u_inv(order + 1)?)?;
    let den = expand_q_to_h(&(Scalar::q() - Scalar::q_pow(-1)), order + 1);
    let quotient = num.div_series(&den)?;
    let ip_inv = LocalWeylElement::monomial(HSeries::constant(GaussianRational::i(), order), 0, -1);
    ip_inv.mul(&quotient)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Printed,
    Corrected,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Printed => "printed",
            Variant::Corrected => "corrected",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "printed" => Ok(Variant::Printed),
            "corrected" => Ok(Variant::Corrected),
            other => Err(format!("unknown variant {other}")),
        }
    }
}

/// One relation of the final algebra evaluated on the series realization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealizationItem {
    pub relation: String,
    pub variant: Variant,
    pub order: usize,
    pub residual: String,
    pub pass: bool,
    /// Lowest power of `h` in the residual, if nonzero.
    pub leading_order: Option<usize>,
}

/// Substitute `p`, `ξ`, `u`, `u⁻¹` by their series and evaluate every relation through `h^K`.
pub fn verify_qheis5_realization(order: usize, variant: Variant) -> Result<Vec<RealizationItem>, WeylError> {
    let k = order;
    let p = LocalWeylElement::p(k);
    let xi = build_xi(k)?;
    let u = build_u(k)?;
    let ui = build_u_inv(k)?;
    let one = LocalWeylElement::one(k);
    let qs = expand_q_to_h(&Scalar::q(), k);
    let qis = expand_q_to_h(&Scalar::q_pow(-1), k);
    let i = GaussianRational::i();
    let xp = xi.mul(&p)?;
    let px = p.mul(&xi)?;
    let (up_coeff, up_text) = match variant {
        Variant::Corrected => (&qs, "u p = q p u"),
        Variant::Printed => (&qis, "u p = q^-1 p u"),
    };
    let relations: Vec<(&str, LocalWeylElement)> = vec![
        ("xi p - q^-1 p xi = i u", xp.sub(&px.scale(&qis)?)?.sub(&u.scale_gauss(&i))?),
        ("xi p - q p xi = i uinv", xp.sub(&px.scale(&qs)?)?.sub(&ui.scale_gauss(&i))?),
        (up_text, u.mul(&p)?.sub(&p.mul(&u)?.scale(up_coeff)?)?),
        ("u xi = q^-1 xi u", u.mul(&xi)?.sub(&xi.mul(&u)?.scale(&qis)?)?),
        ("u uinv = 1", u.mul(&ui)?.sub(&one)?),
    ];
    Ok(relations
        .into_iter()
        .map(|(name, residual)| RealizationItem {
            relation: name.to_string(),
            variant,
            order: k,
            pass: residual.is_zero(),
            leading_order: residual.valuation(),
            residual: residual.to_string(),
        })
        .collect())
}

/// A derivation of the first Weyl algebra, given by its values on the generators `x1`, `p1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationSpec {
    pub dx: Element<Scalar>,
    pub dp: Element<Scalar>,
    pub degree_bound: usize,
}

impl DerivationSpec {
    /// The inner derivation `[w, ·]`.
    pub fn inner(w: &Element<Scalar>, degree_bound: usize) -> Result<Self, WeylError> {
        let h = catalog::heisenberg(1)?;
        Ok(Self {
            dx: h.normal_form(&w.commutator(&h.gen("x1")))?,
            dp: h.normal_form(&w.commutator(&h.gen("p1")))?,
            degree_bound,
        })
    }
}

/// Find `a` without constant term such that `[a, g] = δ(g)` for both generators of `A₁`,
/// searching among normal-ordered monomials `x^i p^j` with `1 ≤ i + j ≤ degree_bound + 1`.
pub fn inner_derivation_solve(spec: &DerivationSpec) -> Result<Element<Scalar>, WeylError> {
    let h = catalog::heisenberg(1)?;
    let x = h.gen("x1");
    let p = h.gen("p1");
    let (xi, pi) = (h.generator_id("x1").unwrap(), h.generator_id("p1").unwrap());

    // δ must respect x p − p x = i
    let consistency = spec.dx.mul(&p).add(&x.mul(&spec.dp)).sub(&spec.dp.mul(&x)).sub(&p.mul(&spec.dx));
    let consistency = h.normal_form(&consistency)?;
    if !consistency.is_zero() {
        return Err(WeylError::InconsistentSpec(h.render(&consistency)));
    }
    let dx = h.normal_form(&spec.dx)?;
    let dp = h.normal_form(&spec.dp)?;

    let top = spec.degree_bound + 1;
    let mut basis: Vec<Word> = Vec::new();
    for total in 1..=top {
        for a in 0..=total {
            let mut letters = vec![xi; a];
            letters.extend(std::iter::repeat(pi).take(total - a));
            basis.push(h.word(&letters));
        }
    }
    let columns: Vec<(Element<Scalar>, Element<Scalar>)> = basis
        .iter()
        .map(|w| {
            let m = Element::word(w.clone());
            Ok((h.normal_form(&m.commutator(&x))?, h.normal_form(&m.commutator(&p))?))
        })
        .collect::<Result<_, WeylError>>()?;

    let mut rows: BTreeSet<(u8, Word)> = BTreeSet::new();
    for (cx, cp) in &columns {
        rows.extend(cx.terms().map(|(w, _)| (0, w.clone())));
        rows.extend(cp.terms().map(|(w, _)| (1, w.clone())));
    }
    let target_rows: Vec<(u8, Word)> =
        dx.terms().map(|(w, _)| (0, w.clone())).chain(dp.terms().map(|(w, _)| (1, w.clone()))).collect();
    if target_rows.iter().any(|r| !rows.contains(r)) {
        return Err(WeylError::NoSolution(spec.degree_bound));
    }
    let rows: Vec<(u8, Word)> = rows.into_iter().collect();

    let entry = |e: &Element<Scalar>, w: &Word| -> Result<GaussianRational, WeylError> {
        e.coeff(w)
            .as_constant()
            .ok_or_else(|| WeylError::InconsistentSpec("commutator with a non-constant coefficient".into()))
    };
    let mut mat = Matrix::<GaussianRational>::zeros(rows.len(), basis.len());
    for (c, (cx, cp)) in columns.iter().enumerate() {
        for (r, (g, w)) in rows.iter().enumerate() {
            let src = if *g == 0 { cx } else { cp };
            mat.set(r, c, entry(src, w)?);
        }
    }

    let exponents: BTreeSet<i32> =
        dx.terms().chain(dp.terms()).flat_map(|(_, c)| c.terms().map(|(e, _)| e).collect::<Vec<_>>()).collect();
    let mut solution = Element::zero();
    for e in exponents {
        let rhs: Vec<GaussianRational> =
            rows.iter().map(|(g, w)| if *g == 0 { dx.coeff(w).coeff(e) } else { dp.coeff(w).coeff(e) }).collect();
        let v = mat.solve(&rhs).ok_or(WeylError::NoSolution(spec.degree_bound))?;
        for (w, c) in basis.iter().zip(v) {
            solution.add_term(w.clone(), &Scalar::monomial(c, e));
        }
    }
    let solution = h.normal_form(&solution)?;
    let check_x = h.normal_form(&solution.commutator(&x).sub(&dx))?;
    let check_p = h.normal_form(&solution.commutator(&p).sub(&dp))?;
    if !check_x.is_zero() || !check_p.is_zero() {
        return Err(WeylError::NoSolution(spec.degree_bound));
    }
    Ok(solution)
}
