//! q-difference operators acting on Laurent functions of commuting coordinates:
//! the symmetric calculus `D_α`, `u_α`, the almost-commutative coordinate change,
//! the unsymmetric derivatives and their conjugation.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{self, index_suffix, lightcone_indices, CatalogError};
use crate::coeff::{Coefficient, GaussianRational, HSeries, RatFunc, Scalar};
use crate::freealg::{AlgebraError, Element, Presentation, PresentationBuilder};

#[derive(Debug, Error, PartialEq)]
pub enum QdiffError {
    #[error("unknown operator letter {0}")]
    UnknownLetter(String),
    #[error("index {0} is not in the index set")]
    UnknownIndex(i32),
    #[error("k must be nonzero for index {0}")]
    ZeroK(i32),
    #[error("the index set is not symmetric under α ↦ −α")]
    NotSymmetric,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Finite sum of monomials `c · Π (x^α)^(m_α)` with integer exponents.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct LaurentFunction {
    terms: BTreeMap<Vec<i32>, RatFunc>,
}

impl LaurentFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(exps: Vec<i32>) -> Self {
        Self::term(RatFunc::one(), exps)
    }

    pub fn term(c: RatFunc, exps: Vec<i32>) -> Self {
        let mut f = Self::zero();
        f.add_term(exps, c);
        f
    }

    pub fn add_term(&mut self, exps: Vec<i32>, c: RatFunc) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &RatFunc)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i32]) -> RatFunc {
        self.terms.get(exps).cloned().unwrap_or_else(RatFunc::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    /// Text form with the coordinate names `x_<suffix>`.
    pub fn render(&self, indices: &[i32]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .zip(indices)
                    .filter(|(m, _)| **m != 0)
                    .map(|(m, a)| {
                        if *m == 1 {
                            format!("x_{}", index_suffix(*a))
                        } else {
                            format!("x_{}^{}", index_suffix(*a), m)
                        }
                    })
                    .collect();
                match (c.is_one(), mono.is_empty()) {
                    (_, true) => format!("({c})"),
                    (true, false) => mono.join(" "),
                    (false, false) => format!("({c}) {}", mono.join(" ")),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// Interpretation of one operator letter; positions index into the coordinate list.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Letter {
    /// Multiplication by `x^α`.
    X(usize),
    /// Multiplication by `(x^α)⁻¹`.
    XInv(usize),
    /// Dilation `x^α ↦ q x^α`.
    U(usize),
    UInv(usize),
    /// Symmetric q-difference operator with step `q^k(α)`.
    D(usize),
    /// Classical partial derivative.
    Del(usize),
    /// Total dilation `Π u_α²`.
    Lam,
    LamInv,
}

/// An operator expression: a linear combination of letter words, composed right to left.
pub type OperatorExpr = Element<RatFunc>;

/// The operator alphabet for a fixed index set and step map `k`.
#[derive(Clone, Debug)]
pub struct OperatorAlphabet {
    pres: Presentation<RatFunc>,
    indices: Vec<i32>,
    kmap: BTreeMap<i32, i32>,
    letters: Vec<Letter>,
}

/// `(q^(km) − q^(−km))/(q^k − q^(−k))`, summed as `q^(k(m−1)) + q^(k(m−3)) + … + q^(−k(m−1))`.
pub fn qratio(k: i32, m: i32) -> Scalar {
    if m < 0 {
        return -qratio(k, -m);
    }
    Scalar::from_terms((0..m).map(|j| (2 * k * (m - 1 - 2 * j), GaussianRational::one())))
}

/// Multiply by a common denominator so that every coefficient is a Laurent polynomial.
fn clear_denominators(op: &OperatorExpr) -> Element<Scalar> {
    let mut l = Scalar::one();
    for (_, c) in op.terms() {
        let d = c.denom();
        if !d.is_one() {
            let g = l.gcd(d);
            l = &l * &d.exact_div(&g).expect("gcd divides");
        }
    }
    let lf = RatFunc::from(l);
    op.map_coeffs(|c| (c * &lf).to_scalar().expect("common denominator clears"))
}

impl OperatorAlphabet {
    pub fn new(indices: &[i32], kmap: &BTreeMap<i32, i32>) -> Result<Self, QdiffError> {
        let mut b = PresentationBuilder::<RatFunc>::new("qdiff-operators");
        let mut letters = Vec::new();
        for (pos, &a) in indices.iter().enumerate() {
            match kmap.get(&a) {
                None => return Err(QdiffError::UnknownIndex(a)),
                Some(0) => return Err(QdiffError::ZeroK(a)),
                Some(_) => {}
            }
            let sfx = index_suffix(a);
            for (prefix, letter) in [
                ("x", Letter::X(pos)),
                ("xinv", Letter::XInv(pos)),
                ("u", Letter::U(pos)),
                ("uinv", Letter::UInv(pos)),
                ("D", Letter::D(pos)),
                ("del", Letter::Del(pos)),
            ] {
                b.generator(&format!("{prefix}_{sfx}"), 1);
                letters.push(letter);
            }
        }
        b.generator("Lam", 1);
        letters.push(Letter::Lam);
        b.generator("Laminv", 1);
        letters.push(Letter::LamInv);
        Ok(Self { pres: b.build()?, indices: indices.to_vec(), kmap: kmap.clone(), letters })
    }

    /// Lightcone index set of size `dim` with `k(α) = k` for `α ≥ 0` and `−k` otherwise.
    pub fn uniform(dim: usize, k: i32) -> Result<Self, QdiffError> {
        let indices = lightcone_indices(dim);
        let kmap = indices.iter().map(|&a| (a, if a < 0 { -k } else { k })).collect();
        Self::new(&indices, &kmap)
    }

    pub fn presentation(&self) -> &Presentation<RatFunc> {
        &self.pres
    }

    pub fn indices(&self) -> &[i32] {
        &self.indices
    }

    pub fn k(&self, alpha: i32) -> i32 {
        self.kmap[&alpha]
    }

    fn letter_elem(&self, prefix: &str, alpha: i32) -> OperatorExpr {
        self.pres.gen(&format!("{prefix}_{}", index_suffix(alpha)))
    }

    pub fn x(&self, alpha: i32) -> OperatorExpr {
        self.letter_elem("x", alpha)
    }

    pub fn xinv(&self, alpha: i32) -> OperatorExpr {
        self.letter_elem("xinv", alpha)
    }

    pub fn u(&self, alpha: i32) -> OperatorExpr {
        self.letter_elem("u", alpha)
    }

    pub fn uinv(&self, alpha: i32) -> OperatorExpr {
        self.letter_elem("uinv", alpha)
    }

    pub fn d(&self, alpha: i32) -> OperatorExpr {
        self.letter_elem("D", alpha)
    }

    pub fn del(&self, alpha: i32) -> OperatorExpr {
        self.letter_elem("del", alpha)
    }

    pub fn lam(&self) -> OperatorExpr {
        self.pres.gen("Lam")
    }

    pub fn laminv(&self) -> OperatorExpr {
        self.pres.gen("Laminv")
    }

    /// `u_α^j` for any integer `j`.
    pub fn u_pow(&self, alpha: i32, j: i32) -> OperatorExpr {
        let g = if j >= 0 { self.u(alpha) } else { self.uinv(alpha) };
        (0..j.unsigned_abs()).fold(Element::one(), |acc, _| acc.mul(&g))
    }

    pub fn scalar(&self, c: Scalar) -> OperatorExpr {
        Element::scalar(RatFunc::from(c))
    }

    /// Free product of several operators.
    pub fn compose(&self, factors: &[&OperatorExpr]) -> OperatorExpr {
        factors.iter().fold(Element::one(), |acc, f| acc.mul(f))
    }

    fn position(&self, alpha: i32) -> Result<usize, QdiffError> {
        self.indices.iter().position(|&a| a == alpha).ok_or(QdiffError::UnknownIndex(alpha))
    }

    /// Translate an element of another presentation by generator name, e.g. from the
    /// catalog's q-difference algebras.
    pub fn import<C: Coefficient>(
        &self,
        src: &Presentation<C>,
        e: &Element<C>,
        coeff: impl Fn(&C) -> RatFunc,
    ) -> Result<OperatorExpr, QdiffError> {
        let mut out = Element::zero();
        for (w, c) in e.terms() {
            let mut t = Element::scalar(coeff(c));
            for &g in w.letters() {
                let name = src.generator_name(g);
                if self.pres.generator_id(name).is_none() {
                    return Err(QdiffError::UnknownLetter(name.to_string()));
                }
                t = t.mul(&self.pres.gen(name));
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Image of the monomial `x^e` under a word: a single monomial `s^shift · factor · x^e'`,
    /// or `None` when the word annihilates it.
    fn act_word(&self, letters: &[crate::freealg::GenId], mut e: Vec<i32>) -> Option<(Vec<i32>, i32, Scalar)> {
        let mut shift = 0;
        let mut factor = Scalar::one();
        for &l in letters.iter().rev() {
            match self.letters[l as usize] {
                Letter::X(p) => e[p] += 1,
                Letter::XInv(p) => e[p] -= 1,
                Letter::U(p) => shift += 2 * e[p],
                Letter::UInv(p) => shift -= 2 * e[p],
                Letter::D(p) => {
                    let m = e[p];
                    if m == 0 {
                        return None;
                    }
                    e[p] -= 1;
                    factor = &factor * &qratio(self.kmap[&self.indices[p]], m);
                }
                Letter::Del(p) => {
                    let m = e[p];
                    if m == 0 {
                        return None;
                    }
                    e[p] -= 1;
                    factor = factor.scale(&GaussianRational::from_int(m as i64));
                }
                Letter::Lam => shift += 4 * e.iter().sum::<i32>(),
                Letter::LamInv => shift -= 4 * e.iter().sum::<i32>(),
            }
        }
        Some((e, shift, factor))
    }

    /// Apply an operator with Laurent coefficients to one monomial.
    fn act_monomial(&self, op: &Element<Scalar>, exps: &[i32]) -> BTreeMap<Vec<i32>, Scalar> {
        let mut out: BTreeMap<Vec<i32>, Scalar> = BTreeMap::new();
        for (w, c) in op.terms() {
            if let Some((e, shift, factor)) = self.act_word(w.letters(), exps.to_vec()) {
                let v = out.entry(e).or_insert_with(Scalar::zero);
                *v = &*v + &(c * &factor).shift(shift);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Apply `op` to `f`; each word acts right to left.
    pub fn act(&self, op: &OperatorExpr, f: &LaurentFunction) -> LaurentFunction {
        let mut out = LaurentFunction::zero();
        for (w, c) in op.terms() {
            for (exps, fc) in f.terms() {
                if let Some((e, shift, factor)) = self.act_word(w.letters(), exps.clone()) {
                    out.add_term(e, &(c * fc).shift(shift) * &RatFunc::from(factor));
                }
            }
        }
        out
    }

    fn bar_letter(&self, letter: Letter) -> OperatorExpr {
        let neg = |p: usize| -self.indices[p];
        match letter {
            Letter::X(p) => self.x(neg(p)),
            Letter::XInv(p) => self.xinv(neg(p)),
            Letter::U(p) => self.uinv(neg(p)).scale(&RatFunc::from(Scalar::q_pow(-1))),
            Letter::UInv(p) => self.u(neg(p)).scale(&RatFunc::from(Scalar::q())),
            Letter::D(p) => self.d(neg(p)).neg(),
            Letter::Del(p) => self.del(neg(p)).neg(),
            Letter::Lam => self.laminv().scale(&RatFunc::from(Scalar::q_pow(-2 * self.indices.len() as i32))),
            Letter::LamInv => self.lam().scale(&RatFunc::from(Scalar::q_pow(2 * self.indices.len() as i32))),
        }
    }

    /// The antilinear, antimultiplicative involution with `x^α ↦ x^(−α)`, `D_α ↦ −D_(−α)`
    /// and `u_α ↦ q⁻¹ u_(−α)⁻¹`.
    pub fn involute(&self, op: &OperatorExpr) -> Result<OperatorExpr, QdiffError> {
        if self.indices.iter().any(|a| !self.indices.contains(&-a)) {
            return Err(QdiffError::NotSymmetric);
        }
        let mut out = Element::zero();
        for (w, c) in op.terms() {
            let mut t = Element::scalar(c.conj());
            for &l in w.letters().iter().rev() {
                t = t.mul(&self.bar_letter(self.letters[l as usize]));
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Normal form `Σ c · x^s u^e` (first dilate, then multiply) for operators built from
    /// multiplications, dilations and `Λ^(±1)`; `None` if a difference operator occurs.
    pub fn canonical(&self, op: &OperatorExpr) -> Option<OperatorExpr> {
        let n = self.indices.len();
        let mut acc: BTreeMap<(Vec<i32>, Vec<i32>), RatFunc> = BTreeMap::new();
        for (w, c) in op.terms() {
            let mut shift = vec![0; n];
            let mut uexp = vec![0; n];
            let mut coeff = c.clone();
            for &l in w.letters().iter().rev() {
                match self.letters[l as usize] {
                    Letter::X(p) => shift[p] += 1,
                    Letter::XInv(p) => shift[p] -= 1,
                    Letter::U(p) => {
                        coeff = coeff.shift(2 * shift[p]);
                        uexp[p] += 1;
                    }
                    Letter::UInv(p) => {
                        coeff = coeff.shift(-2 * shift[p]);
                        uexp[p] -= 1;
                    }
                    Letter::Lam | Letter::LamInv => {
                        let sign = if self.letters[l as usize] == Letter::Lam { 1 } else { -1 };
                        coeff = coeff.shift(sign * 4 * shift.iter().sum::<i32>());
                        uexp.iter_mut().for_each(|e| *e += 2 * sign);
                    }
                    Letter::D(_) | Letter::Del(_) => return None,
                }
            }
            let v = acc.entry((shift, uexp)).or_insert_with(RatFunc::zero);
            *v = &*v + &coeff;
        }
        let mut out = Element::zero();
        for ((shift, uexp), c) in acc {
            if c.is_zero() {
                continue;
            }
            let mut t = Element::scalar(c);
            for (p, &s) in shift.iter().enumerate() {
                let g = if s >= 0 { self.x(self.indices[p]) } else { self.xinv(self.indices[p]) };
                for _ in 0..s.unsigned_abs() {
                    t = t.mul(&g);
                }
            }
            for (p, &e) in uexp.iter().enumerate() {
                t = t.mul(&self.u_pow(self.indices[p], e));
            }
            out = out.add(&t);
        }
        Some(out)
    }

    pub fn render(&self, op: &OperatorExpr) -> String {
        self.pres.render(op)
    }

    /// Monomials `(x^α)^m` with `|m| ≤ bound`.
    pub fn diagonal_monomials(&self, alpha: i32, bound: i32) -> Result<Vec<Vec<i32>>, QdiffError> {
        let p = self.position(alpha)?;
        Ok((-bound..=bound)
            .map(|m| {
                let mut e = vec![0; self.indices.len()];
                e[p] = m;
                e
            })
            .collect())
    }

    /// All exponent vectors in `[−bound, bound]^n`.
    pub fn cube_monomials(&self, bound: i32) -> Vec<Vec<i32>> {
        let mut out = vec![vec![]];
        for _ in &self.indices {
            out = out
                .into_iter()
                .flat_map(|e: Vec<i32>| {
                    (-bound..=bound).map(move |m| {
                        let mut e = e.clone();
                        e.push(m);
                        e
                    })
                })
                .collect();
        }
        out
    }

    /// Compare `lhs` and `rhs` by their action on every monomial in `monomials`.
    pub fn check_identity(
        &self,
        identity: &str,
        asserted: bool,
        lhs: &OperatorExpr,
        rhs: &OperatorExpr,
        monomials: &[Vec<i32>],
    ) -> IdentityCheck {
        let diff = clear_denominators(&lhs.sub(rhs));
        let failure = monomials
            .par_iter()
            .map(|e| {
                let r = self.act_monomial(&diff, e);
                (!r.is_empty()).then(|| {
                    let r = self.act(&lhs.sub(rhs), &LaurentFunction::monomial(e.clone()));
                    format!(
                        "on {}: residual {}",
                        LaurentFunction::monomial(e.clone()).render(&self.indices),
                        r.render(&self.indices)
                    )
                })
            })
            .find_first(Option::is_some)
            .flatten();
        IdentityCheck {
            identity: identity.to_string(),
            asserted,
            pass: failure.is_none(),
            monomials: monomials.len(),
            failure,
            detail: None,
        }
    }
}

/// Outcome of one operator identity checked by action on a monomial family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub identity: String,
    /// True for identities the calculus claims; false for derived or corrected companions.
    pub asserted: bool,
    pub pass: bool,
    pub monomials: usize,
    pub failure: Option<String>,
    pub detail: Option<String>,
}

impl IdentityCheck {
    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QdiffReport {
    pub suite: String,
    pub items: Vec<IdentityCheck>,
}

impl QdiffReport {
    /// True if every asserted identity holds.
    pub fn asserted_pass(&self) -> bool {
        self.items.iter().filter(|i| i.asserted).all(|i| i.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn item(&self, identity: &str) -> Option<&IdentityCheck> {
        self.items.iter().find(|i| i.identity == identity)
    }
}

impl fmt::Display for QdiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.suite)?;
        for i in &self.items {
            let tag = if i.asserted { "" } else { " (derived)" };
            let verdict = if i.pass { "PASS" } else { "FAIL" };
            writeln!(f, "  {verdict} {}{tag} [{} monomials]", i.identity, i.monomials)?;
            if let Some(fail) = &i.failure {
                writeln!(f, "       {fail}")?;
            }
            if let Some(d) = &i.detail {
                writeln!(f, "       {d}")?;
            }
        }
        Ok(())
    }
}

fn q_pow(e: i32) -> RatFunc {
    RatFunc::from(Scalar::q_pow(e))
}

fn sfx(a: i32) -> String {
    index_suffix(a)
}

/// Every relation of `Diff_{q^k(α)}(x^α)` on `(x^α)^m`, `|m| ≤ diag_bound`, the commutativity of
/// distinct components on `[−offdiag_bound, offdiag_bound]^n`, and compatibility with the involution.
pub fn verify_diffdef(
    alphabet: &OperatorAlphabet,
    diag_bound: i32,
    offdiag_bound: i32,
) -> Result<QdiffReport, QdiffError> {
    let a = alphabet;
    let mut items = Vec::new();
    let symmetric = a.indices.iter().all(|x| a.indices.contains(&-x));
    for &alpha in &a.indices {
        let k = a.k(alpha);
        let s = sfx(alpha);
        let mons = a.diagonal_monomials(alpha, diag_bound)?;
        let (x, u, ui, d) = (a.x(alpha), a.u(alpha), a.uinv(alpha), a.d(alpha));
        let dx = d.mul(&x);
        let xd = x.mul(&d);
        let relations = vec![
            (
                format!("D_{s} x_{s} - q^{k} x_{s} D_{s} = u_{s}^{}", -k),
                dx.sub(&xd.scale(&q_pow(k))),
                a.u_pow(alpha, -k),
            ),
            (
                format!("D_{s} x_{s} - q^{} x_{s} D_{s} = u_{s}^{k}", -k),
                dx.sub(&xd.scale(&q_pow(-k))),
                a.u_pow(alpha, k),
            ),
            (format!("u_{s} x_{s} = q x_{s} u_{s}"), u.mul(&x), x.mul(&u).scale(&q_pow(1))),
            (format!("u_{s} D_{s} = q^-1 D_{s} u_{s}"), u.mul(&d), d.mul(&u).scale(&q_pow(-1))),
            (format!("u_{s} uinv_{s} = 1"), u.mul(&ui), Element::one()),
            (format!("uinv_{s} u_{s} = 1"), ui.mul(&u), Element::one()),
        ];
        for (name, lhs, rhs) in relations {
            items.push(a.check_identity(&name, true, &lhs, &rhs, &mons));
            if symmetric {
                let bl = a.involute(&lhs)?;
                let br = a.involute(&rhs)?;
                items.push(a.check_identity(
                    &format!("bar of ({name})"),
                    false,
                    &bl,
                    &br,
                    &a.cube_monomials(offdiag_bound.min(3)),
                ));
            }
        }
    }
    let cube = a.cube_monomials(offdiag_bound);
    for &alpha in &a.indices {
        for &beta in &a.indices {
            if alpha == beta {
                continue;
            }
            let (sa, sb) = (sfx(alpha), sfx(beta));
            let pairs = [
                (format!("[D_{sa}, x_{sb}] = 0"), a.d(alpha), a.x(beta)),
                (format!("[u_{sa}, x_{sb}] = 0"), a.u(alpha), a.x(beta)),
                (format!("[u_{sa}, D_{sb}] = 0"), a.u(alpha), a.d(beta)),
            ];
            for (name, p, r) in pairs {
                items.push(a.check_identity(&name, true, &p.commutator(&r), &Element::zero(), &cube));
            }
            if alpha < beta {
                let pairs = [
                    (format!("[D_{sa}, D_{sb}] = 0"), a.d(alpha), a.d(beta)),
                    (format!("[x_{sa}, x_{sb}] = 0"), a.x(alpha), a.x(beta)),
                    (format!("[u_{sa}, u_{sb}] = 0"), a.u(alpha), a.u(beta)),
                ];
                for (name, p, r) in pairs {
                    items.push(a.check_identity(&name, true, &p.commutator(&r), &Element::zero(), &cube));
                }
            }
        }
    }
    Ok(QdiffReport { suite: "diffdef".to_string(), items })
}

/// `bar(bar(g)) = g` for every letter, both symbolically and by action.
pub fn verify_involution(alphabet: &OperatorAlphabet, bound: i32) -> Result<QdiffReport, QdiffError> {
    let a = alphabet;
    let cube = a.cube_monomials(bound);
    let mut items = Vec::new();
    for g in a.pres.generators() {
        let e = a.pres.gen(&g.name);
        let twice = a.involute(&a.involute(&e)?)?;
        let mut check = a.check_identity(&format!("bar(bar({})) = {}", g.name, g.name), true, &twice, &e, &cube);
        if twice != e {
            check.pass = false;
            check.failure = Some(format!("symbolic image {}", a.render(&twice)));
        }
        items.push(check);
    }
    let u0 = a.indices[0];
    let cor = a.involute(&a.u(u0))?;
    items.push(a.check_identity(
        &format!("bar(u_{}) = q^-1 uinv_{}", sfx(u0), sfx(-u0)),
        true,
        &cor,
        &a.uinv(-u0).scale(&q_pow(-1)),
        &cube,
    ));
    Ok(QdiffReport { suite: "involution".to_string(), items })
}

/// Substitute generator images (by name) into an element of another presentation.
fn substitute(src: &Presentation<Scalar>, e: &Element<Scalar>, images: &BTreeMap<&str, OperatorExpr>) -> OperatorExpr {
    let mut out = Element::zero();
    for (w, c) in e.terms() {
        let mut t = Element::scalar(RatFunc::from(c.clone()));
        for &g in w.letters() {
            t = t.mul(&images[src.generator_name(g)]);
        }
        out = out.add(&t);
    }
    out
}

/// The coordinates `x_q^(−1) = x^(−1)`, `x_q^0 = u_(−1) u_1⁻¹ x^0`, `x_q^1 = x^1` and the
/// derivative `D_0^q = (u_(−1) u_1⁻¹)⁻¹ D_0` on the three-dimensional symmetric calculus.
pub struct AlmostCommutative {
    pub alphabet: OperatorAlphabet,
    pub xq: BTreeMap<i32, OperatorExpr>,
    pub dq0: OperatorExpr,
}

impl AlmostCommutative {
    pub fn new(k: i32) -> Result<Self, QdiffError> {
        let a = OperatorAlphabet::uniform(3, k)?;
        let mut xq = BTreeMap::new();
        xq.insert(-1, a.x(-1));
        xq.insert(0, a.compose(&[&a.u(-1), &a.uinv(1), &a.x(0)]));
        xq.insert(1, a.x(1));
        let dq0 = a.compose(&[&a.uinv(-1), &a.u(1), &a.d(0)]);
        Ok(Self { alphabet: a, xq, dq0 })
    }
}

/// Check the q-commutation relations of the transformed coordinates (both the printed and the
/// corrected catalog variants), reality of the transform, and the diagonal relations of `D_0^q`,
/// by action on `[−d, d]³`.
pub fn remark1_transform(d: i32) -> Result<QdiffReport, QdiffError> {
    let ac = AlmostCommutative::new(1)?;
    let a = &ac.alphabet;
    let cube = a.cube_monomials(d);
    let images: BTreeMap<&str, OperatorExpr> =
        [("xq_m1", ac.xq[&-1].clone()), ("xq_0", ac.xq[&0].clone()), ("xq_1", ac.xq[&1].clone())].into_iter().collect();
    let mut items = Vec::new();
    for printed in [true, false] {
        let pres = catalog::almost_commutative(printed)?;
        let tag = if printed { "printed" } else { "corrected" };
        for (idx, rule) in pres.rules().iter().enumerate() {
            let lhs = substitute(&pres, &Element::word(rule.lhs.clone()), &images);
            let rhs = substitute(&pres, &rule.rhs, &images);
            items.push(a.check_identity(&format!("{tag}: {}", pres.rule_text(idx)), printed, &lhs, &rhs, &cube));
        }
    }
    for alpha in [-1, 0, 1] {
        let bar = a.involute(&ac.xq[&alpha])?;
        items.push(a.check_identity(
            &format!("bar(xq_{}) = xq_{}", sfx(alpha), sfx(-alpha)),
            true,
            &bar,
            &ac.xq[&-alpha],
            &cube,
        ));
    }
    let k = a.k(0);
    let (x, dq) = (&ac.xq[&0], &ac.dq0);
    let dx = dq.mul(x);
    let xd = x.mul(dq);
    items.push(a.check_identity(
        &format!("Dq_0 xq_0 - q^{k} xq_0 Dq_0 = u_0^{}", -k),
        false,
        &dx.sub(&xd.scale(&q_pow(k))),
        &a.u_pow(0, -k),
        &cube,
    ));
    items.push(a.check_identity(
        &format!("Dq_0 xq_0 - q^{} xq_0 Dq_0 = u_0^{k}", -k),
        false,
        &dx.sub(&xd.scale(&q_pow(-k))),
        &a.u_pow(0, k),
        &cube,
    ));
    for beta in [-1, 1] {
        let lhs = dq.mul(&ac.xq[&beta]);
        let e = if beta < 0 { -1 } else { 1 };
        let rhs = ac.xq[&beta].mul(dq).scale(&q_pow(e));
        items.push(a.check_identity(
            &format!("Dq_0 xq_{} = q^{e} xq_{} Dq_0", sfx(beta), sfx(beta)),
            false,
            &lhs,
            &rhs,
            &cube,
        ));
    }
    Ok(QdiffReport { suite: "remark1".to_string(), items })
}

/// The unsymmetric derivatives on the three-dimensional commutative space:
/// `∂_(±1) = u_0 (x^(±1))⁻¹ (1 − u_(±1)²)/(1 − q²)` and `∂_0 = u_(−1) u_1 (x^0)⁻¹ (1 − u_0)/(1 − q)`.
pub fn unsymmetric_derivatives(a: &OperatorAlphabet) -> BTreeMap<i32, OperatorExpr> {
    let one = Element::<RatFunc>::one();
    let inv = |c: Scalar| RatFunc::from(Scalar::one()).div(&RatFunc::from(c)).expect("nonzero");
    let outer = inv(Scalar::one() - Scalar::q_pow(2));
    let mut out = BTreeMap::new();
    for alpha in [-1, 1] {
        let diff = one.sub(&a.u_pow(alpha, 2));
        out.insert(alpha, a.compose(&[&a.u(0), &a.xinv(alpha), &diff]).scale(&outer));
    }
    let diff = one.sub(&a.u(0));
    let d0 = a.compose(&[&a.u(-1), &a.u(1), &a.xinv(0), &diff]).scale(&inv(Scalar::one() - Scalar::q()));
    out.insert(0, d0);
    out
}

/// The printed normalization of the conjugate derivative, `∂̂_0 = −q⁻³ bar(∂_0)`.
pub const HAT_EXPONENT_PRINTED: i32 = -3;
/// The exponent for which the displayed hatted relation holds, `∂̂_0 = −q³ bar(∂_0)`.
pub const HAT_EXPONENT_CONSISTENT: i32 = 3;

/// Remark-3 checks on `[−d, d]³`: the displayed diagonal relation, mutual commutativity, the
/// hatted relation with the printed and the consistent normalization, the exact defect of the
/// conjugation formula, and the scaling behaviour of `Λ = u_(−1)² u_0² u_1²`.
pub fn remark3_unsymmetric(d: i32) -> Result<QdiffReport, QdiffError> {
    let a = OperatorAlphabet::uniform(3, 1)?;
    let cube = a.cube_monomials(d);
    let del = unsymmetric_derivatives(&a);
    let mut items = Vec::new();

    let uu = a.compose(&[&a.u(-1), &a.u(1)]);
    let lhs = del[&0].mul(&a.x(0));
    let rhs = uu.add(&a.x(0).mul(&del[&0]).scale(&q_pow(1)));
    items.push(a.check_identity("d_0 x_0 = u_m1 u_1 + q x_0 d_0", true, &lhs, &rhs, &cube));
    for alpha in [-1, 1] {
        let s = sfx(alpha);
        let lhs = del[&alpha].mul(&a.x(alpha));
        let rhs = a.u(0).add(&a.x(alpha).mul(&del[&alpha]).scale(&q_pow(2)));
        items.push(a.check_identity(&format!("d_{s} x_{s} = u_0 + q^2 x_{s} d_{s}"), false, &lhs, &rhs, &cube));
    }
    for (alpha, beta) in [(-1, 0), (-1, 1), (0, 1)] {
        items.push(a.check_identity(
            &format!("[d_{}, d_{}] = 0", sfx(alpha), sfx(beta)),
            true,
            &del[&alpha].commutator(&del[&beta]),
            &Element::zero(),
            &cube,
        ));
    }

    let bar0 = a.involute(&del[&0])?;
    let uu_inv = a.compose(&[&a.uinv(-1), &a.uinv(1)]);
    for (exp, asserted) in [(HAT_EXPONENT_PRINTED, true), (HAT_EXPONENT_CONSISTENT, false)] {
        let hat = bar0.scale(&(-&q_pow(exp)));
        let lhs = hat.mul(&a.x(0));
        let rhs = uu_inv.add(&a.x(0).mul(&hat).scale(&q_pow(-1)));
        items.push(a.check_identity(
            &format!("dhat_0 x_0 = (u_m1 u_1)^-1 + q^-1 x_0 dhat_0 with dhat_0 = -q^{exp} bar(d_0)"),
            asserted,
            &lhs,
            &rhs,
            &cube,
        ));
    }

    for (exp, asserted) in [(HAT_EXPONENT_PRINTED, false), (HAT_EXPONENT_CONSISTENT, false)] {
        let hat = bar0.scale(&(-&q_pow(exp)));
        let rhs = conjugation_rhs(&a, &del[&0]);
        let defect = a.canonical(&hat.sub(&rhs)).expect("built from multiplications and dilations");
        let check = a
            .check_identity(
                &format!("dhat_0 = Lam^-1 d_0 - (q+1)/(q^-2-1) (u_m1 u_1)^-1 xinv_0 (u_0^-2 - 1) with dhat_0 = -q^{exp} bar(d_0)"),
                asserted,
                &hat,
                &rhs,
                &cube,
            )
            .with_detail(format!("defect dhat_0 - rhs = {}", a.render(&defect)));
        items.push(check);
    }

    items.push(a.check_identity(
        "Lam^-1 d_0 - (q+1)/(q^-2-1) (u_m1 u_1)^-1 xinv_0 (u_0^-2 - 1) = q^4 bar(d_0)",
        false,
        &conjugation_rhs(&a, &del[&0]),
        &bar0.scale(&q_pow(4)),
        &cube,
    ));

    let lam = a.lam();
    let lam_prod = a.compose(&[&a.u_pow(-1, 2), &a.u_pow(0, 2), &a.u_pow(1, 2)]);
    items.push(a.check_identity("Lam = u_m1^2 u_0^2 u_1^2", false, &lam, &lam_prod, &cube));
    for alpha in [-1, 0, 1] {
        let s = sfx(alpha);
        items.push(a.check_identity(
            &format!("Lam x_{s} = q^2 x_{s} Lam"),
            false,
            &lam.mul(&a.x(alpha)),
            &a.x(alpha).mul(&lam).scale(&q_pow(2)),
            &cube,
        ));
        items.push(a.check_identity(
            &format!("Lam d_{s} = q^-2 d_{s} Lam"),
            false,
            &lam.mul(&del[&alpha]),
            &del[&alpha].mul(&lam).scale(&q_pow(-2)),
            &cube,
        ));
    }
    Ok(QdiffReport { suite: "remark3".to_string(), items })
}

/// Right-hand side of the conjugation formula for `∂̂_0`:
/// `Λ⁻¹ ∂_0 − (q + 1)/(q⁻² − 1) · (u_(−1) u_1)⁻¹ (x^0)⁻¹ (u_0⁻² − 1)`.
pub fn conjugation_rhs(a: &OperatorAlphabet, d0: &OperatorExpr) -> OperatorExpr {
    let c = RatFunc::new(Scalar::q() + Scalar::one(), Scalar::q_pow(-2) - Scalar::one()).expect("nonzero denominator");
    let tail = a.u_pow(0, -2).sub(&Element::one());
    let second = a.compose(&[&a.uinv(-1), &a.uinv(1), &a.xinv(0), &tail]).scale(&c);
    a.laminv().mul(d0).sub(&second)
}

/// Expand a Laurent polynomial in `s` at `q = 1 + h` through `h^order`, using
/// `s^e = (1 + h)^(e/2) = Σ_j binom(e/2, j) h^j`.
pub fn expand_q_one_plus_h(a: &Scalar, order: usize) -> HSeries {
    let mut coeffs = vec![GaussianRational::zero(); order + 1];
    for (e, c) in a.terms() {
        let mut b = GaussianRational::one();
        for (j, slot) in coeffs.iter_mut().enumerate() {
            *slot = &*slot + &(c * &b);
            let j = j as i64;
            b = &b * &GaussianRational::from_ratio(e as i64 - 2 * j, 2 * (j + 1));
        }
    }
    HSeries::from_coeffs(coeffs)
}

/// At `q = 1 + h`, the coefficient of `D_α` on `(x^α)^m` agrees with the classical `m`
/// through order `h¹`, for every `α` and `|m| ≤ max_degree`.
pub fn classical_limit(alphabet: &OperatorAlphabet, max_degree: i32) -> Result<QdiffReport, QdiffError> {
    let a = alphabet;
    let mut items = Vec::new();
    for &alpha in &a.indices {
        let p = a.position(alpha)?;
        let mut failure = None;
        for m in -max_degree..=max_degree {
            let mut e = vec![0; a.indices.len()];
            e[p] = m;
            let f = LaurentFunction::monomial(e.clone());
            let qd = a.act(&a.d(alpha), &f);
            let cl = a.act(&a.del(alpha), &f);
            e[p] = m - 1;
            let qc = qd.coeff(&e).to_scalar().expect("Laurent coefficient");
            let cc = cl.coeff(&e).to_scalar().expect("Laurent coefficient");
            let qs = expand_q_one_plus_h(&qc, 1);
            let cs = expand_q_one_plus_h(&cc, 1);
            if qs != cs {
                failure.get_or_insert_with(|| format!("m = {m}: {qs:?} vs {cs:?}"));
            }
        }
        items.push(IdentityCheck {
            identity: format!("D_{} = del_{} + O(h^2) at q = 1 + h", sfx(alpha), sfx(alpha)),
            asserted: true,
            pass: failure.is_none(),
            monomials: (2 * max_degree + 1) as usize,
            failure,
            detail: None,
        });
    }
    Ok(QdiffReport { suite: "classical-limit".to_string(), items })
}
