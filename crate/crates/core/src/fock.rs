//! Finite-dimensional representations: truncated Fock spaces of the classical and
//! q-deformed oscillators, the oscillator deforming map, and the momentum basis of
//! the final q-Heisenberg algebra.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::catalog::{self, CatalogError, QHeisStage};
use crate::coeff::{RatFunc, Scalar};
use crate::freealg::{AlgebraError, Element, Presentation};
use crate::linalg::{Matrix, Ring};

/// Frobenius tolerance for relation residuals of floating representations.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum FockError {
    #[error("invalid representation parameters: {0}")]
    BadParams(String),
    #[error("generator {0} has no matrix in this representation")]
    UnknownGenerator(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepField {
    ExactScalar,
    ComplexFloat,
}

impl RepField {
    pub fn as_str(self) -> &'static str {
        match self {
            RepField::ExactScalar => "exact-scalar",
            RepField::ComplexFloat => "complex-float",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RepMatrices {
    /// Entries in the field of rational functions of `s = q^(1/2)`.
    Exact(BTreeMap<String, Matrix<RatFunc>>),
    /// Numeric entries for the given real value of `q`.
    Float { q: f64, matrices: BTreeMap<String, Matrix<Complex64>> },
}

/// Matrices for the generators of a presentation on a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRep {
    dim: usize,
    matrices: RepMatrices,
    interior_mask: BTreeSet<usize>,
    labels: Vec<i64>,
}

/// Outcome of one relation evaluated in a representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepCheck {
    pub relation: String,
    pub pass: bool,
    /// First nonzero interior entry (exact mode) or the Frobenius norm (float mode).
    pub residual: String,
    /// Frobenius norm of the residual on interior columns; exact residuals are evaluated at `q = 2`.
    pub norm: f64,
}

impl MatrixRep {
    pub fn new(matrices: RepMatrices, interior_mask: BTreeSet<usize>, labels: Vec<i64>) -> Self {
        let dim = labels.len();
        Self { dim, matrices, interior_mask, labels }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> RepField {
        match self.matrices {
            RepMatrices::Exact(_) => RepField::ExactScalar,
            RepMatrices::Float { .. } => RepField::ComplexFloat,
        }
    }

    pub fn matrices(&self) -> &RepMatrices {
        &self.matrices
    }

    pub fn interior_mask(&self) -> &BTreeSet<usize> {
        &self.interior_mask
    }

    /// Physical label of each basis index (`n` for `|n⟩`).
    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn generator_names(&self) -> Vec<&str> {
        match &self.matrices {
            RepMatrices::Exact(m) => m.keys().map(String::as_str).collect(),
            RepMatrices::Float { matrices, .. } => matrices.keys().map(String::as_str).collect(),
        }
    }

    pub fn exact(&self, name: &str) -> Option<&Matrix<RatFunc>> {
        match &self.matrices {
            RepMatrices::Exact(m) => m.get(name),
            RepMatrices::Float { .. } => None,
        }
    }

    pub fn float(&self, name: &str) -> Option<&Matrix<Complex64>> {
        match &self.matrices {
            RepMatrices::Exact(_) => None,
            RepMatrices::Float { matrices, .. } => matrices.get(name),
        }
    }

    /// Check `lhs = rhs` on the interior basis vectors.
    pub fn check_relation(
        &self,
        pres: &Presentation<Scalar>,
        relation: &str,
        lhs: &Element<Scalar>,
        rhs: &Element<Scalar>,
    ) -> Result<RepCheck, FockError> {
        let diff = lhs.sub(rhs);
        match &self.matrices {
            RepMatrices::Exact(mats) => {
                let m = evaluate(pres, &diff, self.dim, mats, |c| RatFunc::from(c.clone()))?;
                let mut first = None;
                let mut norm = 0.0;
                for &c in &self.interior_mask {
                    for r in 0..self.dim {
                        let v = m.get(r, c);
                        if !v.is_zero() {
                            first.get_or_insert_with(|| format!("({}, {}): {}", self.labels[r], self.labels[c], v));
                            let (re, im) = v.eval_f64(2f64.sqrt());
                            norm += re * re + im * im;
                        }
                    }
                }
                Ok(RepCheck {
                    relation: relation.to_string(),
                    pass: first.is_none(),
                    residual: first.unwrap_or_else(|| "0".to_string()),
                    norm: norm.sqrt(),
                })
            }
            RepMatrices::Float { q, matrices } => {
                let s = q.sqrt();
                let m = evaluate(pres, &diff, self.dim, matrices, |c| {
                    let (re, im) = c.eval_f64(s);
                    Complex64::new(re, im)
                })?;
                let norm = self
                    .interior_mask
                    .iter()
                    .map(|&c| (0..self.dim).map(|r| m.get(r, c).norm_sqr()).sum::<f64>())
                    .sum::<f64>()
                    .sqrt();
                Ok(RepCheck {
                    relation: relation.to_string(),
                    pass: norm < FLOAT_TOLERANCE,
                    residual: format!("{norm:.3e}"),
                    norm,
                })
            }
        }
    }

    /// Check every rewrite rule of `pres` as a relation.
    pub fn check_presentation(&self, pres: &Presentation<Scalar>) -> Result<Vec<RepCheck>, FockError> {
        (0..pres.rules().len())
            .map(|k| {
                let rule = &pres.rules()[k];
                self.check_relation(pres, &pres.rule_text(k), &Element::word(rule.lhs.clone()), &rule.rhs)
            })
            .collect()
    }

    /// JSON export: `{dim, field, matrices, interior_mask, labels}`.
    pub fn to_json(&self) -> Value {
        let matrices: serde_json::Map<String, Value> = match &self.matrices {
            RepMatrices::Exact(m) => m
                .iter()
                .map(|(k, v)| {
                    let rows: Vec<Value> = (0..v.rows())
                        .map(|r| Value::from((0..v.cols()).map(|c| v.get(r, c).to_string()).collect::<Vec<_>>()))
                        .collect();
                    (k.clone(), Value::from(rows))
                })
                .collect(),
            RepMatrices::Float { matrices, .. } => matrices
                .iter()
                .map(|(k, v)| {
                    let rows: Vec<Value> = (0..v.rows())
                        .map(|r| {
                            Value::from(
                                (0..v.cols()).map(|c| json!([v.get(r, c).re, v.get(r, c).im])).collect::<Vec<_>>(),
                            )
                        })
                        .collect();
                    (k.clone(), Value::from(rows))
                })
                .collect(),
        };
        let mut out = json!({
            "dim": self.dim,
            "field": self.field().as_str(),
            "matrices": matrices,
            "interior_mask": self.interior_mask.iter().collect::<Vec<_>>(),
            "labels": self.labels,
        });
        if let RepMatrices::Float { q, .. } = &self.matrices {
            out["q"] = json!(q);
        }
        out
    }
}

/// Matrix of an algebra element under the generator assignment `mats`.
fn evaluate<T: Ring>(
    pres: &Presentation<Scalar>,
    e: &Element<Scalar>,
    dim: usize,
    mats: &BTreeMap<String, Matrix<T>>,
    coeff: impl Fn(&Scalar) -> T,
) -> Result<Matrix<T>, FockError> {
    let mut acc = Matrix::zeros(dim, dim);
    for (w, c) in e.terms() {
        let mut m = Matrix::identity(dim);
        for &g in w.letters() {
            let name = pres.generator_name(g);
            let gm = mats.get(name).ok_or_else(|| FockError::UnknownGenerator(name.to_string()))?;
            m = m.mul(gm);
        }
        acc = acc.add(&m.scale(&coeff(c)));
    }
    Ok(acc)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn float_rep(
    q: f64,
    entries: Vec<(&str, Matrix<Complex64>)>,
    interior: BTreeSet<usize>,
    labels: Vec<i64>,
) -> MatrixRep {
    let matrices = entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    MatrixRep::new(RepMatrices::Float { q, matrices }, interior, labels)
}

fn lowering(dim: usize, amp: impl Fn(usize) -> f64) -> Matrix<Complex64> {
    Matrix::from_fn(dim, dim, |r, c| if c == r + 1 { real(amp(c)) } else { Complex64::new(0.0, 0.0) })
}

fn diagonal(dim: usize, f: impl Fn(usize) -> f64) -> Matrix<Complex64> {
    Matrix::from_fn(dim, dim, |r, c| if r == c { real(f(r)) } else { Complex64::new(0.0, 0.0) })
}

fn fock_labels(dim: usize) -> Vec<i64> {
    (0..dim as i64).collect()
}

fn check_dim(dim: usize, min: usize) -> Result<(), FockError> {
    if dim < min {
        return Err(FockError::BadParams(format!("dimension {dim} is below {min}")));
    }
    Ok(())
}

/// `A|n⟩ = √n |n−1⟩`, `Ad = Aᵀ`, `N = diag(n)` on `span{|0⟩, …, |D−1⟩}`.
pub fn classical_osc_rep(dim: usize) -> Result<MatrixRep, FockError> {
    check_dim(dim, 2)?;
    let a = lowering(dim, |n| (n as f64).sqrt());
    let ad = a.transpose();
    let n = diagonal(dim, |n| n as f64);
    Ok(float_rep(1.0, vec![("A", a), ("Ad", ad), ("N", n)], (0..dim - 1).collect(), fock_labels(dim)))
}

/// Eigenvalue of `a†a` on `|n⟩`: `(qⁿ − 1)/(q − 1)`, equal to `n` at `q = 1`.
pub fn q_osc_level(n: usize, q: f64) -> f64 {
    if q == 1.0 {
        n as f64
    } else {
        (q.powi(n as i32) - 1.0) / (q - 1.0)
    }
}

/// `a|n⟩ = √λₙ |n−1⟩` and `ad = aᵀ`, satisfying `a ad − q ad a = 1` below the top level.
pub fn q_osc_rep(dim: usize, q: f64) -> Result<MatrixRep, FockError> {
    check_dim(dim, 2)?;
    if !(q > 0.0) {
        return Err(FockError::BadParams(format!("q = {q} must be positive")));
    }
    let a = lowering(dim, |n| q_osc_level(n, q).sqrt());
    let ad = a.transpose();
    Ok(float_rep(q, vec![("a", a), ("ad", ad)], (0..dim - 1).collect(), fock_labels(dim)))
}

/// The symmetric q-integer `[x] = (q^(x/2) − q^(−x/2))/(q^(1/2) − q^(−1/2))`.
pub fn qint_f64(x: f64, q: f64) -> f64 {
    if q == 1.0 {
        return x;
    }
    (q.powf(x / 2.0) - q.powf(-x / 2.0)) / (q.sqrt() - 1.0 / q.sqrt())
}

/// Reciprocal refined by one Newton step, since double-double division is only f64-accurate.
fn recip(v: TwoFloat) -> TwoFloat {
    let one = TwoFloat::from(1.0);
    let x = one / v;
    x + x * (one - v * x)
}

/// `[n]/n` in double-double precision, continued to `n = 0` by its limit `ln q/(q^(1/2) − q^(−1/2))`.
fn qint_ratio(n: usize, q: TwoFloat) -> TwoFloat {
    let one = TwoFloat::from(1.0);
    if q == one {
        return one;
    }
    let s = q.sqrt();
    let inv_den = recip(s - recip(s));
    if n == 0 {
        return q.ln() * inv_den;
    }
    let sn = s.powi(n as i32);
    (sn - recip(sn)) * inv_den * recip(TwoFloat::from(n as f64))
}

fn dd_diagonal(dim: usize, f: impl Fn(usize) -> TwoFloat) -> Matrix<TwoFloat> {
    Matrix::from_fn(dim, dim, |r, c| if r == c { f(r) } else { TwoFloat::from(0.0) })
}

/// Double-double version of [`deformed_oscillator`].
fn deformed_oscillator_dd(dim: usize, q: f64, rescale: bool) -> (Matrix<TwoFloat>, Matrix<TwoFloat>) {
    let q = TwoFloat::from(q);
    let a = Matrix::from_fn(
        dim,
        dim,
        |r, c| {
            if c == r + 1 {
                TwoFloat::from(c as f64).sqrt()
            } else {
                TwoFloat::from(0.0)
            }
        },
    );
    let ad = a.transpose();
    let fourth = q.sqrt().sqrt();
    let c = if rescale { recip(fourth.sqrt()) } else { TwoFloat::from(1.0) };
    let quarter = dd_diagonal(dim, |n| c * fourth.powi(n as i32));
    let root = dd_diagonal(dim, |n| qint_ratio(n, q).sqrt());
    (quarter.mul(&a).mul(&root), quarter.mul(&root).mul(&ad))
}

/// `â = c·q^(N/4) A √([N]/N)` and `â† = c·q^(N/4) √([N]/N) A†`, built from the classical
/// Fock matrices, with `c = q^(−1/8)` when `rescale` is set and `c = 1` otherwise.
pub fn deformed_oscillator(
    dim: usize,
    q: f64,
    rescale: bool,
) -> Result<(Matrix<Complex64>, Matrix<Complex64>), FockError> {
    check_dim(dim, 2)?;
    let (a, ad) = deformed_oscillator_dd(dim, q, rescale);
    let to_c = |v: &TwoFloat| real(f64::from(*v));
    Ok((a.map(to_c), ad.map(to_c)))
}

/// Residuals of `â â† − q â† â − 1` for the oscillator deforming map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformingMapReport {
    pub dim: usize,
    pub q: f64,
    /// Largest interior entry of the residual with the `q^(−1/8)` rescale.
    pub max_residual: f64,
    /// Largest interior entry of the residual for the unrescaled map.
    pub max_residual_unrescaled: f64,
    /// `|q^(1/4) − 1|`, the value the unrescaled residual takes on every interior state.
    pub predicted_unrescaled: f64,
    pub pass: bool,
}

fn oscillator_residual(dim: usize, q: f64, rescale: bool) -> f64 {
    let (a, ad) = deformed_oscillator_dd(dim, q, rescale);
    let res = a.mul(&ad).sub(&ad.mul(&a).scale(&TwoFloat::from(q))).sub(&Matrix::identity(dim));
    (0..dim - 1)
        .flat_map(|c| (0..dim).map(move |r| (r, c)))
        .map(|(r, c)| f64::from(*res.get(r, c)).abs())
        .fold(0.0, f64::max)
}

pub fn deforming_map_check(dim: usize, q: f64) -> Result<DeformingMapReport, FockError> {
    check_dim(dim, 4)?;
    if !(q > 1.0) {
        return Err(FockError::BadParams(format!("q = {q} must exceed 1")));
    }
    let max_residual = oscillator_residual(dim, q, true);
    let max_residual_unrescaled = oscillator_residual(dim, q, false);
    Ok(DeformingMapReport {
        dim,
        q,
        max_residual,
        max_residual_unrescaled,
        predicted_unrescaled: (q.powf(0.25) - 1.0).abs(),
        pass: max_residual < FLOAT_TOLERANCE,
    })
}

fn check_momentum_params(m: usize, pi0: f64, q: f64, exact: bool) -> Result<(), FockError> {
    if m < 2 {
        return Err(FockError::BadParams(format!("M = {m} is below 2")));
    }
    if !(q > 1.0) {
        return Err(FockError::BadParams(format!("q = {q} must exceed 1")));
    }
    if !(1.0..q).contains(&pi0) {
        return Err(FockError::BadParams(format!("pi0 = {pi0} is outside [1, q)")));
    }
    if exact && pi0 != 1.0 {
        return Err(FockError::BadParams("exact mode requires pi0 = 1".to_string()));
    }
    Ok(())
}

/// Momentum basis `|n⟩`, `−M ≤ n ≤ M`, with `p|n⟩ = π₀qⁿ|n⟩`,
/// `ξ|n⟩ = i/(π₀qⁿ(q − q⁻¹))·(q^(1/2)|n−1⟩ − q^(−1/2)|n+1⟩)`,
/// `u|n⟩ = q^(−1/2)|n−1⟩` and `uinv|n⟩ = q^(1/2)|n+1⟩`.
///
/// In exact mode `q` stays symbolic and `pi0` must be 1; the numeric `q` is kept only for
/// float evaluation.
pub fn momentum_rep(m: usize, pi0: f64, q: f64, exact: bool) -> Result<MatrixRep, FockError> {
    check_momentum_params(m, pi0, q, exact)?;
    let dim = 2 * m + 1;
    let label = |k: usize| k as i64 - m as i64;
    let labels: Vec<i64> = (0..dim).map(label).collect();
    let interior: BTreeSet<usize> = (1..dim - 1).collect();
    if exact {
        let rf = RatFunc::from;
        let qdiff = RatFunc::from(Scalar::q() - Scalar::q_pow(-1));
        let xi_scale = |n: i64| {
            let c = RatFunc::from(Scalar::monomial(crate::coeff::GaussianRational::i(), -2 * n as i32));
            c.div(&qdiff).expect("q − q⁻¹ is nonzero")
        };
        let zero = RatFunc::zero;
        let p = Matrix::from_fn(dim, dim, |r, c| if r == c { rf(Scalar::q_pow(label(c) as i32)) } else { zero() });
        let xi = Matrix::from_fn(dim, dim, |r, c| {
            let n = label(c);
            if r + 1 == c {
                &xi_scale(n) * &rf(Scalar::s_pow(1))
            } else if r == c + 1 {
                -&(&xi_scale(n) * &rf(Scalar::s_pow(-1)))
            } else {
                zero()
            }
        });
        let u = Matrix::from_fn(dim, dim, |r, c| if r + 1 == c { rf(Scalar::s_pow(-1)) } else { zero() });
        let uinv = Matrix::from_fn(dim, dim, |r, c| if r == c + 1 { rf(Scalar::s_pow(1)) } else { zero() });
        let matrices =
            [("p", p), ("xi", xi), ("u", u), ("uinv", uinv)].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        return Ok(MatrixRep::new(RepMatrices::Exact(matrices), interior, labels));
    }
    let s = q.sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let p = diagonal(dim, |k| pi0 * q.powi(label(k) as i32));
    let xi = Matrix::from_fn(dim, dim, |r, c| {
        let scale = Complex64::new(0.0, 1.0 / (pi0 * q.powi(label(c) as i32) * (q - 1.0 / q)));
        if r + 1 == c {
            scale * s
        } else if r == c + 1 {
            -scale / s
        } else {
            zero
        }
    });
    let u = lowering(dim, |_| 1.0 / s);
    let uinv = u.transpose().scale(&real(q));
    Ok(float_rep(q, vec![("p", p), ("xi", xi), ("u", u), ("uinv", uinv)], interior, labels))
}

/// Relations of the final q-Heisenberg algebra beyond its rewrite rules: the conjugate
/// ξ–p relation and the two inverse relations.
pub fn qheis5_extra_relations(pres: &Presentation<Scalar>) -> Vec<(String, Element<Scalar>, Element<Scalar>)> {
    let i = Scalar::i();
    vec![
        (
            "xi p - q p xi = i uinv".to_string(),
            pres.gen("xi").mul(&pres.gen("p")).sub(&pres.mono(Scalar::q(), &["p", "xi"])),
            pres.mono(i, &["uinv"]),
        ),
        ("u uinv = 1".to_string(), pres.mono(Scalar::one(), &["u", "uinv"]), Element::one()),
        ("uinv u = 1".to_string(), pres.mono(Scalar::one(), &["uinv", "u"]), Element::one()),
    ]
}

/// All relations of `qheis5` (rules of the chosen variant plus the extra relations) on the momentum basis.
pub fn momentum_relation_checks(rep: &MatrixRep, corrected: bool) -> Result<Vec<RepCheck>, FockError> {
    let stage = if corrected { QHeisStage::FinalCorrected } else { QHeisStage::FinalPrinted };
    let pres = catalog::q_heisenberg(stage)?;
    let mut out = rep.check_presentation(&pres)?;
    for (name, lhs, rhs) in qheis5_extra_relations(&pres) {
        out.push(rep.check_relation(&pres, &name, &lhs, &rhs)?);
    }
    Ok(out)
}

/// Samples of the plane wave `exp(i qⁿ π₀ x)` on the grid `xs`.
pub fn eigenfunction_eval(n: i32, pi0: f64, q: f64, xs: &[f64]) -> Vec<Complex64> {
    let k = q.powi(n) * pi0;
    xs.iter().map(|&x| Complex64::new(0.0, k * x).exp()).collect()
}

/// Largest relative deviation between the central difference of the plane wave with step
/// `step` and `i qⁿ π₀` times the sample, so that `−i d/dx` returns the momentum eigenvalue.
pub fn eigenfunction_derivative_error(n: i32, pi0: f64, q: f64, xs: &[f64], step: f64) -> f64 {
    let k = q.powi(n) * pi0;
    let f = eigenfunction_eval(n, pi0, q, xs);
    let plus: Vec<f64> = xs.iter().map(|x| x + step).collect();
    let minus: Vec<f64> = xs.iter().map(|x| x - step).collect();
    let fp = eigenfunction_eval(n, pi0, q, &plus);
    let fm = eigenfunction_eval(n, pi0, q, &minus);
    f.iter()
        .zip(fp.iter().zip(&fm))
        .map(|(v, (a, b))| {
            let d = (a - b) / (2.0 * step);
            let expected = Complex64::new(0.0, k) * v;
            (d - expected).norm() / expected.norm()
        })
        .fold(0.0, f64::max)
}
