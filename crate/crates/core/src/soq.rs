//! The SO_q(N) differential calculus: R̂-matrix ingestion and validation, spectral
//! projectors, metric extraction, the differential algebra as a rewriting presentation,
//! and the identity checks built on it.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::index_suffix;
use crate::coeff::{CoeffError, Coefficient, GaussianRational, RatFunc, Scalar};
use crate::freealg::{AlgebraError, Element, GenId, Presentation, PresentationBuilder, DEFAULT_STEP_LIMIT};
use crate::linalg::Matrix;
use crate::syntax::{parse_coefficient, SyntaxError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SoqError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Coefficient { line: usize, source: SyntaxError },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("validation failed: {identity} at {indices}")]
    ValidationFailed { identity: String, indices: String },
    #[error("eigenvalues {0} are not pairwise distinct")]
    DegenerateEigenvalues(String),
    #[error("trace projector has rank {0}, expected 1")]
    NotRankOne(usize),
    #[error("no metric gauge with g_(-n,n) g_(n,-n) = 1: {0} is not a square")]
    NoInvolutiveGauge(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

fn rf(s: Scalar) -> RatFunc {
    RatFunc::from(s)
}

fn qp(k: i32) -> RatFunc {
    rf(Scalar::q_pow(k))
}

/// Braid-form R̂-matrix with entries `R̂^(ij)_(kl)` at row `(i, j)` and column `(k, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    n: usize,
    labels: Vec<i32>,
    entries: Matrix<RatFunc>,
    at_q_one: bool,
}

impl RMatrix {
    /// Build from labels and an `N² × N²` matrix; `at_q_one` marks data specialized to `q = 1`.
    pub fn new(labels: Vec<i32>, entries: Matrix<RatFunc>, at_q_one: bool) -> Result<Self, SoqError> {
        let n = labels.len();
        if entries.rows() != n * n || entries.cols() != n * n {
            return Err(SoqError::Parse {
                line: 0,
                message: format!("expected a {0}x{0} matrix, got {1}x{2}", n * n, entries.rows(), entries.cols()),
            });
        }
        Ok(Self { n, labels, entries, at_q_one })
    }

    /// Parse the line format `N=<n> basis=<l1,l2,...> [q=1]` followed by `i j k l <scalar>` lines.
    pub fn parse(text: &str) -> Result<Self, SoqError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(SoqError::Parse { line: 1, message: "missing header".into() })?;
        let mut n = None;
        let mut labels = None;
        let mut at_q_one = false;
        for field in header.split_whitespace() {
            let bad = |m: &str| SoqError::Parse { line: hline, message: format!("{m}: `{field}`") };
            let (k, v) = field.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match k {
                "N" => n = Some(v.parse::<usize>().map_err(|_| bad("bad dimension"))?),
                "basis" => {
                    let ls: Result<Vec<i32>, _> = v.split(',').map(|t| t.trim().parse::<i32>()).collect();
                    labels = Some(ls.map_err(|_| bad("bad basis label"))?);
                }
                "q" if v == "1" => at_q_one = true,
                _ => return Err(bad("unknown header field")),
            }
        }
        let n = n.ok_or(SoqError::Parse { line: hline, message: "missing N".into() })?;
        let labels = labels.unwrap_or_else(|| crate::catalog::lightcone_indices(n));
        if labels.len() != n {
            return Err(SoqError::Parse { line: hline, message: format!("basis has {} labels, N={n}", labels.len()) });
        }
        let mut entries = Matrix::zeros(n * n, n * n);
        let mut seen = BTreeMap::new();
        for (line, body) in lines {
            let mut parts = body.splitn(5, char::is_whitespace);
            let mut idx = [0usize; 4];
            for slot in idx.iter_mut() {
                let t = parts.next().ok_or(SoqError::Parse { line, message: "expected `i j k l <scalar>`".into() })?;
                let label: i32 =
                    t.parse().map_err(|_| SoqError::Parse { line, message: format!("bad index `{t}`") })?;
                *slot = labels
                    .iter()
                    .position(|&l| l == label)
                    .ok_or(SoqError::Parse { line, message: format!("index {label} not in basis") })?;
            }
            let text = parts.next().ok_or(SoqError::Parse { line, message: "missing scalar".into() })?;
            let value: Scalar = parse_coefficient(text).map_err(|source| SoqError::Coefficient { line, source })?;
            let (r, c) = (idx[0] * n + idx[1], idx[2] * n + idx[3]);
            if seen.insert((r, c), line).is_some() {
                return Err(SoqError::Parse { line, message: "duplicate entry".into() });
            }
            entries.set(r, c, rf(value));
        }
        Self::new(labels, entries, at_q_one)
    }

    pub fn load(path: &Path) -> Result<Self, SoqError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SoqError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// The file format of [`RMatrix::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "N={} basis={}{}\n",
            self.n,
            self.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","),
            if self.at_q_one { " q=1" } else { "" }
        );
        for r in 0..self.n * self.n {
            for c in 0..self.n * self.n {
                let v = self.entries.get(r, c);
                if !v.is_zero() {
                    let l = &self.labels;
                    out.push_str(&format!(
                        "{} {} {} {} {}\n",
                        l[r / self.n],
                        l[r % self.n],
                        l[c / self.n],
                        l[c % self.n],
                        v
                    ));
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn matrix(&self) -> &Matrix<RatFunc> {
        &self.entries
    }

    pub fn is_specialized(&self) -> bool {
        self.at_q_one
    }

    /// Position of a label in the basis.
    pub fn pos(&self, label: i32) -> usize {
        self.labels.iter().position(|&l| l == label).expect("label in basis")
    }

    /// `R̂^(ij)_(kl)` by labels.
    pub fn entry(&self, i: i32, j: i32, k: i32, l: i32) -> &RatFunc {
        self.entries.get(self.pos(i) * self.n + self.pos(j), self.pos(k) * self.n + self.pos(l))
    }

    /// The eigenvalues `q, −q⁻¹, q^(1−N)` of the decomposition, specialized if the data is.
    pub fn eigenvalues(&self) -> [RatFunc; 3] {
        let l = [Scalar::q(), -Scalar::q_pow(-1), Scalar::q_pow(1 - self.n as i32)];
        l.map(|s| if self.at_q_one { rf(Scalar::constant(s.at_q_one())) } else { rf(s) })
    }

    fn pair_text(&self, idx: usize) -> String {
        format!("({},{})", self.labels[idx / self.n], self.labels[idx % self.n])
    }

    fn triple_text(&self, idx: usize) -> String {
        let n = self.n;
        format!("({},{},{})", self.labels[idx / (n * n)], self.labels[(idx / n) % n], self.labels[idx % n])
    }

    /// Braid relation, eigenvalue distinctness, cubic characteristic identity and invertibility,
    /// in that order; the first violation is returned as an error.
    pub fn validate(&self) -> Result<Validation, SoqError> {
        let one = Matrix::<RatFunc>::identity(self.n);
        let a = self.entries.kron(&one);
        let b = one.kron(&self.entries);
        let braid = a.mul(&b).mul(&a).sub(&b.mul(&a).mul(&b));
        if let Some((r, c, _)) = braid.first_nonzero() {
            return Err(SoqError::ValidationFailed {
                identity: "braid relation (R⊗1)(1⊗R)(R⊗1) = (1⊗R)(R⊗1)(1⊗R)".into(),
                indices: format!("{} {}", self.triple_text(r), self.triple_text(c)),
            });
        }
        let ev = self.eigenvalues();
        for x in 0..3 {
            for y in x + 1..3 {
                if ev[x] == ev[y] {
                    return Err(SoqError::DegenerateEigenvalues(
                        ev.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "),
                    ));
                }
            }
        }
        let id = Matrix::<RatFunc>::identity(self.n * self.n);
        let shifted = |l: &RatFunc| self.entries.sub(&id.scale(l));
        let cubic = shifted(&ev[0]).mul(&shifted(&ev[1])).mul(&shifted(&ev[2]));
        if let Some((r, c, _)) = cubic.first_nonzero() {
            return Err(SoqError::ValidationFailed {
                identity: "cubic characteristic identity".into(),
                indices: format!("{} {}", self.pair_text(r), self.pair_text(c)),
            });
        }
        let inverse = self.entries.inverse().ok_or_else(|| SoqError::ValidationFailed {
            identity: "invertibility".into(),
            indices: "R is singular".into(),
        })?;
        Ok(Validation {
            checks: vec![
                Check::new("braid relation", true, true, None),
                Check::new("eigenvalues q, -q^-1, q^(1-N) distinct", true, true, None),
                Check::new("(R - q)(R + q^-1)(R - q^(1-N)) = 0", true, true, None),
                Check::new("R invertible", true, true, None),
            ],
            inverse,
        })
    }
}

/// Outcome of a successful [`RMatrix::validate`].
#[derive(Clone, Debug)]
pub struct Validation {
    pub checks: Vec<Check>,
    pub inverse: Matrix<RatFunc>,
}

/// One named identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// `true` when the identity is displayed as stated; `false` for derived or alternative forms.
    pub asserted: bool,
    pub pass: bool,
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, asserted: bool, pass: bool, detail: Option<String>) -> Self {
        Self { name: name.into(), asserted, pass, detail }
    }
}

/// Ordered list of checks for one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SoqReport {
    pub suite: String,
    pub items: Vec<Check>,
    pub definitions: Vec<DeformingMap>,
}

/// Symbolic `u_i^(∓2)` in terms of the computed `r_i`, `r̃_i` and an uninterpreted `ρ_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeformingMap {
    pub index: i32,
    pub u_inv_sq: String,
    pub u_sq: String,
}

impl DeformingMap {
    pub fn new(so: &DiffSo, i: i32, r: &Element<RatFunc>, rt: &Element<RatFunc>) -> Self {
        let p = so.presentation();
        DeformingMap {
            index: i,
            u_inv_sq: format!("({}) rho_{}^-1", p.render(r), index_suffix(i)),
            u_sq: format!("rho_{}~^-1 ({})", index_suffix(-i), p.render(rt)),
        }
    }
}

impl SoqReport {
    pub fn item(&self, name: &str) -> Option<&Check> {
        self.items.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|c| c.pass)
    }

    pub fn asserted_pass(&self) -> bool {
        self.items.iter().filter(|c| c.asserted).all(|c| c.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.items.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

impl fmt::Display for SoqReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite)?;
        for c in &self.items {
            write!(
                f,
                "{} {}{}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                if c.asserted { "" } else { " [derived]" }
            )?;
            if let Some(d) = &c.detail {
                write!(f, ": {d}")?;
            }
            writeln!(f)?;
        }
        for d in &self.definitions {
            let i = index_suffix(d.index);
            writeln!(f, "u_{i}^-2 = {}", d.u_inv_sq)?;
            writeln!(f, "u_{i}^2 = {}", d.u_sq)?;
        }
        Ok(())
    }
}

/// The three spectral projectors with their eigenvalues `(q, −q⁻¹, q^(1−N))`.
#[derive(Clone, Debug)]
pub struct ProjectorSet {
    pub plus: Matrix<RatFunc>,
    pub minus: Matrix<RatFunc>,
    pub zero: Matrix<RatFunc>,
    pub eigenvalues: [RatFunc; 3],
}

/// Lagrange interpolation `P_a = Π_(b≠a) (R̂ − λ_b)/(λ_a − λ_b)`.
pub fn spectral_projectors(r: &RMatrix) -> Result<ProjectorSet, SoqError> {
    let ev = r.eigenvalues();
    let id = Matrix::<RatFunc>::identity(r.n * r.n);
    let mut ps = Vec::with_capacity(3);
    for a in 0..3 {
        let mut p = id.clone();
        for b in 0..3 {
            if a == b {
                continue;
            }
            let d = &ev[a] - &ev[b];
            let inv = d.inv().map_err(|_| {
                SoqError::DegenerateEigenvalues(ev.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", "))
            })?;
            p = p.mul(&r.entries.sub(&id.scale(&ev[b]))).scale(&inv);
        }
        ps.push(p);
    }
    let zero = ps.pop().expect("three projectors");
    let minus = ps.pop().expect("three projectors");
    let plus = ps.pop().expect("three projectors");
    Ok(ProjectorSet { plus, minus, zero, eigenvalues: ev })
}

fn matrix_check(name: &str, m: &Matrix<RatFunc>, r: &RMatrix) -> Check {
    let detail = m.first_nonzero().map(|(a, b, v)| format!("entry {} {} = {v}", r.pair_text(a), r.pair_text(b)));
    Check::new(name, true, detail.is_none(), detail)
}

impl ProjectorSet {
    /// Idempotence, mutual orthogonality, completeness and the reconstruction of R̂.
    pub fn checks(&self, r: &RMatrix) -> Vec<Check> {
        let ps = [("P+", &self.plus), ("P-", &self.minus), ("P0", &self.zero)];
        let mut out = Vec::new();
        for (name, p) in ps {
            out.push(matrix_check(&format!("{name} {name} = {name}"), &p.mul(p).sub(p), r));
        }
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    let (nx, px) = ps[x];
                    let (ny, py) = ps[y];
                    out.push(matrix_check(&format!("{nx} {ny} = 0"), &px.mul(py), r));
                }
            }
        }
        let id = Matrix::<RatFunc>::identity(r.n * r.n);
        out.push(matrix_check("P+ + P- + P0 = 1", &self.plus.add(&self.minus).add(&self.zero).sub(&id), r));
        let ev = &self.eigenvalues;
        let recon = self.plus.scale(&ev[0]).add(&self.minus.scale(&ev[1])).add(&self.zero.scale(&ev[2]));
        out.push(matrix_check("q P+ - q^-1 P- + q^(1-N) P0 = R", &recon.sub(&r.entries), r));
        out
    }
}

/// Normalization of the metric factors of `P0 = c g^(ij) g_(kl)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    /// `g_(−n,n) = g^(−n,n) = 1`.
    Antidiagonal,
    /// `g_(−n,n) g_(n,−n) = 1` and likewise for `g^(ij)`, with positive leading coefficient.
    Involutive,
}

/// Metric extracted from the trace projector.
#[derive(Clone, Debug)]
pub struct Metric {
    labels: Vec<i32>,
    pub g_upper: Matrix<RatFunc>,
    pub g_lower: Matrix<RatFunc>,
    pub c: RatFunc,
    pub gauge: Gauge,
}

impl Metric {
    fn pos(&self, label: i32) -> usize {
        self.labels.iter().position(|&l| l == label).expect("label in basis")
    }

    /// `g_(ij)` by labels.
    pub fn lower(&self, i: i32, j: i32) -> &RatFunc {
        self.g_lower.get(self.pos(i), self.pos(j))
    }

    /// `g^(ij)` by labels.
    pub fn upper(&self, i: i32, j: i32) -> &RatFunc {
        self.g_upper.get(self.pos(i), self.pos(j))
    }

    /// `c · g^(ij) g_(kl)` as an `N² × N²` matrix.
    pub fn reconstruct(&self) -> Matrix<RatFunc> {
        let n = self.labels.len();
        Matrix::from_fn(n * n, n * n, |r, s| {
            &(&self.c * self.g_upper.get(r / n, r % n)) * self.g_lower.get(s / n, s % n)
        })
    }

    /// Rescale `g ↦ λ g` and `c ↦ c/λ²`.
    pub fn rescaled(&self, lambda: &RatFunc) -> Self {
        let inv = lambda.inv().expect("nonzero rescale");
        Self {
            labels: self.labels.clone(),
            g_upper: self.g_upper.scale(lambda),
            g_lower: self.g_lower.scale(lambda),
            c: &(&self.c * &inv) * &inv,
            gauge: self.gauge,
        }
    }
}

/// Square root of `c s^e` with `e` even and `c` a positive rational square.
fn monomial_sqrt(v: &RatFunc) -> Option<RatFunc> {
    let s = v.to_scalar()?;
    if s.len() != 1 {
        return None;
    }
    let (e, c) = s.terms().next()?;
    if e % 2 != 0 || !c.is_real() || c.re() <= &num_rational::BigRational::from_integer(0.into()) {
        return None;
    }
    let (num, den) = (c.re().numer().sqrt(), c.re().denom().sqrt());
    if &(&num * &num) != c.re().numer() || &(&den * &den) != c.re().denom() {
        return None;
    }
    let root = GaussianRational::real(num_rational::BigRational::new(num, den));
    Some(rf(Scalar::monomial(root, e / 2)))
}

/// Factor `P0 = c · g^(ij) g_(kl)` after checking rank one, normalized in the given gauge.
pub fn extract_metric(p0: &Matrix<RatFunc>, labels: &[i32], gauge: Gauge) -> Result<Metric, SoqError> {
    let rank = p0.rank();
    if rank != 1 {
        return Err(SoqError::NotRankOne(rank));
    }
    let n = labels.len();
    let (a, b, pivot) = p0.first_nonzero().expect("rank one");
    let pivot = pivot.clone();
    let column = Matrix::from_fn(n, n, |i, j| p0.get(i * n + j, b).clone());
    let row = Matrix::from_fn(n, n, |i, j| p0.get(a, i * n + j).clone());
    let lo = 0;
    let hi = n - 1;
    let normalize = |m: &Matrix<RatFunc>| -> Result<Matrix<RatFunc>, SoqError> {
        let anti = m.get(lo, hi).clone();
        let inv = anti.inv().map_err(|_| SoqError::NotRankOne(rank))?;
        let m = m.scale(&inv);
        match gauge {
            Gauge::Antidiagonal => Ok(m),
            Gauge::Involutive => {
                let prod = m.get(hi, lo).clone();
                let root = monomial_sqrt(&prod).ok_or_else(|| SoqError::NoInvolutiveGauge(prod.to_string()))?;
                Ok(m.scale(&root.inv()?))
            }
        }
    };
    let g_upper = normalize(&column)?;
    let g_lower = normalize(&row)?;
    let denom = &g_upper.get(a / n, a % n).clone() * g_lower.get(b / n, b % n);
    let c = pivot.div(&denom)?;
    Ok(Metric { labels: labels.to_vec(), g_upper, g_lower, c, gauge })
}

impl Metric {
    /// Reconstruction, rank one, `g^(ij) g_(jk) = δ` and involutivity of `x^i ↦ Σ_j g_(ji) x^j`.
    pub fn checks(&self, p0: &Matrix<RatFunc>, r: &RMatrix) -> Vec<Check> {
        let n = self.labels.len();
        let mut out = vec![Check::new("rank P0 = 1", true, p0.rank() == 1, None)];
        out.push(matrix_check("P0 = c g^(ij) g_(kl)", &self.reconstruct().sub(p0), r));
        let inv = self.g_upper.mul(&self.g_lower).sub(&Matrix::identity(n));
        let detail =
            inv.first_nonzero().map(|(x, y, v)| format!("entry ({},{}) = {v}", self.labels[x], self.labels[y]));
        out.push(Check::new("g^(ij) g_(jk) = delta", false, detail.is_none(), detail));
        // star(star(x^i)) = Σ_(j,k) g_(ji) g_(kj) x^k
        let twice = self.g_lower.mul(&self.g_lower).sub(&Matrix::identity(n));
        let detail =
            twice.first_nonzero().map(|(x, y, v)| format!("entry ({},{}) = {v}", self.labels[x], self.labels[y]));
        out.push(Check::new("star(star(x^i)) = x^i", false, detail.is_none(), detail));
        out
    }
}

/// Reading of `∂̂_i = −q^N Σ_(k,l) g_(ik) g^(kl) star(∂^l)` with `∂^l = Σ_m g^(lm) ∂_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarVariant {
    /// `Σ_k g_(ik) g^(kl) = δ_il`, so `star(∂_i) = −q^(−N) g_(i,−i) ∂̂_(−i)`.
    Printed,
    /// The contraction taken as `Σ_k g_(ik) g^(lk)`, matching the transposed order in which
    /// products of derivatives contract.
    Consistent,
}

/// Generator ids of the differential algebra.
#[derive(Clone, Debug)]
struct Gens {
    x: Vec<GenId>,
    d: Vec<GenId>,
    dh: Vec<GenId>,
    lam: GenId,
    laminv: GenId,
}

/// The differential algebra over `{x^i, ∂_i, ∂̂_i, Λ, Λ⁻¹}` with its structural data.
#[derive(Clone, Debug)]
pub struct DiffSo {
    pub r: RMatrix,
    pub rinv: Matrix<RatFunc>,
    pub projectors: ProjectorSet,
    pub metric: Metric,
    pub star: StarVariant,
    pres: Presentation<RatFunc>,
    gens: Gens,
}

pub fn x_name(i: i32) -> String {
    format!("x_{}", index_suffix(i))
}

pub fn d_name(i: i32) -> String {
    format!("d_{}", index_suffix(i))
}

pub fn dhat_name(i: i32) -> String {
    format!("dh_{}", index_suffix(i))
}

/// Rules `leading word → −(rest)` spanning the same ideal as `rows`, one per independent row.
/// Each row lists coefficients of the words in `words`.
fn quadratic_rules(
    b: &PresentationBuilder<RatFunc>,
    words: &[[GenId; 2]],
    rows: &[Vec<RatFunc>],
) -> Vec<([GenId; 2], Element<RatFunc>)> {
    let mut order: Vec<usize> = (0..words.len()).collect();
    order.sort_by(|&x, &y| b.word(&words[y]).cmp(&b.word(&words[x])));
    let m = Matrix::from_fn(rows.len(), words.len(), |r, c| rows[r][order[c]].clone());
    let (red, pivots) = m.rref();
    let mut out = Vec::new();
    for (r, &pc) in pivots.iter().enumerate() {
        let mut rhs = Element::zero();
        for c in 0..words.len() {
            if c != pc && !red.get(r, c).is_zero() {
                rhs.add_term(b.word(&words[order[c]]), &red.get(r, c).neg());
            }
        }
        out.push((words[order[pc]], rhs));
    }
    out
}

impl DiffSo {
    /// Validate the data, extract projectors and metric, and build the rewriting presentation.
    pub fn build(r: RMatrix, gauge: Gauge, star: StarVariant) -> Result<Self, SoqError> {
        let rinv = r.validate()?.inverse;
        let projectors = spectral_projectors(&r)?;
        let metric = extract_metric(&projectors.zero, &r.labels, gauge)?;
        let n = r.n;
        let labels = r.labels.clone();
        let mut b = PresentationBuilder::<RatFunc>::new(format!("diff-so{n}"));
        let x: Vec<GenId> = labels.iter().map(|&i| b.generator(&x_name(i), 1)).collect();
        let d: Vec<GenId> = labels.iter().map(|&i| b.generator(&d_name(i), 1)).collect();
        let dh: Vec<GenId> = labels.iter().map(|&i| b.generator(&dhat_name(i), 1)).collect();
        let lam = b.generator("Lam", 1);
        let laminv = b.generator("Laminv", 1);
        let pm = &projectors.minus;
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |c| (a, c))).collect();

        // Σ_(kl) P⁻^(ij)_(kl) x^k x^l = 0 for every (ij)
        let words: Vec<[GenId; 2]> = pairs.iter().map(|&(k, l)| [x[k], x[l]]).collect();
        let rows: Vec<Vec<RatFunc>> =
            (0..n * n).map(|row| (0..n * n).map(|col| pm.get(row, col).clone()).collect()).collect();
        for (lhs, rhs) in quadratic_rules(&b, &words, &rows) {
            b.rule(&lhs, rhs);
        }
        // Σ_(ij) P⁻^(ij)_(kl) ∂_j ∂_i = 0 for every (kl), and the same for ∂̂
        let rows: Vec<Vec<RatFunc>> =
            (0..n * n).map(|col| (0..n * n).map(|row| pm.get(row, col).clone()).collect()).collect();
        for gens in [&d, &dh] {
            let words: Vec<[GenId; 2]> = pairs.iter().map(|&(i, j)| [gens[j], gens[i]]).collect();
            for (lhs, rhs) in quadratic_rules(&b, &words, &rows) {
                b.rule(&lhs, rhs);
            }
        }
        // ∂_i x^j = δ + q Σ R̂^(jk)_(il) x^l ∂_k and ∂̂_i x^j = δ + q⁻¹ Σ (R̂⁻¹)^(jk)_(il) x^l ∂̂_k
        for (gens, mat, factor) in [(&d, &r.entries, qp(1)), (&dh, &rinv, qp(-1))] {
            for i in 0..n {
                for j in 0..n {
                    let mut rhs = if i == j { Element::one() } else { Element::zero() };
                    for k in 0..n {
                        for l in 0..n {
                            let v = mat.get(j * n + k, i * n + l);
                            if !v.is_zero() {
                                rhs.add_term(b.word(&[x[l], gens[k]]), &(&factor * v));
                            }
                        }
                    }
                    b.rule(&[gens[i], x[j]], rhs);
                }
            }
        }
        // ∂̂_i ∂_j = q Σ R̂^(lk)_(ji) ∂_k ∂̂_l
        for i in 0..n {
            for j in 0..n {
                let mut rhs = Element::zero();
                for k in 0..n {
                    for l in 0..n {
                        let v = r.entries.get(l * n + k, j * n + i);
                        if !v.is_zero() {
                            rhs.add_term(b.word(&[d[k], dh[l]]), &(&qp(1) * v));
                        }
                    }
                }
                b.rule(&[dh[i], d[j]], rhs);
            }
        }
        // Λ x = q² x Λ, Λ ∂ = q⁻² ∂ Λ, Λ ∂̂ = q⁻² ∂̂ Λ, and the inverse
        for (l, sign) in [(lam, 1), (laminv, -1)] {
            for &g in &x {
                b.rule(&[l, g], b.mono(qp(2 * sign), &[g, l]));
            }
            for &g in d.iter().chain(&dh) {
                b.rule(&[l, g], b.mono(qp(-2 * sign), &[g, l]));
            }
        }
        b.rule(&[lam, laminv], Element::one());
        b.rule(&[laminv, lam], Element::one());
        b.inverse_pair(lam, laminv);

        // star(x^i) = Σ_j g_(ji) x^j, star(∂_m) = Σ_i M_(mi) ∂̂_i, star(∂̂_i) = Σ_m (M⁻¹)_(im) ∂_m,
        // star(Λ) = q^(−2N) Λ⁻¹
        let m = star_matrix(&metric, star)?;
        let minv = m.inverse().ok_or(SoqError::ValidationFailed {
            identity: "invertibility".into(),
            indices: "derivative star matrix".into(),
        })?;
        let image = |b: &PresentationBuilder<RatFunc>, mat: &Matrix<RatFunc>, row: usize, gens: &[GenId]| {
            let mut img = Element::zero();
            for c in 0..n {
                if !mat.get(row, c).is_zero() {
                    img.add_term(b.word(&[gens[c]]), mat.get(row, c));
                }
            }
            img
        };
        let gt = metric.g_lower.transpose();
        for a in 0..n {
            let images = [image(&b, &gt, a, &x), image(&b, &m, a, &dh), image(&b, &minv, a, &d)];
            let [ix, id, ih] = images;
            b.star(x[a], ix);
            b.star(d[a], id);
            b.star(dh[a], ih);
        }
        b.star(lam, b.mono(qp(-2 * n as i32), &[laminv]));
        b.star(laminv, b.mono(qp(2 * n as i32), &[lam]));
        let pres = b.build()?;
        Ok(Self { r, rinv, projectors, metric, star, pres, gens: Gens { x, d, dh, lam, laminv } })
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.pres = self.pres.with_step_limit(limit);
        self
    }

    pub fn presentation(&self) -> &Presentation<RatFunc> {
        &self.pres
    }

    pub fn n(&self) -> usize {
        self.r.n
    }

    pub fn labels(&self) -> &[i32] {
        &self.r.labels
    }

    fn gen(&self, g: GenId) -> Element<RatFunc> {
        Element::word(self.pres.word(&[g]))
    }

    pub fn x(&self, i: i32) -> Element<RatFunc> {
        self.gen(self.gens.x[self.r.pos(i)])
    }

    pub fn d(&self, i: i32) -> Element<RatFunc> {
        self.gen(self.gens.d[self.r.pos(i)])
    }

    pub fn dhat(&self, i: i32) -> Element<RatFunc> {
        self.gen(self.gens.dh[self.r.pos(i)])
    }

    pub fn lam(&self) -> Element<RatFunc> {
        self.gen(self.gens.lam)
    }

    pub fn laminv(&self) -> Element<RatFunc> {
        self.gen(self.gens.laminv)
    }

    fn nf(&self, e: &Element<RatFunc>) -> Result<Element<RatFunc>, SoqError> {
        Ok(self.pres.normal_form(e)?)
    }

    fn prefactor(&self) -> RatFunc {
        let n = self.n() as i32;
        (&RatFunc::one() + &qp(n - 2)).inv().expect("nonzero")
    }

    /// `L = (1 + q^(N−2))⁻¹ Σ g_(ij) x^i x^j`.
    pub fn casimir_x(&self) -> Element<RatFunc> {
        let mut e = Element::zero();
        for &i in self.labels() {
            for &j in self.labels() {
                let g = self.metric.lower(i, j);
                if !g.is_zero() {
                    e = e.add(&self.x(i).mul(&self.x(j)).scale(g));
                }
            }
        }
        e.scale(&self.prefactor())
    }

    /// `Δ = (1 + q^(N−2))⁻¹ Σ g^(ij) ∂_j ∂_i`, contracted in the same order as the derivative relations.
    pub fn laplacian(&self) -> Element<RatFunc> {
        let mut e = Element::zero();
        for &i in self.labels() {
            for &j in self.labels() {
                let g = self.metric.upper(i, j);
                if !g.is_zero() {
                    e = e.add(&self.d(j).mul(&self.d(i)).scale(g));
                }
            }
        }
        e.scale(&self.prefactor())
    }

    /// Lowered coordinate `x_k = Σ_j g_(kj) x^j`.
    pub fn x_lower(&self, k: i32) -> Element<RatFunc> {
        let mut e = Element::zero();
        for &j in self.labels() {
            let g = self.metric.lower(k, j);
            if !g.is_zero() {
                e = e.add(&self.x(j).scale(g));
            }
        }
        e
    }

    /// `∂_k + q^(N−1)(q − q⁻¹) x_k Δ`, the conjugate derivative with the dilation stripped.
    pub fn dilated_derivative(&self, k: i32) -> Element<RatFunc> {
        let n = self.n() as i32;
        let c = &qp(n - 1) * &(&qp(1) - &qp(-1));
        self.d(k).add(&self.x_lower(k).mul(&self.laplacian()).scale(&c))
    }

    /// `Λ⁻¹ (∂_k + q^(N−1)(q − q⁻¹) x_k Δ)`.
    pub fn conjugate_derivative(&self, k: i32) -> Element<RatFunc> {
        self.laminv().mul(&self.dilated_derivative(k))
    }

    /// `Y_k x^j − q Σ (R̂⁻¹)^(jm)_(kl) x^l Y_m` in normal form, with `Y` the dilated derivative.
    /// Multiplying the conjugation formula by `Λ` turns the action of `∂̂` into `Λ δ_kj`.
    pub fn dilation_defect(&self, k: i32, j: i32) -> Result<Element<RatFunc>, SoqError> {
        let n = self.n();
        let mut e = self.dilated_derivative(k).mul(&self.x(j));
        for &m in self.labels() {
            for &l in self.labels() {
                let v = self.rinv.get(self.r.pos(j) * n + self.r.pos(m), self.r.pos(k) * n + self.r.pos(l));
                if !v.is_zero() {
                    e = e.sub(&self.x(l).mul(&self.dilated_derivative(m)).scale(&(&qp(1) * v)));
                }
            }
        }
        self.nf(&e)
    }

    /// `Λ` written in coordinates and derivatives, read off the first diagonal dilation defect.
    pub fn dilation_element(&self) -> Result<Element<RatFunc>, SoqError> {
        let k = self.labels()[0];
        self.dilation_defect(k, k)
    }

    /// `D_i = ∂_i + q^(−N) ∂̂_i`.
    pub fn hermitian_derivative(&self, i: i32) -> Element<RatFunc> {
        self.d(i).add(&self.dhat(i).scale(&qp(-(self.n() as i32))))
    }

    /// `ν_i` with `star(D_i) = −ν_i D_(−i)`, read off the `∂_(−i)` coefficient.
    pub fn star_ratio(&self, i: i32) -> Result<RatFunc, SoqError> {
        let img = self.pres.apply_star(&self.hermitian_derivative(i))?;
        Ok(-&img.coeff(&self.pres.word(&[self.gens.d[self.r.pos(-i)]])))
    }

    /// `τ_i D_i` with `τ_i = 1` for `i ≥ 0` and `τ_i = g_(i,−i) ν_(−i)` for `i < 0`, so that
    /// `star(τ_(−i) D_(−i)) = −g_(−i,i) τ_i D_i`.
    pub fn rescaled_derivative(&self, i: i32) -> Result<Element<RatFunc>, SoqError> {
        let d = self.hermitian_derivative(i);
        if i >= 0 {
            return Ok(d);
        }
        let tau = self.metric.lower(i, -i) * &self.star_ratio(-i)?;
        Ok(d.scale(&tau))
    }

    /// Diagonal exponent `k(i)`: 2 when `R̂^(ii)_(ii) = q`, 1 when it is 1.
    pub fn diagonal_exponent(&self, i: i32) -> i32 {
        if *self.r.entry(i, i, i, i) == qp(1) {
            2
        } else {
            1
        }
    }

    /// `(r_i, r̃_i) = (D_i x^i − q^k x^i D_i, D_i x^i − q^(−k) x^i D_i)` in normal form.
    pub fn r_pair(&self, dd: &Element<RatFunc>, i: i32) -> Result<(Element<RatFunc>, Element<RatFunc>), SoqError> {
        let k = self.diagonal_exponent(i);
        let x = self.x(i);
        let r = self.nf(&dd.mul(&x).sub(&x.mul(dd).scale(&qp(k))))?;
        let rt = self.nf(&dd.mul(&x).sub(&x.mul(dd).scale(&qp(-k))))?;
        Ok((r, rt))
    }
}

/// `M` with `star(∂_m) = Σ_i M_(mi) ∂̂_i`, inverting `∂̂_i = −q^N Σ_m A_(im) star(∂_m)`.
pub fn star_matrix(metric: &Metric, variant: StarVariant) -> Result<Matrix<RatFunc>, SoqError> {
    let n = metric.labels.len();
    let gu = &metric.g_upper;
    let contraction = match variant {
        StarVariant::Printed => metric.g_lower.mul(gu),
        StarVariant::Consistent => metric.g_lower.mul(&gu.transpose()),
    };
    let a = contraction.mul(gu);
    let inv = a.inverse().ok_or(SoqError::ValidationFailed {
        identity: "invertibility".into(),
        indices: format!("metric contraction ({n}x{n})"),
    })?;
    Ok(inv.scale(&-&qp(-(n as i32))))
}

fn zero_check(so: &DiffSo, name: String, asserted: bool, e: &Element<RatFunc>) -> Result<Check, SoqError> {
    let res = so.nf(e)?;
    let detail = (!res.is_zero()).then(|| format!("residual {}", so.pres.render(&res)));
    Ok(Check::new(name, asserted, res.is_zero(), detail))
}

/// Checks on the R̂-matrix, projectors and metric.
pub fn structure_report(r: &RMatrix, gauge: Gauge) -> Result<SoqReport, SoqError> {
    let mut items = r.validate()?.checks;
    let ps = spectral_projectors(r)?;
    items.extend(ps.checks(r));
    let metric = extract_metric(&ps.zero, &r.labels, gauge)?;
    items.extend(metric.checks(&ps.zero, r));
    Ok(SoqReport { suite: "soq-structure".into(), items, definitions: Vec::new() })
}

/// Centrality of `L` in the coordinate sector and of `Δ` in the derivative sector.
pub fn centrality_checks(so: &DiffSo) -> Result<Vec<Check>, SoqError> {
    let l = so.casimir_x();
    let delta = so.laplacian();
    let mut items = Vec::new();
    for &k in so.labels() {
        items.push(zero_check(so, format!("[L, x_{}] = 0", index_suffix(k)), false, &l.commutator(&so.x(k)))?);
    }
    for &k in so.labels() {
        items.push(zero_check(so, format!("[Delta, d_{}] = 0", index_suffix(k)), false, &delta.commutator(&so.d(k)))?);
    }
    items.push(zero_check(so, "[L, L] = 0".into(), false, &l.commutator(&l))?);
    Ok(items)
}

/// The conjugation formula reproduces the action of `∂̂`: every dilation defect is `Λ δ_kj` for one
/// element `Λ` of the coordinate-derivative algebra, and that element obeys the dilation rules.
pub fn qconjr_checks(so: &DiffSo) -> Result<Vec<Check>, SoqError> {
    let lam = so.dilation_element()?;
    let labels = so.labels().to_vec();
    let jobs: Vec<(i32, i32)> = labels.iter().flat_map(|&k| labels.iter().map(move |&j| (k, j))).collect();
    let mut items: Vec<Check> = jobs
        .par_iter()
        .map(|&(k, j)| {
            let defect = so.dilation_defect(k, j)?;
            let e = if k == j { defect.sub(&lam) } else { defect };
            zero_check(
                so,
                format!("conj(d_{}) x_{} = delta + q^-1 Rinv x conj(d)", index_suffix(k), index_suffix(j)),
                false,
                &e,
            )
        })
        .collect::<Result<_, _>>()?;
    for &k in &labels {
        let e = lam.mul(&so.x(k)).sub(&so.x(k).mul(&lam).scale(&qp(2)));
        items.push(zero_check(so, format!("Lam x_{} = q^2 x_{} Lam", index_suffix(k), index_suffix(k)), false, &e)?);
    }
    for &k in &labels {
        let e = lam.mul(&so.d(k)).sub(&so.d(k).mul(&lam).scale(&qp(-2)));
        items.push(zero_check(so, format!("Lam d_{} = q^-2 d_{} Lam", index_suffix(k), index_suffix(k)), false, &e)?);
    }
    Ok(items)
}

/// `star(D_i) = −D_(−i)` as displayed, and the proportionality `star(D_i) = −ν_i D_(−i)`.
pub fn star_d_checks(so: &DiffSo) -> Result<Vec<Check>, SoqError> {
    let mut items = Vec::new();
    for &i in so.labels() {
        let lhs = so.pres.apply_star(&so.hermitian_derivative(i))?;
        let e = lhs.add(&so.hermitian_derivative(-i));
        items.push(zero_check(so, format!("star(D_{}) = -D_{}", index_suffix(i), index_suffix(-i)), true, &e)?);
    }
    for &i in so.labels() {
        let nu = so.star_ratio(i)?;
        let lhs = so.pres.apply_star(&so.hermitian_derivative(i))?;
        let e = lhs.add(&so.hermitian_derivative(-i).scale(&nu));
        let mut c = zero_check(so, format!("star(D_{}) = -nu D_{}", index_suffix(i), index_suffix(-i)), false, &e)?;
        if c.pass {
            c.detail = Some(format!("nu = {nu}"));
        }
        items.push(c);
    }
    Ok(items)
}

/// `Σ_(ij) P⁻^(ij)_(kl) D_j D_i = 0` for every `(k, l)`.
pub fn antisymmetry_checks(so: &DiffSo) -> Result<Vec<Check>, SoqError> {
    let n = so.n();
    let labels = so.labels().to_vec();
    let ds: Vec<Element<RatFunc>> = labels.iter().map(|&i| so.hermitian_derivative(i)).collect();
    let mut items = Vec::new();
    for (a, &k) in labels.iter().enumerate() {
        for (c, &l) in labels.iter().enumerate() {
            let mut e = Element::zero();
            for i in 0..n {
                for j in 0..n {
                    let p = so.projectors.minus.get(i * n + j, a * n + c);
                    if !p.is_zero() {
                        e = e.add(&ds[j].mul(&ds[i]).scale(p));
                    }
                }
            }
            items.push(zero_check(so, format!("sum P-^(ij)_({k},{l}) D_j D_i = 0"), true, &e)?);
        }
    }
    Ok(items)
}

/// `q^(−k) star(r_(−i)) = r̃_i` with `k = 2`, or `k = 1` on the diagonal exception.
pub fn r1_checks(
    so: &DiffSo,
    derivative: impl Fn(i32) -> Result<Element<RatFunc>, SoqError>,
    label: &str,
    asserted: bool,
) -> Result<(Vec<Check>, BTreeMap<i32, (Element<RatFunc>, Element<RatFunc>)>), SoqError> {
    let mut pairs = BTreeMap::new();
    for &i in so.labels() {
        pairs.insert(i, so.r_pair(&derivative(i)?, i)?);
    }
    let mut items = Vec::new();
    for &i in so.labels() {
        let k = so.diagonal_exponent(-i);
        let lhs = so.pres.apply_star(&pairs[&-i].0)?.scale(&qp(-k));
        let e = lhs.sub(&pairs[&i].1);
        let name = format!("q^-{k} star(r_{}) = rt_{} for {label}", index_suffix(-i), index_suffix(i));
        let mut check = zero_check(so, name, asserted && k == 2, &e)?;
        if k != 2 && check.detail.is_none() {
            check.detail = Some(format!("interpretation: exponent q^-{k} on the diagonal exception"));
        }
        items.push(check);
    }
    Ok((items, pairs))
}

/// The full structural and differential suite for one R̂-matrix.
pub fn verify_soq(r: &RMatrix) -> Result<SoqReport, SoqError> {
    verify_soq_limited(r, DEFAULT_STEP_LIMIT)
}

/// [`verify_soq`] with a bound on rewrite steps per normal form.
pub fn verify_soq_limited(r: &RMatrix, step_limit: usize) -> Result<SoqReport, SoqError> {
    let mut items = structure_report(r, Gauge::Involutive)?.items;
    let so = DiffSo::build(r.clone(), Gauge::Involutive, StarVariant::Consistent)?.with_step_limit(step_limit);
    let xsector = so.presentation().overlap_check(4)?;
    let ambiguous = xsector.iter().filter(|a| a.word.letters().iter().all(|g| so.gens.x.contains(g))).count();
    items.push(Check::new(
        "coordinate relations confluent to length 4",
        false,
        ambiguous == 0,
        (ambiguous > 0).then(|| format!("{ambiguous} unresolved ambiguities")),
    ));
    let full = so.presentation().overlap_check(3)?.len();
    items.push(Check::new(
        "full algebra confluent to length 3",
        false,
        full == 0,
        (full > 0).then(|| format!("{full} unresolved ambiguities")),
    ));
    items.extend(centrality_checks(&so)?);
    items.extend(qconjr_checks(&so)?);
    for variant in [StarVariant::Printed, StarVariant::Consistent] {
        let built;
        let s = if variant == StarVariant::Consistent {
            &so
        } else {
            built = DiffSo::build(r.clone(), Gauge::Involutive, variant)?.with_step_limit(step_limit);
            &built
        };
        let bad: Vec<String> =
            s.presentation().check_star()?.into_iter().filter(|c| !c.pass).map(|c| c.relation).collect();
        items.push(Check::new(
            format!("star is an involutive antihomomorphism ({variant:?} contraction)"),
            variant == StarVariant::Consistent,
            bad.is_empty(),
            bad.first().map(|b| format!("{} failing, first {b}", bad.len())),
        ));
    }
    items.extend(star_d_checks(&so)?);
    items.extend(antisymmetry_checks(&so)?);
    items.extend(r1_checks(&so, |i| Ok(so.hermitian_derivative(i)), "D", true)?.0);
    let (checks, pairs) = r1_checks(&so, |i| so.rescaled_derivative(i), "tau D", false)?;
    items.extend(checks);
    let definitions = pairs.iter().map(|(&i, (r, rt))| DeformingMap::new(&so, i, r, rt)).collect();
    Ok(SoqReport { suite: "soq".into(), items, definitions })
}
