//! Constructors for the algebra presentations and named morphisms.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::coeff::Scalar;
use crate::freealg::{AlgebraError, GenId, Morphism, Presentation, PresentationBuilder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown algebra {0}")]
    UnknownKey(String),
    #[error("bad parameter {0}")]
    BadParam(String),
    #[error("k({alpha}) = {k} but k({neg}) = {kneg}; need k(a) = -k(-a)", neg = -alpha)]
    BadK { alpha: i32, k: i32, kneg: i32 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

type Pres = Presentation<Scalar>;
type Builder = PresentationBuilder<Scalar>;

fn q() -> Scalar {
    Scalar::q()
}

fn qp(k: i32) -> Scalar {
    Scalar::q_pow(k)
}

fn i() -> Scalar {
    Scalar::i()
}

fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

/// `q^k − q^(−k)`.
fn qdiff_const(k: i32) -> Scalar {
    qp(k) - qp(-k)
}

/// Weyl algebra of `n` degrees of freedom: `p_j x_i = x_i p_j − i δ_ij`, all else commuting.
pub fn heisenberg(n: usize) -> Result<Pres, CatalogError> {
    if n == 0 {
        return Err(CatalogError::BadParam("n must be at least 1".into()));
    }
    let mut b = Builder::new(format!("heisenberg:n={n}"));
    let xs: Vec<GenId> = (1..=n).map(|k| b.generator(&format!("x{k}"), 1)).collect();
    let ps: Vec<GenId> = (1..=n).map(|k| b.generator(&format!("p{k}"), 1)).collect();
    for (a, &pa) in ps.iter().enumerate() {
        for (c, &xc) in xs.iter().enumerate() {
            let mut rhs = b.mono(Scalar::one(), &[xc, pa]);
            if a == c {
                rhs = rhs.sub(&b.mono(i(), &[]));
            }
            b.rule(&[pa, xc], rhs);
        }
    }
    for group in [&xs, &ps] {
        for (hi, &g) in group.iter().enumerate() {
            for &h in &group[..hi] {
                let rhs = b.mono(Scalar::one(), &[h, g]);
                b.rule(&[g, h], rhs);
            }
        }
    }
    for &g in xs.iter().chain(&ps) {
        let img = b.gen_elem(g);
        b.star(g, img);
    }
    Ok(b.build()?)
}

/// Undeformed oscillator with number operator `N = A† A`.
pub fn oscillator_classical() -> Result<Pres, CatalogError> {
    let mut b = Builder::new("oscillator");
    let a = b.generator("A", 1);
    let ad = b.generator("Ad", 1);
    let n = b.generator("N", 1);
    let one = b.mono(Scalar::one(), &[]);
    b.rule(&[a, ad], b.gen_elem(n).add(&one));
    b.rule(&[ad, a], b.gen_elem(n));
    b.rule(&[n, a], b.mono(Scalar::one(), &[a, n]).sub(&b.gen_elem(a)));
    b.rule(&[n, ad], b.mono(Scalar::one(), &[ad, n]).add(&b.gen_elem(ad)));
    b.star(a, b.gen_elem(ad));
    b.star(ad, b.gen_elem(a));
    b.star(n, b.gen_elem(n));
    Ok(b.build()?)
}

/// `a a† − q a† a = 1`.
pub fn q_oscillator() -> Result<Pres, CatalogError> {
    let mut b = Builder::new("qoscillator");
    let ad = b.generator("ad", 1);
    let a = b.generator("a", 1);
    let rhs = b.mono(q(), &[ad, a]).add(&b.mono(Scalar::one(), &[]));
    b.rule(&[a, ad], rhs);
    b.star(a, b.gen_elem(ad));
    b.star(ad, b.gen_elem(a));
    Ok(b.build()?)
}

/// The successive stages of the q-deformed Heisenberg algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum QHeisStage {
    /// `p x − q x p = −i`.
    Basic,
    /// Adds the conjugate position `xb`.
    Conjugated,
    /// Adds `r = i[p, x]` and `rb = i[p, xb]` as generators eliminated by their definitions.
    WithR,
    /// `p`, `x` and `r` only, with `r` kept as an independent generator.
    WithRDefined,
    /// Adds the real position `xit = x + xb`.
    TildeXi,
    /// The final algebra with the u–p relation exactly as printed.
    FinalPrinted,
    /// The final algebra with `u p = q p u`.
    FinalCorrected,
}

impl QHeisStage {
    pub const ALL: [QHeisStage; 7] = [
        QHeisStage::Basic,
        QHeisStage::Conjugated,
        QHeisStage::WithR,
        QHeisStage::WithRDefined,
        QHeisStage::TildeXi,
        QHeisStage::FinalPrinted,
        QHeisStage::FinalCorrected,
    ];

    pub fn key(self) -> &'static str {
        match self {
            QHeisStage::Basic => "qheis1",
            QHeisStage::Conjugated => "qheis3",
            QHeisStage::WithR => "qheis-r",
            QHeisStage::WithRDefined => "qheis-r:form=defined",
            QHeisStage::TildeXi => "qheis4",
            QHeisStage::FinalPrinted => "qheis5:variant=printed",
            QHeisStage::FinalCorrected => "qheis5:variant=corrected",
        }
    }
}

/// Adds `p x → q x p − i` and, when `xb` is present, its conjugate relations.
fn qheis_base(b: &mut Builder, with_conjugate: bool) -> (GenId, Option<GenId>, GenId) {
    let xb = with_conjugate.then(|| b.generator("xb", 1));
    let x = b.generator("x", 1);
    let p = b.generator("p", 1);
    let rhs = b.mono(q(), &[x, p]).sub(&b.mono(i(), &[]));
    b.rule(&[p, x], rhs);
    if let Some(xb) = xb {
        let rhs = b.mono(qp(-1), &[xb, p]).sub(&b.mono(&i() * &qp(-1), &[]));
        b.rule(&[p, xb], rhs);
        let rhs = b.mono(q(), &[xb, x]);
        b.rule(&[x, xb], rhs);
        b.star(p, b.gen_elem(p));
        b.star(x, b.gen_elem(xb));
        b.star(xb, b.gen_elem(x));
    }
    (x, xb, p)
}

pub fn q_heisenberg(stage: QHeisStage) -> Result<Pres, CatalogError> {
    match stage {
        QHeisStage::Basic => {
            let mut b = Builder::new(stage.key());
            qheis_base(&mut b, false);
            Ok(b.build()?)
        }
        QHeisStage::Conjugated => {
            let mut b = Builder::new(stage.key());
            qheis_base(&mut b, true);
            Ok(b.build()?)
        }
        QHeisStage::WithR | QHeisStage::TildeXi => {
            let mut b = Builder::new(stage.key());
            let (x, xb, p) = qheis_base(&mut b, true);
            let xb = xb.expect("conjugate generator present");
            let r = b.generator("r", 3);
            let rb = b.generator("rb", 3);
            // r = i(px − xp) = i(q − 1) x p + 1
            let rhs = b.mono(&i() * &(q() - int(1)), &[x, p]).add(&b.mono(Scalar::one(), &[]));
            b.rule(&[r], rhs);
            // rb = i(p xb − xb p) = i(q⁻¹ − 1) xb p + q⁻¹
            let rhs = b.mono(&i() * &(qp(-1) - int(1)), &[xb, p]).add(&b.mono(qp(-1), &[]));
            b.rule(&[rb], rhs);
            b.star(r, b.gen_elem(rb));
            b.star(rb, b.gen_elem(r));
            if stage == QHeisStage::TildeXi {
                let xit = b.generator("xit", 1);
                let rhs = b.gen_elem(x).add(&b.gen_elem(xb));
                b.rule(&[xit], rhs);
                b.star(xit, b.gen_elem(xit));
            }
            Ok(b.build()?)
        }
        QHeisStage::WithRDefined => {
            let mut b = Builder::new(stage.key());
            let x = b.generator("x", 1);
            let r = b.generator("r", 1);
            let p = b.generator("p", 1);
            // p x − x p = −i r, together with the q-commutation of r with x and p
            let rhs = b.mono(Scalar::one(), &[x, p]).sub(&b.mono(i(), &[r]));
            b.rule(&[p, x], rhs);
            b.rule(&[r, x], b.mono(q(), &[x, r]));
            b.rule(&[p, r], b.mono(q(), &[r, p]));
            Ok(b.build()?)
        }
        QHeisStage::FinalPrinted => qheis5(false),
        QHeisStage::FinalCorrected => qheis5(true),
    }
}

/// Generators ordered `p < u < xi < uinv`; `uinv` is eliminated through the difference
/// of the two `xi p` relations, which keeps every coefficient a Laurent polynomial.
fn qheis5(corrected: bool) -> Result<Pres, CatalogError> {
    let key = if corrected { QHeisStage::FinalCorrected } else { QHeisStage::FinalPrinted }.key();
    let mut b = Builder::new(key);
    let p = b.generator("p", 1);
    let u = b.generator("u", 2);
    let xi = b.generator("xi", 1);
    let uinv = b.generator("uinv", 3);
    let up = if corrected { q() } else { qp(-1) };
    // xi p − q⁻¹ p xi = i u
    let rhs = b.mono(qp(-1), &[p, xi]).add(&b.mono(i(), &[u]));
    b.rule(&[xi, p], rhs);
    // u xi = q⁻¹ xi u
    b.rule(&[xi, u], b.mono(q(), &[u, xi]));
    b.rule(&[u, p], b.mono(up.clone(), &[p, u]));
    // u u⁻¹ = 1 with u⁻¹ = u + i(q − q⁻¹) p xi
    let c = &i() * &qdiff_const(1);
    let rhs = b.mono(Scalar::one(), &[]).sub(&b.mono(&c * &up, &[p, u, xi]));
    b.rule(&[u, u], rhs);
    let rhs = b.gen_elem(u).add(&b.mono(c, &[p, xi]));
    b.rule(&[uinv], rhs);
    b.star(p, b.gen_elem(p));
    b.star(xi, b.gen_elem(xi));
    b.star(u, b.mono(qp(-1), &[uinv]));
    b.star(uinv, b.mono(q(), &[u]));
    b.inverse_pair(u, uinv);
    Ok(b.build()?)
}

/// Name suffix for a lightcone index: `m1` for −1, `0`, `1`.
pub fn index_suffix(alpha: i32) -> String {
    if alpha < 0 {
        format!("m{}", -alpha)
    } else {
        alpha.to_string()
    }
}

/// Lightcone index set: `{−n..n}` for odd `dim = 2n+1`, `{−n..−1, 1..n}` for even `dim = 2n`.
pub fn lightcone_indices(dim: usize) -> Vec<i32> {
    let n = (dim / 2) as i32;
    if dim % 2 == 1 {
        (-n..=n).collect()
    } else {
        (-n..=n).filter(|&a| a != 0).collect()
    }
}

/// Tensor product of one-variable q-difference algebras, one block per index.
///
/// In each block `D x = q^(−|k|) x D + u^|k|`, `u x = q x u`, `u D = q⁻¹ D u`, and the
/// identity `x D = (u^|k| − u^(−|k|))/(q^|k| − q^(−|k|))` is used to eliminate `u⁻¹`.
/// Generators of different blocks commute.
pub fn qdiff_presentation(indices: &[i32], k: &BTreeMap<i32, i32>) -> Result<Pres, CatalogError> {
    for &alpha in indices {
        let ka = *k.get(&alpha).ok_or_else(|| CatalogError::BadParam(format!("no k for index {alpha}")))?;
        if ka == 0 {
            return Err(CatalogError::BadParam(format!("k({alpha}) must be nonzero")));
        }
        if alpha != 0 && indices.contains(&-alpha) {
            let kneg = k[&-alpha];
            if kneg != -ka {
                return Err(CatalogError::BadK { alpha, k: ka, kneg });
            }
        }
    }
    let name = format!(
        "qdiff:{}",
        indices.iter().map(|a| format!("{}={}", index_suffix(*a), k[a])).collect::<Vec<_>>().join(",")
    );
    let mut b = Builder::new(name);
    let mut blocks: Vec<(i32, [GenId; 4])> = Vec::new();
    for &alpha in indices {
        let kk = k[&alpha].unsigned_abs();
        let sfx = index_suffix(alpha);
        let x = b.generator(&format!("x_{sfx}"), kk);
        let u = b.generator(&format!("u_{sfx}"), 2);
        let d = b.generator(&format!("D_{sfx}"), kk);
        let uinv = b.generator(&format!("uinv_{sfx}"), 2 * (2 * kk - 1) + 1);
        blocks.push((alpha, [x, u, d, uinv]));
        let kk = kk as i32;
        let c = qdiff_const(kk);
        let upow = |n: i32| vec![u; n as usize];
        // D x = q^(−k) x D + u^k
        let rhs = b.mono(qp(-kk), &[x, d]).add(&b.mono(Scalar::one(), &upow(kk)));
        b.rule(&[d, x], rhs);
        b.rule(&[u, x], b.mono(q(), &[x, u]));
        b.rule(&[d, u], b.mono(q(), &[u, d]));
        // u^(2k) = 1 + c q^k x u^k D
        let mut w = vec![x];
        w.extend(upow(kk));
        w.push(d);
        let rhs = b.mono(Scalar::one(), &[]).add(&b.mono(&c * &qp(kk), &w));
        b.rule(&upow(2 * kk), rhs);
        // u⁻¹ = u^(2k−1) − c q^(k−1) x u^(k−1) D
        let mut w = vec![x];
        w.extend(upow(kk - 1));
        w.push(d);
        let rhs = b.mono(Scalar::one(), &upow(2 * kk - 1)).sub(&b.mono(&c * &qp(kk - 1), &w));
        b.rule(&[uinv], rhs);
        b.inverse_pair(u, uinv);
    }
    for (bi, (_, hi)) in blocks.iter().enumerate() {
        for (_, lo) in &blocks[..bi] {
            for &g in hi.iter().take(3) {
                for &h in lo.iter().take(3) {
                    let rhs = b.mono(Scalar::one(), &[h, g]);
                    b.rule(&[g, h], rhs);
                }
            }
        }
    }
    let find = |alpha: i32| blocks.iter().find(|(a, _)| *a == alpha).map(|(_, g)| *g);
    if indices.iter().all(|a| find(-a).is_some()) {
        for &(alpha, [x, u, d, uinv]) in &blocks {
            let [xn, un, dn, uinvn] = find(-alpha).expect("index set is symmetric");
            b.star(x, b.gen_elem(xn));
            b.star(d, b.mono(int(-1), &[dn]));
            b.star(u, b.mono(qp(-1), &[uinvn]));
            b.star(uinv, b.mono(q(), &[un]));
        }
    }
    Ok(b.build()?)
}

/// `k(α) = k` for `α ≥ 0` and `−k` for `α < 0` on the lightcone index set of `dim`.
pub fn qdiff_uniform(dim: usize, k: i32) -> Result<Pres, CatalogError> {
    let indices = lightcone_indices(dim);
    let kmap = indices.iter().map(|&a| (a, if a < 0 { -k } else { k })).collect();
    qdiff_presentation(&indices, &kmap)
}

/// Coordinates `xq_m1, xq_0, xq_1` of the almost commutative space. The corrected form has
/// `xq_0 xq_m1 = q xq_m1 xq_0`; the printed form has `xq_m1 xq_0 = q xq_0 xq_m1`.
pub fn almost_commutative(printed: bool) -> Result<Pres, CatalogError> {
    let name = if printed { "commutrel:variant=printed" } else { "commutrel:variant=corrected" };
    let mut b = Builder::new(name);
    let xm = b.generator("xq_m1", 1);
    let x0 = b.generator("xq_0", 1);
    let x1 = b.generator("xq_1", 1);
    let c01 = if printed { qp(-1) } else { q() };
    b.rule(&[x0, xm], b.mono(c01, &[xm, x0]));
    b.rule(&[x1, x0], b.mono(q(), &[x0, x1]));
    b.rule(&[x1, xm], b.mono(Scalar::one(), &[xm, x1]));
    b.star(xm, b.gen_elem(x1));
    b.star(x1, b.gen_elem(xm));
    b.star(x0, b.gen_elem(x0));
    Ok(b.build()?)
}

/// Replace `q` by 1 in every coefficient.
pub fn specialize_q1(p: &Pres) -> Result<Pres, CatalogError> {
    Ok(p.map_coeffs(&format!("{}@q=1", p.name()), |c| Scalar::constant(c.at_q_one()))?)
}

/// Algebra key such as `heisenberg:n=2` or `qheis5:variant=corrected`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CatalogKey {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl FromStr for CatalogKey {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, CatalogError> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, r),
            None => (s, ""),
        };
        let mut params = BTreeMap::new();
        for kv in rest.split(',').filter(|t| !t.is_empty()) {
            let (k, v) =
                kv.split_once('=').ok_or_else(|| CatalogError::BadParam(format!("expected key=value, got {kv}")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { name: name.trim().to_string(), params })
    }
}

impl fmt::Display for CatalogKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (n, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if n == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl CatalogKey {
    fn int_param(&self, key: &str, default: i64) -> Result<i64, CatalogError> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CatalogError::BadParam(format!("{key}={v}"))),
        }
    }

    fn choice(&self, key: &str, options: &[&str]) -> Result<usize, CatalogError> {
        match self.params.get(key) {
            None => Ok(0),
            Some(v) => options.iter().position(|o| o == v).ok_or_else(|| CatalogError::BadParam(format!("{key}={v}"))),
        }
    }

    fn check_params(&self, allowed: &[&str]) -> Result<(), CatalogError> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CatalogError::BadParam(format!("{k} is not a parameter of {}", self.name))),
            None => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Pres, CatalogError> {
        match self.name.as_str() {
            "heisenberg" => {
                self.check_params(&["n"])?;
                let n = self.int_param("n", 1)?;
                heisenberg(usize::try_from(n).map_err(|_| CatalogError::BadParam(format!("n={n}")))?)
            }
            "oscillator" => {
                self.check_params(&[])?;
                oscillator_classical()
            }
            "qoscillator" => {
                self.check_params(&[])?;
                q_oscillator()
            }
            "qheis1" => {
                self.check_params(&[])?;
                q_heisenberg(QHeisStage::Basic)
            }
            "qheis3" => {
                self.check_params(&[])?;
                q_heisenberg(QHeisStage::Conjugated)
            }
            "qheis-r" => {
                self.check_params(&["form"])?;
                match self.choice("form", &["eliminated", "defined"])? {
                    0 => q_heisenberg(QHeisStage::WithR),
                    _ => q_heisenberg(QHeisStage::WithRDefined),
                }
            }
            "qheis4" => {
                self.check_params(&[])?;
                q_heisenberg(QHeisStage::TildeXi)
            }
            "qheis5" => {
                self.check_params(&["variant"])?;
                match self.choice("variant", &["corrected", "printed"])? {
                    0 => q_heisenberg(QHeisStage::FinalCorrected),
                    _ => q_heisenberg(QHeisStage::FinalPrinted),
                }
            }
            "qdiff" => {
                self.check_params(&["dim", "k"])?;
                let dim = self.int_param("dim", 1)?;
                let k = self.int_param("k", 1)?;
                if !(1..=9).contains(&dim) {
                    return Err(CatalogError::BadParam(format!("dim={dim}")));
                }
                let k = i32::try_from(k).map_err(|_| CatalogError::BadParam(format!("k={k}")))?;
                qdiff_uniform(dim as usize, k)
            }
            "commutrel" => {
                self.check_params(&["variant"])?;
                almost_commutative(self.choice("variant", &["corrected", "printed"])? == 1)
            }
            other => Err(CatalogError::UnknownKey(other.to_string())),
        }
    }
}

/// Parse and build an algebra key in one step.
pub fn presentation(key: &str) -> Result<Pres, CatalogError> {
    key.parse::<CatalogKey>()?.build()
}

/// Keys of every shipped presentation that is expected to be confluent.
pub fn confluent_keys() -> Vec<String> {
    let mut keys: Vec<String> = (1..=3).map(|n| format!("heisenberg:n={n}")).collect();
    keys.extend(
        ["oscillator", "qoscillator", "qheis1", "qheis3", "qheis-r", "qheis-r:form=defined", "qheis4"]
            .iter()
            .map(|s| s.to_string()),
    );
    keys.push("qheis5:variant=corrected".into());
    for k in [1, -1, 2, -2] {
        keys.push(format!("qdiff:dim=1,k={k}"));
        keys.push(format!("qdiff:dim=3,k={k}"));
    }
    keys.push("commutrel:variant=corrected".into());
    keys.push("commutrel:variant=printed".into());
    keys
}

/// The morphisms used by the verification suites.
#[derive(Debug, Clone)]
pub enum NamedMorphism {
    /// An algebra map between two catalog presentations.
    Symbolic(Morphism<Scalar>),
    /// Realization of the final algebra inside truncated h-series over the Weyl algebra.
    SeriesRealization { name: String, default_order: usize },
    /// Numeric oscillator map built from diagonal functions of the number operator.
    OscillatorMap { name: String, rescale: bool },
}

impl NamedMorphism {
    pub fn name(&self) -> &str {
        match self {
            NamedMorphism::Symbolic(m) => m.name(),
            NamedMorphism::SeriesRealization { name, .. } | NamedMorphism::OscillatorMap { name, .. } => name,
        }
    }
}

/// The coordinate transform `xq_0 = u_m1 uinv_1 x_0` into the three-variable difference calculus.
pub fn remark1_morphism(printed: bool) -> Result<Morphism<Scalar>, CatalogError> {
    let source = almost_commutative(printed)?;
    let target = qdiff_uniform(3, 1)?;
    let images = vec![
        ("xq_m1", target.gen("x_m1")),
        ("xq_0", target.mono(Scalar::one(), &["u_m1", "uinv_1", "x_0"])),
        ("xq_1", target.gen("x_1")),
    ];
    let name = if printed { "remark1:printed" } else { "remark1" };
    Ok(Morphism::new(name, source, target, images)?)
}

/// The classical map `a ↦ A`, `ad ↦ Ad`, which is not a deforming map.
pub fn naive_oscillator_morphism() -> Result<Morphism<Scalar>, CatalogError> {
    let target = oscillator_classical()?;
    let images = vec![("a", target.gen("A")), ("ad", target.gen("Ad"))];
    Ok(Morphism::new("naive-oscillator", q_oscillator()?, target, images)?)
}

pub fn named_morphisms() -> Result<Vec<NamedMorphism>, CatalogError> {
    Ok(vec![
        NamedMorphism::Symbolic(remark1_morphism(false)?),
        NamedMorphism::Symbolic(remark1_morphism(true)?),
        NamedMorphism::Symbolic(naive_oscillator_morphism()?),
        NamedMorphism::SeriesRealization { name: "ureal".into(), default_order: 6 },
        NamedMorphism::OscillatorMap { name: "osc2".into(), rescale: true },
    ])
}
