use std::path::Path;

use qweyl_core::catalog::{self, confluent_keys};
use qweyl_core::coeff::{RatFunc, Scalar};
use qweyl_core::fock::{self, MatrixRep, RepCheck, RepMatrices};
use qweyl_core::freealg::{Ambiguity, Element, Presentation};
use qweyl_core::qdiff::{
    classical_limit, remark1_transform, remark3_unsymmetric, verify_diffdef, verify_involution, OperatorAlphabet,
    QdiffReport,
};
use qweyl_core::soq::{structure_report, verify_soq_limited, Gauge, RMatrix, SoqError};
use qweyl_core::weyl::{self, build_xi, inner_derivation_solve, DerivationSpec, LocalWeylElement, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Item, Report};
use crate::CliError;

/// Absolute bound for the rescaled oscillator residual.
pub const OSC_TOLERANCE: f64 = 1e-9;
/// Agreement between the unrescaled residual and `|q^(1/4) − 1|`.
pub const OSC_ORACLE_TOLERANCE: f64 = 1e-12;

pub fn algebra(key: &str, step_limit: usize) -> Result<Presentation<Scalar>, CliError> {
    Ok(catalog::presentation(key)?.with_step_limit(step_limit))
}

fn ambiguity_text(p: &Presentation<Scalar>, a: &Ambiguity<Scalar>) -> String {
    format!(
        "{}: rules {} and {} give {} vs {}",
        p.render_word(&a.word),
        a.rules.0,
        a.rules.1,
        p.render(&a.left),
        p.render(&a.right)
    )
}

pub fn confluence(key: &str, maxlen: usize, step_limit: usize, verb: &str) -> Result<Report, CliError> {
    let suite = (verb == "verify").then_some("confluence");
    let mut report = Report::new(verb, suite).input("algebra", key).input("maxlen", maxlen);
    let keys = if key == "all" { confluent_keys() } else { vec![key.to_string()] };
    for k in keys {
        let p = algebra(&k, step_limit)?;
        let amb = p.overlap_check(maxlen)?;
        let residual = match amb.first() {
            None => format!("{} critical pairs resolve", p.critical_pair_count(maxlen)),
            Some(a) => format!("{} unresolved, first {}", amb.len(), ambiguity_text(&p, a)),
        };
        report.notes.extend(amb.iter().map(|a| format!("{k} {}", ambiguity_text(&p, a))));
        report.push(Item::new(k, amb.is_empty(), residual));
    }
    Ok(report)
}

pub fn qheis5_realization(order: usize, variant: Variant) -> Result<Report, CliError> {
    let mut report =
        Report::new("verify", Some("qheis5-realization")).input("order", order).input("variant", variant.as_str());
    for r in weyl::verify_qheis5_realization(order, variant)? {
        let residual = match r.leading_order {
            Some(k) => format!("{} (leading order h^{k})", r.residual),
            None => r.residual,
        };
        report.push(Item::new(r.relation, r.pass, residual));
    }
    let xi0 = build_xi(order)?.order_part(0);
    let x0 = LocalWeylElement::x(order).order_part(0);
    let residual = if xi0 == x0 { "0".to_string() } else { format!("order-0 part {xi0:?}") };
    report.push(Item::new("xi = x mod h", xi0 == x0, residual));
    Ok(report)
}

pub fn osc_map(dim: usize, q: f64) -> Result<Report, CliError> {
    let r = fock::deforming_map_check(dim, q)?;
    let mut report = Report::new("verify", Some("osc-map")).input("dim", dim).input("q", q);
    report.push(Item::new(
        "a ad - q ad a = 1 with the q^(-1/8) rescale",
        r.max_residual < OSC_TOLERANCE,
        format!("{:.3e}", r.max_residual),
    ));
    let gap = (r.max_residual_unrescaled - r.predicted_unrescaled).abs();
    report.push(Item::new(
        "unrescaled residual = |q^(1/4) - 1|",
        gap < OSC_ORACLE_TOLERANCE,
        format!("{:.15e} vs {:.15e}", r.max_residual_unrescaled, r.predicted_unrescaled),
    ));
    Ok(report)
}

fn rep_item(c: RepCheck) -> Item {
    Item::new(c.relation, c.pass, c.residual)
}

fn momentum_spectrum(rep: &MatrixRep, pi0: f64, q: f64) -> Item {
    let name = "p|n> = pi0 q^n |n>";
    let labels = rep.labels();
    let mut bad = None;
    match rep.matrices() {
        RepMatrices::Exact(_) => {
            let p = rep.exact("p").expect("momentum rep has p");
            for (k, &n) in labels.iter().enumerate() {
                for c in 0..labels.len() {
                    let want =
                        if c == k { RatFunc::from(Scalar::q_pow(n as i32)) } else { RatFunc::from(Scalar::zero()) };
                    if p.get(k, c) != &want && bad.is_none() {
                        bad = Some(format!("({n}, {}): {}", labels[c], p.get(k, c)));
                    }
                }
            }
        }
        RepMatrices::Float { .. } => {
            let p = rep.float("p").expect("momentum rep has p");
            for (k, &n) in labels.iter().enumerate() {
                let want = pi0 * q.powi(n as i32);
                let got = p.get(k, k);
                if ((got.re - want) / want).abs() > fock::FLOAT_TOLERANCE || got.im != 0.0 {
                    bad.get_or_insert_with(|| format!("n = {n}: {got} vs {want}"));
                }
            }
        }
    }
    let pass = bad.is_none();
    Item::new(name, pass, bad.unwrap_or_else(|| "0".to_string()))
}

pub fn momentum(verb: &str, levels: usize, q: f64, pi0: f64, exact: bool, matrices: bool) -> Result<Report, CliError> {
    let rep = fock::momentum_rep(levels, pi0, q, exact)?;
    let suite = if verb == "verify" { "momentum-rep" } else { "momentum" };
    let mut report = Report::new(verb, Some(suite)).input("levels", levels).input("exact", exact).input("pi0", pi0);
    if !exact {
        report = report.input("q", q);
    }
    report.extend(fock::momentum_relation_checks(&rep, true)?.into_iter().map(rep_item));
    report.push(momentum_spectrum(&rep, pi0, q));
    if matrices {
        report.data = Some(rep.to_json());
    }
    Ok(report)
}

pub fn fock_rep(kind: &str, dim: usize, q: f64, matrices: bool) -> Result<Report, CliError> {
    let (rep, pres) = match kind {
        "oscillator" => (fock::classical_osc_rep(dim)?, catalog::oscillator_classical()?),
        _ => (fock::q_osc_rep(dim, q)?, catalog::q_oscillator()?),
    };
    let mut report = Report::new("rep", Some(kind)).input("dim", dim);
    if kind != "oscillator" {
        report = report.input("q", q);
    }
    report.extend(rep.check_presentation(&pres)?.into_iter().map(rep_item));
    if matrices {
        report.data = Some(rep.to_json());
    }
    Ok(report)
}

fn push_qdiff(report: &mut Report, prefix: &str, r: QdiffReport) {
    report.extend(r.items.into_iter().map(|i| {
        let residual = i.failure.or(i.detail).unwrap_or_else(|| format!("0 on {} monomials", i.monomials));
        Item::new(format!("{prefix}{}", i.identity), i.pass, residual).asserted(i.asserted)
    }));
}

/// Step maps exercised by the calculus suite: uniform steps and the orthogonal lightcone map.
pub fn qdiff_alphabets() -> Result<Vec<(String, OperatorAlphabet)>, CliError> {
    let mut out = Vec::new();
    for k in [1, 2] {
        out.push((format!("k={k}"), OperatorAlphabet::uniform(3, k)?));
    }
    let kmap = [(-1, -2), (0, 1), (1, 2)].into_iter().collect();
    out.push(("k=(-2,1,2)".to_string(), OperatorAlphabet::new(&[-1, 0, 1], &kmap)?));
    Ok(out)
}

pub fn qdiff(bound: i32, sweep: i32) -> Result<Report, CliError> {
    let mut report = Report::new("verify", Some("qdiff")).input("bound", bound).input("sweep", sweep);
    for (label, a) in qdiff_alphabets()? {
        push_qdiff(&mut report, &format!("{label}: "), verify_diffdef(&a, bound, sweep)?);
        push_qdiff(&mut report, &format!("{label}: "), verify_involution(&a, sweep)?);
    }
    let a = OperatorAlphabet::uniform(3, 1)?;
    push_qdiff(&mut report, "k=1: ", classical_limit(&a, 10)?);
    Ok(report)
}

pub fn remark1(bound: i32) -> Result<Report, CliError> {
    let mut report = Report::new("verify", Some("remark1")).input("bound", bound);
    push_qdiff(&mut report, "", remark1_transform(bound)?);
    Ok(report)
}

pub fn remark3(bound: i32) -> Result<Report, CliError> {
    let mut report = Report::new("verify", Some("remark3")).input("bound", bound);
    push_qdiff(&mut report, "", remark3_unsymmetric(bound)?);
    Ok(report)
}

pub fn soq(n: usize, path: &Path, step_limit: usize) -> Result<Report, CliError> {
    let r = RMatrix::load(path)?;
    if r.n() != n {
        return Err(CliError::Usage(format!("{} holds N={}, not N={n}", path.display(), r.n())));
    }
    let rep = verify_soq_limited(&r, step_limit)?;
    let mut report = Report::new("verify", Some("soq")).input("n", n).input("rmatrix", path.display());
    report.extend(rep.items.into_iter().map(|c| {
        let residual = c.detail.unwrap_or_else(|| "0".to_string());
        Item::new(c.name, c.pass, residual).asserted(c.asserted)
    }));
    for d in rep.definitions {
        let i = catalog::index_suffix(d.index);
        report.notes.push(format!("u_{i}^-2 = {}", d.u_inv_sq));
        report.notes.push(format!("u_{i}^2 = {}", d.u_sq));
    }
    Ok(report)
}

pub fn rmatrix_validate(path: &Path) -> Result<Report, CliError> {
    let r = RMatrix::load(path)?;
    let mut report = Report::new("rmatrix-validate", None).input("file", path.display()).input("n", r.n());
    match structure_report(&r, Gauge::Involutive) {
        Ok(rep) => report.extend(rep.items.into_iter().map(|c| {
            let residual = c.detail.unwrap_or_else(|| "0".to_string());
            Item::new(c.name, c.pass, residual).asserted(c.asserted)
        })),
        Err(SoqError::ValidationFailed { identity, indices }) => report.push(Item::new(identity, false, indices)),
        Err(SoqError::DegenerateEigenvalues(e)) => report.push(Item::new("eigenvalues pairwise distinct", false, e)),
        Err(SoqError::NotRankOne(k)) => report.push(Item::new("P0 has rank 1", false, format!("rank {k}"))),
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

fn random_weyl_element(h: &Presentation<Scalar>, rng: &mut ChaCha8Rng) -> Element<Scalar> {
    let mut w = Element::zero();
    for _ in 0..rng.gen_range(1..=4) {
        let total = rng.gen_range(0..=3usize);
        let a = rng.gen_range(0..=total);
        let (re, im) = loop {
            let c = (rng.gen_range(-4i64..=4), rng.gen_range(-4i64..=4));
            if c != (0, 0) {
                break c;
            }
        };
        let mut names = vec!["x1"; a];
        names.extend(vec!["p1"; total - a]);
        let c = Scalar::from_int(re) + Scalar::from_int(im) * Scalar::i();
        w = w.add(&h.mono(c, &names));
    }
    w
}

pub fn inner_derivations(trials: usize, seed: u64) -> Result<Report, CliError> {
    let h = catalog::heisenberg(1)?;
    let mut report = Report::new("verify", Some("inner-derivations")).input("trials", trials).input("seed", seed);
    let hand = [
        ("delta(x) = 1 gives i p", Element::one(), Element::zero(), h.mono(Scalar::i(), &["p1"])),
        ("delta(p) = i gives x", Element::zero(), Element::scalar(Scalar::i()), h.gen("x1")),
    ];
    for (name, dx, dp, want) in hand {
        let got = inner_derivation_solve(&DerivationSpec { dx, dp, degree_bound: 3 })?;
        report.push(Item::new(name, got == want, h.render(&h.normal_form(&got.sub(&want))?)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let w = h.normal_form(&random_weyl_element(&h, &mut rng))?;
        let spec = DerivationSpec::inner(&w, 3)?;
        let want = w.sub(&Element::scalar(w.constant_term()));
        let name = format!("trial {t}: [{}, .]", h.render(&w));
        match inner_derivation_solve(&spec) {
            Ok(a) => {
                let diff = h.normal_form(&a.sub(&want))?;
                report.push(Item::new(name, diff.is_zero(), h.render(&diff)));
            }
            Err(e) => report.push(Item::new(name, false, e.to_string())),
        }
    }
    Ok(report)
}
