use std::collections::BTreeMap;

use proptest::prelude::*;
use qweyl_core::catalog;
use qweyl_core::coeff::{GaussianRational, RatFunc, Scalar};
use qweyl_core::freealg::Element;
use qweyl_core::qdiff::{
    classical_limit, conjugation_rhs, expand_q_one_plus_h, qratio, remark1_transform, remark3_unsymmetric,
    unsymmetric_derivatives, verify_diffdef, verify_involution, LaurentFunction, OperatorAlphabet, OperatorExpr,
    QdiffError,
};

fn rf(s: Scalar) -> RatFunc {
    RatFunc::from(s)
}

fn q(e: i32) -> Scalar {
    Scalar::q_pow(e)
}

fn mono3(a: i32, b: i32, c: i32) -> LaurentFunction {
    LaurentFunction::monomial(vec![a, b, c])
}

/// `(q^(km) − q^(−km))/(q^k − q^(−k))` by exact polynomial division.
fn qratio_oracle(k: i32, m: i32) -> Scalar {
    (q(k * m) - q(-k * m)).exact_div(&(q(k) - q(-k))).unwrap()
}

#[test]
fn difference_operator_on_monomials() {
    let a = OperatorAlphabet::uniform(1, 1).unwrap();
    let x = |m: i32| LaurentFunction::monomial(vec![m]);
    assert_eq!(a.act(&a.d(0), &x(1)), x(0));
    assert_eq!(a.act(&a.d(0), &x(0)), LaurentFunction::zero());
    let expected = LaurentFunction::term(rf(q(1) + q(-1)), vec![1]);
    assert_eq!(a.act(&a.d(0), &x(2)), expected);
    for k in [-2, -1, 1, 2, 3] {
        for m in -12..=12 {
            assert_eq!(qratio(k, m), qratio_oracle(k, m), "k = {k}, m = {m}");
        }
    }
}

#[test]
fn action_is_composition() {
    let a = OperatorAlphabet::uniform(3, 2).unwrap();
    let op1 = a.d(1).add(&a.u(0).scale(&rf(Scalar::i())));
    let op2 = a.compose(&[&a.x(-1), &a.uinv(1)]).sub(&a.lam());
    let f = mono3(2, -1, 3).add(&mono3(0, 4, -2));
    assert_eq!(a.act(&op1.mul(&op2), &f), a.act(&op1, &a.act(&op2, &f)));
}

/// The telescoping identity behind `D x − q^k x D = u^(−k)` on `(x)^m`.
#[test]
fn telescoping_oracle() {
    for k in [-2, -1, 1, 2] {
        for m in -20..=20 {
            let lhs = qratio_oracle(k, m + 1) - q(k) * qratio_oracle(k, m);
            assert_eq!(lhs, q(-k * m));
            let lhs = qratio_oracle(k, m + 1) - q(-k) * qratio_oracle(k, m);
            assert_eq!(lhs, q(k * m));
        }
    }
}

#[test]
fn diffdef_holds_for_uniform_steps() {
    for k in [1, -1, 2, -2] {
        let a = OperatorAlphabet::uniform(3, k).unwrap();
        let report = verify_diffdef(&a, 20, 2).unwrap();
        assert!(report.all_pass(), "{report}");
        let d = report.item(&format!("D_0 x_0 - q^{k} x_0 D_0 = u_0^{}", -k)).unwrap();
        assert_eq!(d.monomials, 41);
    }
}

#[test]
fn diffdef_with_mixed_steps() {
    let kmap: BTreeMap<i32, i32> = [(-2, -3), (-1, 1), (1, -1), (2, 3)].into_iter().collect();
    let a = OperatorAlphabet::new(&[-2, -1, 1, 2], &kmap).unwrap();
    let report = verify_diffdef(&a, 8, 1).unwrap();
    assert!(report.all_pass(), "{report}");
}

#[test]
fn alphabet_errors() {
    let kmap: BTreeMap<i32, i32> = [(0, 0)].into_iter().collect();
    assert_eq!(OperatorAlphabet::new(&[0], &kmap).unwrap_err(), QdiffError::ZeroK(0));
    let kmap: BTreeMap<i32, i32> = [(1, 1)].into_iter().collect();
    let a = OperatorAlphabet::new(&[1], &kmap).unwrap();
    assert_eq!(a.involute(&a.x(1)).unwrap_err(), QdiffError::NotSymmetric);
}

#[test]
fn involution_examples() {
    let a = OperatorAlphabet::uniform(3, 1).unwrap();
    assert_eq!(a.involute(&a.x(1)).unwrap(), a.x(-1));
    assert_eq!(a.involute(&a.u(1)).unwrap(), a.uinv(-1).scale(&rf(q(-1))));
    assert_eq!(a.involute(&a.d(-1)).unwrap(), a.d(1).neg());
    let id = a.d(0).scale(&rf(Scalar::i()));
    assert_eq!(a.involute(&id).unwrap(), id);
    let report = verify_involution(&a, 2).unwrap();
    assert!(report.all_pass(), "{report}");
}

#[test]
fn imported_catalog_relations_hold() {
    let pres = catalog::qdiff_uniform(3, 2).unwrap();
    let a = OperatorAlphabet::uniform(3, 2).unwrap();
    let cube = a.cube_monomials(3);
    for (idx, rule) in pres.rules().iter().enumerate() {
        let lhs = a.import(&pres, &Element::word(rule.lhs.clone()), |c| rf(c.clone())).unwrap();
        let rhs = a.import(&pres, &rule.rhs, |c| rf(c.clone())).unwrap();
        let check = a.check_identity(&pres.rule_text(idx), true, &lhs, &rhs, &cube);
        assert!(check.pass, "{check:?}");
    }
}

#[test]
fn remark1_printed_first_relation_fails() {
    let report = remark1_transform(6).unwrap();
    let failing: Vec<&str> = report.items.iter().filter(|i| !i.pass).map(|i| i.identity.as_str()).collect();
    assert_eq!(failing, vec!["printed: xq_0 xq_m1 = q^-1 xq_m1 xq_0"], "{report}");
    assert!(!report.asserted_pass());
    assert!(report.item("corrected: xq_0 xq_m1 = q xq_m1 xq_0").unwrap().pass);
    assert!(report.item("bar(xq_0) = xq_0").unwrap().pass);
    assert_eq!(report.item("bar(xq_0) = xq_0").unwrap().monomials, 13 * 13 * 13);
}

/// `x_q^0 x_q^(−1)` and `x_q^(−1) x_q^0` on `x^m`, computed by hand: both raise `m_(−1)` and
/// `m_0` by one; the dilation prefactor sees `m_(−1) + 1` in the first case and `m_(−1)` in the second.
#[test]
fn remark1_commutation_oracle() {
    let a = OperatorAlphabet::uniform(3, 1).unwrap();
    let xq0 = a.compose(&[&a.u(-1), &a.uinv(1), &a.x(0)]);
    let xm = a.x(-1);
    for (m1, m0, p1) in [(0, 0, 0), (2, -1, 3), (-4, 5, -2)] {
        let f = mono3(m1, m0, p1);
        let target = vec![m1 + 1, m0 + 1, p1];
        let ab = a.act(&xq0.mul(&xm), &f);
        let ba = a.act(&xm.mul(&xq0), &f);
        assert_eq!(ab, LaurentFunction::term(rf(q(m1 + 1 - p1)), target.clone()));
        assert_eq!(ba, LaurentFunction::term(rf(q(m1 - p1)), target));
    }
}

/// `∂_0 x^m = q^(m_(−1) + m_1) (1 − q^(m_0))/(1 − q) x^(m − e_0)`.
fn del0_oracle(m: (i32, i32, i32)) -> LaurentFunction {
    let (a, b, c) = m;
    let num = Scalar::one() - q(b);
    let ratio = num.exact_div(&(Scalar::one() - q(1))).unwrap();
    LaurentFunction::term(rf(ratio * q(a + c)), vec![a, b - 1, c])
}

#[test]
fn unsymmetric_derivative_action() {
    let a = OperatorAlphabet::uniform(3, 1).unwrap();
    let del = unsymmetric_derivatives(&a);
    for m in [(0, 0, 0), (1, 2, 3), (-2, 5, 1), (3, -3, -1)] {
        assert_eq!(a.act(&del[&0], &mono3(m.0, m.1, m.2)), del0_oracle(m));
    }
    for m in -6..=6 {
        let f = LaurentFunction::monomial(vec![0, m + 1, 0]);
        let lhs = a.act(&del[&0], &f);
        let expected = (Scalar::one() - q(m + 1)).exact_div(&(Scalar::one() - q(1))).unwrap();
        let telescoped = Scalar::one() + q(1) * (Scalar::one() - q(m)).exact_div(&(Scalar::one() - q(1))).unwrap();
        assert_eq!(expected, telescoped);
        assert_eq!(lhs, LaurentFunction::term(rf(expected), vec![0, m, 0]));
    }
}

#[test]
fn remark3_report() {
    let report = remark3_unsymmetric(4).unwrap();
    let failing: Vec<&str> = report.items.iter().filter(|i| !i.pass).map(|i| i.identity.as_str()).collect();
    assert_eq!(failing.len(), 3, "{report}");
    assert!(failing[0].starts_with("dhat_0 x_0") && failing[0].ends_with("-q^-3 bar(d_0)"));
    assert!(failing[1..].iter().all(|f| f.starts_with("dhat_0 = Lam^-1")));
    assert!(report.item("dhat_0 x_0 = (u_m1 u_1)^-1 + q^-1 x_0 dhat_0 with dhat_0 = -q^3 bar(d_0)").unwrap().pass);
    assert!(report.item("d_0 x_0 = u_m1 u_1 + q x_0 d_0").unwrap().pass);
    assert!(report.item("[d_m1, d_1] = 0").unwrap().pass);
    assert!(report.item("Lam d_0 = q^-2 d_0 Lam").unwrap().pass);
    let rhs = "Lam^-1 d_0 - (q+1)/(q^-2-1) (u_m1 u_1)^-1 xinv_0 (u_0^-2 - 1) = q^4 bar(d_0)";
    assert!(report.item(rhs).unwrap().pass);
}

/// `bar(∂_0) x^m = q^(−2 − m_(−1) − m_1) (1 − q^(−m_0))/(1 − q) x^(m − e_0)`.
#[test]
fn conjugate_derivative_oracle() {
    let a = OperatorAlphabet::uniform(3, 1).unwrap();
    let del = unsymmetric_derivatives(&a);
    let bar = a.involute(&del[&0]).unwrap();
    for (m1, m0, p1) in [(0, 1, 0), (2, 3, -1), (-1, -2, 4)] {
        let c = RatFunc::new(q(-2 - m1 - p1) * (Scalar::one() - q(-m0)), Scalar::one() - q(1)).unwrap();
        assert_eq!(a.act(&bar, &mono3(m1, m0, p1)), LaurentFunction::term(c, vec![m1, m0 - 1, p1]));
    }
}

/// The defect of the conjugation formula, compared with its coefficient on `x^m` derived by hand:
/// with `t = q^(−m_0)` and `a = m_(−1) + m_1`, the printed `∂̂_0` gives `−q^(−5−a)(1 − t)/(1 − q)`.
/// On the right side `Λ⁻¹∂_0` gives `q^(2−a)(t² − t)/(1 − q)` and the subtracted term
/// `q²/(1 − q) · q^(−a)(t² − 1)`, leaving `q^(2−a)(1 − t)/(1 − q)`.
#[test]
fn conjugation_defect_oracle() {
    let a = OperatorAlphabet::uniform(3, 1).unwrap();
    let del = unsymmetric_derivatives(&a);
    let hat = a.involute(&del[&0]).unwrap().scale(&rf(-q(-3)));
    let defect: OperatorExpr = hat.sub(&conjugation_rhs(&a, &del[&0]));
    let canon = a.canonical(&defect).unwrap();
    for (m1, m0, p1) in [(0, 0, 0), (1, 2, 0), (-2, 3, 1), (0, -1, 2)] {
        let f = mono3(m1, m0, p1);
        let t = q(-m0);
        let s = m1 + p1;
        let num = -(q(-5 - s) * (Scalar::one() - t.clone())) - q(2 - s) * (Scalar::one() - t);
        let c = RatFunc::new(num, Scalar::one() - q(1)).unwrap();
        let expected = LaurentFunction::term(c, vec![m1, m0 - 1, p1]);
        assert_eq!(a.act(&defect, &f), expected);
        assert_eq!(a.act(&canon, &f), expected);
    }
}

#[test]
fn classical_limit_of_difference_operators() {
    for k in [1, 2, -3] {
        let a = OperatorAlphabet::uniform(3, k).unwrap();
        let report = classical_limit(&a, 10).unwrap();
        assert!(report.all_pass(), "{report}");
    }
    let series = expand_q_one_plus_h(&(q(1) - Scalar::one()), 3);
    assert_eq!(
        series.coeffs(),
        &[GaussianRational::zero(), GaussianRational::one(), GaussianRational::zero(), GaussianRational::zero()]
    );
    let half = expand_q_one_plus_h(&Scalar::s_pow(1), 2);
    assert_eq!(half.coeffs()[2], GaussianRational::from_ratio(-1, 8));
}

fn arb_operator() -> impl Strategy<Value = (Vec<(usize, i32)>, Vec<u8>)> {
    (prop::collection::vec((0usize..4, -2i32..=2), 1..4), prop::collection::vec(0u8..20, 1..5))
}

fn build(a: &OperatorAlphabet, spec: &(Vec<(usize, i32)>, Vec<u8>)) -> OperatorExpr {
    let gens = a.presentation().generators();
    let mut out = Element::zero();
    for (j, (len, e)) in spec.0.iter().enumerate() {
        let mut t = Element::scalar(rf(q(*e) + Scalar::i()));
        for l in 0..*len {
            let g = spec.1[(j + l) % spec.1.len()] as usize % gens.len();
            t = t.mul(&a.presentation().gen(&gens[g].name));
        }
        out = out.add(&t);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn involution_is_involutive(spec in arb_operator()) {
        let a = OperatorAlphabet::uniform(3, 1).unwrap();
        let op = build(&a, &spec);
        prop_assert_eq!(a.involute(&a.involute(&op).unwrap()).unwrap(), op);
    }

    #[test]
    fn action_is_linear_and_multiplicative(spec1 in arb_operator(), spec2 in arb_operator(), m in prop::collection::vec(-3i32..=3, 3)) {
        let a = OperatorAlphabet::uniform(3, 1).unwrap();
        let (op1, op2) = (build(&a, &spec1), build(&a, &spec2));
        let f = LaurentFunction::monomial(m.clone());
        let g = mono3(1, 0, -1);
        prop_assert_eq!(a.act(&op1.mul(&op2), &f), a.act(&op1, &a.act(&op2, &f)));
        prop_assert_eq!(a.act(&op1, &f.add(&g)), a.act(&op1, &f).add(&a.act(&op1, &g)));
    }
}
