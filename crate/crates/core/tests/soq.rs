use std::path::PathBuf;

use proptest::prelude::*;
use qweyl_core::catalog::index_suffix;
use qweyl_core::coeff::{RatFunc, Scalar};
use qweyl_core::freealg::Element;
use qweyl_core::linalg::Matrix;
use qweyl_core::soq::*;
use qweyl_core::syntax::parse_coefficient;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn so3() -> RMatrix {
    RMatrix::load(&data("so3.rmat")).expect("so3 data")
}

fn so4() -> RMatrix {
    RMatrix::load(&data("so4.rmat")).expect("so4 data")
}

fn rf(text: &str) -> RatFunc {
    parse_coefficient(text).expect("coefficient")
}

fn trace(m: &Matrix<RatFunc>) -> RatFunc {
    (0..m.rows()).fold(RatFunc::zero(), |acc, i| &acc + m.get(i, i))
}

fn diff3() -> DiffSo {
    DiffSo::build(so3(), Gauge::Involutive, StarVariant::Consistent).expect("algebra")
}

#[test]
fn so3_data_validates_and_round_trips() {
    let r = so3();
    assert_eq!(r.n(), 3);
    assert_eq!(r.labels(), &[-1, 0, 1]);
    let v = r.validate().expect("valid");
    assert!(v.checks.iter().all(|c| c.pass));
    assert!(r.matrix().mul(&v.inverse).sub(&Matrix::identity(9)).is_zero());
    assert_eq!(RMatrix::parse(&r.to_text()).unwrap(), r);
}

#[test]
fn inverse_is_laurent() {
    let inv = so3().validate().unwrap().inverse;
    for r in 0..9 {
        for c in 0..9 {
            assert!(inv.get(r, c).to_scalar().is_some(), "entry ({r},{c}) = {}", inv.get(r, c));
        }
    }
}

#[test]
fn permutation_matrix_at_q_one_has_degenerate_eigenvalues() {
    let mut text = String::from("N=3 basis=-1,0,1 q=1\n");
    for i in -1..=1 {
        for j in -1..=1 {
            text.push_str(&format!("{i} {j} {j} {i} 1\n"));
        }
    }
    let r = RMatrix::parse(&text).unwrap();
    assert!(r.is_specialized());
    match r.validate() {
        Err(SoqError::DegenerateEigenvalues(_)) => {}
        other => panic!("expected DegenerateEigenvalues, got {other:?}"),
    }
}

#[test]
fn corrupted_entry_names_the_braid_cell() {
    let text = std::fs::read_to_string(data("so3.rmat")).unwrap().replace("0 0 0 0 1", "0 0 0 0 2");
    let r = RMatrix::parse(&text).unwrap();
    match r.validate() {
        Err(SoqError::ValidationFailed { identity, indices }) => {
            assert!(identity.starts_with("braid"), "{identity}");
            assert!(indices.starts_with('('), "{indices}");
        }
        other => panic!("expected braid failure, got {other:?}"),
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = RMatrix::parse("N=3 basis=-1,0,1\n0 0 0 0 1\n0 0 7 0 1\n").unwrap_err();
    assert!(matches!(err, SoqError::Parse { line: 3, .. }), "{err:?}");
    let err = RMatrix::parse("N=3 basis=-1,0,1\n0 0 0 0 q +\n").unwrap_err();
    assert!(matches!(err, SoqError::Coefficient { line: 2, .. }), "{err:?}");
    let err = RMatrix::parse("N=3 basis=-1,0,1\n0 0 0 0 1\n0 0 0 0 q\n").unwrap_err();
    assert!(matches!(err, SoqError::Parse { line: 3, .. }), "{err:?}");
}

#[test]
fn projector_axioms_and_reconstruction() {
    let r = so3();
    let ps = spectral_projectors(&r).unwrap();
    for c in ps.checks(&r) {
        assert!(c.pass, "{} {:?}", c.name, c.detail);
    }
}

/// Traces equal the classical dimensions of the traceless symmetric, antisymmetric and trace parts.
#[test]
fn projector_traces_are_classical_dimensions() {
    for (r, n) in [(so3(), 3i64), (so4(), 4)] {
        let ps = spectral_projectors(&r).unwrap();
        let dims = [n * (n + 1) / 2 - 1, n * (n - 1) / 2, 1];
        for (p, d) in [&ps.plus, &ps.minus, &ps.zero].into_iter().zip(dims) {
            assert_eq!(trace(p), rf(&d.to_string()), "N={n}");
        }
    }
}

#[test]
fn trace_projector_entries_match_hand_values() {
    let ps = spectral_projectors(&so3()).unwrap();
    // rows and columns (-1,1), (0,0), (1,-1) sit at positions 2, 4, 6
    let den = "(1 + q + q^2)";
    let expect = [["1", "q^(1/2)", "q"], ["q^(1/2)", "q", "q^(3/2)"], ["q", "q^(3/2)", "q^2"]];
    for (a, row) in [2, 4, 6].into_iter().enumerate() {
        for (b, col) in [2, 4, 6].into_iter().enumerate() {
            assert_eq!(ps.zero.get(row, col), &rf(&format!("({}) / {den}", expect[a][b])));
        }
    }
    assert_eq!(ps.zero.rank(), 1);
}

#[test]
fn involutive_gauge_metric() {
    let ps = spectral_projectors(&so3()).unwrap();
    let m = extract_metric(&ps.zero, &[-1, 0, 1], Gauge::Involutive).unwrap();
    assert_eq!(m.lower(-1, 1), &rf("q^(-1/2)"));
    assert_eq!(m.lower(0, 0), &rf("1"));
    assert_eq!(m.lower(1, -1), &rf("q^(1/2)"));
    assert_eq!(m.upper(-1, 1), &rf("q^(-1/2)"));
    assert_eq!(m.c, rf("q / (1 + q + q^2)"));
    assert!(m.reconstruct().sub(&ps.zero).is_zero());
    assert!(m.checks(&ps.zero, &so3()).iter().all(|c| c.pass));
}

#[test]
fn antidiagonal_gauge_breaks_involution() {
    let ps = spectral_projectors(&so3()).unwrap();
    let m = extract_metric(&ps.zero, &[-1, 0, 1], Gauge::Antidiagonal).unwrap();
    assert_eq!(m.lower(-1, 1), &rf("1"));
    assert_eq!(m.lower(0, 0), &rf("q^(1/2)"));
    let checks = m.checks(&ps.zero, &so3());
    let twice = checks.iter().find(|c| c.name == "star(star(x^i)) = x^i").unwrap();
    assert!(!twice.pass);
    assert!(checks.iter().find(|c| c.name == "P0 = c g^(ij) g_(kl)").unwrap().pass);
}

#[test]
fn metric_requires_rank_one() {
    let ps = spectral_projectors(&so3()).unwrap();
    assert_eq!(extract_metric(&ps.minus, &[-1, 0, 1], Gauge::Involutive).unwrap_err(), SoqError::NotRankOne(3));
}

#[test]
fn coordinate_sector_is_confluent() {
    let so = diff3();
    let amb = so.presentation().overlap_check(4).unwrap();
    assert!(amb.iter().all(|a| !a
        .word
        .letters()
        .iter()
        .all(|g| so.presentation().generator_name(*g).starts_with("x_"))));
}

#[test]
fn full_algebra_is_confluent() {
    assert!(diff3().presentation().overlap_check(3).unwrap().is_empty());
}

#[test]
fn action_rule_matches_file_entries() {
    let so = diff3();
    let r = so3();
    let q = rf("q");
    for i in -1..=1 {
        for j in -1..=1 {
            let mut expect = if i == j { Element::one() } else { Element::zero() };
            for k in -1..=1 {
                for l in -1..=1 {
                    let v = r.entry(j, k, i, l);
                    if !v.is_zero() {
                        expect = expect.add(&so.x(l).mul(&so.d(k)).scale(&(&q * v)));
                    }
                }
            }
            let got = so.presentation().normal_form(&so.d(i).mul(&so.x(j))).unwrap();
            assert_eq!(got, so.presentation().normal_form(&expect).unwrap(), "d_{i} x_{j}");
        }
    }
}

#[test]
fn diagonal_actions() {
    let so = diff3();
    let p = so.presentation();
    let got = p.normal_form(&so.d(1).mul(&so.x(1))).unwrap();
    let expect = Element::one().add(&so.x(1).mul(&so.d(1)).scale(&rf("q^2")));
    assert_eq!(got, expect);
    assert_eq!(so.diagonal_exponent(1), 2);
    assert_eq!(so.diagonal_exponent(0), 1);
}

#[test]
fn casimirs_are_central() {
    for c in centrality_checks(&diff3()).unwrap() {
        assert!(c.pass, "{} {:?}", c.name, c.detail);
    }
}

#[test]
fn casimirs_are_central_in_four_dimensions() {
    let so = DiffSo::build(so4(), Gauge::Involutive, StarVariant::Consistent).unwrap();
    for c in centrality_checks(&so).unwrap() {
        assert!(c.pass, "{} {:?}", c.name, c.detail);
    }
}

#[test]
fn conjugation_formula_reproduces_hatted_action() {
    for c in qconjr_checks(&diff3()).unwrap() {
        assert!(c.pass, "{} {:?}", c.name, c.detail);
    }
}

#[test]
fn conjugation_formula_in_four_dimensions() {
    let so = DiffSo::build(so4(), Gauge::Involutive, StarVariant::Consistent).unwrap();
    for c in qconjr_checks(&so).unwrap() {
        assert!(c.pass, "{} {:?}", c.name, c.detail);
    }
}

/// `Λ = exp(2hE)` starts with 1.
#[test]
fn dilation_element_starts_with_one() {
    let so = diff3();
    let lam = so.dilation_element().unwrap();
    assert_eq!(lam.coeff(&so.presentation().word(&[])), RatFunc::one());
    assert!(lam.terms().all(|(w, _)| w.letters().len() % 2 == 0));
}

#[test]
fn star_structure_is_consistent() {
    let so = diff3();
    assert!(so.presentation().check_star().unwrap().iter().all(|c| c.pass));
    let literal = DiffSo::build(so3(), Gauge::Involutive, StarVariant::Printed).unwrap();
    assert!(literal.presentation().check_star().unwrap().iter().any(|c| !c.pass));
}

#[test]
fn star_of_d_is_proportional() {
    let so = diff3();
    assert_eq!(so.star_ratio(0).unwrap(), RatFunc::one());
    assert_eq!(so.star_ratio(1).unwrap(), rf("q^(3/2)"));
    assert_eq!(so.star_ratio(-1).unwrap(), rf("q^(-3/2)"));
    let checks = star_d_checks(&so).unwrap();
    let shown: Vec<(&str, bool)> = checks.iter().map(|c| (c.name.as_str(), c.pass)).collect();
    assert!(shown.contains(&("star(D_0) = -D_0", true)));
    assert!(shown.contains(&("star(D_1) = -D_m1", false)));
    assert!(checks.iter().filter(|c| !c.asserted).all(|c| c.pass));
}

#[test]
fn d_relations_match_derivative_relations() {
    for c in antisymmetry_checks(&diff3()).unwrap() {
        assert!(c.pass, "{} {:?}", c.name, c.detail);
    }
}

#[test]
fn r1_for_rescaled_derivatives() {
    let so = diff3();
    let (checks, pairs) = r1_checks(&so, |i| so.rescaled_derivative(i), "tau D", false).unwrap();
    assert!(checks.iter().all(|c| c.pass));
    assert_eq!(pairs.len(), 3);
    let (plain, _) = r1_checks(&so, |i| Ok(so.hermitian_derivative(i)), "D", true).unwrap();
    assert_eq!(plain.iter().map(|c| c.pass).collect::<Vec<_>>(), vec![false, true, false]);
}

#[test]
fn full_report_failures() {
    let rep = verify_soq(&so3()).unwrap();
    let mut failing = rep.failing();
    failing.sort();
    assert_eq!(
        failing,
        vec![
            "q^-2 star(r_1) = rt_m1 for D",
            "q^-2 star(r_m1) = rt_1 for D",
            "star is an involutive antihomomorphism (Printed contraction)",
            "star(D_1) = -D_m1",
            "star(D_m1) = -D_1",
        ]
    );
    assert!(rep.item("star is an involutive antihomomorphism (Printed contraction)").is_some_and(|c| !c.asserted));
    assert!(rep.to_string().starts_with("suite soq\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rescaling_preserves_reconstruction(k in -6i32..6, num in 1i64..5, den in 1i64..5, neg in any::<bool>()) {
        let ps = spectral_projectors(&so3()).unwrap();
        let m = extract_metric(&ps.zero, &[-1, 0, 1], Gauge::Involutive).unwrap();
        let mut lambda = &rf(&format!("{num}/{den}")) * &RatFunc::from(Scalar::s_pow(k));
        if neg {
            lambda = -&lambda;
        }
        prop_assert!(m.rescaled(&lambda).reconstruct().sub(&ps.zero).is_zero());
    }

    #[test]
    fn any_perturbed_entry_is_rejected(row in 0usize..9, col in 0usize..9, shift in 1i64..4) {
        let r = so3();
        let mut m = r.matrix().clone();
        let bumped = m.get(row, col) + &rf(&shift.to_string());
        m.set(row, col, bumped);
        let broken = RMatrix::new(r.labels().to_vec(), m, false).unwrap();
        prop_assert!(broken.validate().is_err());
    }
}

#[test]
fn report_carries_symbolic_u_definitions() {
    let rep = verify_soq(&so3()).unwrap();
    assert_eq!(rep.definitions.iter().map(|d| d.index).collect::<Vec<_>>(), vec![-1, 0, 1]);
    assert!(rep.definitions.iter().all(|d| d.u_inv_sq.ends_with(&format!("rho_{}^-1", index_suffix(d.index)))));
    let text = rep.to_string();
    assert!(text.contains("u_m1^2 = rho_1~^-1 ("));
}

#[test]
fn diagonal_exception_is_flagged_as_interpretation() {
    let rep = verify_soq(&so3()).unwrap();
    let c = rep.item("q^-1 star(r_0) = rt_0 for D").unwrap();
    assert!(c.pass && !c.asserted);
    assert!(c.detail.as_deref().unwrap().starts_with("interpretation"));
}
