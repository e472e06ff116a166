use proptest::prelude::*;
use qweyl_core::catalog::{self, presentation};
use qweyl_core::coeff::Scalar;
use qweyl_core::freealg::{multiply, AlgebraError, Element, Morphism, Presentation, PresentationBuilder};

type Pres = Presentation<Scalar>;

fn q() -> Scalar {
    Scalar::q()
}

#[test]
fn multiply_is_free_concatenation() {
    let h = presentation("heisenberg:n=1").unwrap();
    let x = h.gen("x1");
    let p = h.gen("p1");
    assert_eq!(multiply(&x, &p), Element::word(h.word_named(&["x1", "p1"])));
    let sum = x.add(&p);
    assert_eq!(multiply(&sum, &Element::one()), sum);

    let f = presentation("qheis5").unwrap();
    let iu = f.mono(Scalar::i(), &["u"]);
    let prod = multiply(&iu, &f.gen("uinv"));
    assert_eq!(prod, f.mono(Scalar::i(), &["u", "uinv"]));
}

#[test]
fn normal_form_examples() {
    let h = presentation("heisenberg:n=1").unwrap();
    let nf = h.normal_form(&h.mono(Scalar::one(), &["p1", "x1"])).unwrap();
    let expected = h.mono(Scalar::one(), &["x1", "p1"]).sub(&Element::scalar(Scalar::i()));
    assert_eq!(nf, expected);

    let o = presentation("qoscillator").unwrap();
    let nf = o.normal_form(&o.mono(Scalar::one(), &["a", "a", "ad"])).unwrap();
    // a a a† = a (q a† a + 1) = q (q a† a + 1) a + a
    let expected = o.mono(&q() * &q(), &["ad", "a", "a"]).add(&o.mono(q() + Scalar::one(), &["a"]));
    assert_eq!(nf, expected);

    let f = presentation("qheis5").unwrap();
    for w in [["u", "uinv"], ["uinv", "u"]] {
        assert_eq!(f.normal_form(&f.mono(Scalar::one(), &w)).unwrap(), Element::one());
    }
}

#[test]
fn check_relation_examples() {
    let f = presentation("qheis5").unwrap();
    let lhs = f.mono(q() - Scalar::q_pow(-1), &["p", "xi"]);
    let rhs = f.mono(Scalar::i(), &["u"]).sub(&f.mono(Scalar::i(), &["uinv"]));
    let (ok, residual) = f.check_relation(&lhs, &rhs).unwrap();
    assert!(ok, "residual {}", f.render(&residual));

    let h = presentation("heisenberg:n=2").unwrap();
    let (ok, _) =
        h.check_relation(&h.mono(Scalar::one(), &["x1", "p2"]), &h.mono(Scalar::one(), &["p2", "x1"])).unwrap();
    assert!(ok);

    let o = presentation("qoscillator").unwrap();
    let lhs = o.mono(Scalar::one(), &["a", "ad"]).sub(&o.mono(Scalar::one(), &["ad", "a"]));
    let (ok, residual) = o.check_relation(&lhs, &Element::one()).unwrap();
    assert!(!ok);
    assert_eq!(residual, o.mono(q() - Scalar::one(), &["ad", "a"]));
}

fn broken() -> Pres {
    let mut b = PresentationBuilder::<Scalar>::new("broken");
    let x = b.generator("x", 1);
    let y = b.generator("y", 1);
    b.rule(&[x, y], Element::one());
    b.rule(&[y, x], Element::zero());
    b.build().unwrap()
}

#[test]
fn overlap_check_examples() {
    assert!(presentation("heisenberg:n=2").unwrap().overlap_check(6).unwrap().is_empty());
    assert!(presentation("qheis5:variant=corrected").unwrap().overlap_check(6).unwrap().is_empty());

    let b = broken();
    let amb = b.overlap_check(6).unwrap();
    let xyx = b.word_named(&["x", "y", "x"]);
    let hit = amb.iter().find(|a| a.word == xyx).expect("x y x is ambiguous");
    let pair = [hit.left.clone(), hit.right.clone()];
    assert!(pair.contains(&b.gen("x")) && pair.contains(&Element::zero()));
    assert_eq!(amb.len(), 2, "the symmetric word y x y is the only other ambiguity");
}

#[test]
fn star_examples() {
    let h = presentation("heisenberg:n=1").unwrap();
    let xp = h.mono(Scalar::one(), &["x1", "p1"]);
    let starred = h.apply_star(&xp).unwrap();
    assert_eq!(starred, h.mono(Scalar::one(), &["p1", "x1"]));
    let expected = xp.sub(&Element::scalar(Scalar::i()));
    assert_eq!(h.normal_form(&starred).unwrap(), expected);

    let f = presentation("qheis5").unwrap();
    let s = f.apply_star(&f.mono(Scalar::i(), &["u"])).unwrap();
    assert_eq!(s, f.mono(-(Scalar::i() * Scalar::q_pow(-1)), &["uinv"]));
    let xi = f.gen("xi");
    assert_eq!(f.star_nf(&f.apply_star(&xi).unwrap()).unwrap(), xi);

    let q1 = presentation("qheis1").unwrap();
    assert_eq!(q1.apply_star(&q1.gen("p")), Err(AlgebraError::NoStar));
}

#[test]
fn morphism_examples() {
    let h = presentation("heisenberg:n=1").unwrap();
    assert!(Morphism::identity(&h).verify_hom().unwrap().iter().all(|c| c.pass));

    let m = catalog::naive_oscillator_morphism().unwrap();
    let report = m.verify_hom().unwrap();
    assert_eq!(report.len(), 1);
    assert!(!report[0].pass);
    // φ(a a† − q a† a − 1) = (N + 1) − q N − 1
    let target = m.target();
    assert_eq!(report[0].residual, target.mono(Scalar::one() - q(), &["N"]));
}

#[test]
fn step_limit_is_enforced() {
    let h = presentation("heisenberg:n=1").unwrap().with_step_limit(3);
    let w = h.mono(Scalar::one(), &["p1", "p1", "x1", "x1"]);
    assert_eq!(h.normal_form(&w), Err(AlgebraError::StepLimit(3)));
}

#[test]
fn rules_must_decrease() {
    let mut b = PresentationBuilder::<Scalar>::new("bad");
    let x = b.generator("x", 1);
    let y = b.generator("y", 1);
    let rhs = b.mono(Scalar::one(), &[y, x]);
    b.rule(&[x, y], rhs);
    assert!(matches!(b.build(), Err(AlgebraError::InvalidRule(_))));
}

#[test]
fn every_catalog_presentation_is_confluent_and_star_consistent() {
    for key in catalog::confluent_keys() {
        let p = presentation(&key).unwrap();
        assert!(p.overlap_check(6).unwrap().is_empty(), "{key}");
        assert!(Morphism::identity(&p).verify_hom().unwrap().iter().all(|c| c.pass), "{key}");
        if p.has_star() && key != "commutrel:variant=printed" {
            for c in p.check_star().unwrap() {
                assert!(c.pass, "{key}: {} residual {}", c.relation, p.render(&c.residual));
            }
        }
    }
}

fn small_scalar() -> impl Strategy<Value = Scalar> {
    (-3i64..=3, -2i32..=2, -2i64..=2)
        .prop_map(|(a, e, b)| Scalar::from_int(a) * Scalar::q_pow(e) + Scalar::from_int(b) * Scalar::i())
}

fn raw_element() -> impl Strategy<Value = Vec<(Vec<usize>, Scalar)>> {
    prop::collection::vec((prop::collection::vec(0usize..16, 0..4), small_scalar()), 1..4)
}

fn realize(p: &Pres, raw: &[(Vec<usize>, Scalar)]) -> Element<Scalar> {
    let n = p.generators().len();
    Element::from_terms(raw.iter().map(|(letters, c)| {
        let ids: Vec<u16> = letters.iter().map(|&l| (l % n) as u16).collect();
        (p.word(&ids), c.clone())
    }))
}

fn starred_keys() -> Vec<&'static str> {
    vec![
        "heisenberg:n=2",
        "oscillator",
        "qoscillator",
        "qheis3",
        "qheis-r",
        "qheis4",
        "qheis5",
        "qdiff:dim=3,k=1",
        "qdiff:dim=2,k=2",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduction_is_compatible_with_products(ka in 0usize..9, a in raw_element(), b in raw_element()) {
        let keys = starred_keys();
        let p = presentation(keys[ka % keys.len()]).unwrap();
        let (a, b) = (realize(&p, &a), realize(&p, &b));
        let direct = p.normal_form(&a.mul(&b)).unwrap();
        let staged = p.normal_form(&p.normal_form(&a).unwrap().mul(&p.normal_form(&b).unwrap())).unwrap();
        prop_assert_eq!(direct, staged);
    }

    #[test]
    fn star_is_an_involution(ka in 0usize..9, a in raw_element()) {
        let keys = starred_keys();
        let p = presentation(keys[ka % keys.len()]).unwrap();
        let a = p.normal_form(&realize(&p, &a)).unwrap();
        let twice = p.star_nf(&p.star_nf(&a).unwrap()).unwrap();
        prop_assert_eq!(twice, a);
    }

    #[test]
    fn star_is_antimultiplicative(ka in 0usize..9, a in raw_element(), b in raw_element()) {
        let keys = starred_keys();
        let p = presentation(keys[ka % keys.len()]).unwrap();
        let (a, b) = (realize(&p, &a), realize(&p, &b));
        let lhs = p.star_nf(&a.mul(&b)).unwrap();
        let rhs = p.normal_form(&p.apply_star(&b).unwrap().mul(&p.apply_star(&a).unwrap())).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
