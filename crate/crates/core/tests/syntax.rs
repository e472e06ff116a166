use proptest::prelude::*;
use qweyl_core::catalog;
use qweyl_core::coeff::{GaussianRational, RatFunc, Scalar};
use qweyl_core::freealg::{Element, Presentation};
use qweyl_core::syntax::{parse_coefficient, parse_element, parse_relation, print_element, SyntaxError};

fn g(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
    &GaussianRational::from_ratio(re.0, re.1) + &(&GaussianRational::i() * &GaussianRational::from_ratio(im.0, im.1))
}

fn pres(key: &str) -> Presentation<Scalar> {
    catalog::presentation(key).unwrap()
}

#[test]
fn product_and_sum() {
    let p = pres("qheis1");
    let e = parse_element(&p, "p x - q x p").unwrap();
    let expected = p.mono(Scalar::one(), &["p", "x"]).sub(&p.mono(Scalar::q(), &["x", "p"]));
    assert_eq!(e, expected);
    assert_eq!(e.len(), 2);
}

#[test]
fn commutator_sugar() {
    let p = pres("qheis1");
    let e = parse_element(&p, "i [p, x]").unwrap();
    let px = p.mono(Scalar::i(), &["p", "x"]);
    let xp = p.mono(Scalar::i(), &["x", "p"]);
    assert_eq!(e, px.sub(&xp));
}

#[test]
fn inverse_generator_power() {
    let p = pres("qheis5");
    let e = parse_element(&p, "u^-1 xi").unwrap();
    assert_eq!(e, p.mono(Scalar::one(), &["uinv", "xi"]));
    let e = parse_element(&p, "u^2").unwrap();
    assert_eq!(e, p.mono(Scalar::one(), &["u", "u"]));
    assert!(matches!(parse_element(&p, "(p + u)^-1"), Err(SyntaxError::NotInvertible { .. })));
}

#[test]
fn coefficient_forms() {
    let c: Scalar = parse_coefficient("q^(-1/2) - 2i q").unwrap();
    let expected = Scalar::s_pow(-1) - Scalar::constant(g((0, 1), (2, 1))) * Scalar::q();
    assert_eq!(c, expected);
    let c: Scalar = parse_coefficient("3/4i").unwrap();
    assert_eq!(c, Scalar::constant(g((0, 1), (3, 4))));
    let c: Scalar = parse_coefficient("q^(4/2)").unwrap();
    assert_eq!(c, Scalar::q_pow(2));
    let r: RatFunc = parse_coefficient("(q^2 - 1) / (q - 1)").unwrap();
    assert_eq!(r, RatFunc::from(Scalar::q() + Scalar::one()));
    assert!(matches!(parse_coefficient::<Scalar>("1/(1+q)"), Err(SyntaxError::NotInvertible { .. })));
}

#[test]
fn relation_split() {
    let p = pres("qheis1");
    let (l, r) = parse_relation(&p, "p x - q x p = -i").unwrap();
    let (ok, _) = p.check_relation(&l, &r).unwrap();
    assert!(ok);
}

#[test]
fn error_offsets() {
    let p = pres("qheis1");
    match parse_element(&p, "p + ) x") {
        Err(SyntaxError::Unexpected { offset, expected, .. }) => {
            assert_eq!(offset, 4);
            assert!(expected.contains(&"identifier".to_string()));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(parse_element(&p, "p y").unwrap_err(), SyntaxError::UnknownIdentifier { offset: 2, name: "y".into() });
    assert!(matches!(parse_element(&p, "x^(1/2)"), Err(SyntaxError::FractionalExponent { .. })));
    assert!(matches!(parse_element(&p, "(p x"), Err(SyntaxError::Unexpected { offset: 4, .. })));
}

#[test]
fn star_postfix() {
    let p = pres("qheis3");
    let e = parse_element(&p, "(i x)~").unwrap();
    assert_eq!(e, p.mono(-Scalar::i(), &["xb"]));
    assert!(matches!(parse_element(&pres("qheis1"), "x~"), Err(SyntaxError::NoStar { .. })));
}

fn coefficient() -> impl Strategy<Value = Scalar> {
    prop::collection::vec((-4i32..=4, -5i64..=5, -5i64..=5, 1i64..=4), 1..3)
        .prop_map(|terms| Scalar::from_terms(terms.into_iter().map(|(e, re, im, den)| (e, g((re, den), (im, den))))))
}

fn element(pres: &Presentation<Scalar>) -> impl Strategy<Value = Element<Scalar>> {
    let ngen = pres.generators().len() as u16;
    let p = pres.clone();
    prop::collection::vec((prop::collection::vec(0..ngen, 0..4), coefficient()), 0..4).prop_map(move |terms| {
        let mut e = Element::zero();
        for (letters, c) in terms {
            e.add_term(p.word(&letters), &c);
        }
        e
    })
}

const KEYS: [&str; 6] = ["heisenberg:n=2", "qoscillator", "qheis3", "qheis5", "qdiff:dim=3,k=2", "commutrel"];

proptest! {
    #[test]
    fn round_trip_on_catalog((k, e) in (0usize..KEYS.len()).prop_flat_map(|k| (Just(k), element(&pres(KEYS[k]))))) {
        let p = pres(KEYS[k]);
        let text = print_element(&p, &e);
        let back = parse_element(&p, &text).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }
}
