mod common;

use proptest::prelude::*;
use utimage::{FieldSpec, Scalar};

fn field() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![
        Just(FieldSpec::Prime(2)),
        Just(FieldSpec::Prime(3)),
        Just(FieldSpec::Prime(7)),
        Just(FieldSpec::Prime(97)),
        Just(FieldSpec::Prime(1_000_003)),
        Just(FieldSpec::Rational),
    ]
}

fn scalar(k: FieldSpec) -> impl Strategy<Value = Scalar> {
    (-50i64..50, 1i64..9).prop_map(move |(a, b)| match k {
        FieldSpec::Rational => k.from_i64(a).checked_div(&k.from_i64(b)).unwrap(),
        _ => k.from_i64(a),
    })
}

fn triple() -> impl Strategy<Value = (Scalar, Scalar, Scalar)> {
    field().prop_flat_map(|k| (scalar(k), scalar(k), scalar(k)))
}

proptest! {
    #[test]
    fn ring_axioms((a, b, c) in triple()) {
        let k = a.field();
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &k.zero(), a.clone());
        prop_assert_eq!(&a * &k.one(), a.clone());
        prop_assert!((&a + &a.neg_ref()).is_zero());
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
    }

    #[test]
    fn inverses((a, b, _c) in triple()) {
        if a.is_zero() {
            prop_assert!(a.inv().is_err());
            prop_assert!(b.checked_div(&a).is_err());
        } else {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
            prop_assert_eq!(&b.checked_div(&a).unwrap() * &a, b.clone());
        }
    }

    #[test]
    fn text_roundtrip((a, _b, _c) in triple()) {
        let k = a.field();
        prop_assert_eq!(k.parse_scalar(&a.to_text()).unwrap(), a.clone());
        prop_assert_eq!(k.to_string().parse::<FieldSpec>().unwrap(), k);
    }
}

#[test]
fn enumeration_lists_each_element_once() {
    for q in [2u64, 3, 5, 7, 11] {
        let k = FieldSpec::Prime(q);
        let all: Vec<Scalar> = k.elements().collect();
        assert_eq!(all.len() as u64, q);
        assert!(all[0].is_zero() && all[1].is_one());
        for (i, a) in all.iter().enumerate() {
            assert!(!all[..i].contains(a));
        }
    }
    let first: Vec<String> = FieldSpec::Rational.elements().take(5).map(|s| s.to_text()).collect();
    assert_eq!(first, ["0", "1", "-1", "2", "-2"]);
}

#[test]
fn rejects_composite_moduli() {
    for bad in ["q=1", "q=4", "q=91", "q=x", "GF(4)"] {
        assert!(bad.parse::<FieldSpec>().is_err(), "{bad}");
    }
    assert!(utimage::scalar::is_prime(2_147_483_647));
    assert!(!utimage::scalar::is_prime(3_215_031_751));
}

#[test]
fn small_examples() {
    let f5 = FieldSpec::Prime(5);
    assert_eq!(f5.from_i64(2).inv().unwrap(), f5.from_i64(3));
    let f7 = FieldSpec::Prime(7);
    assert_eq!(&f7.from_i64(5) + &f7.from_i64(4), f7.from_i64(2));
    let q = FieldSpec::Rational;
    assert_eq!(q.parse_scalar("-3/4").unwrap().inv().unwrap(), q.parse_scalar("-4/3").unwrap());
    assert_eq!(q.parse_scalar("6/8").unwrap().to_text(), "3/4");
    assert!(f5.from_i64(1).checked_div(&f5.zero()).is_err());
    assert!(f5.one().checked_add(&f7.one()).is_err());
}
