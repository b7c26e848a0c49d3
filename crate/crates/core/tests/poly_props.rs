mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use utimage::{evaluate, eval_comm_poly, FieldSpec, NcLinearPoly, Scalar, UtMatrix};

fn field_of(i: u8) -> FieldSpec {
    [fp(2), fp(3), fp(5), FieldSpec::Rational][i as usize % 4]
}

fn subsets(s: &[usize]) -> Vec<Vec<usize>> {
    (0..1u32 << s.len())
        .map(|mask| s.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect())
        .collect()
}

fn indicator(p: &NcLinearPoly, t: &[usize]) -> Scalar {
    let k = p.field();
    let a: Vec<Scalar> = (1..=p.num_vars()).map(|v| if t.contains(&v) { k.one() } else { k.zero() }).collect();
    p.eval_scalar(&a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn display_parses_back(seed in any::<u64>(), fi in any::<u8>(), m in 1usize..6) {
        let mut r = rng(seed);
        let field = field_of(fi);
        let p = if seed % 2 == 0 { random_linear_poly(m, field, 6, &mut r) } else { random_structured_poly(m, field, &mut r) };
        let text = p.to_string();
        prop_assert_eq!(poly(&text, m, field), p);
    }

    #[test]
    fn alpha_by_inclusion_exclusion(seed in any::<u64>(), fi in any::<u8>(), m in 1usize..6) {
        let mut r = rng(seed);
        let p = random_linear_poly(m, field_of(fi), 8, &mut r);
        let k = p.field();
        let alphas = p.alpha_sums();
        let all: Vec<usize> = (1..=m).collect();
        for s in subsets(&all).into_iter().filter(|s| !s.is_empty()) {
            let mut expected = k.zero();
            for t in subsets(&s) {
                let v = indicator(&p, &t);
                expected = if (s.len() - t.len()) % 2 == 0 { &expected + &v } else { &expected - &v };
            }
            let got = alphas.get(&s).cloned().unwrap_or_else(|| k.zero());
            prop_assert_eq!(got, expected, "S = {:?}, p = {}", s, p);
        }
    }

    #[test]
    fn coefficient_polynomial_is_a_path_entry(seed in any::<u64>(), fi in any::<u8>(), m in 1usize..6) {
        let mut r = rng(seed);
        let p = if seed % 2 == 0 { random_linear_poly(m, field_of(fi), 8, &mut r) } else { random_structured_poly(m, field_of(fi), &mut r) };
        let k = p.field();
        let len = r.gen_range(1..=m.min(3));
        let mut vars: Vec<usize> = (1..=m).collect();
        rand::seq::SliceRandom::shuffle(&mut vars[..], &mut r);
        let tuple = &vars[..len];
        let n = len + 1;
        // diag[s][v - 1] is the (s, s) entry of x_v; x_{i_c} also carries a 1 at (c, c + 1).
        let diag: Vec<Vec<Scalar>> = (0..n).map(|_| (0..m).map(|_| random_scalar(k, &mut r)).collect()).collect();
        let u: Vec<UtMatrix> = (1..=m)
            .map(|v| {
                let mut a = UtMatrix::zero(n, k);
                for (s, row) in diag.iter().enumerate() {
                    a.set(s, s, row[v - 1].clone());
                }
                if let Some(c) = tuple.iter().position(|&i| i == v) {
                    a.set(c, c + 1, k.one());
                }
                a
            })
            .collect();
        let entry = evaluate(&p, &u).unwrap().get(0, n - 1);
        let f = p.coefficient_polynomial(tuple).unwrap();
        prop_assert_eq!(eval_comm_poly(&f, &diag).unwrap(), entry);
    }

    #[test]
    fn order_is_bounded_and_detects_identities(seed in any::<u64>(), fi in any::<u8>(), m in 1usize..7) {
        let mut r = rng(seed);
        let p = random_structured_poly(m, field_of(fi), &mut r);
        let ord = p.order().unwrap();
        if ord.order == 0 {
            prop_assert!(ord.alpha_witness.is_some());
            prop_assert!(!p.alpha_sums().is_empty());
        } else {
            prop_assert!(2 * ord.order <= m);
            prop_assert!(p.alpha_sums().is_empty());
            let a: Vec<Scalar> = (0..m).map(|_| random_scalar(p.field(), &mut r)).collect();
            prop_assert!(p.eval_scalar(&a).unwrap().is_zero());
            let w = ord.witness_tuple.unwrap();
            prop_assert_eq!(w.len(), ord.order);
            prop_assert!(!p.coefficient_polynomial(&w).unwrap().is_zero());
        }
    }
}

#[test]
fn known_orders() {
    for (text, m, ord) in [
        ("x1", 1, 0),
        ("x1*x2", 2, 0),
        ("x1*x2 + x2*x1", 2, 0),
        (COMMUTATOR, 2, 1),
        ("x1*x2*x3 - x2*x1*x3", 3, 1),
        (COMMUTATOR_PRODUCT, 4, 2),
        (THREE_COMMUTATORS, 6, 3),
    ] {
        assert_eq!(poly(text, m, FieldSpec::Rational).order().unwrap().order, ord, "{text}");
    }
    assert!(NcLinearPoly::zero(2, fp(3)).unwrap().order().is_err());
}

#[test]
fn parser_rejects_nonlinear_and_constant_input() {
    for bad in ["x1*x1", "1", "x1 + 2", "x3", "x1*", "(x1 + x2)*x1", "x0"] {
        assert!(utimage::parse_polynomial(bad, 2, fp(5)).is_err(), "{bad}");
    }
}
