mod common;

use common::*;
use proptest::prelude::*;
use utimage::{FieldSpec, Stratum, UtMatrix};

fn field_of(i: u8) -> FieldSpec {
    [fp(2), fp(3), fp(7), FieldSpec::Rational][i as usize % 4]
}

proptest! {
    #[test]
    fn algebra_laws(seed in any::<u64>(), fi in any::<u8>(), n in 1usize..6) {
        let mut r = rng(seed);
        let k = field_of(fi);
        let [a, b, c]: [UtMatrix; 3] = random_tuple(3, n, k, &mut r).try_into().unwrap();
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&UtMatrix::identity(n, k)).unwrap(), a.clone());
        prop_assert!(a.sub(&a).unwrap().is_zero());
        prop_assert_eq!(UtMatrix::from_json(k, &a.to_json()).unwrap(), a);
    }

    #[test]
    fn strata_multiply(seed in any::<u64>(), fi in any::<u8>(), n in 1usize..7, s in -1i64..6, t in -1i64..6) {
        let mut r = rng(seed);
        let k = field_of(fi);
        let a = random_member(&Stratum::new(n, s).unwrap(), k, &mut r);
        let b = random_member(&Stratum::new(n, t).unwrap(), k, &mut r);
        prop_assert!(Stratum::new(n, s + t + 1).unwrap().contains(&a.mul(&b).unwrap()).unwrap());
    }

    #[test]
    fn strata_are_nested(seed in any::<u64>(), n in 1usize..7, t in 0i64..6) {
        let mut r = rng(seed);
        let a = random_member(&Stratum::new(n, t).unwrap(), fp(5), &mut r);
        prop_assert!(Stratum::new(n, t - 1).unwrap().contains(&a).unwrap());
    }
}

#[test]
fn stratum_dimensions() {
    for n in 1..=8usize {
        for t in -1..n as i64 {
            let s = Stratum::new(n, t).unwrap();
            let free = (n as i64 - t - 1).max(0) as usize;
            assert_eq!(s.dim(), free * (free + 1) / 2, "n = {n}, t = {t}");
        }
        assert!(Stratum::new(n, n as i64 + 3).unwrap().is_zero_space());
    }
}

#[test]
fn enumeration_counts() {
    for (n, t, q) in [(2, -1, 2), (3, -1, 2), (3, 0, 3), (4, 1, 5), (4, 3, 7)] {
        let s = Stratum::new(n, t).unwrap();
        let members: Vec<UtMatrix> = s.enumerate(fp(q)).unwrap().collect();
        assert_eq!(members.len() as u64, q.pow(s.dim() as u32));
        assert!(members.iter().all(|a| s.contains(a).unwrap()));
        let distinct: std::collections::HashSet<String> = members.iter().map(|a| a.to_json().to_string()).collect();
        assert_eq!(distinct.len(), members.len());
    }
    assert!(Stratum::full(2).enumerate(FieldSpec::Rational).is_err());
}

/// Rank over F_2 of matrices given as bit vectors.
fn rank_f2(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else { continue };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i] >> bit & 1 == 1 {
                rows[i] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

fn bits(a: &UtMatrix) -> u64 {
    a.upper().iter().enumerate().filter(|(_, x)| !x.is_zero()).fold(0, |acc, (i, _)| acc | 1 << i)
}

#[test]
fn powers_of_the_radical_span_the_strata() {
    let k = fp(2);
    for n in 2..=4usize {
        let radical: Vec<UtMatrix> = Stratum::new(n, 0).unwrap().enumerate(k).unwrap().collect();
        let mut products = radical.clone();
        for power in 1..=3usize {
            let target = Stratum::new(n, power as i64 - 1).unwrap();
            assert!(products.iter().all(|a| target.contains(a).unwrap()));
            let mut spans: Vec<u64> = products.iter().map(bits).collect();
            spans.sort_unstable();
            spans.dedup();
            assert_eq!(rank_f2(spans), target.dim(), "n = {n}, power = {power}");
            let mut next: Vec<UtMatrix> = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for a in &products {
                for b in &radical {
                    let c = a.mul(b).unwrap();
                    if seen.insert(bits(&c)) {
                        next.push(c);
                    }
                }
            }
            products = next;
        }
    }
}
