#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use utimage::{parse_polynomial, FieldSpec, NcLinearPoly, Scalar, Stratum, UtMatrix};

pub const COMMUTATOR: &str = "x1*x2 - x2*x1";
pub const COMMUTATOR_PRODUCT: &str = "(x1*x2 - x2*x1)*(x3*x4 - x4*x3)";
pub const THREE_COMMUTATORS: &str = "(x1*x2 - x2*x1)*(x3*x4 - x4*x3)*(x5*x6 - x6*x5)";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fp(q: u64) -> FieldSpec {
    FieldSpec::Prime(q)
}

pub fn poly(text: &str, m: usize, field: FieldSpec) -> NcLinearPoly {
    parse_polynomial(text, m, field).unwrap()
}

pub fn random_scalar(field: FieldSpec, rng: &mut ChaCha8Rng) -> Scalar {
    match field {
        FieldSpec::Prime(q) => field.from_i64(rng.gen_range(0..q as i64)),
        FieldSpec::Rational => {
            let num = field.from_i64(rng.gen_range(-6..=6));
            if rng.gen_bool(0.25) {
                num.checked_div(&field.from_i64(rng.gen_range(1..=4))).unwrap()
            } else {
                num
            }
        }
    }
}

pub fn random_nonzero(field: FieldSpec, rng: &mut ChaCha8Rng) -> Scalar {
    loop {
        let c = random_scalar(field, rng);
        if !c.is_zero() {
            return c;
        }
    }
}

pub fn random_matrix(n: usize, field: FieldSpec, rng: &mut ChaCha8Rng) -> UtMatrix {
    random_member(&Stratum::full(n), field, rng)
}

pub fn random_member(s: &Stratum, field: FieldSpec, rng: &mut ChaCha8Rng) -> UtMatrix {
    let mut a = UtMatrix::zero(s.dim_n(), field);
    for (i, j) in s.free_positions() {
        a.set(i, j, random_scalar(field, rng));
    }
    a
}

pub fn random_tuple(m: usize, n: usize, field: FieldSpec, rng: &mut ChaCha8Rng) -> Vec<UtMatrix> {
    (0..m).map(|_| random_matrix(n, field, rng)).collect()
}

/// A word in distinct variables from `vars`, of length `1..=vars.len()`.
fn random_word(vars: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let len = rng.gen_range(1..=vars.len());
    let mut w = vars.to_vec();
    w.shuffle(rng);
    w.truncate(len);
    w
}

/// Random linear polynomial with up to `max_terms` terms; retried until
/// nonzero.
pub fn random_linear_poly(m: usize, field: FieldSpec, max_terms: usize, rng: &mut ChaCha8Rng) -> NcLinearPoly {
    let vars: Vec<usize> = (1..=m).collect();
    loop {
        let mut p = NcLinearPoly::zero(m, field).unwrap();
        for _ in 0..rng.gen_range(1..=max_terms) {
            p.add_term(random_word(&vars, rng), random_nonzero(field, rng)).unwrap();
        }
        if !p.is_zero() {
            return p;
        }
    }
}

fn coef_text(c: &Scalar) -> String {
    format!("({})", c.to_text())
}

/// A block on `vars`: a commutator, a symmetric form or a random combination.
fn random_block(vars: &[usize], field: FieldSpec, rng: &mut ChaCha8Rng) -> String {
    let x = |v: usize| format!("x{v}");
    match (vars.len(), rng.gen_range(0..3)) {
        (2, 0) | (2, 1) => format!("{}*({}*{} - {}*{})", coef_text(&random_nonzero(field, rng)), x(vars[0]), x(vars[1]), x(vars[1]), x(vars[0])),
        (_, 1) => {
            let terms: Vec<String> = vars.iter().map(|&v| format!("{}*{}", coef_text(&random_nonzero(field, rng)), x(v))).collect();
            terms.join(" + ")
        }
        _ => {
            let terms: Vec<String> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let w: Vec<String> = random_word(vars, rng).into_iter().map(x).collect();
                    format!("{}*{}", coef_text(&random_nonzero(field, rng)), w.join("*"))
                })
                .collect();
            terms.join(" + ")
        }
    }
}

/// Products of blocks over disjoint variable sets, summed. Commutator blocks
/// raise the order, so the order varies across samples.
pub fn random_structured_poly(m: usize, field: FieldSpec, rng: &mut ChaCha8Rng) -> NcLinearPoly {
    loop {
        let mut summands = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let mut vars: Vec<usize> = (1..=m).collect();
            vars.shuffle(rng);
            vars.truncate(rng.gen_range(1..=m));
            let mut blocks = Vec::new();
            let mut rest = &vars[..];
            while !rest.is_empty() {
                let take = if rest.len() >= 2 && rng.gen_bool(0.7) { 2 } else { 1 };
                blocks.push(format!("({})", random_block(&rest[..take], field, rng)));
                rest = &rest[take..];
            }
            summands.push(blocks.join("*"));
        }
        let text = summands.join(" + ");
        let p = parse_polynomial(&text, m, field).unwrap_or_else(|e| panic!("{text}: {e}"));
        if !p.is_zero() {
            return p;
        }
    }
}
