//! Linear noncommutative polynomials: words in pairwise distinct variables
//! with zero constant term.
//!
//! Besides the representation itself this module extracts the two pieces of
//! structure that govern the image on upper triangular matrices:
//!
//! * the symmetrized sums `alpha_S` (sum of the coefficients of all orderings
//!   of a support set `S`), which describe the values of `p` on scalars;
//! * the coefficient polynomials `p_{i_1..i_k}`, commutative multilinear
//!   polynomials in `k + 1` copies of the diagonal vector, which describe
//!   the off-diagonal entries of `p(u_1, .., u_m)`.
//!
//! The order `ord(p)` is then the least `k` such that some coefficient
//! polynomial of length `k` is nonzero (or `0` when some `alpha_S` is).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::multilinear::{CommMultilinearPoly, SlotVar};
use crate::scalar::{FieldSpec, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{var} out of range 1..={num_vars}")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("variable x{var} repeated in one monomial (polynomial is not linear)")]
    NotLinear { var: usize },
    #[error("nonzero constant term is not allowed")]
    ConstantTermForbidden,
    #[error("the zero polynomial has no order")]
    ZeroPolynomial,
    #[error("index tuple {0:?} is not injective or out of range")]
    BadTuple(Vec<usize>),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("number of variables must be at least 1")]
    NoVariables,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

/// A word `x_{i_1} .. x_{i_k}` in distinct variables (1-based indices).
///
/// Ordered by length first, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<usize>);

impl Monomial {
    pub fn vars(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders supports and tuples by size, then lexicographically.
pub(crate) fn shortlex(a: &[usize], b: &[usize]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// A linear noncommutative polynomial in `x_1, .., x_m` in normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NcLinearPoly {
    num_vars: usize,
    field: FieldSpec,
    terms: BTreeMap<Monomial, Scalar>,
}

/// Result of [`NcLinearPoly::order`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderResult {
    pub order: usize,
    /// Least tuple with a nonzero coefficient polynomial (order >= 1).
    pub witness_tuple: Option<Vec<usize>>,
    /// Least support with a nonzero `alpha_S` (order 0).
    pub alpha_witness: Option<Vec<usize>>,
}

impl NcLinearPoly {
    pub fn zero(num_vars: usize, field: FieldSpec) -> Result<Self, PolyError> {
        if num_vars == 0 {
            return Err(PolyError::NoVariables);
        }
        Ok(NcLinearPoly { num_vars, field, terms: BTreeMap::new() })
    }

    /// Builds a polynomial from `(word, coefficient)` pairs, merging repeated
    /// words and dropping zero coefficients.
    pub fn from_terms<I>(num_vars: usize, field: FieldSpec, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        let mut p = Self::zero(num_vars, field)?;
        for (word, coef) in terms {
            p.add_term(word, coef)?;
        }
        Ok(p)
    }

    /// Adds `coef * x_{word[0]} .. x_{word[k-1]}`.
    pub fn add_term(&mut self, word: Vec<usize>, coef: Scalar) -> Result<(), PolyError> {
        if coef.field() != self.field {
            return Err(ScalarError::FieldMismatch(coef.field(), self.field).into());
        }
        if word.is_empty() {
            if coef.is_zero() {
                return Ok(());
            }
            return Err(PolyError::ConstantTermForbidden);
        }
        for (i, &v) in word.iter().enumerate() {
            if v == 0 || v > self.num_vars {
                return Err(PolyError::VarOutOfRange { var: v, num_vars: self.num_vars });
            }
            if word[..i].contains(&v) {
                return Err(PolyError::NotLinear { var: v });
            }
        }
        let key = Monomial(word);
        let sum = match self.terms.get(&key) {
            Some(c) => c + &coef,
            None => coef,
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in key order (length, then lexicographic).
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest word length.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::len).max().unwrap_or(0)
    }

    /// Symmetrized coefficient sums: `alpha_S` is the sum of the coefficients
    /// of every word whose variable set is `S`. Only nonzero sums are kept;
    /// keys are sorted supports.
    pub fn alpha_sums(&self) -> BTreeMap<Vec<usize>, Scalar> {
        let mut out: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
        for (word, c) in &self.terms {
            let mut support = word.0.clone();
            support.sort_unstable();
            let entry = out.entry(support).or_insert_with(|| self.field.zero());
            *entry = &*entry + c;
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Substitution of commuting scalars.
    pub fn eval_scalar(&self, a: &[Scalar]) -> Result<Scalar, PolyError> {
        if a.len() != self.num_vars {
            return Err(PolyError::LengthMismatch { expected: self.num_vars, got: a.len() });
        }
        if let Some(bad) = a.iter().find(|s| s.field() != self.field) {
            return Err(ScalarError::FieldMismatch(bad.field(), self.field).into());
        }
        let mut acc = self.field.zero();
        for (word, c) in &self.terms {
            let mut t = c.clone();
            for &v in word.vars() {
                t = &t * &a[v - 1];
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    fn check_tuple(&self, tuple: &[usize]) -> Result<(), PolyError> {
        let ok = !tuple.is_empty()
            && tuple.iter().all(|&v| v >= 1 && v <= self.num_vars)
            && tuple.iter().enumerate().all(|(i, v)| !tuple[..i].contains(v));
        if ok {
            Ok(())
        } else {
            Err(PolyError::BadTuple(tuple.to_vec()))
        }
    }

    /// The coefficient polynomial `p_{i_1..i_k}` in `k + 1` slots.
    ///
    /// Every word containing `i_1, .., i_k` as a subsequence, at positions
    /// `t_1 < .. < t_k`, contributes its coefficient times one variable per
    /// remaining letter: letters before `t_1` go to slot 1, letters between
    /// `t_j` and `t_{j+1}` to slot `j + 1`, letters after `t_k` to slot `k + 1`.
    pub fn coefficient_polynomial(&self, tuple: &[usize]) -> Result<CommMultilinearPoly, PolyError> {
        self.check_tuple(tuple)?;
        let k = tuple.len();
        let mut out = CommMultilinearPoly::zero(k + 1, self.num_vars, self.field);
        for (word, c) in &self.terms {
            let w = word.vars();
            let positions: Option<Vec<usize>> =
                tuple.iter().map(|i| w.iter().position(|v| v == i)).collect();
            let Some(positions) = positions else { continue };
            if positions.windows(2).any(|p| p[0] >= p[1]) {
                continue;
            }
            out.poly.add_term(slot_vars(w, &positions), c.clone());
        }
        Ok(out)
    }

    /// All nonzero coefficient polynomials with tuple length in `1..=max_len`.
    pub fn coefficient_polynomials(&self, max_len: usize) -> BTreeMap<Vec<usize>, CommMultilinearPoly> {
        let mut out: BTreeMap<Vec<usize>, CommMultilinearPoly> = BTreeMap::new();
        for (word, c) in &self.terms {
            let w = word.vars();
            let top = max_len.min(w.len());
            for k in 1..=top {
                for positions in Combinations::new(w.len(), k) {
                    let tuple: Vec<usize> = positions.iter().map(|&p| w[p]).collect();
                    out.entry(tuple)
                        .or_insert_with(|| CommMultilinearPoly::zero(k + 1, self.num_vars, self.field))
                        .poly
                        .add_term(slot_vars(w, &positions), c.clone());
                }
            }
        }
        out.retain(|_, f| !f.is_zero());
        out
    }

    /// Computes `ord(p)` with its witnesses.
    pub fn order(&self) -> Result<OrderResult, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        let alphas = self.alpha_sums();
        if let Some(support) = alphas.keys().min_by(|a, b| shortlex(a, b)) {
            return Ok(OrderResult { order: 0, witness_tuple: None, alpha_witness: Some(support.clone()) });
        }
        // p(K) = 0 forces 2 * ord(p) <= m.
        let cap = self.num_vars / 2;
        let coeffs = self.coefficient_polynomials(cap);
        match coeffs.keys().min_by(|a, b| shortlex(a, b)) {
            Some(tuple) => Ok(OrderResult {
                order: tuple.len(),
                witness_tuple: Some(tuple.clone()),
                alpha_witness: None,
            }),
            None => Err(PolyError::InternalInconsistency(format!(
                "no nonzero coefficient polynomial of length <= {cap} for a nonzero polynomial"
            ))),
        }
    }
}

/// Slot assignment of the letters of `word` outside `positions`.
fn slot_vars(word: &[usize], positions: &[usize]) -> Vec<SlotVar> {
    let mut vars = Vec::with_capacity(word.len() - positions.len());
    let mut slot = 1;
    let mut next = 0;
    for (u, &v) in word.iter().enumerate() {
        if next < positions.len() && positions[next] == u {
            slot += 1;
            next += 1;
        } else {
            vars.push(SlotVar { slot, var: v });
        }
    }
    vars
}

/// Evaluates a coefficient polynomial at one vector per slot.
pub fn eval_comm_poly(f: &CommMultilinearPoly, point: &[Vec<Scalar>]) -> Result<Scalar, PolyError> {
    if point.len() != f.slots {
        return Err(PolyError::LengthMismatch { expected: f.slots, got: point.len() });
    }
    if let Some(v) = point.iter().find(|v| v.len() != f.vars_per_slot) {
        return Err(PolyError::LengthMismatch { expected: f.vars_per_slot, got: v.len() });
    }
    let refs: Vec<&[Scalar]> = point.iter().map(Vec::as_slice).collect();
    Ok(f.evaluate(&refs).expect("shape checked"))
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        let current = (k <= n).then(|| (0..k).collect());
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

impl fmt::Display for NcLinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (word, c)) in self.terms.iter().enumerate() {
            let (neg, mag) = if c.is_negative() { (true, -c) } else { (false, c.clone()) };
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            let names: Vec<String> = word.vars().iter().map(|v| format!("x{v}")).collect();
            f.write_str(&names.join("*"))?;
        }
        Ok(())
    }
}
