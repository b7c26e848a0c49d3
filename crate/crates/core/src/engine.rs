//! Image classification and explicit preimages.
//!
//! With `r = ord(p)` the image of `p` on `UT_n` is
//!
//! | case | order            | image            | field hypothesis               |
//! |------|------------------|------------------|--------------------------------|
//! | i    | `r = 0`          | `UT_n`           | none                           |
//! | ii   | `r = 1`          | `UT_n^(0)`       | `|K| >= n`                     |
//! | iii  | `2 <= r <= n-2`  | `UT_n^(r-1)`     | `|K| > (2n - 3r + 1) r / 2`    |
//! | iv   | `r = n-1`        | `UT_n^(n-2)`     | none                           |
//! | v    | `r >= n`         | `{0}`            | none                           |
//!
//! Containment in the stratum holds over every field. Equality is only
//! claimed when the hypothesis holds; below it the classification is
//! reported as containment only.
//!
//! Every preimage is built constructively and then checked by evaluating
//! `p` on the returned tuple.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::multilinear::Multilinear;
use crate::ncpoly::{shortlex, NcLinearPoly, PolyError};
use crate::scalar::{Cardinality, FieldSpec, Scalar, ScalarError};
use crate::utmatrix::{evaluate, MatrixError, Stratum, UtMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the zero polynomial has no order")]
    ZeroPolynomial,
    #[error("target is not in the image stratum {0}")]
    TargetNotInImage(Stratum),
    #[error("field too small: the construction needs |K| > {required_exceeds}, but |K| = {field_card}")]
    GuardViolated { required_exceeds: u64, field_card: Cardinality },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("all symmetrized coefficients vanish (order is positive)")]
    OrderPositive,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error(transparent)]
    Poly(PolyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

impl From<PolyError> for EngineError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::ZeroPolynomial => EngineError::ZeroPolynomial,
            PolyError::InternalInconsistency(msg) => EngineError::InternalInconsistency(msg),
            other => EngineError::Poly(other),
        }
    }
}

/// Which case of the classification applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TheoremCase {
    /// `r = 0`: image is all of `UT_n`.
    FullAlgebra,
    /// `r = 1`: image is the strictly upper triangular matrices.
    StrictlyUpper,
    /// `2 <= r <= n - 2`.
    Intermediate,
    /// `r = n - 1`: image is the corner entry.
    Corner,
    /// `r >= n`: `p` vanishes on `UT_n`.
    Zero,
}

impl TheoremCase {
    pub fn for_order(r: usize, n: usize) -> Self {
        match r {
            0 => TheoremCase::FullAlgebra,
            1 if n >= 2 => TheoremCase::StrictlyUpper,
            _ if r + 2 <= n => TheoremCase::Intermediate,
            _ if r + 1 == n => TheoremCase::Corner,
            _ => TheoremCase::Zero,
        }
    }

    /// Roman numeral used in reports.
    pub fn label(self) -> &'static str {
        match self {
            TheoremCase::FullAlgebra => "i",
            TheoremCase::StrictlyUpper => "ii",
            TheoremCase::Intermediate => "iii",
            TheoremCase::Corner => "iv",
            TheoremCase::Zero => "v",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            TheoremCase::FullAlgebra => "nonzero on scalars: image is the whole algebra",
            TheoremCase::StrictlyUpper => "order 1: image is the strictly upper triangular matrices",
            TheoremCase::Intermediate => "intermediate order: image is a proper power of the radical",
            TheoremCase::Corner => "order n-1: image is the top-right corner",
            TheoremCase::Zero => "order >= n: identity of UT_n",
        }
    }
}

/// Field-size hypotheses for a given `(n, r)`.
///
/// Bounds are stored as the value `B` in `|K| > B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FieldBounds {
    /// Hypothesis of the applicable case, if it has one.
    pub case_bound: Option<u64>,
    /// The uniform hypothesis `|K| > n(n-1)/3`, as `floor(n(n-1)/3)`.
    pub global_bound: u64,
}

impl FieldBounds {
    /// Smallest admissible field size for the case hypothesis.
    pub fn case_min_cardinality(&self) -> Option<u64> {
        self.case_bound.map(|b| b + 1)
    }

    pub fn global_min_cardinality(&self) -> u64 {
        self.global_bound + 1
    }
}

/// `(2n - 3r + 1) r / 2`, which is always an integer. Negative values (only
/// possible outside `0 <= r <= n - 1`) clamp to zero.
pub fn intermediate_bound(n: usize, r: usize) -> u64 {
    let v = (2 * n as i64 - 3 * r as i64 + 1) * r as i64;
    debug_assert_eq!(v.rem_euclid(2), 0);
    (v / 2).max(0) as u64
}

/// Hypotheses on `|K|` for dimension `n` and order `r`.
pub fn required_field_size(n: usize, r: usize) -> FieldBounds {
    let case_bound = match TheoremCase::for_order(r, n) {
        TheoremCase::StrictlyUpper => Some(n as u64 - 1),
        TheoremCase::Intermediate => Some(intermediate_bound(n, r)),
        _ => None,
    };
    FieldBounds { case_bound, global_bound: (n * n.saturating_sub(1) / 3) as u64 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GuardStatus {
    Satisfied,
    Violated { required_exceeds: u64, field_card: Cardinality },
}

impl GuardStatus {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, GuardStatus::Satisfied)
    }
}

/// Outcome of [`classify_image`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageClassification {
    pub n: usize,
    pub num_vars: usize,
    pub field: FieldSpec,
    pub order: usize,
    pub witness_tuple: Option<Vec<usize>>,
    pub alpha_witness: Option<Vec<usize>>,
    pub stratum: Stratum,
    pub case: TheoremCase,
    pub bounds: FieldBounds,
    pub guard: GuardStatus,
    /// Whether `|K| > n(n-1)/3` holds.
    pub global_guard: bool,
    /// Whether `-1 <= t <= m/2 - 1`.
    pub range_ok: bool,
}

impl ImageClassification {
    /// True when the image is asserted to equal the stratum (not just lie in it).
    pub fn is_exact(&self) -> bool {
        self.guard.is_satisfied()
    }
}

/// Classifies `p(UT_n)`.
pub fn classify_image(p: &NcLinearPoly, n: usize) -> Result<ImageClassification, EngineError> {
    if n == 0 {
        return Err(EngineError::PreconditionViolated("dimension must be at least 1".into()));
    }
    let ord = p.order()?;
    let r = ord.order;
    let case = TheoremCase::for_order(r, n);
    let t = match case {
        TheoremCase::FullAlgebra => -1,
        TheoremCase::Zero => n as i64 - 1,
        _ => r as i64 - 1,
    };
    let stratum = Stratum::new(n, t)?;
    let bounds = required_field_size(n, r);
    let card = p.field().cardinality();
    let guard = match bounds.case_bound {
        Some(b) if !card.exceeds(b) => GuardStatus::Violated { required_exceeds: b, field_card: card },
        _ => GuardStatus::Satisfied,
    };
    Ok(ImageClassification {
        n,
        num_vars: p.num_vars(),
        field: p.field(),
        order: r,
        witness_tuple: ord.witness_tuple,
        alpha_witness: ord.alpha_witness,
        stratum,
        case,
        bounds,
        guard,
        global_guard: card.exceeds(bounds.global_bound),
        range_ok: t >= -1 && 2 * (t + 1) <= p.num_vars() as i64,
    })
}

/// Constraints `f_i`, each a nonzero multilinear polynomial over a shared
/// set of scalar variables (identified by `usize`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintFamily {
    field: FieldSpec,
    constraints: Vec<(String, Multilinear<usize>)>,
}

impl ConstraintFamily {
    pub fn new(field: FieldSpec) -> Self {
        ConstraintFamily { field, constraints: Vec::new() }
    }

    pub fn push(&mut self, label: impl Into<String>, f: Multilinear<usize>) {
        self.constraints.push((label.into(), f));
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn constraints(&self) -> &[(String, Multilinear<usize>)] {
        &self.constraints
    }

    pub fn universe(&self) -> BTreeSet<usize> {
        self.constraints.iter().flat_map(|(_, f)| f.variables()).collect()
    }

    /// `l(u)`: indices of the constraints involving `u`.
    pub fn occurrences(&self, u: usize) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&i| self.constraints[i].1.contains_var(&u))
            .collect()
    }

    /// `max_u |l(u)|`, zero for an empty universe.
    pub fn max_overlap(&self) -> usize {
        let mut count: BTreeMap<usize, usize> = BTreeMap::new();
        for (_, f) in &self.constraints {
            for v in f.variables() {
                *count.entry(v).or_default() += 1;
            }
        }
        count.values().copied().max().unwrap_or(0)
    }
}

/// Finds values `c_u` making every constraint nonzero.
///
/// Variables are fixed one at a time in increasing order. Each constraint
/// keeps a completion point at which its partially substituted form is
/// nonzero (initially: its least minimal-degree monomial set to one). Its
/// restriction to the current variable, with the rest taken from the
/// completion, is affine and nonzero, so it has at most one root; the first
/// field element that is a root of none of them is chosen. Needs
/// `|K| > max_u |l(u)|`.
pub fn select_nonvanishing_point(fam: &ConstraintFamily) -> Result<BTreeMap<usize, Scalar>, EngineError> {
    let field = fam.field;
    if let Some((label, _)) = fam.constraints.iter().find(|(_, f)| f.is_zero()) {
        return Err(EngineError::PreconditionViolated(format!("constraint {label} is identically zero")));
    }
    let overlap = fam.max_overlap();
    if !field.cardinality().exceeds(overlap as u64) {
        return Err(EngineError::PreconditionViolated(format!(
            "field of size {} does not exceed the maximal overlap {overlap}",
            field.cardinality()
        )));
    }

    let mut current: Vec<Multilinear<usize>> = fam.constraints.iter().map(|(_, f)| f.clone()).collect();
    let mut completions: Vec<BTreeMap<usize, Scalar>> = current
        .iter()
        .map(|f| {
            let (support, _) = f.min_support_term().expect("nonzero");
            support.iter().map(|&v| (v, field.one())).collect()
        })
        .collect();
    let completion_value = |c: &BTreeMap<usize, Scalar>, v: &usize| c.get(v).cloned().unwrap_or_else(|| field.zero());

    let mut point = BTreeMap::new();
    for u in fam.universe() {
        let involved: Vec<usize> = (0..current.len()).filter(|&i| current[i].contains_var(&u)).collect();
        let mut roots = Vec::with_capacity(involved.len());
        for &i in &involved {
            let (a, b) = current[i].split_on(&u);
            let a0 = a.evaluate(|v| completion_value(&completions[i], v));
            let b0 = b.evaluate(|v| completion_value(&completions[i], v));
            if !a0.is_zero() {
                roots.push(-&b0.checked_div(&a0)?);
            } else if b0.is_zero() {
                return Err(EngineError::InternalInconsistency(format!(
                    "restriction of {} vanishes at its completion",
                    fam.constraints[i].0
                )));
            }
        }
        let value = field
            .elements()
            .take(involved.len() + 1)
            .find(|c| !roots.contains(c))
            .ok_or_else(|| EngineError::InternalInconsistency(format!("no admissible value for variable {u}")))?;
        for &i in &involved {
            current[i] = current[i].substitute(&u, &value);
            completions[i].remove(&u);
            let check = current[i].evaluate(|v| completion_value(&completions[i], v));
            if check.is_zero() {
                return Err(EngineError::InternalInconsistency(format!(
                    "constraint {} vanished after fixing variable {u}",
                    fam.constraints[i].0
                )));
            }
        }
        point.insert(u, value);
    }

    for (label, f) in &fam.constraints {
        if f.evaluate(|v| point[v].clone()).is_zero() {
            return Err(EngineError::InternalInconsistency(format!("constraint {label} vanishes at the selected point")));
        }
    }
    Ok(point)
}

/// The window pairs `(s, e)` with `e = r + s + t`, `t >= 0`, `e <= n`
/// (1-based), ordered by `t` then `s`.
fn window_pairs(n: usize, r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for t in 0..n.saturating_sub(r) {
        for s in 1..=n - r - t {
            out.push((s, r + s + t));
        }
    }
    out
}

fn check_case_guard(field: FieldSpec, n: usize, r: usize) -> Result<(), EngineError> {
    if let Some(b) = required_field_size(n, r).case_bound {
        let card = field.cardinality();
        if !card.exceeds(b) {
            return Err(EngineError::GuardViolated { required_exceeds: b, field_card: card });
        }
    }
    Ok(())
}

/// Diagonal vectors `b_1, .., b_n` in `K^m` such that the coefficient
/// polynomial of `tuple` (length `r`) is nonzero at
/// `(b_s, .., b_{r+s-1}, b_{r+s+t})` for every window with
/// `1 <= s < r + s + t <= n`.
pub fn select_diagonal_tuples(p: &NcLinearPoly, tuple: &[usize], n: usize) -> Result<Vec<Vec<Scalar>>, EngineError> {
    let r = tuple.len();
    if r == 0 || r >= n {
        return Err(EngineError::PreconditionViolated(format!(
            "tuple length {r} must lie in 1..={}",
            n.saturating_sub(1)
        )));
    }
    check_case_guard(p.field(), n, r)?;
    let m = p.num_vars();
    let f = p.coefficient_polynomial(tuple)?;
    if f.is_zero() {
        return Err(EngineError::PreconditionViolated(format!(
            "coefficient polynomial of {tuple:?} is zero"
        )));
    }
    let mut fam = ConstraintFamily::new(p.field());
    for (s, e) in window_pairs(n, r) {
        let g = f.poly.map_vars(|sv| {
            let block = if sv.slot <= r { s + sv.slot - 1 } else { e };
            (block - 1) * m + (sv.var - 1)
        });
        fam.push(format!("f[{s},{e}]"), g);
    }
    let point = select_nonvanishing_point(&fam)?;
    Ok((0..n)
        .map(|j| {
            (0..m)
                .map(|v| point.get(&(j * m + v)).cloned().unwrap_or_else(|| p.field().zero()))
                .collect()
        })
        .collect())
}

/// Scalars with `p(a) = target`, from the least minimal support `S` with
/// `alpha_S != 0`: the first index of `S` gets `alpha_S^{-1} target`, the
/// rest of `S` gets one, everything else zero.
pub fn scalar_preimage(p: &NcLinearPoly, target: &Scalar) -> Result<Vec<Scalar>, EngineError> {
    let field = p.field();
    if target.field() != field {
        return Err(ScalarError::FieldMismatch(target.field(), field).into());
    }
    let alphas = p.alpha_sums();
    let (support, alpha) = alphas
        .iter()
        .min_by(|a, b| shortlex(a.0, b.0))
        .ok_or(EngineError::OrderPositive)?;
    let mut a = vec![field.zero(); p.num_vars()];
    for &i in support {
        a[i - 1] = field.one();
    }
    a[support[0] - 1] = target.checked_div(alpha)?;
    Ok(a)
}

/// An explicit preimage and its check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessBundle {
    pub assignment: Vec<UtMatrix>,
    pub target: UtMatrix,
    /// `p(assignment) - target`; always zero for a returned bundle.
    pub residual: UtMatrix,
    pub case: TheoremCase,
}

/// Builds `u_1, .., u_m` with `p(u_1, .., u_m) = target`.
pub fn preimage(p: &NcLinearPoly, target: &UtMatrix) -> Result<WitnessBundle, EngineError> {
    let field = p.field();
    if target.field() != field {
        return Err(MatrixError::FieldMismatch(target.field(), field).into());
    }
    let n = target.dim();
    let class = classify_image(p, n)?;
    if !class.stratum.contains(target)? {
        return Err(EngineError::TargetNotInImage(class.stratum));
    }
    if let GuardStatus::Violated { required_exceeds, field_card } = class.guard {
        return Err(EngineError::GuardViolated { required_exceeds, field_card });
    }

    let m = p.num_vars();
    let assignment = if target.is_zero() {
        vec![UtMatrix::zero(n, field); m]
    } else {
        match class.case {
            TheoremCase::FullAlgebra => full_algebra_preimage(p, target)?,
            TheoremCase::StrictlyUpper => {
                strictly_upper_preimage(p, class.witness_tuple.as_deref().expect("order >= 1"), target)?
            }
            TheoremCase::Intermediate => {
                intermediate_preimage(p, class.witness_tuple.as_deref().expect("order >= 2"), target)?
            }
            TheoremCase::Corner => corner_preimage(p, target)?,
            TheoremCase::Zero => unreachable!("nonzero target in the zero stratum"),
        }
    };

    let value = evaluate(p, &assignment)?;
    let residual = value.sub(target)?;
    if !residual.is_zero() {
        return Err(EngineError::InternalInconsistency(format!(
            "constructed tuple misses the target (case {})",
            class.case.label()
        )));
    }
    Ok(WitnessBundle { assignment, target: target.clone(), residual, case: class.case })
}

/// Commuting assignment: `alpha_S^{-1} target` at the first index of the
/// minimal support `S`, identities on the rest of `S`, zeros elsewhere.
fn full_algebra_preimage(p: &NcLinearPoly, target: &UtMatrix) -> Result<Vec<UtMatrix>, EngineError> {
    let field = p.field();
    let n = target.dim();
    let alphas = p.alpha_sums();
    let (support, alpha) = alphas
        .iter()
        .min_by(|a, b| shortlex(a.0, b.0))
        .ok_or(EngineError::OrderPositive)?;
    let mut u = vec![UtMatrix::zero(n, field); p.num_vars()];
    for &i in support {
        u[i - 1] = UtMatrix::identity(n, field);
    }
    u[support[0] - 1] = target.scale(&alpha.inv()?)?;
    Ok(u)
}

/// One unknown entry and the output entry it is solved against.
#[derive(Debug, Clone, Copy)]
struct Unknown {
    matrix: usize,
    entry: (usize, usize),
    goal: (usize, usize),
}

/// Solves the unknowns in order. Every output entry is affine in each input
/// entry, so the coefficient of the current unknown in its goal entry is the
/// difference of two evaluations; later unknowns are still zero at that
/// point and must not feed back into earlier goals.
fn forward_substitute(
    p: &NcLinearPoly,
    u: &mut [UtMatrix],
    unknowns: &[Unknown],
    target: &UtMatrix,
) -> Result<(), EngineError> {
    let field = p.field();
    for x in unknowns {
        let (i, j) = x.entry;
        u[x.matrix].set(i, j, field.zero());
        let v0 = evaluate(p, u)?.entry(x.goal.0, x.goal.1).clone();
        u[x.matrix].set(i, j, field.one());
        let v1 = evaluate(p, u)?.entry(x.goal.0, x.goal.1).clone();
        let pivot = &v1 - &v0;
        if pivot.is_zero() {
            return Err(EngineError::InternalInconsistency(format!(
                "zero pivot for entry ({i}, {j}) of matrix {}",
                x.matrix + 1
            )));
        }
        let want = target.entry(x.goal.0, x.goal.1);
        let value = (want - &v0).checked_div(&pivot)?;
        u[x.matrix].set(i, j, value);
    }
    Ok(())
}

fn with_diagonals(n: usize, m: usize, field: FieldSpec, diag: &[Vec<Scalar>]) -> Vec<UtMatrix> {
    let mut u = vec![UtMatrix::zero(n, field); m];
    for (j, vec) in diag.iter().enumerate() {
        for (i, c) in vec.iter().enumerate() {
            u[i].set(j, j, c.clone());
        }
    }
    u
}

/// Order one: diagonals keep `p_{i0}(c_s, c_t)` nonzero for all `s < t`,
/// and the strictly upper entries of `u_{i0}` are solved by increasing gap.
fn strictly_upper_preimage(p: &NcLinearPoly, tuple: &[usize], target: &UtMatrix) -> Result<Vec<UtMatrix>, EngineError> {
    let n = target.dim();
    let i0 = tuple[0] - 1;
    let diag = select_diagonal_tuples(p, tuple, n)?;
    let mut u = with_diagonals(n, p.num_vars(), p.field(), &diag);
    let mut unknowns = Vec::new();
    for gap in 1..n {
        for s in 0..n - gap {
            unknowns.push(Unknown { matrix: i0, entry: (s, s + gap), goal: (s, s + gap) });
        }
    }
    forward_substitute(p, &mut u, &unknowns, target)?;
    Ok(u)
}

/// Order `r` with `2 <= r <= n - 2`.
///
/// Diagonals are chosen as in the order-one case. For each window `(s, e)`
/// the coefficient of `x_{r+s-1, e}^(i_r)` in output entry `(s, e)` is the
/// multilinear form
/// `h_{s,e} = sum over tuples ending in i_r of p_tuple(b_s..b_{r+s-1}, b_e) * x_{s,s+1}^(i_1) .. x_{r+s-2,r+s-1}^(i_{r-1})`
/// in superdiagonal entries. Those entries are fixed so that every
/// `h_{s,e}` is nonzero, then the unknowns `x_{r+s-1,e}^(i_r)` are solved
/// in the order `(r, r+1) < .. < (n-1, n) < (r, r+2) < .. < (r, n)`.
fn intermediate_preimage(p: &NcLinearPoly, tuple: &[usize], target: &UtMatrix) -> Result<Vec<UtMatrix>, EngineError> {
    let n = target.dim();
    let m = p.num_vars();
    let field = p.field();
    let r = tuple.len();
    let last = tuple[r - 1];
    let diag = select_diagonal_tuples(p, tuple, n)?;

    // Coefficient polynomials of length r whose last index is i_r.
    let coeffs: Vec<(Vec<usize>, _)> = p
        .coefficient_polynomials(r)
        .into_iter()
        .filter(|(t, _)| t.len() == r && t[r - 1] == last)
        .collect();

    // Superdiagonal variable (j, i): entry (j, j+1) of u_i, 1-based, id (j-1)*m + (i-1).
    let mut fam = ConstraintFamily::new(field);
    let windows = window_pairs(n, r);
    for &(s, e) in &windows {
        let mut point: Vec<&[Scalar]> = (s..s + r).map(|j| diag[j - 1].as_slice()).collect();
        point.push(diag[e - 1].as_slice());
        let mut h = Multilinear::zero(field);
        for (t, f) in &coeffs {
            let c = f.evaluate(&point).expect("slot shape");
            let vars: Vec<usize> = (0..r - 1).map(|c| (s + c - 1) * m + (t[c] - 1)).collect();
            h.add_term(vars, c);
        }
        if h.is_zero() {
            return Err(EngineError::InternalInconsistency(format!("h[{s},{e}] is identically zero")));
        }
        fam.push(format!("h[{s},{e}]"), h);
    }
    let path = select_nonvanishing_point(&fam)?;

    let mut u = with_diagonals(n, m, field, &diag);
    for (&id, c) in &path {
        let (j, i) = (id / m + 1, id % m);
        u[i].set(j - 1, j, c.clone());
    }
    let unknowns: Vec<Unknown> = windows
        .iter()
        .map(|&(s, e)| Unknown { matrix: last - 1, entry: (r + s - 2, e - 1), goal: (s - 1, e - 1) })
        .collect();
    forward_substitute(p, &mut u, &unknowns, target)?;
    Ok(u)
}

/// Entry `(row, col)` of a matrix in the tuple (`matrix` is 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntryVar {
    pub matrix: usize,
    pub row: usize,
    pub col: usize,
}

/// Entry `(s, t)` of `p(u_1, .., u_m)` as a commutative multilinear
/// polynomial in the entries of the `u_i`, expanded over all
/// nondecreasing chains `s = j_1 <= .. <= j_{k+1} = t`.
pub fn entry_polynomial(p: &NcLinearPoly, n: usize, s: usize, t: usize) -> Multilinear<EntryVar> {
    fn walk(
        word: &[usize],
        pos: usize,
        at: usize,
        t: usize,
        vars: &mut Vec<EntryVar>,
        coef: &Scalar,
        out: &mut Multilinear<EntryVar>,
    ) {
        if pos == word.len() {
            if at == t {
                out.add_term(vars.clone(), coef.clone());
            }
            return;
        }
        for next in at..=t {
            vars.push(EntryVar { matrix: word[pos] - 1, row: at, col: next });
            walk(word, pos + 1, next, t, vars, coef, out);
            vars.pop();
        }
    }
    let mut out = Multilinear::zero(p.field());
    if s > t || t >= n {
        return out;
    }
    for (word, c) in p.terms() {
        walk(word.vars(), 0, s, t, &mut Vec::new(), c, &mut out);
    }
    out
}

/// Order `n - 1`: only the corner entry survives, and it is a nonzero
/// commutative multilinear polynomial in the entries. Its least
/// minimal-degree monomial gives a preimage for any corner value.
fn corner_preimage(p: &NcLinearPoly, target: &UtMatrix) -> Result<Vec<UtMatrix>, EngineError> {
    let n = target.dim();
    let field = p.field();
    let corner = entry_polynomial(p, n, 0, n - 1);
    let (support, alpha) = corner
        .min_support_term()
        .ok_or_else(|| EngineError::InternalInconsistency("corner entry polynomial is zero".into()))?;
    let mut u = vec![UtMatrix::zero(n, field); p.num_vars()];
    for v in support {
        u[v.matrix].set(v.row, v.col, field.one());
    }
    let first = support[0];
    let value = target.entry(0, n - 1).checked_div(alpha)?;
    u[first.matrix].set(first.row, first.col, value);
    Ok(u)
}
