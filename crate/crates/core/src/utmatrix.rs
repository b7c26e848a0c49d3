//! Upper triangular matrices, the strata `UT_n^(t)`, and evaluation of
//! linear polynomials on matrix tuples.
//!
//! Indices are 0-based in this API; `E(i, j)` in the docs below means the
//! matrix unit with a one at row `i`, column `j`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ncpoly::{NcLinearPoly, PolyError};
use crate::scalar::{FieldSpec, Scalar, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(FieldSpec, FieldSpec),
    #[error("expected {expected} matrices, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("entry ({0}, {1}) is below the diagonal")]
    BelowDiagonal(usize, usize),
    #[error("stratum index {0} is out of range (must be >= -1)")]
    BadStratum(i64),
    #[error("operation unsupported: {0}")]
    Unsupported(String),
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Dense row-major storage of the upper triangle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UtMatrix {
    n: usize,
    field: FieldSpec,
    data: Vec<Scalar>,
}

/// Number of stored entries of an `n x n` upper triangular matrix.
pub fn triangle_len(n: usize) -> usize {
    n * (n + 1) / 2
}

#[inline]
fn slot(n: usize, i: usize, j: usize) -> usize {
    // rows 0..i hold n + (n-1) + .. + (n-i+1) entries
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

impl UtMatrix {
    pub fn zero(n: usize, field: FieldSpec) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        UtMatrix { n, field, data: vec![field.zero(); triangle_len(n)] }
    }

    pub fn identity(n: usize, field: FieldSpec) -> Self {
        let mut m = Self::zero(n, field);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// The matrix unit `E(i, j)`, `i <= j`.
    pub fn unit(n: usize, field: FieldSpec, i: usize, j: usize) -> Self {
        let mut m = Self::zero(n, field);
        m.set(i, j, field.one());
        m
    }

    /// Builds a matrix from its upper-triangle entries in row-major order.
    pub fn from_upper(n: usize, field: FieldSpec, data: Vec<Scalar>) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::EmptyDimension);
        }
        if data.len() != triangle_len(n) {
            return Err(MatrixError::Malformed(format!(
                "expected {} upper-triangle entries, got {}",
                triangle_len(n),
                data.len()
            )));
        }
        if let Some(s) = data.iter().find(|s| s.field() != field) {
            return Err(MatrixError::FieldMismatch(s.field(), field));
        }
        Ok(UtMatrix { n, field, data })
    }

    /// Builds a matrix from full rows; entries below the diagonal must be zero.
    pub fn from_rows(field: FieldSpec, rows: &[Vec<Scalar>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::EmptyDimension);
        }
        let mut m = Self::zero(n, field);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::Malformed(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, x) in row.iter().enumerate() {
                if x.field() != field {
                    return Err(MatrixError::FieldMismatch(x.field(), field));
                }
                if j < i {
                    if !x.is_zero() {
                        return Err(MatrixError::BelowDiagonal(i, j));
                    }
                } else {
                    m.set(i, j, x.clone());
                }
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Entry `(i, j)`; zero below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        if j < i {
            self.field.zero()
        } else {
            self.data[slot(self.n, i, j)].clone()
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        assert!(i <= j, "entry below the diagonal");
        &self.data[slot(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        assert!(i <= j && j < self.n, "entry ({i}, {j}) outside the upper triangle");
        debug_assert_eq!(value.field(), self.field);
        let k = slot(self.n, i, j);
        self.data[k] = value;
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper(&self) -> &[Scalar] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    fn check_compatible(&self, other: &UtMatrix) -> Result<(), MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch(self.n, other.n));
        }
        if self.field != other.field {
            return Err(MatrixError::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    pub fn add(&self, other: &UtMatrix) -> Result<UtMatrix, MatrixError> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(UtMatrix { n: self.n, field: self.field, data })
    }

    pub fn sub(&self, other: &UtMatrix) -> Result<UtMatrix, MatrixError> {
        self.check_compatible(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(UtMatrix { n: self.n, field: self.field, data })
    }

    pub fn mul(&self, other: &UtMatrix) -> Result<UtMatrix, MatrixError> {
        self.check_compatible(other)?;
        let n = self.n;
        let mut out = UtMatrix::zero(n, self.field);
        for i in 0..n {
            for j in i..n {
                let mut acc = self.field.zero();
                for k in i..=j {
                    let a = self.entry(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    let b = other.entry(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Result<UtMatrix, MatrixError> {
        if c.field() != self.field {
            return Err(MatrixError::FieldMismatch(c.field(), self.field));
        }
        let data = self.data.iter().map(|a| a * c).collect();
        Ok(UtMatrix { n: self.n, field: self.field, data })
    }

    /// Rows of serialized scalars, lower triangle filled with `"0"`.
    pub fn to_rows(&self) -> Vec<Vec<String>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_text()).collect())
            .collect()
    }

    /// Parses the JSON array-of-rows form. Scalars may be strings or integers.
    pub fn from_json(field: FieldSpec, value: &serde_json::Value) -> Result<Self, MatrixError> {
        let rows = value
            .as_array()
            .ok_or_else(|| MatrixError::Malformed("expected an array of rows".into()))?;
        let mut parsed = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row
                .as_array()
                .ok_or_else(|| MatrixError::Malformed("expected each row to be an array".into()))?;
            let mut out = Vec::with_capacity(row.len());
            for x in row {
                let s = match x {
                    serde_json::Value::String(s) => field.parse_scalar(s)?,
                    serde_json::Value::Number(n) => field.parse_scalar(&n.to_string())?,
                    _ => return Err(MatrixError::Malformed(format!("bad scalar {x}"))),
                };
                out.push(s);
            }
            parsed.push(out);
        }
        Self::from_rows(field, &parsed)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_rows()).expect("rows serialize")
    }

    /// Diagonal vector `(a_jj^(1), .., a_jj^(m))` of a tuple at position `j`.
    pub fn diagonal_vector(tuple: &[UtMatrix], j: usize) -> Vec<Scalar> {
        tuple.iter().map(|u| u.entry(j, j).clone()).collect()
    }
}

impl fmt::Display for UtMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = self.to_rows();
        let width = rows.iter().flatten().map(String::len).max().unwrap_or(1);
        for (i, row) in rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// The subspace `UT_n^(t)`: matrices whose entries `(i, j)` vanish whenever
/// `j - i <= t`. `t = -1` is all of `UT_n`; `t >= n - 1` is `{0}` and is
/// stored as `t = n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Stratum {
    n: usize,
    t: i64,
}

impl Stratum {
    pub fn new(n: usize, t: i64) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::EmptyDimension);
        }
        if t < -1 {
            return Err(MatrixError::BadStratum(t));
        }
        Ok(Stratum { n, t: t.min(n as i64 - 1) })
    }

    pub fn full(n: usize) -> Self {
        Stratum { n, t: -1 }
    }

    pub fn zero_space(n: usize) -> Self {
        Stratum { n, t: n as i64 - 1 }
    }

    pub fn dim_n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn is_zero_space(&self) -> bool {
        self.t >= self.n as i64 - 1
    }

    /// Whether entry `(i, j)` (with `i <= j`) is free in this stratum.
    pub fn is_free(&self, i: usize, j: usize) -> bool {
        (j as i64 - i as i64) > self.t
    }

    pub fn contains(&self, a: &UtMatrix) -> Result<bool, MatrixError> {
        if a.dim() != self.n {
            return Err(MatrixError::DimensionMismatch(a.dim(), self.n));
        }
        for i in 0..self.n {
            for j in i..self.n {
                if !self.is_free(i, j) && !a.entry(i, j).is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Free positions `(i, j)` in row-major order.
    pub fn free_positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                if self.is_free(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// `#{(i, j) : j - i > t}`.
    pub fn dim(&self) -> usize {
        self.free_positions().len()
    }

    /// All members over a prime field, in mixed-radix order over the free
    /// positions (first position varies slowest).
    pub fn enumerate(&self, field: FieldSpec) -> Result<StratumMembers, MatrixError> {
        let FieldSpec::Prime(q) = field else {
            return Err(MatrixError::Unsupported("enumeration over the rationals".into()));
        };
        let positions = self.free_positions();
        let total = (q as u128).checked_pow(positions.len() as u32);
        Ok(StratumMembers {
            n: self.n,
            field,
            q,
            digits: vec![0; positions.len()],
            positions,
            remaining: total.unwrap_or(u128::MAX),
        })
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t == -1 {
            write!(f, "UT_{}", self.n)
        } else if self.is_zero_space() {
            f.write_str("{0}")
        } else {
            write!(f, "UT_{}^({})", self.n, self.t)
        }
    }
}

/// Iterator from [`Stratum::enumerate`].
#[derive(Debug, Clone)]
pub struct StratumMembers {
    n: usize,
    field: FieldSpec,
    q: u64,
    positions: Vec<(usize, usize)>,
    digits: Vec<u64>,
    remaining: u128,
}

impl Iterator for StratumMembers {
    type Item = UtMatrix;

    fn next(&mut self) -> Option<UtMatrix> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let mut m = UtMatrix::zero(self.n, self.field);
        for (&(i, j), &d) in self.positions.iter().zip(&self.digits) {
            m.set(i, j, Scalar::Prime { value: d, modulus: self.q });
        }
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.q {
                break;
            }
            *d = 0;
        }
        Some(m)
    }
}

fn check_tuple(p: &NcLinearPoly, u: &[UtMatrix]) -> Result<usize, MatrixError> {
    if u.len() != p.num_vars() {
        return Err(MatrixError::ArityMismatch { expected: p.num_vars(), got: u.len() });
    }
    let n = u.first().map(UtMatrix::dim).ok_or(MatrixError::EmptyDimension)?;
    for a in u {
        if a.dim() != n {
            return Err(MatrixError::DimensionMismatch(a.dim(), n));
        }
        if a.field() != p.field() {
            return Err(MatrixError::FieldMismatch(a.field(), p.field()));
        }
    }
    Ok(n)
}

/// `p(u_1, .., u_m)` by direct matrix products.
pub fn evaluate(p: &NcLinearPoly, u: &[UtMatrix]) -> Result<UtMatrix, MatrixError> {
    let n = check_tuple(p, u)?;
    let field = p.field();
    let mut acc = UtMatrix::zero(n, field);
    for (word, c) in p.terms() {
        let vars = word.vars();
        let mut prod = u[vars[0] - 1].clone();
        for &v in &vars[1..] {
            prod = prod.mul(&u[v - 1])?;
        }
        acc = acc.add(&prod.scale(c)?)?;
    }
    Ok(acc)
}

/// `p(u_1, .., u_m)` entry by entry from the coefficient polynomials.
///
/// The diagonal entry `(s, s)` is `p` evaluated on the diagonal vector at
/// `s`. An entry `(s, t)` with `s < t` is the sum, over strictly increasing
/// chains `s = j_1 < .. < j_{k+1} = t` and tuples `(i_1, .., i_k)`, of
/// `p_{i_1..i_k}` at the diagonal vectors along the chain times the product
/// of the off-diagonal entries `a_{j_c j_{c+1}}^(i_c)`.
pub fn evaluate_by_entry_formula(p: &NcLinearPoly, u: &[UtMatrix]) -> Result<UtMatrix, MatrixError> {
    let n = check_tuple(p, u)?;
    let field = p.field();
    let diag: Vec<Vec<Scalar>> = (0..n).map(|j| UtMatrix::diagonal_vector(u, j)).collect();
    let coeffs = p.coefficient_polynomials(n.saturating_sub(1));
    let mut out = UtMatrix::zero(n, field);
    for (s, d) in diag.iter().enumerate() {
        out.set(s, s, p.eval_scalar(d)?);
    }
    for s in 0..n {
        for t in s + 1..n {
            let mut acc = field.zero();
            for (tuple, f) in &coeffs {
                let k = tuple.len();
                if k > t - s {
                    continue;
                }
                for interior in crate::ncpoly::Combinations::new(t - s - 1, k - 1) {
                    let mut chain = Vec::with_capacity(k + 1);
                    chain.push(s);
                    chain.extend(interior.iter().map(|&x| s + 1 + x));
                    chain.push(t);
                    let mut prod = field.one();
                    for (c, &i) in tuple.iter().enumerate() {
                        prod = &prod * u[i - 1].entry(chain[c], chain[c + 1]);
                        if prod.is_zero() {
                            break;
                        }
                    }
                    if prod.is_zero() {
                        continue;
                    }
                    let point: Vec<&[Scalar]> = chain.iter().map(|&j| diag[j].as_slice()).collect();
                    let value = f.evaluate(&point).expect("slot shape");
                    acc = &acc + &(&value * &prod);
                }
            }
            out.set(s, t, acc);
        }
    }
    Ok(out)
}
