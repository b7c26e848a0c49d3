//! Commutative polynomials of degree at most one in every variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::scalar::{FieldSpec, Scalar};

/// A multilinear commutative polynomial over variables of type `V`.
///
/// Each term is keyed by its strictly increasing list of variables; the
/// empty key is the constant term. Stored coefficients are never zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multilinear<V: Ord + Clone> {
    field: FieldSpec,
    terms: BTreeMap<Vec<V>, Scalar>,
}

impl<V: Ord + Clone> Multilinear<V> {
    pub fn zero(field: FieldSpec) -> Self {
        Multilinear { field, terms: BTreeMap::new() }
    }

    pub fn constant(c: Scalar) -> Self {
        let mut p = Self::zero(c.field());
        p.add_term(Vec::new(), c);
        p
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Adds `coef * prod(vars)`. Panics if a variable repeats, since the
    /// result would not be multilinear.
    pub fn add_term(&mut self, mut vars: Vec<V>, coef: Scalar) {
        if coef.is_zero() {
            return;
        }
        vars.sort();
        assert!(
            vars.windows(2).all(|w| w[0] != w[1]),
            "repeated variable in multilinear term"
        );
        match self.terms.get_mut(&vars) {
            Some(c) => {
                let sum = &*c + &coef;
                if sum.is_zero() {
                    self.terms.remove(&vars);
                } else {
                    *c = sum;
                }
            }
            None => {
                self.terms.insert(vars, coef);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[V], &Scalar)> {
        self.terms.iter().map(|(k, c)| (k.as_slice(), c))
    }

    pub fn variables(&self) -> BTreeSet<V> {
        self.terms.keys().flatten().cloned().collect()
    }

    pub fn contains_var(&self, v: &V) -> bool {
        self.terms.keys().any(|k| k.binary_search(v).is_ok())
    }

    /// Evaluates with the value of each variable supplied by `value`.
    pub fn evaluate<F: FnMut(&V) -> Scalar>(&self, mut value: F) -> Scalar {
        let mut acc = self.field.zero();
        for (vars, c) in &self.terms {
            let mut t = c.clone();
            for v in vars {
                if t.is_zero() {
                    break;
                }
                t = &t * &value(v);
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Substitutes `value` for `var`.
    pub fn substitute(&self, var: &V, value: &Scalar) -> Self {
        let mut out = Self::zero(self.field);
        for (vars, c) in &self.terms {
            match vars.binary_search(var) {
                Ok(pos) => {
                    let mut rest = vars.clone();
                    rest.remove(pos);
                    out.add_term(rest, c * value);
                }
                Err(_) => out.add_term(vars.clone(), c.clone()),
            }
        }
        out
    }

    /// Splits `self = a * var + b` with `a`, `b` free of `var`.
    pub fn split_on(&self, var: &V) -> (Self, Self) {
        let mut a = Self::zero(self.field);
        let mut b = Self::zero(self.field);
        for (vars, c) in &self.terms {
            match vars.binary_search(var) {
                Ok(pos) => {
                    let mut rest = vars.clone();
                    rest.remove(pos);
                    a.add_term(rest, c.clone());
                }
                Err(_) => b.add_term(vars.clone(), c.clone()),
            }
        }
        (a, b)
    }

    /// The lexicographically least term among those of minimal degree.
    ///
    /// Setting its variables to one and all others to zero evaluates the
    /// polynomial to exactly that term's coefficient.
    pub fn min_support_term(&self) -> Option<(&[V], &Scalar)> {
        self.terms
            .iter()
            .min_by(|(a, _), (b, _)| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
            .map(|(k, c)| (k.as_slice(), c))
    }

    /// Renames variables; `rename` must be injective on every term.
    pub fn map_vars<W: Ord + Clone, F: FnMut(&V) -> W>(&self, mut rename: F) -> Multilinear<W> {
        let mut out = Multilinear::zero(self.field);
        for (vars, c) in &self.terms {
            out.add_term(vars.iter().map(&mut rename).collect(), c.clone());
        }
        out
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.field);
        for (vars, k) in &self.terms {
            out.add_term(vars.clone(), k * c);
        }
        out
    }

    /// True if `self == c * other` for some scalar `c`, returned when found.
    pub fn ratio_to(&self, other: &Self) -> Option<Scalar> {
        if other.is_zero() {
            return self.is_zero().then(|| self.field.zero());
        }
        if self.terms.len() != other.terms.len() {
            return None;
        }
        let (k0, c0) = other.terms.iter().next()?;
        let ratio = self.terms.get(k0)?.checked_div(c0).ok()?;
        let ok = other
            .terms
            .iter()
            .all(|(k, c)| self.terms.get(k).is_some_and(|s| *s == c * &ratio));
        ok.then_some(ratio)
    }
}

impl<V: Ord + Clone + fmt::Display> fmt::Display for Multilinear<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (vars, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if vars.is_empty() || !c.is_one() {
                write!(f, "{c}")?;
                if !vars.is_empty() {
                    f.write_str("*")?;
                }
            }
            let names: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
            f.write_str(&names.join("*"))?;
        }
        Ok(())
    }
}

/// Variable `z_var^(slot)`: copy `slot` of the `var`-th coordinate, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotVar {
    pub slot: usize,
    pub var: usize,
}

impl fmt::Display for SlotVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}^({})", self.var, self.slot)
    }
}

/// A multilinear polynomial in `slots` copies of an `m`-vector of variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommMultilinearPoly {
    pub slots: usize,
    pub vars_per_slot: usize,
    pub poly: Multilinear<SlotVar>,
}

impl CommMultilinearPoly {
    pub fn zero(slots: usize, vars_per_slot: usize, field: FieldSpec) -> Self {
        CommMultilinearPoly { slots, vars_per_slot, poly: Multilinear::zero(field) }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    /// Evaluates at one `m`-vector per slot.
    pub fn evaluate(&self, point: &[&[Scalar]]) -> Option<Scalar> {
        if point.len() != self.slots || point.iter().any(|v| v.len() != self.vars_per_slot) {
            return None;
        }
        Some(self.poly.evaluate(|sv| point[sv.slot - 1][sv.var - 1].clone()))
    }
}

impl fmt::Display for CommMultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> FieldSpec {
        FieldSpec::Prime(5)
    }

    #[test]
    fn cancellation_and_substitution() {
        let k = f5();
        let mut p: Multilinear<usize> = Multilinear::zero(k);
        p.add_term(vec![2, 1], k.from_i64(3));
        p.add_term(vec![1, 2], k.from_i64(2));
        assert!(p.is_zero());
        p.add_term(vec![1], k.one());
        p.add_term(vec![2], k.from_i64(-1));
        let s = p.substitute(&1, &k.from_i64(4));
        assert_eq!(s.evaluate(|_| k.from_i64(4)), k.zero());
        let (a, b) = p.split_on(&2);
        assert_eq!(a, Multilinear::constant(k.from_i64(-1)));
        assert_eq!(b.variables().into_iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn min_support_and_ratio() {
        let k = FieldSpec::Rational;
        let mut p: Multilinear<usize> = Multilinear::zero(k);
        p.add_term(vec![1, 2], k.from_i64(2));
        p.add_term(vec![3], k.from_i64(5));
        p.add_term(vec![2], k.from_i64(7));
        let (vars, c) = p.min_support_term().unwrap();
        assert_eq!(vars, &[2]);
        assert_eq!(*c, k.from_i64(7));
        let q = p.scale(&k.from_i64(-3));
        assert_eq!(q.ratio_to(&p), Some(k.from_i64(-3)));
        let mut r = p.clone();
        r.add_term(vec![4], k.one());
        assert_eq!(r.ratio_to(&p), None);
    }

    #[test]
    #[should_panic(expected = "repeated variable")]
    fn repeated_variable_panics() {
        let mut p: Multilinear<usize> = Multilinear::zero(f5());
        p.add_term(vec![1, 1], f5().one());
    }
}
