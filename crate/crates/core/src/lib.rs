//! Images of linear noncommutative polynomials on upper triangular matrix
//! algebras.
//!
//! A linear polynomial has degree at most one in each variable and zero
//! constant term. For such a `p` and `n >= 2` the image `p(UT_n)` is one of
//! the subspaces `UT_n^(t)`, with `t = ord(p) - 1`, whenever the ground field
//! is large enough. This crate computes `ord(p)`, classifies the image,
//! builds explicit preimages of arbitrary targets, and checks all of this
//! against an independent enumeration oracle.
//!
//! ```
//! use utimage::{parse_polynomial, FieldSpec, classify_image};
//!
//! let p = parse_polynomial("x1*x2 - x2*x1", 2, FieldSpec::Prime(5)).unwrap();
//! let c = classify_image(&p, 3).unwrap();
//! assert_eq!(c.order, 1);
//! assert_eq!(c.stratum.t(), 0);
//! ```

pub mod cli;
pub mod engine;
pub mod multilinear;
pub mod ncpoly;
pub mod oracle;
pub mod parse;
pub mod report;
pub mod scalar;
pub mod utmatrix;

pub use engine::{
    classify_image, preimage, required_field_size, scalar_preimage, select_diagonal_tuples,
    select_nonvanishing_point, ConstraintFamily, EngineError, FieldBounds, GuardStatus,
    ImageClassification, TheoremCase, WitnessBundle,
};
pub use multilinear::{CommMultilinearPoly, Multilinear, SlotVar};
pub use ncpoly::{eval_comm_poly, Monomial, NcLinearPoly, OrderResult, PolyError};
pub use oracle::{
    brute_force_image, is_identity_of, order_bruteforce, sampled_verification, verify, BruteOrder, Counterexample,
    CounterexampleKind, ImageSet, Mode, Observed, OracleError, VerificationPlan, VerificationReport,
};
pub use parse::parse_polynomial;
pub use scalar::{Cardinality, FieldSpec, Scalar, ScalarError};
pub use utmatrix::{evaluate, evaluate_by_entry_formula, MatrixError, Stratum, UtMatrix};
