//! Elementary symmetric polynomial dominance order.
//!
//! `x ≺_E y` compares two positive vectors through their elementary
//! symmetric polynomials. This crate computes the order, evaluates the
//! functionals known to be monotone under it (sum of squared logarithms,
//! Rényi and Shannon entropy, subentropy, divided differences of fractional
//! powers, and positive definite matrix analogues), samples comparable
//! pairs, and runs seeded verification batches over all of them.

pub mod error;
pub mod functionals;
pub mod order;
pub mod quadrature;
pub mod roots;
pub mod sampling;
pub mod spd;
pub mod verify;

pub use error::{Error, Result};
pub use order::{
    compare, esym_all, gen_poly_one_plus_t, gen_poly_t_plus_x, verify_generating_inequality,
    ComparisonTolerance, Direction, DominanceVerdict, ESignature, PositiveVector, VerdictKind,
};
