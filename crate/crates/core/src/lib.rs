//! Exact decision machinery for the quasi-isometry classification of
//! finitely presented, nonpolycyclic abelian-by-cyclic groups, plus a
//! numeric laboratory for the dynamics of the associated solvable Lie
//! groups.
//!
//! The crate is organized around one invariant: the *absolute Jordan
//! form* of an invertible rational matrix, the multiset of
//! (eigenvalue modulus, Jordan block size) pairs in a canonical order.
//! Everything exact lives over arbitrary-precision rationals and
//! certified real algebraic numbers; the dynamics side works at
//! configurable high precision.

pub mod algebraic;
pub mod classify;
pub mod dynamics;
pub mod factor;
pub mod hp;
pub mod jordan;
pub mod matrix;
pub mod poly;
pub mod roots;
pub mod serial;
pub mod treespace;
pub mod util;

pub use algebraic::{algebraic_equal, AlgebraicReal};
pub use classify::{
    classify, multiplicative_dependence, Certificate, ClassificationVerdict, DependencePair,
};
pub use jordan::{absolute_jordan_form, ajf_power, AbsoluteJordanForm, AjfBlock};
pub use matrix::RationalMatrix;
pub use poly::IntPolynomial;

/// Exact rational scalar used throughout the crate.
pub type Rational = num_rational::BigRational;
