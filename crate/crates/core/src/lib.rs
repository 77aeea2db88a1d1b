//! Numerical engine for torse-forming vector fields on model spaces.
//!
//! The crate builds the Euclidean, spherical and hyperbolic model spaces (plus
//! twisted products), evaluates closed-form vector fields on them with exact
//! forward-mode derivatives, decomposes `∇_X V = fX + ω(X)V` pointwise to
//! classify fields as concircular, recurrent, torqued or anti-torqued, and
//! checks the local identities that obstruct global torqued and anti-torqued
//! fields on hyperbolic space.

pub mod catalog;
pub mod classify;
pub mod diff;
pub mod dual;
pub mod error;
pub mod field;
pub mod linalg;
pub mod sampling;
pub mod space;
pub mod tensor;
pub mod theorem;

pub use diff::Differentiation;
pub use error::{GeomError, Result};
pub use space::ModelSpace;
pub use tensor::{OneForm, Point, TangentVector};
