//! Darboux-Crum partners of one-dimensional complex Hamiltonians, their
//! Jordan structure, and numerical checks of the associated identities.

pub mod complex;
pub mod error;
pub mod extrapolate;
pub mod funcalc;
pub mod operators;
pub mod darboux;
pub mod jordan;
pub mod quadrature;
pub mod models;
pub mod index;

pub use complex::{ComplexScalar, C64};
pub use error::{Error, Result};
pub use funcalc::{Expr, Tape};
