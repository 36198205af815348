//! Exact arithmetic for multivariate (φ, Γ)-modules over truncated p-adic
//! Laurent series rings, their cochain complexes, and a finite-level descent
//! laboratory over tensor products of finite fields.

pub mod coeff;
pub mod complexes;
pub mod error;
pub mod finite_level;
pub mod linalg;
pub mod phigamma;
pub mod series;

pub use error::{Error, Result};
