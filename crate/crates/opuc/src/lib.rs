//! Orthogonal polynomials on the unit circle.
//!
//! Systems are built three ways (closed forms, the Szegő recurrence, and
//! Cholesky factorization of the moment matrix) and then checked against
//! the structural identities of the theory: recurrences, the
//! Christoffel–Darboux kernel, ladder operators, second-order equations,
//! the electrostatic interpretation of the zeros, and discriminants.

pub mod dd;
pub mod disc;
pub mod engine;
pub mod error;
pub mod exec;
pub mod families;
pub mod ladder;
pub mod logval;
pub mod moments;
pub mod poly;
pub mod report;
pub mod special;
pub mod suites;
pub mod weight;
pub mod zeros;

pub use engine::{OpucSystem, Route};
pub use error::{ErrorKind, OpucError, Result};
pub use exec::Exec;
pub use logval::LogValue;
pub use num_complex::Complex64 as C64;
pub use poly::{ComplexPoly, QReal};
pub use weight::WeightSpec;
