//! Composition operators on `H²`, `A²_α` and `S²` as truncated matrices.
//!
//! Functions are truncated Taylor series ([`series`]); each space is reduced
//! to its monomial weights ([`spaces`]); symbols are analytic self-maps of the
//! disk ([`maps`]). [`operators`] builds `C_Φ` in the orthonormal basis and
//! measures isometry, unitarity and multiplicativity defects on the part of
//! the matrix that truncation leaves intact. [`quadrature`] recomputes inner
//! products by integration as an independent oracle, and [`cli`] drives
//! experiments from JSON configs.

pub mod cli;
pub mod maps;
pub mod operators;
pub mod quadrature;
pub mod series;
pub mod spaces;

pub use maps::{MapDescriptor, SelfMap};
pub use operators::{OpMatrix, Report};
pub use series::TruncSeries;
pub use spaces::SpaceSpec;
