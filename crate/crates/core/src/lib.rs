//! Chart-level tensor calculus for quasi-statistical, Hermitian and Norden
//! geometry with torsion-bearing connections.
//!
//! Fields are evaluated pointwise with exact first derivatives. On top of
//! that kernel sit conjugate connections, the structure operators
//! (Nijenhuis, Tachibana, `d∇`), named predicates, random generators and
//! witness synthesis, and an executable suite of geometric identities.

pub mod error;
pub mod calculus;
pub mod cli;
pub mod connections;
pub mod fields;
pub mod generate;
pub mod model;
pub mod predicates;
pub mod propositions;
pub mod residual;
pub mod structures;

pub use error::{GeomError, Result};
