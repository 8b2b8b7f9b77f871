//! Exact arithmetic for quadratic Hecke characters and pair equivalence.
//!
//! This crate constructs finite-order (2-power, mainly quadratic) idele class
//! characters of quadratic number fields K = ℚ(√d), classifies them up to
//! base change, generates Dirichlet coefficients of the attached L-functions
//! L(s, χ, K), and certifies arithmetically equivalent pairs
//! (χ, K) ↔ (η, M): pairs on *different* quadratic fields whose L-functions
//! coincide, so that the induced dihedral GL(2)-form is the same.
//!
//! Everything is exact: elements of ℤ_K are arbitrary-precision integer pairs
//! in the basis {1, ω}, characters take values in roots of unity represented
//! by integer exponents, and Dirichlet coefficients are plain integers.
//!
//! Module map:
//! - [`quadfield`]: ℤ_K arithmetic, fundamental units, class numbers,
//!   principal ideal testing.
//! - [`ideals`]: prime splitting, factored ideals, local unit groups at
//!   finite places (including the 2-adic generator systems).
//! - [`characters`]: construction, evaluation, conjugation and products of
//!   idele class characters; base change from Dirichlet characters.
//! - [`classify`]: admissible conductors, existence parity, and enumeration
//!   of quadratic characters up to base change.
//! - [`lfunc`]: Euler factors, coefficient tables (sieve and ideal-sum
//!   oracle), and dihedral form descriptors.
//! - [`equiv`]: partner field identification and equivalence certificates.
//! - [`dihedral`]: exact 2×2 matrix models of the dihedral Galois groups.

pub mod arith;
pub mod characters;
pub mod classify;
pub mod dihedral;
pub mod equiv;
pub mod error;
pub mod ideals;
pub mod lfunc;
pub mod quadfield;

// RESTORE pub use characters::{DirichletQuadratic, HeckeCharacter, RootOfUnity};
// RESTORE pub use classify::{AdmissibleConductor, Clause, Family};
// RESTORE pub use dihedral::{DihedralGroup, ExactRoot, HVariant};
// RESTORE pub use equiv::EquivCertificate;
pub use error::{Error, Result};
pub use ideals::{IntegralIdeal, LocalUnitGroup, PrimePlace, SplitKind};
// RESTORE pub use lfunc::{CoeffTable, FormDescriptor, FormKind};
pub use quadfield::{QuadField, QuadInt};
