//! Desk-scale laboratory for delocalized eta invariants.
//!
//! The crate models finitely generated groups (`ℤ^d`, `ℤ/k`, free groups and
//! direct products of these), finitely supported elements of their group
//! algebras with matrix coefficients, cyclic cochains and their pairings, and
//! equivariant self-adjoint operators with a certified functional calculus.
//! On top of these it evaluates delocalized (higher) eta invariants by
//! quadrature in the time variable, with tail certificates.

pub mod algebra;
pub mod cyclic;
pub mod error;
pub mod eta;
pub mod fixtures;
pub mod groups;
pub mod linalg;
pub mod operators;
pub mod pairing;
pub mod quad;

pub use error::{Error, Result};
pub use num_complex::Complex64;
