//! Computable diagnostics for homogeneous constant-coefficient differential
//! operators between finite-dimensional vector spaces.
//!
//! The crate answers four families of questions about an operator given by
//! its coefficient matrices:
//!
//! * symbol analysis — real ellipticity margins and searches for complex
//!   frequencies at which the symbol loses injectivity ([`symbol_analysis`]);
//! * polynomial nullspaces — bases of the polynomial solution spaces per
//!   degree and their stabilization ([`nullspace`]), with L²-orthogonal
//!   projections, averaged Taylor polynomials and inverse estimates over
//!   balls and annuli ([`projection`], [`region`]);
//! * potential theory of discrete measures — Riesz potentials and fractional
//!   maximal functions ([`measure`]);
//! * grid calculus — finite-difference application of the operator, variation
//!   measures, dyadic oscillation profiles and point classification scans
//!   ([`grid`], [`fine`]).
//!
//! The `celliptic` binary exposes every operation as a subcommand with
//! seeded, byte-reproducible JSON reports.

pub mod error;
pub mod fine;
pub mod grid;
pub mod measure;
pub mod multi_index;
pub mod nullspace;
pub mod operator;
pub mod polynomial;
pub mod projection;
pub mod region;
pub mod symbol_analysis;
pub mod synth;
pub mod zoo;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
