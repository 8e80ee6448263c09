//! Enumeration of arithmetically inequivalent perfect quadratic forms via
//! Voronoi's algorithm.
//!
//! Everything that influences a branch is computed in exact rational
//! arithmetic: LDL^T factorizations, shortest-vector enumeration, simplex
//! pivots, polyhedral dual descriptions and group-theoretic searches all
//! operate on `BigRational`/`BigInt` values. Floating point never decides
//! anything.
//!
//! The main entry points are [`voronoi::classify`] for a full traversal of
//! the perfect-form graph in a given dimension, [`qform::QuadraticForm`] for
//! single-form analysis (minimum, perfection, eutaxy, Hermite invariant) and
//! [`polycone`]/[`admethod`] for the symmetry-exploiting facet enumeration
//! underneath.

pub mod admethod;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod polycone;
pub mod qform;
pub mod symmetry;
pub mod voronoi;

pub use error::{Error, Result};

pub(crate) mod numutil;
