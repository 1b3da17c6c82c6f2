//! Meshfree radial-basis-function collocation for Helmholtz-type and
//! convection-diffusion equations in two and three dimensions.
//!
//! Three schemes share one set of kernels and dense solvers:
//!
//! - [`bkm`]: the symmetric boundary knot method. The homogeneous part of the
//!   solution is expanded in nonsingular general solutions centred on
//!   boundary knots; the inhomogeneous part comes from a dual-reciprocity
//!   particular solution ([`rbf`]).
//! - [`bpm`]: the boundary particle method. The particular solution is
//!   replaced by a truncated series of higher-order general solutions, so
//!   only boundary knots are needed. One factorization serves every order.
//! - [`mkm`]: the modified Kansa method, a symmetric Hermite domain
//!   collocation with boundary-operator and governing-operator basis groups.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bkm;
pub mod bpm;
pub mod error;
pub mod geometry;
pub mod linalg;
pub(crate) mod math;
pub mod mkm;
pub mod operators;
pub mod problem;
pub mod rbf;
pub mod special;

pub use error::{Error, Result};
pub use geometry::{Domain, Node, Role};
pub use operators::{FieldProbe, KernelTable, OperatorKind, OperatorSpec};
pub use problem::ProblemData;

/// A point or vector in space. Two-dimensional quantities keep `z = 0`.
pub type Point = [f64; 3];
