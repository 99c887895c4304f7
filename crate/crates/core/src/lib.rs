//! Time marching for isotropic Hamilton-Jacobi-Bellman (time-dependent Eikonal) equations.
//!
//! The crate provides three ways of stepping a terminal-value problem
//! `v_t + K(x,t) - f(x,t) |grad v| = 0` backwards in time on a uniform grid:
//!
//! * an explicit upwind scheme, stable only under a CFL restriction,
//! * an implicit scheme whose time slices are solved as static boundary
//!   value problems by a modified Fast Marching Method,
//! * a hybrid that uses the explicit update wherever the CFL test passes
//!   locally and the implicit solve elsewhere.
//!
//! A 1D linear advection testbed with the same three schemes (plus a
//! semi-Lagrangian one), a catalog of benchmark problems, error metrics and
//! reference oracles round out the library.
//!
//! All numerical code is generic over [`Real`]; the `*64` aliases at the crate
//! root fix the scalar to `f64`, which is what the CLI uses.

// `!(a < b)` is used on purpose: it is also true for NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advect1d;
pub mod error;
pub mod fast_marching;
pub mod geometry;
pub mod local_updates;
pub mod marchers;
pub mod metrics;
pub mod oracle;
pub mod problem;
pub mod selftest;

mod real;

pub use error::{Error, Result};
pub use real::Real;

pub use geometry::{BoundaryKind, BoundaryMask, Field, GridSpec, NodeClass, TimeSpec};
pub use marchers::{MarchConfig, RunReport, Scheme};
pub use metrics::{ErrorReport, SweepRecord};
pub use problem::{Advection1DProblem, IsotropicProblem};

/// `f64` grid function.
pub type Field64 = Field<f64>;
/// `f32` grid function.
pub type Field32 = Field<f32>;
/// `f64` grid description.
pub type GridSpec64 = GridSpec<f64>;
/// `f64` time partition.
pub type TimeSpec64 = TimeSpec<f64>;
/// `f64` 1D advection problem.
pub type Advection1DProblem64 = Advection1DProblem<f64>;
/// `f64` error summary.
pub type ErrorReport64 = ErrorReport<f64>;
/// Boxed `f64` problem, as selected by name at runtime.
pub type DynProblem64 = Box<dyn IsotropicProblem<f64>>;
