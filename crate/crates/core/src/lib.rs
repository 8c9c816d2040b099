//! Parareal with and without a coarse propagator.
//!
//! The crate bundles the models used to study when the coarse correction of
//! Parareal can be dropped: a finite-difference heat equation with Dirichlet
//! or Neumann boundaries, an exact-in-time spectral heat model, and two
//! hyperbolic models (upwind advection, Crank-Nicolson wave). The [`driver`]
//! module runs any [`Model`] and records errors against the sequential fine
//! solution; [`analysis`] has the closed-form contraction factors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod driver;
pub mod error;
pub mod heat;
pub mod hyperbolic;
pub mod model;
pub mod pit;
pub mod presets;
pub mod quadrature;
pub mod source;
pub mod spectral;
pub mod trace_io;

pub use error::{Error, Result};
pub use model::Model;
pub use pit::{
    discrete_l2_norm, make_uniform_partition, sup_error, Basis, BoundaryKind, IterationTrace,
    Layout, PropagatorSpec, Role, StateVector, TimePartition, TraceEntry,
};
