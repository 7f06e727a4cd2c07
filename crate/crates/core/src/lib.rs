//! Numerical laboratory for the pseudo-parabolic equation
//! `u_t - Delta_gamma u_t - Delta_gamma u = f(u)` with zero Dirichlet data on
//! boxes, where `Delta_gamma = Delta_x + |x|^{2 gamma} Delta_y` is the
//! Baouendi-Grushin operator.
//!
//! The crate assembles a flux-form discretization of the operator, computes
//! the first Dirichlet eigenvalue, integrates the semi-discrete system with
//! adaptive steps and tracks the energy functionals behind the finite-time
//! blow-up and exponential decay results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod integrator;
pub mod linalg;
pub mod nonlinearity;
pub mod operator;
pub mod runner;

pub use error::{Error, Result};
pub use geometry::{BoxDomain, Grid, GrushinSpace};
pub use nonlinearity::Nonlinearity;
pub use operator::SparseMatrix;
