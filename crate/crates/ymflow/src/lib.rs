//! Lattice simulator for the SU(2) Yang-Mills alpha-flow on a periodic
//! 4-torus.
//!
//! The crate discretizes the alpha-functional
//! `S_alpha = a^4 sum_x (1 + |F|^2)^alpha`, integrates its exact gradient
//! flow with Lie-group steppers, and provides the diagnostics used to study
//! the flow: energy dissipation, gauge covariance, the gauge-fixed
//! (parabolic) companion flow with its reconstruction ODE, a backward-heat-
//! kernel monotonicity estimator, an energy-concentration detector, and an
//! `alpha -> 1` continuation harness.
//!
//! Module map:
//! - [`lie`]: exact SU(2)/su(2) kernels (unit quaternions).
//! - [`lattice`]: 4-torus geometry, gauge fields, initial conditions.
//! - [`action`]: the alpha-functional, clover observables, topological charge.
//! - [`flow`]: exact force and flow integration.
//! - [`deturck`]: noncompact direct/gauge-fixed flow pair and the
//!   equivalence check.
//! - [`monitor`]: monotonicity quantity, epsilon-regularity detector, gap
//!   check, alpha-continuation.
//! - [`io`]: snapshots, traces, run configuration.
//! - [`cli`]: the command-line drivers.

pub mod action;
pub mod flow;
pub mod lattice;
pub mod lie;
pub(crate) mod util;

pub use util::tree_sum;
