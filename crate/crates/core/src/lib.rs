//! Symbolic models of transitive suspension flows over subshifts of finite type,
//! with integer class weights on edges.
//!
//! The crate computes pressure and its Legendre-dual entropy for the class
//! observable, predicts the number of prime periodic orbits with a prescribed
//! length window and class, and counts those orbits exactly for comparison.
//!
//! Module map:
//!
//! * [`graph_shift`] coding graphs and canonical prime cycles
//! * [`homology_weights`] roof and class weights, Birkhoff sums, lattice checks
//! * [`thermo`] transfer matrices, Perron data, pressure and equilibrium states
//! * [`legendre`] direction hull, dual parameter and entropy function
//! * [`counting`] exact and predicted orbit counts, Chebotarev and equidistribution
//! * [`model`] the model-file format and builtin models
//!
//! With the default `parallel` feature the cycle enumeration behind every
//! exact count is spread over a rayon pool. Results never depend on the
//! execution strategy.

// index loops mirror the matrix notation in the numerical kernels
#![allow(clippy::needless_range_loop)]

pub mod counting;
pub mod error;
pub mod exec;
pub mod graph_shift;
pub mod homology_weights;
pub mod lattice;
pub mod legendre;
pub mod model;
pub mod thermo;

pub use error::{Error, Result};
pub use exec::Execution;
