//! Nearly-linear-time LP relaxation and rounding pipelines for machine scheduling.
//!
//! - [`model`]: instances, solutions, exact evaluation, generators, brute-force oracles.
//! - [`mpc`]: mixed packing/covering LP feasibility solver.
//! - [`mwu`]: multiplicative-weights packing solver over an oracle polytope.
//! - [`flow`]: approximate DAG flows and the monotone-polytope oracle.
//! - [`matching`]: expansion matching and grouping rounding.
//! - [`unrelated`]: makespan, weighted completion and L_q on unrelated machines.
//! - [`prec`]: precedence-constrained weighted completion on identical machines.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops read better than zips when several parallel arrays are touched.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod flow;
pub mod matching;
pub mod model;
pub mod mpc;
pub mod mwu;
pub mod prec;
pub mod unrelated;

pub use error::{Error, Result};
