//! Batch front-end for the deblurring solvers: synthesize degraded data,
//! restore it, sweep parameter grids and convert between file formats.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;
