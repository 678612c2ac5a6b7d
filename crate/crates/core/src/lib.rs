//! Weighted tensor Golub-Kahan-Tikhonov regularization under the t-product.
//!
//! Data, operators and solutions are real third-order tensors
//! ([`Tensor3`]). The t-product is evaluated facewise after an FFT along
//! the third mode. [`krylov`] builds the weighted bidiagonalizations and
//! [`tikhonov`] solves the projected problems with the discrepancy
//! principle choosing `μ` and the number of steps.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod krylov;
pub mod linalg;
pub mod problems;
pub mod tensor;
pub mod tikhonov;

pub use error::{Error, Result};
pub use linalg::SpdOperator;
pub use tensor::{Matrix, Tensor3, TensorOperator};
