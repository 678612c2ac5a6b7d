//! SPD tensor machinery, normalization and the small reduced problems.

mod bidiag;
pub mod dense;
mod normalize;
mod spd;
mod tsvd;
mod weighted;

pub use bidiag::{
    solve_tensor_lsq, solve_tensor_tikhonov, tensor_residual_sq, tensor_shifted_norm_sq,
    ScalarBidiagonal, TensorBidiagonal,
};
pub use normalize::{normalize, FaceTolerance, Normalized};
pub use spd::{tensor_cholesky, Inverse, SpdKind, SpdOperator, Weight, HERMITIAN_TOL};
pub use tsvd::{tsvd_oracle, Tsvd};
pub use weighted::{norm_from_pair, tdiamond, weighted_inner, weighted_norm, RADICAND_TOL};
