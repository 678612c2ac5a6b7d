use crate::error::{Error, Result};
use crate::linalg::SpdOperator;
use crate::tensor::Matrix;

/// `½·bidiag(1, −1)`, upper bidiagonal.
fn half_difference(l: usize) -> Matrix {
    Matrix::from_fn(l, l, |i, j| {
        if i == j {
            0.5
        } else if j == i + 1 {
            -0.5
        } else {
            0.0
        }
    })
}

/// Second-difference matrix with corner entries `γ`.
pub fn second_difference(m: usize, gamma: f64) -> Matrix {
    Matrix::from_fn(m, m, |i, j| {
        if i == j {
            if i == 0 || i == m - 1 {
                gamma
            } else {
                2.0
            }
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

fn shifted_gram(b: &Matrix, shift: f64, scale: f64) -> Matrix {
    let mut g = b.transpose().matmul(b);
    for i in 0..g.rows() {
        g[(i, i)] += shift;
    }
    g.scale(scale)
}

/// Noise covariance `M = L₁ᵀ * L₁ + ωI` whose first face is
/// `¼·BᵀB + ωI` with `B` the (1, −1) upper bidiagonal.
pub fn build_covariance_m(l: usize, n: usize, omega: f64) -> Result<SpdOperator> {
    if !(omega > 0.0) || l == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "covariance needs omega > 0 and positive dims, got omega = {omega}, {l}x{l}x{n}"
        )));
    }
    SpdOperator::spatial(shifted_gram(&half_difference(l), omega, 1.0), n)
}

/// Regularization tensor `D_γ = ¼(L₂ᵀ * L₂ + αI)`.
pub fn build_reg_d(m: usize, n: usize, gamma: f64, alpha: f64) -> Result<SpdOperator> {
    if !(alpha > 0.0) || m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "regularization tensor needs alpha > 0 and positive dims, got alpha = {alpha}, {m}x{m}x{n}"
        )));
    }
    SpdOperator::spatial(shifted_gram(&second_difference(m, gamma), alpha, 0.25), n)
}
