use super::spd::Weight;
use crate::error::{Error, Result};
use crate::tensor::{inner, Matrix, Tensor3};

/// Negative radicands smaller than this (relative to `‖x‖²`) are rounding.
pub const RADICAND_TOL: f64 = 1e-12;

/// `⟨x, y⟩_N = ⟨x, N * y⟩`, the trace of the first face of `xᵀ * N * y`.
pub fn weighted_inner<W: Weight + ?Sized>(x: &Tensor3, y: &Tensor3, w: &W) -> Result<f64> {
    inner(x, &w.apply_weight(y)?)
}

/// `‖x‖_N`
pub fn weighted_norm<W: Weight + ?Sized>(x: &Tensor3, w: &W) -> Result<f64> {
    let wx = w.apply_weight(x)?;
    norm_from_pair(x, &wx)
}

/// `sqrt(⟨x, wx⟩)` where `wx = N * x` is already at hand.
pub fn norm_from_pair(x: &Tensor3, wx: &Tensor3) -> Result<f64> {
    let r = inner(x, wx)?;
    if r >= 0.0 {
        return Ok(r.sqrt());
    }
    let scale: f64 = x.as_slice().iter().map(|v| v * v).sum();
    if r < -RADICAND_TOL * scale {
        return Err(Error::NegativeRadicand { value: r });
    }
    Ok(0.0)
}

/// Weighted T-diamond product: entry `(i, j)` is `⟨a_i, N * b_j⟩`.
pub fn tdiamond<W: Weight + ?Sized>(a: &[Tensor3], b: &[Tensor3], w: &W) -> Result<Matrix> {
    let wb: Vec<Tensor3> = b.iter().map(|t| w.apply_weight(t)).collect::<Result<_>>()?;
    let mut out = Matrix::zeros(a.len(), b.len());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in wb.iter().enumerate() {
            out[(i, j)] = inner(ai, bj)?;
        }
    }
    Ok(out)
}
