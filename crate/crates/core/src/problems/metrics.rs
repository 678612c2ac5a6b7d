use crate::error::{Error, Result};
use crate::tensor::{fro_norm, Tensor3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quality {
    pub relative_error: f64,
    pub mse: f64,
    /// `10·log₁₀(MAX²/MSE)` with `MAX` the largest entry of the reference;
    /// `+∞` when the two agree exactly.
    pub psnr: f64,
}

pub fn metrics(x: &Tensor3, x_true: &Tensor3) -> Result<Quality> {
    if !x.same_dims(x_true) {
        return Err(Error::dims(
            "metrics",
            format!("{:?} vs {:?}", x.dims(), x_true.dims()),
        ));
    }
    let diff = x.sub(x_true)?;
    let sq: f64 = diff.as_slice().iter().map(|v| v * v).sum();
    let mse = sq / x.len() as f64;
    let peak = x_true.max_value();
    let psnr = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    };
    Ok(Quality {
        relative_error: sq.sqrt() / fro_norm(x_true),
        mse,
        psnr,
    })
}
