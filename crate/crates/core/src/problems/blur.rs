use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tensor3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlurVariant {
    /// Symmetric Toeplitz matrix with first column `z`.
    Symmetric,
    /// Toeplitz matrix with first row `z` and first column
    /// `[z₁, z_N, ..., z₂]`, which makes it circulant.
    Circulant,
}

/// Gaussian blur with a banded profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlurSpec {
    pub n: usize,
    pub sigma: f64,
    pub band: usize,
    pub variant: BlurVariant,
}

impl BlurSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.band == 0 || self.band > self.n {
            return Err(Error::InvalidArgument(format!(
                "blur band must satisfy 1 <= band <= N, got band = {}, N = {}",
                self.band, self.n
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "blur sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// `z_i = exp(−(i−1)²/(2σ²))` for `i ≤ band`, zero beyond.
    pub fn profile(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                if i < self.band {
                    (-((i * i) as f64) / (2.0 * self.sigma * self.sigma)).exp()
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// The `N x N` one-dimensional blur matrix `A`.
    pub fn matrix(&self) -> Result<Matrix> {
        self.validate()?;
        let z = self.profile();
        let n = self.n;
        let s = 1.0 / (self.sigma * (2.0 * PI).sqrt());
        Ok(match self.variant {
            BlurVariant::Symmetric => Matrix::from_fn(n, n, |i, j| s * z[i.abs_diff(j)]),
            BlurVariant::Circulant => Matrix::from_fn(n, n, |i, j| {
                if j >= i {
                    s * z[j - i]
                } else {
                    s * z[n - (i - j)]
                }
            }),
        })
    }
}

/// The `N x N x N` blur tensor with frontal slices `A(i,1)·A`.
pub fn build_blur(spec: &BlurSpec) -> Result<Tensor3> {
    let a = spec.matrix()?;
    let n = spec.n;
    let mut t = Tensor3::zeros(n, n, n);
    for k in 0..n {
        let w = a[(k, 0)];
        if w == 0.0 {
            continue;
        }
        for (d, &v) in t.face_slice_mut(k).iter_mut().zip(a.as_slice()) {
            *d = w * v;
        }
    }
    Ok(t)
}
