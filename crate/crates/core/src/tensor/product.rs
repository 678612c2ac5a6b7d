use super::{fft_mode3, ifft_mode3, Tensor3};
use crate::error::{Error, Result};

/// The t-product `a * b`, evaluated facewise in the Fourier domain.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (_, m, n) = a.dims();
    let (mb, _, nb) = b.dims();
    if m != mb || n != nb {
        return Err(Error::dims(
            "tprod",
            format!("{:?} * {:?}", a.dims(), b.dims()),
        ));
    }
    let c = fft_mode3(a).mul(&fft_mode3(b))?;
    ifft_mode3(&c)
}

/// Tensor transpose: every face transposed, faces 2..n reversed.
pub fn ttranspose(a: &Tensor3) -> Tensor3 {
    let (l, m, n) = a.dims();
    Tensor3::from_fn(m, l, n, |i, j, k| a.get(j, i, (n - k) % n))
}

pub fn identity_tensor(m: usize, n: usize) -> Tensor3 {
    let mut t = Tensor3::zeros(m, m, n);
    for i in 0..m {
        t.set(i, i, 0, 1.0);
    }
    t
}

/// Lateral slice `rows x 1 x n` with a single unit entry at `(1,1,1)`.
pub fn e1_lateral(rows: usize, n: usize) -> Tensor3 {
    let mut t = Tensor3::zeros(rows, 1, n);
    t.set(0, 0, 0, 1.0);
    t
}

/// The unit tube, identity of the tubal-scalar product.
pub fn e1_tube(n: usize) -> Tensor3 {
    e1_lateral(1, n)
}

pub fn fro_norm(t: &Tensor3) -> f64 {
    t.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Elementwise inner product `Σ c_ijk d_ijk`.
pub fn inner(c: &Tensor3, d: &Tensor3) -> Result<f64> {
    if !c.same_dims(d) {
        return Err(Error::dims(
            "inner",
            format!("{:?} vs {:?}", c.dims(), d.dims()),
        ));
    }
    Ok(c.as_slice()
        .iter()
        .zip(d.as_slice())
        .map(|(a, b)| a * b)
        .sum())
}

/// `Σ_j y_j C_j` over equally shaped blocks.
pub fn circledast(blocks: &[Tensor3], y: &[f64]) -> Result<Tensor3> {
    if blocks.len() != y.len() {
        return Err(Error::dims(
            "circledast",
            format!("{} blocks, {} coefficients", blocks.len(), y.len()),
        ));
    }
    let first = blocks
        .first()
        .ok_or_else(|| Error::InvalidArgument("circledast needs at least one block".into()))?;
    let mut out = Tensor3::zeros(first.rows(), first.cols(), first.depth());
    for (c, &w) in blocks.iter().zip(y) {
        out.axpy(w, c)?;
    }
    Ok(out)
}
