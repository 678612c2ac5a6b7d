//! Orientation of images as lateral slices: image column `j` becomes tube
//! depth `j`.

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tensor3};

/// `m x n` image to an `m x 1 x n` lateral slice.
pub fn twist(img: &Matrix) -> Tensor3 {
    Tensor3::from_vec(img.rows(), 1, img.cols(), img.as_slice().to_vec())
        .expect("image dimensions are positive")
}

/// Inverse of [`twist`].
pub fn squeeze(slice: &Tensor3) -> Result<Matrix> {
    if slice.cols() != 1 {
        return Err(Error::dims(
            "squeeze",
            format!("expects a lateral slice, got {:?}", slice.dims()),
        ));
    }
    Ok(Matrix::from_col_major(
        slice.rows(),
        slice.depth(),
        slice.as_slice().to_vec(),
    ))
}

/// Stacks equally sized images as lateral slices of an `m x p x n` tensor.
pub fn multi_twist(imgs: &[Matrix]) -> Result<Tensor3> {
    let first = imgs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no images to stack".into()))?;
    let (m, n) = (first.rows(), first.cols());
    if let Some((i, bad)) = imgs
        .iter()
        .enumerate()
        .find(|(_, im)| im.rows() != m || im.cols() != n)
    {
        return Err(Error::dims(
            "multi_twist",
            format!("image {i} is {}x{}, expected {m}x{n}", bad.rows(), bad.cols()),
        ));
    }
    let mut t = Tensor3::zeros(m, imgs.len(), n);
    for (j, img) in imgs.iter().enumerate() {
        t.set_lateral_slice(j, &twist(img))?;
    }
    Ok(t)
}

/// Inverse of [`multi_twist`].
pub fn multi_squeeze(t: &Tensor3) -> Vec<Matrix> {
    (0..t.cols())
        .map(|j| squeeze(&t.lateral_slice(j)).expect("lateral slice"))
        .collect()
}
