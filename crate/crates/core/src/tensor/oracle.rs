//! Literal block-circulant evaluation of the t-product. Test oracle only: it
//! materializes an `ℓn x mn` matrix.

use super::{Matrix, Tensor3};
use crate::error::{Error, Result};

/// Largest row or column count of a materialized `bcirc` matrix.
pub const ORACLE_CAP: usize = 64;

/// Stacks the frontal slices vertically into an `ℓn x m` matrix.
pub fn unfold(t: &Tensor3) -> Matrix {
    let (l, m, n) = t.dims();
    Matrix::from_fn(l * n, m, |r, c| t.get(r % l, c, r / l))
}

/// Inverse of [`unfold`].
pub fn fold(mat: &Matrix, rows: usize, cols: usize, depth: usize) -> Result<Tensor3> {
    if mat.rows() != rows * depth || mat.cols() != cols {
        return Err(Error::dims(
            "fold",
            format!(
                "{}x{} matrix into {rows}x{cols}x{depth}",
                mat.rows(),
                mat.cols()
            ),
        ));
    }
    Ok(Tensor3::from_fn(rows, cols, depth, |i, j, k| {
        mat[(k * rows + i, j)]
    }))
}

fn check_cap(rows: usize, cols: usize) -> Result<()> {
    if rows > ORACLE_CAP || cols > ORACLE_CAP {
        return Err(Error::OracleCap {
            rows,
            cols,
            cap: ORACLE_CAP,
        });
    }
    Ok(())
}

/// The `ℓn x mn` block-circulant matrix whose first block column is
/// `unfold(t)`.
pub fn bcirc(t: &Tensor3) -> Result<Matrix> {
    let (l, m, n) = t.dims();
    check_cap(l * n, m * n)?;
    Ok(Matrix::from_fn(l * n, m * n, |r, c| {
        let (bi, i) = (r / l, r % l);
        let (bj, j) = (c / m, c % m);
        t.get(i, j, (bi + n - bj) % n)
    }))
}

/// `fold(bcirc(a) · unfold(b))`
pub fn bcirc_oracle_prod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (l, m, n) = a.dims();
    let (mb, p, nb) = b.dims();
    if m != mb || n != nb {
        return Err(Error::dims(
            "bcirc_oracle_prod",
            format!("{:?} * {:?}", a.dims(), b.dims()),
        ));
    }
    let big = bcirc(a)?;
    fold(&big.matmul(&unfold(b)), l, p, n)
}
