//! Dense third-order tensors and the t-product.
//!
//! Storage is face-major with each `rows x cols` frontal slice stored
//! column-major, so entry `(i, j, k)` lives at `k*rows*cols + j*rows + i`.
//! Lateral slices and tubes are ordinary [`Tensor3`] values with `cols == 1`
//! (and `rows == 1` for tubes).

mod fourier;
mod matrix;
mod oracle;
mod product;

pub use fourier::{fft_mode3, ifft_mode3, FourierTensor3, TensorOperator};
pub use matrix::Matrix;
pub use oracle::{bcirc, bcirc_oracle_prod, fold, unfold, ORACLE_CAP};
pub use product::{
    circledast, e1_lateral, e1_tube, fro_norm, identity_tensor, inner, tprod, ttranspose,
};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    rows: usize,
    cols: usize,
    depth: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(rows: usize, cols: usize, depth: usize) -> Self {
        assert!(
            rows > 0 && cols > 0 && depth > 0,
            "tensor dimensions must be positive"
        );
        Self {
            rows,
            cols,
            depth,
            data: vec![0.0; rows * cols * depth],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, depth: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || depth == 0 {
            return Err(Error::InvalidArgument(format!(
                "tensor dimensions must be positive, got {rows}x{cols}x{depth}"
            )));
        }
        if data.len() != rows * cols * depth {
            return Err(Error::dims(
                "Tensor3::from_vec",
                format!(
                    "{} values for a {rows}x{cols}x{depth} tensor",
                    data.len()
                ),
            ));
        }
        Ok(Self {
            rows,
            cols,
            depth,
            data,
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        depth: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(rows, cols, depth);
        for k in 0..depth {
            for j in 0..cols {
                for i in 0..rows {
                    t.data[(k * cols + j) * rows + i] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Builds a tensor whose frontal slices are the given matrices.
    pub fn from_faces(faces: &[Matrix]) -> Result<Self> {
        let first = faces
            .first()
            .ok_or_else(|| Error::InvalidArgument("no faces given".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        let mut data = Vec::with_capacity(rows * cols * faces.len());
        for (k, f) in faces.iter().enumerate() {
            if f.rows() != rows || f.cols() != cols {
                return Err(Error::dims(
                    "Tensor3::from_faces",
                    format!("face {k} is {}x{}, expected {rows}x{cols}", f.rows(), f.cols()),
                ));
            }
            data.extend_from_slice(f.as_slice());
        }
        Self::from_vec(rows, cols, faces.len(), data)
    }

    /// A 1x1xn tube holding `values`.
    pub fn tube(values: &[f64]) -> Self {
        Self::from_vec(1, 1, values.len(), values.to_vec()).expect("tube must be non-empty")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.depth)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.rows && j < self.cols && k < self.depth);
        (k * self.cols + j) * self.rows + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.index(i, j, k);
        self.data[idx] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn face(&self, k: usize) -> Matrix {
        let sz = self.rows * self.cols;
        Matrix::from_col_major(
            self.rows,
            self.cols,
            self.data[k * sz..(k + 1) * sz].to_vec(),
        )
    }

    pub fn face_slice(&self, k: usize) -> &[f64] {
        let sz = self.rows * self.cols;
        &self.data[k * sz..(k + 1) * sz]
    }

    pub fn face_slice_mut(&mut self, k: usize) -> &mut [f64] {
        let sz = self.rows * self.cols;
        &mut self.data[k * sz..(k + 1) * sz]
    }

    /// The `j`th lateral slice as a `rows x 1 x depth` tensor.
    pub fn lateral_slice(&self, j: usize) -> Tensor3 {
        assert!(j < self.cols, "lateral slice {j} out of range");
        let mut out = Tensor3::zeros(self.rows, 1, self.depth);
        for k in 0..self.depth {
            let src = self.index(0, j, k);
            out.face_slice_mut(k)
                .copy_from_slice(&self.data[src..src + self.rows]);
        }
        out
    }

    pub fn set_lateral_slice(&mut self, j: usize, slice: &Tensor3) -> Result<()> {
        if slice.rows != self.rows || slice.cols != 1 || slice.depth != self.depth || j >= self.cols
        {
            return Err(Error::dims(
                "Tensor3::set_lateral_slice",
                format!(
                    "slice {:?} into column {j} of {:?}",
                    slice.dims(),
                    self.dims()
                ),
            ));
        }
        for k in 0..self.depth {
            let dst = self.index(0, j, k);
            self.data[dst..dst + self.rows].copy_from_slice(slice.face_slice(k));
        }
        Ok(())
    }

    /// Concatenates tensors with equal row count and depth along the column
    /// dimension.
    pub fn hcat(parts: &[&Tensor3]) -> Result<Tensor3> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        let (rows, depth) = (first.rows, first.depth);
        if parts.iter().any(|p| p.rows != rows || p.depth != depth) {
            return Err(Error::dims(
                "Tensor3::hcat",
                "all parts need the same row count and depth",
            ));
        }
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut data = Vec::with_capacity(rows * cols * depth);
        for k in 0..depth {
            for p in parts {
                data.extend_from_slice(p.face_slice(k));
            }
        }
        Tensor3::from_vec(rows, cols, depth, data)
    }

    /// Columns `start..end` as a new tensor.
    pub fn col_range(&self, start: usize, end: usize) -> Tensor3 {
        assert!(start < end && end <= self.cols, "bad column range");
        let mut data = Vec::with_capacity(self.rows * (end - start) * self.depth);
        for k in 0..self.depth {
            let a = self.index(0, start, k);
            data.extend_from_slice(&self.data[a..a + self.rows * (end - start)]);
        }
        Tensor3 {
            rows: self.rows,
            cols: end - start,
            depth: self.depth,
            data,
        }
    }

    pub fn same_dims(&self, other: &Tensor3) -> bool {
        self.dims() == other.dims()
    }

    fn check_same(&self, other: &Tensor3, op: &'static str) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::dims(
                op,
                format!("{:?} vs {:?}", self.dims(), other.dims()),
            ))
        }
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        let mut out = self.clone();
        out.scale_in_place(s);
        out
    }

    pub fn scale_in_place(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Tensor3) -> Result<()> {
        self.check_same(x, "Tensor3::axpy")?;
        self.data
            .iter_mut()
            .zip(&x.data)
            .for_each(|(y, &xv)| *y += a * xv);
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}
