use num_complex::Complex64;

use super::dense::{
    adjoint_backward_solve, cholesky_lower, cholesky_lower_real, forward_solve,
    forward_solve_real, hermitian_defect,
};
use crate::error::{Error, Result};
use crate::tensor::{fft_mode3, ifft_mode3, FourierTensor3, Matrix, Tensor3};

/// Faces whose Hermitian defect exceeds this are rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpdKind {
    Identity,
    Spatial,
    General,
}

#[derive(Clone, Debug)]
enum Repr {
    Identity,
    /// Only the first frontal slice is nonzero. `chol` is its lower factor.
    Spatial { face: Matrix, chol: Vec<f64> },
    /// `chol[j]` is the lower factor of Fourier face `j`.
    General {
        tensor: Tensor3,
        fourier: FourierTensor3,
        chol: Vec<Vec<Complex64>>,
    },
}

/// A symmetric positive definite tensor with its factorization cached.
///
/// Inverses are never formed; `apply_inverse` runs two triangular solves
/// per face.
#[derive(Clone, Debug)]
pub struct SpdOperator {
    size: usize,
    depth: usize,
    repr: Repr,
}

impl SpdOperator {
    pub fn identity(size: usize, depth: usize) -> Self {
        assert!(size > 0 && depth > 0, "operator dimensions must be positive");
        Self {
            size,
            depth,
            repr: Repr::Identity,
        }
    }

    /// Tensor whose first frontal slice is `face` and whose other slices are
    /// zero. Applied face by face without any transform.
    pub fn spatial(face: Matrix, depth: usize) -> Result<Self> {
        let m = face.rows();
        if m == 0 || face.cols() != m || depth == 0 {
            return Err(Error::InvalidArgument(format!(
                "spatial SPD face must be square and nonempty, got {}x{} (depth {depth})",
                face.rows(),
                face.cols()
            )));
        }
        let scale = face.fro_norm().max(f64::MIN_POSITIVE);
        if !face.is_symmetric(HERMITIAN_TOL * scale) {
            return Err(Error::NotPositiveDefinite {
                face: 0,
                reason: "first face is not symmetric".into(),
            });
        }
        let mut chol = face.as_slice().to_vec();
        cholesky_lower_real(&mut chol, m)
            .map_err(|reason| Error::NotPositiveDefinite { face: 0, reason })?;
        Ok(Self {
            size: m,
            depth,
            repr: Repr::Spatial { face, chol },
        })
    }

    /// Arbitrary SPD tensor; every Fourier face is checked and factored.
    pub fn general(t: Tensor3) -> Result<Self> {
        let (m, cols, n) = t.dims();
        if m != cols {
            return Err(Error::dims(
                "SpdOperator::general",
                format!("faces must be square, got {m}x{cols}"),
            ));
        }
        let fourier = fft_mode3(&t);
        let mut chol = Vec::with_capacity(n);
        for j in 0..n {
            let face = fourier.face(j);
            let defect = hermitian_defect(face, m);
            if defect > HERMITIAN_TOL {
                return Err(Error::NotPositiveDefinite {
                    face: j,
                    reason: format!("Hermitian defect {defect:.3e}"),
                });
            }
            let mut f = face.to_vec();
            cholesky_lower(&mut f, m)
                .map_err(|reason| Error::NotPositiveDefinite { face: j, reason })?;
            chol.push(f);
        }
        Ok(Self {
            size: m,
            depth: n,
            repr: Repr::General {
                tensor: t,
                fourier,
                chol,
            },
        })
    }

    /// Picks the spatial representation when all slices past the first
    /// vanish, the general one otherwise.
    pub fn from_tensor(t: Tensor3) -> Result<Self> {
        let n = t.depth();
        if (1..n).all(|k| t.face_slice(k).iter().all(|&v| v == 0.0)) {
            Self::spatial(t.face(0), n)
        } else {
            Self::general(t)
        }
    }

    pub fn kind(&self) -> SpdKind {
        match self.repr {
            Repr::Identity => SpdKind::Identity,
            Repr::Spatial { .. } => SpdKind::Spatial,
            Repr::General { .. } => SpdKind::General,
        }
    }

    /// Face size `m` of the `m x m x n` operator.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn to_tensor(&self) -> Tensor3 {
        match &self.repr {
            Repr::Identity => crate::tensor::identity_tensor(self.size, self.depth),
            Repr::Spatial { face, .. } => {
                let mut t = Tensor3::zeros(self.size, self.size, self.depth);
                t.face_slice_mut(0).copy_from_slice(face.as_slice());
                t
            }
            Repr::General { tensor, .. } => tensor.clone(),
        }
    }

    fn check(&self, x: &Tensor3, op: &'static str) -> Result<()> {
        if x.rows() != self.size || x.depth() != self.depth {
            return Err(Error::dims(
                op,
                format!(
                    "operator {}x{}x{} applied to {:?}",
                    self.size,
                    self.size,
                    self.depth,
                    x.dims()
                ),
            ));
        }
        Ok(())
    }

    /// `N * x`
    pub fn apply(&self, x: &Tensor3) -> Result<Tensor3> {
        self.check(x, "SpdOperator::apply")?;
        match &self.repr {
            Repr::Identity => Ok(x.clone()),
            Repr::Spatial { face, .. } => Ok(spatial_matmul(face.as_slice(), self.size, x)),
            Repr::General { fourier, .. } => ifft_mode3(&fourier.mul(&fft_mode3(x))?),
        }
    }

    /// Solves `N * y = x`.
    pub fn apply_inverse(&self, x: &Tensor3) -> Result<Tensor3> {
        self.check(x, "SpdOperator::apply_inverse")?;
        let m = self.size;
        match &self.repr {
            Repr::Identity => Ok(x.clone()),
            Repr::Spatial { chol, .. } => Ok(spatial_solve(chol, m, x)),
            Repr::General { chol, .. } => {
                let mut xf = fft_mode3(x);
                let p = x.cols();
                for (j, l) in chol.iter().enumerate() {
                    let face = xf.face_mut(j);
                    for c in 0..p {
                        let col = &mut face[c * m..(c + 1) * m];
                        forward_solve(l, m, col);
                        adjoint_backward_solve(l, m, col);
                    }
                }
                ifft_mode3(&xf)
            }
        }
    }

    /// `Rᵀ * x`, where `N = Rᵀ * R` is the tensor Cholesky factorization.
    pub fn apply_factor_transpose(&self, x: &Tensor3) -> Result<Tensor3> {
        self.check(x, "SpdOperator::apply_factor_transpose")?;
        let m = self.size;
        match &self.repr {
            Repr::Identity => Ok(x.clone()),
            // Rᵀ is the stored lower factor.
            Repr::Spatial { chol, .. } => Ok(spatial_matmul(chol, m, x)),
            Repr::General { chol, .. } => {
                let mut xf = fft_mode3(x);
                let p = x.cols();
                for (j, l) in chol.iter().enumerate() {
                    let face = xf.face_mut(j);
                    for c in 0..p {
                        let col = &mut face[c * m..(c + 1) * m];
                        for i in (0..m).rev() {
                            let mut s = Complex64::new(0.0, 0.0);
                            for q in 0..=i {
                                s += l[q * m + i] * col[q];
                            }
                            col[i] = s;
                        }
                    }
                }
                ifft_mode3(&xf)
            }
        }
    }

    /// `v̂ᴴ N̂⁽ʲ⁾ v̂` for a single column on Fourier face `face`.
    pub fn fourier_quadratic(&self, face: usize, v: &[Complex64]) -> f64 {
        let m = self.size;
        match &self.repr {
            Repr::Identity => v.iter().map(|z| z.norm_sqr()).sum(),
            Repr::Spatial { face: s, .. } => {
                let s = s.as_slice();
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..m {
                    let mut t = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        t += v[i].conj() * s[q * m + i];
                    }
                    acc += t * v[q];
                }
                acc.re
            }
            Repr::General { fourier, .. } => {
                let f = fourier.face(face);
                let mut acc = Complex64::new(0.0, 0.0);
                for q in 0..m {
                    let mut t = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        t += v[i].conj() * f[q * m + i];
                    }
                    acc += t * v[q];
                }
                acc.re
            }
        }
    }

    /// `v̂ᴴ (N̂⁽ʲ⁾)⁻¹ v̂`, as the squared norm of a forward solve.
    pub fn fourier_inverse_quadratic(&self, face: usize, v: &[Complex64]) -> f64 {
        let m = self.size;
        match &self.repr {
            Repr::Identity => v.iter().map(|z| z.norm_sqr()).sum(),
            Repr::Spatial { chol, .. } => {
                let mut w = v.to_vec();
                forward_solve_real(chol, m, &mut w);
                w.iter().map(|z| z.norm_sqr()).sum()
            }
            Repr::General { chol, .. } => {
                let mut w = v.to_vec();
                forward_solve(&chol[face], m, &mut w);
                w.iter().map(|z| z.norm_sqr()).sum()
            }
        }
    }

    /// The tensor Cholesky factor `R` with `N = Rᵀ * R`; every Fourier face
    /// of `R` is upper triangular with a positive diagonal.
    pub fn cholesky_factor(&self) -> Result<Tensor3> {
        let m = self.size;
        match &self.repr {
            Repr::Identity => Ok(crate::tensor::identity_tensor(m, self.depth)),
            Repr::Spatial { chol, .. } => {
                let mut r = Tensor3::zeros(m, m, self.depth);
                let f = r.face_slice_mut(0);
                for j in 0..m {
                    for i in 0..=j {
                        f[j * m + i] = chol[i * m + j];
                    }
                }
                Ok(r)
            }
            Repr::General { chol, .. } => {
                let mut rf = FourierTensor3::zeros(m, m, self.depth);
                for (j, l) in chol.iter().enumerate() {
                    let face = rf.face_mut(j);
                    for c in 0..m {
                        for i in 0..=c {
                            face[c * m + i] = l[i * m + c].conj();
                        }
                    }
                }
                ifft_mode3(&rf)
            }
        }
    }
}

/// Columns of all faces of `x` as the rows of an `m x (cols·depth)`
/// row-major block.
fn to_rows(x: &Tensor3, m: usize) -> Vec<f64> {
    let src = x.as_slice();
    let nrhs = src.len() / m;
    let mut t = vec![0.0; src.len()];
    for (c, col) in src.chunks_exact(m).enumerate() {
        for (i, &v) in col.iter().enumerate() {
            t[i * nrhs + c] = v;
        }
    }
    t
}

fn from_rows(t: &[f64], m: usize, like: &Tensor3) -> Tensor3 {
    let nrhs = t.len() / m;
    let mut out = vec![0.0; t.len()];
    for (c, col) in out.chunks_exact_mut(m).enumerate() {
        for (i, v) in col.iter_mut().enumerate() {
            *v = t[i * nrhs + c];
        }
    }
    Tensor3::from_vec(like.rows(), like.cols(), like.depth(), out).expect("same shape")
}

/// `S x` for the column-major `m x m` matrix `s`, applied to every column
/// of every face. Zero entries of `s` are skipped.
fn spatial_matmul(s: &[f64], m: usize, x: &Tensor3) -> Tensor3 {
    let t = to_rows(x, m);
    let nrhs = t.len() / m;
    let mut out = vec![0.0; t.len()];
    for (i, dst) in out.chunks_exact_mut(nrhs).enumerate() {
        for (q, row_q) in t.chunks_exact(nrhs).enumerate() {
            let a = s[q * m + i];
            if a != 0.0 {
                for (d, &v) in dst.iter_mut().zip(row_q) {
                    *d += a * v;
                }
            }
        }
    }
    from_rows(&out, m, x)
}

/// `(C Cᵀ)⁻¹` applied to every column of every face, with `C` lower
/// triangular. The columns are transposed into rows so that both sweeps
/// run as contiguous row updates over all right-hand sides at once.
fn spatial_solve(chol: &[f64], m: usize, x: &Tensor3) -> Tensor3 {
    let mut t = to_rows(x, m);
    let nrhs = t.len() / m;
    for k in 0..m {
        let (done, rest) = t.split_at_mut((k + 1) * nrhs);
        let row_k = &mut done[k * nrhs..];
        let inv = 1.0 / chol[k * m + k];
        row_k.iter_mut().for_each(|v| *v *= inv);
        for (i, row_i) in (k + 1..m).zip(rest.chunks_exact_mut(nrhs)) {
            let lik = chol[k * m + i];
            if lik != 0.0 {
                for (a, &b) in row_i.iter_mut().zip(row_k.iter()) {
                    *a -= lik * b;
                }
            }
        }
    }
    for k in (0..m).rev() {
        let (before, from_k) = t.split_at_mut(k * nrhs);
        let row_k = &mut from_k[..nrhs];
        let inv = 1.0 / chol[k * m + k];
        row_k.iter_mut().for_each(|v| *v *= inv);
        for (i, row_i) in before.chunks_exact_mut(nrhs).enumerate() {
            let lki = chol[i * m + k];
            if lki != 0.0 {
                for (a, &b) in row_i.iter_mut().zip(row_k.iter()) {
                    *a -= lki * b;
                }
            }
        }
    }
    from_rows(&t, m, x)
}

/// Algorithm-level view of a factored tensor Cholesky: `R` with `m = Rᵀ * R`.
pub fn tensor_cholesky(m: &Tensor3) -> Result<Tensor3> {
    SpdOperator::general(m.clone())?.cholesky_factor()
}

/// A weight tensor as seen by norms and normalization: either an
/// [`SpdOperator`] or its inverse.
pub trait Weight {
    fn size(&self) -> usize;
    fn depth(&self) -> usize;
    /// `W * x`
    fn apply_weight(&self, x: &Tensor3) -> Result<Tensor3>;
    /// `v̂ᴴ Ŵ⁽ʲ⁾ v̂`
    fn face_quadratic(&self, face: usize, v: &[Complex64]) -> f64;
}

impl Weight for SpdOperator {
    fn size(&self) -> usize {
        self.size
    }
    fn depth(&self) -> usize {
        self.depth
    }
    fn apply_weight(&self, x: &Tensor3) -> Result<Tensor3> {
        self.apply(x)
    }
    fn face_quadratic(&self, face: usize, v: &[Complex64]) -> f64 {
        self.fourier_quadratic(face, v)
    }
}

/// The inverse of an SPD operator, realized through its factorization.
#[derive(Clone, Copy, Debug)]
pub struct Inverse<'a>(pub &'a SpdOperator);

impl Weight for Inverse<'_> {
    fn size(&self) -> usize {
        self.0.size
    }
    fn depth(&self) -> usize {
        self.0.depth
    }
    fn apply_weight(&self, x: &Tensor3) -> Result<Tensor3> {
        self.0.apply_inverse(x)
    }
    fn face_quadratic(&self, face: usize, v: &[Complex64]) -> f64 {
        self.0.fourier_inverse_quadratic(face, v)
    }
}
