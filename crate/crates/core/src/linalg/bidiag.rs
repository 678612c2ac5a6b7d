use num_complex::Complex64;

use super::dense::{bidiag_residual_sq, damped_bidiag_lsq, shifted_gram_norm_sq};
use crate::error::{Error, Result};
use crate::tensor::{fft_mode3, ifft_mode3, FourierTensor3, Matrix, Tensor3};

/// The `(k+1) x k x n` lower bidiagonal tensor built from tubes: `c_1..c_k`
/// on the diagonal and `z_2..z_{k+1}` below it. `z_1` is kept alongside as
/// the right-hand side tube of the reduced problem.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorBidiagonal {
    depth: usize,
    c: Vec<Tensor3>,
    z: Vec<Tensor3>,
}

impl TensorBidiagonal {
    pub fn new(z1: Tensor3) -> Self {
        Self {
            depth: z1.depth(),
            c: Vec::new(),
            z: vec![z1],
        }
    }

    /// Builds from `c_1..c_k` and `z_1..z_{k+1}`.
    pub fn from_tubes(c: Vec<Tensor3>, z: Vec<Tensor3>) -> Result<Self> {
        let depth = z.first().map(|t| t.depth()).unwrap_or(0);
        let ok = depth > 0
            && z.len() == c.len() + 1
            && c.iter().chain(&z).all(|t| t.dims() == (1, 1, depth));
        if !ok {
            return Err(Error::dims(
                "TensorBidiagonal::from_tubes",
                format!("{} diagonal and {} subdiagonal tubes", c.len(), z.len()),
            ));
        }
        Ok(Self { depth, c, z })
    }

    pub fn push(&mut self, c: Tensor3, z: Tensor3) {
        assert_eq!(c.dims(), (1, 1, self.depth), "diagonal tube shape");
        assert_eq!(z.dims(), (1, 1, self.depth), "subdiagonal tube shape");
        self.c.push(c);
        self.z.push(z);
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn c(&self) -> &[Tensor3] {
        &self.c
    }

    /// `z_1..z_{k+1}`
    pub fn z(&self) -> &[Tensor3] {
        &self.z
    }

    pub fn z1(&self) -> &Tensor3 {
        &self.z[0]
    }

    /// Leading `k` steps.
    pub fn truncate(&self, k: usize) -> Self {
        assert!(k <= self.k());
        Self {
            depth: self.depth,
            c: self.c[..k].to_vec(),
            z: self.z[..=k].to_vec(),
        }
    }

    /// `P̄_k` as a dense tensor.
    pub fn to_tensor(&self) -> Tensor3 {
        let k = self.k();
        let n = self.depth;
        let mut t = Tensor3::zeros(k + 1, k.max(1), n);
        for i in 0..k {
            for f in 0..n {
                t.set(i, i, f, self.c[i].get(0, 0, f));
                t.set(i + 1, i, f, self.z[i + 1].get(0, 0, f));
            }
        }
        t
    }

    /// The `k x k` upper block `P_k` as a dense tensor.
    pub fn square_tensor(&self) -> Tensor3 {
        let k = self.k();
        let full = self.to_tensor();
        Tensor3::from_fn(k, k, self.depth, |i, j, f| full.get(i, j, f))
    }

    fn fourier(&self) -> FourierData {
        let n = self.depth;
        let tf = |t: &Tensor3| -> Vec<Complex64> { fft_mode3(t).as_slice().to_vec() };
        let c: Vec<Vec<Complex64>> = self.c.iter().map(tf).collect();
        let z: Vec<Vec<Complex64>> = self.z.iter().map(tf).collect();
        let k = self.k();
        let mut faces = Vec::with_capacity(n);
        for j in 0..n {
            faces.push(FaceBidiag {
                diag: (0..k).map(|i| c[i][j]).collect(),
                sub: (0..k).map(|i| z[i + 1][j]).collect(),
            });
        }
        FourierData { faces }
    }
}

struct FaceBidiag {
    diag: Vec<Complex64>,
    sub: Vec<Complex64>,
}

struct FourierData {
    faces: Vec<FaceBidiag>,
}

fn tube_fourier(rhs: &Tensor3, depth: usize) -> Result<Vec<Complex64>> {
    if rhs.dims() != (1, 1, depth) {
        return Err(Error::dims(
            "reduced problem",
            format!("right-hand side {:?} is not a tube of depth {depth}", rhs.dims()),
        ));
    }
    Ok(fft_mode3(rhs).as_slice().to_vec())
}

fn solve_faces(pbar: &TensorBidiagonal, rhs: &Tensor3, lambda: f64) -> Result<Tensor3> {
    let k = pbar.k();
    let n = pbar.depth();
    if k == 0 {
        return Err(Error::InvalidArgument("empty bidiagonal".into()));
    }
    let data = pbar.fourier();
    let r = tube_fourier(rhs, n)?;
    let mut out = FourierTensor3::zeros(k, 1, n);
    for (j, face) in data.faces.iter().enumerate() {
        let z = damped_bidiag_lsq(&face.diag, &face.sub, r[j], lambda);
        out.face_mut(j).copy_from_slice(&z);
    }
    ifft_mode3(&out)
}

/// Minimizer of `‖P̄ * Z − e₁ * rhs‖² + μ⁻¹‖Z‖²`, a `k x 1 x n` lateral
/// slice. Each Fourier face is solved by Givens QR of the stacked system
/// `[P̄; μ^{-1/2} I]`.
pub fn solve_tensor_tikhonov(pbar: &TensorBidiagonal, rhs: &Tensor3, mu: f64) -> Result<Tensor3> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "regularization parameter must be positive, got {mu}"
        )));
    }
    let lambda = if mu.is_infinite() { 0.0 } else { mu.powf(-0.5) };
    solve_faces(pbar, rhs, lambda)
}

/// Least-squares solution of `P̄ * Z = e₁ * rhs` without regularization.
pub fn solve_tensor_lsq(pbar: &TensorBidiagonal, rhs: &Tensor3) -> Result<Tensor3> {
    solve_faces(pbar, rhs, 0.0)
}

/// `‖P̄ * Z − e₁ * rhs‖_F²` for a given `Z`.
pub fn tensor_residual_sq(pbar: &TensorBidiagonal, rhs: &Tensor3, zsol: &Tensor3) -> Result<f64> {
    let n = pbar.depth();
    let k = pbar.k();
    if zsol.dims() != (k, 1, n) {
        return Err(Error::dims(
            "tensor_residual_sq",
            format!("solution {:?} for k = {k}", zsol.dims()),
        ));
    }
    let data = pbar.fourier();
    let r = tube_fourier(rhs, n)?;
    let zf = fft_mode3(zsol);
    let total: f64 = data
        .faces
        .iter()
        .enumerate()
        .map(|(j, f)| bidiag_residual_sq(&f.diag, &f.sub, r[j], zf.face(j)))
        .sum();
    Ok(total / n as f64)
}

/// `‖(μ P̄P̄ᵀ + I)⁻¹ * e₁ * rhs‖_F²`, the squared reduced residual of the
/// regularized solution, computed without solving for it.
pub fn tensor_shifted_norm_sq(pbar: &TensorBidiagonal, rhs: &Tensor3, mu: f64) -> Result<f64> {
    let n = pbar.depth();
    let data = pbar.fourier();
    let r = tube_fourier(rhs, n)?;
    let total: f64 = data
        .faces
        .iter()
        .enumerate()
        .map(|(j, f)| shifted_gram_norm_sq(&f.diag, &f.sub, r[j], mu))
        .sum();
    Ok(total / n as f64)
}

/// Real `(k+1) x k` lower bidiagonal with `α_1..α_k` on the diagonal and
/// `β_2..β_{k+1}` below it; `β_1` scales the right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarBidiagonal {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl ScalarBidiagonal {
    pub fn new(beta1: f64) -> Self {
        Self {
            alpha: Vec::new(),
            beta: vec![beta1],
        }
    }

    pub fn from_coefficients(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != alpha.len() + 1 {
            return Err(Error::dims(
                "ScalarBidiagonal::from_coefficients",
                format!("{} alphas and {} betas", alpha.len(), beta.len()),
            ));
        }
        Ok(Self { alpha, beta })
    }

    pub fn push(&mut self, alpha: f64, beta: f64) {
        self.alpha.push(alpha);
        self.beta.push(beta);
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `β_1..β_{k+1}`
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn beta1(&self) -> f64 {
        self.beta[0]
    }

    pub fn truncate(&self, k: usize) -> Self {
        assert!(k <= self.k());
        Self {
            alpha: self.alpha[..k].to_vec(),
            beta: self.beta[..=k].to_vec(),
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        let k = self.k();
        let mut m = Matrix::zeros(k + 1, k);
        for i in 0..k {
            m[(i, i)] = self.alpha[i];
            m[(i + 1, i)] = self.beta[i + 1];
        }
        m
    }

    /// Minimizer of `‖P̄ y − e₁ rhs‖² + μ⁻¹‖y‖²`; `μ = ∞` drops the penalty.
    pub fn solve_tikhonov(&self, rhs: f64, mu: f64) -> Result<Vec<f64>> {
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "regularization parameter must be positive, got {mu}"
            )));
        }
        let lambda = if mu.is_infinite() { 0.0 } else { mu.powf(-0.5) };
        Ok(damped_bidiag_lsq(&self.alpha, &self.beta[1..], rhs, lambda))
    }

    pub fn solve_lsq(&self, rhs: f64) -> Vec<f64> {
        damped_bidiag_lsq(&self.alpha, &self.beta[1..], rhs, 0.0)
    }

    pub fn residual_sq(&self, rhs: f64, y: &[f64]) -> f64 {
        bidiag_residual_sq(&self.alpha, &self.beta[1..], rhs, y)
    }

    /// `rhs² e₁ᵀ(μ P̄P̄ᵀ + I)⁻² e₁`
    pub fn shifted_norm_sq(&self, rhs: f64, mu: f64) -> f64 {
        shifted_gram_norm_sq(&self.alpha, &self.beta[1..], rhs, mu)
    }
}
