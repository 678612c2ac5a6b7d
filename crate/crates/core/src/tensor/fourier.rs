use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::Tensor3;
use crate::error::{Error, Result};

/// Above this relative defect, Fourier data is rejected as corrupted.
pub const CONJ_SYMMETRY_TOL: f64 = 1e-8;
/// Imaginary parts of an inverse transform below this relative size are
/// rounding residue and get dropped.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// A tensor transformed along its tubes; face `j` holds the `j`th block of
/// the block-diagonalized `bcirc`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTensor3 {
    rows: usize,
    cols: usize,
    depth: usize,
    data: Vec<Complex64>,
}

fn run_fft(buf: &mut [Complex64], n: usize, inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        fft.process(buf);
    });
}

/// Unnormalized forward DFT along mode 3 (MATLAB `fft(A, [], 3)`).
///
/// The output is projected onto exact conjugate symmetry so that facewise
/// work downstream stays exactly real after the inverse transform.
pub fn fft_mode3(t: &Tensor3) -> FourierTensor3 {
    let (rows, cols, n) = t.dims();
    let tubes = rows * cols;
    let src = t.as_slice();
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); tubes * n];
    for k in 0..n {
        for s in 0..tubes {
            buf[s * n + k] = Complex64::new(src[k * tubes + s], 0.0);
        }
    }
    run_fft(&mut buf, n, false);

    let mut data = vec![Complex64::new(0.0, 0.0); tubes * n];
    for s in 0..tubes {
        let tube = &buf[s * n..(s + 1) * n];
        data[s] = Complex64::new(tube[0].re, 0.0);
        for k in 1..=n / 2 {
            let mirror = n - k;
            if k == mirror {
                data[k * tubes + s] = Complex64::new(tube[k].re, 0.0);
            } else {
                let v = (tube[k] + tube[mirror].conj()) * 0.5;
                data[k * tubes + s] = v;
                data[mirror * tubes + s] = v.conj();
            }
        }
    }
    FourierTensor3 {
        rows,
        cols,
        depth: n,
        data,
    }
}

/// Inverse of [`fft_mode3`]. Fails when the input is not the transform of a
/// real tensor.
pub fn ifft_mode3(f: &FourierTensor3) -> Result<Tensor3> {
    let defect = f.conj_symmetry_defect();
    if defect > CONJ_SYMMETRY_TOL {
        return Err(Error::ConjugateSymmetry { defect });
    }
    let (rows, cols, n) = f.dims();
    let tubes = rows * cols;
    let mut buf = vec![Complex64::new(0.0, 0.0); tubes * n];
    for k in 0..n {
        for s in 0..tubes {
            buf[s * n + k] = f.data[k * tubes + s];
        }
    }
    run_fft(&mut buf, n, true);

    let scale = 1.0 / n as f64;
    let mut out = vec![0.0; tubes * n];
    let (mut re2, mut im2) = (0.0, 0.0);
    for s in 0..tubes {
        for k in 0..n {
            let v = buf[s * n + k] * scale;
            re2 += v.re * v.re;
            im2 += v.im * v.im;
            out[k * tubes + s] = v.re;
        }
    }
    if im2 > 0.0 {
        let residue = (im2 / (re2 + im2)).sqrt();
        if residue > IMAG_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue { residue });
        }
    }
    Tensor3::from_vec(rows, cols, n, out)
}

impl FourierTensor3 {
    pub fn zeros(rows: usize, cols: usize, depth: usize) -> Self {
        Self {
            rows,
            cols,
            depth,
            data: vec![Complex64::new(0.0, 0.0); rows * cols * depth],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, depth: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || depth == 0 || data.len() != rows * cols * depth {
            return Err(Error::dims(
                "FourierTensor3::from_vec",
                format!("{} values for {rows}x{cols}x{depth}", data.len()),
            ));
        }
        Ok(Self {
            rows,
            cols,
            depth,
            data,
        })
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.rows, self.cols, self.depth)
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Face `j`, column-major.
    pub fn face(&self, j: usize) -> &[Complex64] {
        let sz = self.rows * self.cols;
        &self.data[j * sz..(j + 1) * sz]
    }

    pub fn face_mut(&mut self, j: usize) -> &mut [Complex64] {
        let sz = self.rows * self.cols;
        &mut self.data[j * sz..(j + 1) * sz]
    }

    /// `‖F − conj(mirror(F))‖ / ‖F‖`, where mirror maps face `j` to face
    /// `(n − j) mod n`. Zero for the transform of any real tensor.
    pub fn conj_symmetry_defect(&self) -> f64 {
        let sz = self.rows * self.cols;
        let n = self.depth;
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            let m = (n - j) % n;
            for s in 0..sz {
                let a = self.data[j * sz + s];
                let b = self.data[m * sz + s];
                num += (a - b.conj()).norm_sqr();
                den += a.norm_sqr();
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt() * 0.5
        }
    }

    /// Facewise product `self^(j) · other^(j)`.
    ///
    /// Only faces `0..=n/2` are multiplied; the rest are their conjugates,
    /// which is exact when both operands are conjugate-symmetric.
    pub fn mul(&self, other: &FourierTensor3) -> Result<FourierTensor3> {
        self.mul_rows(other, None)
    }

    /// [`FourierTensor3::mul`] restricted to the given nonzero row range of
    /// each column of each face, indexed `face * cols + col`.
    fn mul_rows(
        &self,
        other: &FourierTensor3,
        support: Option<&[(usize, usize)]>,
    ) -> Result<FourierTensor3> {
        if self.cols != other.rows || self.depth != other.depth {
            return Err(Error::dims(
                "tprod",
                format!("{:?} * {:?}", self.dims(), other.dims()),
            ));
        }
        let (l, m, p, n) = (self.rows, self.cols, other.cols, self.depth);
        let mut out = FourierTensor3::zeros(l, p, n);
        for j in 0..=n / 2 {
            let a = self.face(j);
            let b = other.face(j);
            let c = out.face_mut(j);
            for q in 0..m {
                let (lo, hi) = support.map_or((0, l), |s| s[j * m + q]);
                let acol = &a[q * l + lo..q * l + hi];
                for col in 0..p {
                    let bq = b[col * m + q];
                    let dst = &mut c[col * l + lo..col * l + hi];
                    for (d, av) in dst.iter_mut().zip(acol) {
                        d.re += av.re * bq.re - av.im * bq.im;
                        d.im += av.re * bq.im + av.im * bq.re;
                    }
                }
            }
        }
        out.mirror_upper_faces();
        Ok(out)
    }

    /// Range of rows outside of which column `q` of face `j` is exactly
    /// zero, for every face and column.
    fn column_support(&self) -> Vec<(usize, usize)> {
        let (l, m, n) = self.dims();
        let mut out = Vec::with_capacity(m * n);
        for j in 0..n {
            let f = self.face(j);
            for q in 0..m {
                let col = &f[q * l..(q + 1) * l];
                let zero = Complex64::new(0.0, 0.0);
                match col.iter().position(|&z| z != zero) {
                    Some(lo) => {
                        let hi = l - col.iter().rev().position(|&z| z != zero).unwrap_or(0);
                        out.push((lo, hi));
                    }
                    None => out.push((0, 0)),
                }
            }
        }
        out
    }

    /// Facewise `self^(j)ᴴ · other^(j)`, the Fourier image of `selfᵀ * other`.
    pub fn mul_adjoint(&self, other: &FourierTensor3) -> Result<FourierTensor3> {
        if self.rows != other.rows || self.depth != other.depth {
            return Err(Error::dims(
                "tprod (transposed)",
                format!("{:?}ᵀ * {:?}", self.dims(), other.dims()),
            ));
        }
        let (l, m, p, n) = (self.rows, self.cols, other.cols, self.depth);
        let mut out = FourierTensor3::zeros(m, p, n);
        for j in 0..=n / 2 {
            let a = self.face(j);
            let b = other.face(j);
            let c = out.face_mut(j);
            for r in 0..m {
                let acol = &a[r * l..(r + 1) * l];
                for col in 0..p {
                    let bcol = &b[col * l..(col + 1) * l];
                    let (mut re, mut im) = (0.0, 0.0);
                    for (av, bv) in acol.iter().zip(bcol) {
                        re += av.re * bv.re + av.im * bv.im;
                        im += av.re * bv.im - av.im * bv.re;
                    }
                    c[col * m + r] = Complex64::new(re, im);
                }
            }
        }
        out.mirror_upper_faces();
        Ok(out)
    }

    /// Fills faces `n/2+1..n` with the conjugates of their mirrors.
    pub(crate) fn mirror_upper_faces(&mut self) {
        let sz = self.rows * self.cols;
        let n = self.depth;
        for j in n / 2 + 1..n {
            let (lo, hi) = self.data.split_at_mut(j * sz);
            let src = &lo[(n - j) * sz..(n - j + 1) * sz];
            for (d, s) in hi[..sz].iter_mut().zip(src) {
                *d = s.conj();
            }
        }
    }
}

/// A fixed left operand of the t-product with its transform cached, for
/// repeated `A * X` and `Aᵀ * X` evaluations.
#[derive(Clone, Debug)]
pub struct TensorOperator {
    spatial: Tensor3,
    fourier: FourierTensor3,
    /// Facewise conjugate transposes, so `Aᵀ * x` runs the same kernel.
    adjoint: FourierTensor3,
    support: Vec<(usize, usize)>,
    adjoint_support: Vec<(usize, usize)>,
}

impl TensorOperator {
    pub fn new(a: Tensor3) -> Self {
        let fourier = fft_mode3(&a);
        let (l, m, n) = a.dims();
        let mut adjoint = FourierTensor3::zeros(m, l, n);
        for j in 0..n {
            let src = fourier.face(j);
            let dst = adjoint.face_mut(j);
            for c in 0..m {
                for r in 0..l {
                    dst[r * m + c] = src[c * l + r].conj();
                }
            }
        }
        Self {
            support: fourier.column_support(),
            adjoint_support: adjoint.column_support(),
            spatial: a,
            fourier,
            adjoint,
        }
    }

    pub fn tensor(&self) -> &Tensor3 {
        &self.spatial
    }

    pub fn fourier(&self) -> &FourierTensor3 {
        &self.fourier
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.spatial.dims()
    }

    /// `A * x`
    pub fn apply(&self, x: &Tensor3) -> Result<Tensor3> {
        let xf = fft_mode3(x);
        ifft_mode3(&self.fourier.mul_rows(&xf, Some(&self.support))?)
    }

    /// `Aᵀ * x`
    pub fn apply_transpose(&self, x: &Tensor3) -> Result<Tensor3> {
        let xf = fft_mode3(x);
        ifft_mode3(&self.adjoint.mul_rows(&xf, Some(&self.adjoint_support))?)
    }
}
