//! Small dense kernels on single Fourier faces.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Real or complex scalar for the bidiagonal kernels.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + PartialEq
{
    fn zero() -> Self;
    fn from_real(x: f64) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn re(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
}

/// In-place lower Cholesky factor `A = L Lᴴ` of a column-major Hermitian
/// matrix. Only the lower triangle is read; the strict upper triangle is
/// zeroed.
pub fn cholesky_lower(a: &mut [Complex64], n: usize) -> Result<(), String> {
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[k * n + j].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(format!("pivot {j} is {d:.3e}"));
        }
        let djj = d.sqrt();
        a[j * n + j] = Complex64::new(djj, 0.0);
        for i in j + 1..n {
            let mut s = a[j * n + i];
            for k in 0..j {
                s -= a[k * n + i] * a[k * n + j].conj();
            }
            a[j * n + i] = s / djj;
        }
        for i in 0..j {
            a[j * n + i] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(())
}

/// Solves `L y = b` in place.
pub fn forward_solve(l: &[Complex64], n: usize, b: &mut [Complex64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solves `Lᴴ x = y` in place.
pub fn adjoint_backward_solve(l: &[Complex64], n: usize, y: &mut [Complex64]) {
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[i * n + k].conj() * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
}

/// Real counterparts for the spatial path.
pub fn cholesky_lower_real(a: &mut [f64], n: usize) -> Result<(), String> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[k * n + j] * a[k * n + j];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(format!("pivot {j} is {d:.3e}"));
        }
        let djj = d.sqrt();
        a[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[j * n + i];
            for k in 0..j {
                s -= a[k * n + i] * a[k * n + j];
            }
            a[j * n + i] = s / djj;
        }
        for i in 0..j {
            a[j * n + i] = 0.0;
        }
    }
    Ok(())
}

pub fn forward_solve_real<T: Scalar>(l: &[f64], n: usize, b: &mut [T]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - b[k].scale(l[k * n + i]);
        }
        b[i] = s.scale(1.0 / l[i * n + i]);
    }
}

pub fn transpose_backward_solve_real<T: Scalar>(l: &[f64], n: usize, y: &mut [T]) {
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - y[k].scale(l[i * n + k]);
        }
        y[i] = s.scale(1.0 / l[i * n + i]);
    }
}

/// `‖A − Aᴴ‖_F / ‖A‖_F` for a square column-major matrix.
pub fn hermitian_defect(a: &[Complex64], n: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        for i in 0..n {
            num += (a[j * n + i] - a[i * n + j].conj()).norm_sqr();
            den += a[j * n + i].norm_sqr();
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Complex Givens rotation `G = [[c̄, s̄], [−s, c]]` with `G·[a; b] = [r; 0]`.
#[inline]
fn givens<T: Scalar>(a: T, b: T) -> (T, T, f64) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 {
        (T::from_real(1.0), T::zero(), 0.0)
    } else {
        (a.scale(1.0 / r), b.scale(1.0 / r), r)
    }
}

/// Least-squares solution of the stacked system
/// `[P̄; λI] z ≈ [e₁·rhs; 0]` for a `(k+1) x k` lower bidiagonal `P̄` with
/// diagonal `diag` (length k) and subdiagonal `sub` (length k, `sub[i]`
/// sits at row `i+1`, column `i`). Uses Givens QR, O(k). `lambda = 0`
/// gives the unregularized problem.
pub fn damped_bidiag_lsq<T: Scalar>(diag: &[T], sub: &[T], rhs: T, lambda: f64) -> Vec<T> {
    let k = diag.len();
    assert_eq!(sub.len(), k, "subdiagonal length must equal diagonal length");
    if k == 0 {
        return Vec::new();
    }
    let mut rho = vec![T::zero(); k];
    let mut theta = vec![T::zero(); k];
    let mut phi = vec![T::zero(); k];

    let mut rhobar = diag[0];
    let mut phibar = rhs;
    for i in 0..k {
        // Fold damping row i into row i; it only touches column i.
        if lambda > 0.0 {
            let (c1, _, r1) = givens(rhobar, T::from_real(lambda));
            rhobar = T::from_real(r1);
            phibar = c1.conj() * phibar;
        }
        // Rotate row i against row i+1 of P̄.
        let (c, s, r) = givens(rhobar, sub[i]);
        let next = if i + 1 < k { diag[i + 1] } else { T::zero() };
        rho[i] = T::from_real(r);
        theta[i] = s.conj() * next;
        phi[i] = c.conj() * phibar;
        rhobar = c * next;
        phibar = -(s * phibar);
    }

    let mut z = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut v = phi[i];
        if i + 1 < k {
            v = v - theta[i] * z[i + 1];
        }
        z[i] = if rho[i] == T::zero() {
            T::zero()
        } else {
            v / rho[i]
        };
    }
    z
}

/// `‖P̄ z − e₁·rhs‖²`
pub fn bidiag_residual_sq<T: Scalar>(diag: &[T], sub: &[T], rhs: T, z: &[T]) -> f64 {
    let k = diag.len();
    let mut acc = 0.0;
    for i in 0..=k {
        let mut v = T::zero();
        if i < k {
            v = v + diag[i] * z[i];
        }
        if i > 0 {
            v = v + sub[i - 1] * z[i - 1];
        }
        if i == 0 {
            v = v - rhs;
        }
        acc += v.norm_sqr();
    }
    acc
}

/// `‖(μ P̄P̄ᴴ + I)⁻¹ e₁·rhs‖²`, which equals the residual of the damped
/// solution. Going through the Givens solve keeps it accurate for large
/// `μ`, where the shifted Gram matrix is badly conditioned.
pub fn shifted_gram_norm_sq<T: Scalar>(diag: &[T], sub: &[T], rhs: T, mu: f64) -> f64 {
    let lambda = if mu.is_infinite() { 0.0 } else { mu.powf(-0.5) };
    let z = damped_bidiag_lsq(diag, sub, rhs, lambda);
    bidiag_residual_sq(diag, sub, rhs, &z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_hand_example() {
        // [[4,2],[2,3]] = L Lᴴ with L = [[2,0],[1,√2]]
        let mut a = vec![
            Complex64::new(4.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        cholesky_lower(&mut a, 2).unwrap();
        assert!((a[0].re - 2.0).abs() < 1e-15);
        assert!((a[1].re - 1.0).abs() < 1e-15);
        assert_eq!(a[2], Complex64::new(0.0, 0.0));
        assert!((a[3].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(cholesky_lower_real(&mut a, 2).is_err());
    }

    #[test]
    fn one_dimensional_damped_solution() {
        // k = 1: z = c·z1 / (c² + z2² + λ²)
        let (c, z2, z1, mu) = (1.7, 0.4, 2.3, 5.0f64);
        let z = damped_bidiag_lsq(&[c], &[z2], z1, 1.0 / mu.sqrt());
        let expected = c * z1 / (c * c + z2 * z2 + 1.0 / mu);
        assert!((z[0] - expected).abs() < 1e-14);
    }

    fn dense_shifted(diag: &[Complex64], sub: &[Complex64], rhs: Complex64, mu: f64) -> f64 {
        let k = diag.len();
        let p = nalgebra::DMatrix::from_fn(k + 1, k, |i, j| {
            if i == j {
                diag[j]
            } else if i == j + 1 {
                sub[j]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let g = (&p * p.adjoint()).scale(mu) + nalgebra::DMatrix::identity(k + 1, k + 1);
        let mut e = nalgebra::DVector::zeros(k + 1);
        e[0] = rhs;
        g.lu().solve(&e).unwrap().norm_squared()
    }

    #[test]
    fn shifted_norm_matches_dense_solve() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let diag = [c(1.0, 0.3), c(0.6, -0.2), c(0.3, 0.1), c(0.2, 0.0)];
        let sub = [c(0.8, 0.1), c(0.2, 0.4), c(0.1, -0.05), c(0.05, 0.0)];
        let rhs = c(1.5, -0.5);
        for &mu in &[0.1, 7.0, 300.0, 1e4] {
            let want = dense_shifted(&diag, &sub, rhs, mu);
            let got = shifted_gram_norm_sq(&diag, &sub, rhs, mu);
            assert!((got - want).abs() < 1e-10 * want, "mu={mu}: {got} vs {want}");
        }
        let re: Vec<f64> = diag.iter().map(|v| v.re).collect();
        let re_sub: Vec<f64> = sub.iter().map(|v| v.re).collect();
        let as_c = |v: &[f64]| v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>();
        let want = dense_shifted(&as_c(&re), &as_c(&re_sub), c(2.0, 0.0), 40.0);
        let got = shifted_gram_norm_sq(&re, &re_sub, 2.0, 40.0);
        assert!((got - want).abs() < 1e-10 * want);
    }

    #[test]
    fn shifted_norm_is_monotone_for_large_mu() {
        let diag = [1.3, 0.7, 0.4, 0.2];
        let sub = [0.9, 0.5, 0.3, 0.05];
        let vals: Vec<f64> = (0..18)
            .map(|i| shifted_gram_norm_sq(&diag, &sub, 2.0, 10f64.powf(i as f64 * 0.4)))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }
}
