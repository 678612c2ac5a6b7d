#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tgkt_core::tensor::{identity_tensor, tprod, ttranspose, Tensor3};

pub fn rand_tensor(l: usize, m: usize, n: usize, seed: u64) -> Tensor3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Tensor3::from_fn(l, m, n, |_, _, _| rng.random_range(-1.0..1.0))
}

/// `GᵀG / m + shift·I` for a random `G`; every Fourier face is HPD.
pub fn random_spd(m: usize, n: usize, shift: f64, seed: u64) -> Tensor3 {
    let g = rand_tensor(m, m, n, seed);
    let mut s = tprod(&ttranspose(&g), &g).unwrap().scale(1.0 / m as f64);
    s.axpy(shift, &identity_tensor(m, n)).unwrap();
    s
}

/// Block-circulant matrix of `t`, built entry by entry with no size cap.
pub fn dense_bcirc(t: &Tensor3) -> DMatrix<f64> {
    let (l, m, n) = t.dims();
    DMatrix::from_fn(l * n, m * n, |r, c| {
        let (bi, i) = (r / l, r % l);
        let (bj, j) = (c / m, c % m);
        t.get(i, j, (bi + n - bj) % n)
    })
}

/// `unfold(x)` with its columns stacked into one vector.
pub fn stack(x: &Tensor3) -> DVector<f64> {
    let (l, p, n) = x.dims();
    DVector::from_fn(l * p * n, |r, _| {
        let (col, rest) = (r / (l * n), r % (l * n));
        x.get(rest % l, col, rest / l)
    })
}

pub fn unstack(v: &DVector<f64>, l: usize, p: usize, n: usize) -> Tensor3 {
    Tensor3::from_fn(l, p, n, |i, j, k| v[j * l * n + k * l + i])
}

pub fn max_rel(a: &Tensor3, b: &Tensor3) -> f64 {
    assert_eq!(a.dims(), b.dims());
    let scale = b.max_abs().max(a.max_abs()).max(f64::MIN_POSITIVE);
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

pub fn fro_rel(a: &Tensor3, b: &Tensor3) -> f64 {
    let d: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    let s: f64 = b.as_slice().iter().map(|y| y * y).sum();
    (d / s).sqrt()
}
