mod common;

use common::{dense_bcirc, fro_rel, max_rel, rand_tensor, random_spd, stack, unstack};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tgkt_core::linalg::{
    normalize, tensor_cholesky, weighted_norm, FaceTolerance, Inverse, SpdKind, SpdOperator,
};
use tgkt_core::problems::{
    build_blur, build_covariance_m, build_reg_d, gaussian_tensor, gen_noise, BlurSpec,
    BlurVariant, NoiseSpec,
};
use tgkt_core::tensor::{fft_mode3, fro_norm, tprod, ttranspose, Matrix, Tensor3};
use tgkt_core::Error;

fn cholesky_defect(m: &Tensor3) -> f64 {
    let r = tensor_cholesky(m).unwrap();
    let back = tprod(&ttranspose(&r), &r).unwrap();
    fro_rel(&back, m)
}

#[test]
fn tensor_cholesky_reconstructs_random_spd() {
    for seed in 0..50u64 {
        let m = 1 + (seed as usize % 8);
        let n = 1 + ((seed as usize / 8) % 8);
        let t = random_spd(m, n, 0.1, seed);
        assert!(cholesky_defect(&t) < 1e-9, "seed {seed}");
    }
}

#[test]
fn cholesky_faces_are_upper_triangular() {
    let t = random_spd(5, 6, 0.2, 3);
    let rf = fft_mode3(&tensor_cholesky(&t).unwrap());
    for j in 0..6 {
        let f = rf.face(j);
        for c in 0..5 {
            assert!(f[c * 5 + c].re > 0.0);
            assert!(f[c * 5 + c].im.abs() < 1e-12);
            for r in c + 1..5 {
                assert!(f[c * 5 + r].norm() < 1e-12);
            }
        }
    }
}

#[test]
fn hand_cholesky() {
    let m = Tensor3::from_faces(&[Matrix::from_rows(&[&[4.0, 2.0], &[2.0, 3.0]])]).unwrap();
    let r = tensor_cholesky(&m).unwrap();
    let want = [[2.0, 1.0], [0.0, 2f64.sqrt()]];
    for (i, row) in want.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            assert!((r.get(i, j, 0) - v).abs() < 1e-15);
        }
    }
}

#[test]
fn indefinite_face_is_named() {
    // Tube (1, 2): Fourier values 3 and -1, so face 1 is indefinite.
    let t = Tensor3::tube(&[1.0, 2.0]);
    match SpdOperator::general(t) {
        Err(Error::NotPositiveDefinite { face, .. }) => assert_eq!(face, 1),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn experiment_operators_factor_cleanly() {
    for &(size, depth) in &[(2, 3), (7, 4), (16, 5)] {
        for &omega in &[0.05, 0.2, 1.0] {
            let m = build_covariance_m(size, depth, omega).unwrap();
            assert_eq!(m.kind(), SpdKind::Spatial);
            let t = m.to_tensor();
            assert!(cholesky_defect(&t) < 1e-10);
            let face = t.face(0);
            let eig = DMatrix::from_column_slice(size, size, face.as_slice()).symmetric_eigen();
            assert!(eig.eigenvalues.min() >= omega - 1e-12);
        }
        for &gamma in &[1.0, 2.0] {
            for &alpha in &[0.5, 3.0] {
                let d = build_reg_d(size, depth, gamma, alpha).unwrap();
                let t = d.to_tensor();
                assert!(cholesky_defect(&t) < 1e-10);
                let face = t.face(0);
                let eig = DMatrix::from_column_slice(size, size, face.as_slice()).symmetric_eigen();
                assert!(eig.eigenvalues.min() >= alpha / 4.0 - 1e-12);
            }
        }
    }
}

#[test]
fn spatial_application_matches_fourier_path() {
    let m = build_covariance_m(9, 6, 0.2).unwrap();
    let general = SpdOperator::general(m.to_tensor()).unwrap();
    assert_eq!(general.kind(), SpdKind::General);
    for seed in 0..50u64 {
        let x = rand_tensor(9, 1 + seed as usize % 3, 6, seed);
        assert!(max_rel(&m.apply(&x).unwrap(), &general.apply(&x).unwrap()) < 1e-12);
        assert!(
            max_rel(&m.apply_inverse(&x).unwrap(), &general.apply_inverse(&x).unwrap()) < 1e-12
        );
        assert!(
            max_rel(
                &m.apply_factor_transpose(&x).unwrap(),
                &general.apply_factor_transpose(&x).unwrap()
            ) < 1e-12
        );
    }
}

#[test]
fn inverse_matches_dense_solve() {
    let t = random_spd(4, 5, 0.3, 8);
    let op = SpdOperator::general(t.clone()).unwrap();
    let x = rand_tensor(4, 1, 5, 9);
    let dense = dense_bcirc(&t).lu().solve(&stack(&x)).unwrap();
    let want = unstack(&dense, 4, 1, 5);
    assert!(max_rel(&op.apply_inverse(&x).unwrap(), &want) < 1e-11);
}

#[test]
fn whitened_noise_norm_identity() {
    let ops = [
        SpdOperator::general(random_spd(6, 4, 0.2, 1)).unwrap(),
        build_covariance_m(6, 4, 0.2).unwrap(),
    ];
    for m in &ops {
        for seed in 0..20u64 {
            let e = gaussian_tensor(6, 2, 4, seed);
            let colored = m.apply_factor_transpose(&e).unwrap();
            let got = weighted_norm(&colored, &Inverse(m)).unwrap();
            assert!((got - fro_norm(&e)).abs() < 1e-10 * fro_norm(&e));
        }
    }
}

#[test]
fn normalize_reconstructs_random_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..10u64 {
        let n = SpdOperator::general(random_spd(5, 4, 0.2, seed)).unwrap();
        let x = rand_tensor(5, 1, 4, seed + 50);
        let out = normalize(&x, &n, &mut FaceTolerance::new(), &mut rng).unwrap();
        assert!(out.replaced_faces.is_empty());
        assert!((weighted_norm(&out.v, &n).unwrap() - 1.0).abs() < 1e-12);
        let back = tprod(&out.v, &out.a).unwrap();
        assert!(fro_rel(&back, &x) < 1e-10);
        assert!(max_rel(&out.wv, &n.apply(&out.v).unwrap()) < 1e-12);
    }
}

#[test]
fn blur_structure() {
    for variant in [BlurVariant::Symmetric, BlurVariant::Circulant] {
        let spec = BlurSpec { n: 24, sigma: 3.0, band: 6, variant };
        let t = build_blur(&spec).unwrap();
        let a = spec.matrix().unwrap();
        let nonzero: Vec<usize> = (0..24)
            .filter(|&k| t.face_slice(k).iter().any(|&v| v != 0.0))
            .collect();
        assert_eq!(nonzero.len(), 6, "{variant:?}");
        for k in 0..24 {
            let want = a.scale(a[(k, 0)]);
            assert!(t.face(k).max_abs_diff(&want) == 0.0);
        }
    }
    let spec = BlurSpec { n: 300, sigma: 3.0, band: 12, variant: BlurVariant::Symmetric };
    let a = spec.matrix().unwrap();
    assert!(a.is_symmetric(0.0));
    assert!((a[(0, 0)] - 1.0 / (3.0 * (2.0 * std::f64::consts::PI).sqrt())).abs() < 1e-15);
    assert_eq!(a[(0, 12)], 0.0);
    assert!(a[(0, 11)] > 0.0);
    let bad = BlurSpec { band: 0, ..spec };
    assert!(build_blur(&bad).is_err());
}

#[test]
fn noise_scaling_is_exact_and_reproducible() {
    let b = rand_tensor(8, 3, 5, 77);
    let m = build_covariance_m(8, 5, 0.2).unwrap();
    let spec = NoiseSpec { noise_level: 1e-3, seed: 42 };
    let s = gen_noise(&b, &m, &spec).unwrap();
    assert!((s.delta / fro_norm(&b) - 1e-3).abs() < 1e-12 * 1e-3);
    let achieved = weighted_norm(&s.e, &Inverse(&m)).unwrap();
    assert!((achieved - s.delta).abs() < 1e-10 * s.delta);
    let total: f64 = s.slice_deltas.iter().map(|d| d * d).sum::<f64>().sqrt();
    assert!((total - s.delta).abs() < 1e-12 * s.delta);
    let again = gen_noise(&b, &m, &spec).unwrap();
    assert_eq!(s.e, again.e);
}
