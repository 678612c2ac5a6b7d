//! Facewise tensor SVD, kept as a verification oracle for small tensors.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{fft_mode3, ifft_mode3, FourierTensor3, Tensor3, ORACLE_CAP};

/// Economy tensor SVD `A = U * S * Vᵀ` with `r = min(ℓ, m)` singular tubes.
#[derive(Clone, Debug)]
pub struct Tsvd {
    pub u: Tensor3,
    pub s: Tensor3,
    pub v: Tensor3,
}

impl Tsvd {
    /// `‖s_i‖_F` for each singular tube, in order.
    pub fn tube_norms(&self) -> Vec<f64> {
        let r = self.s.rows();
        (0..r)
            .map(|i| {
                (0..self.s.depth())
                    .map(|k| self.s.get(i, i, k).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}

/// Each Fourier face is factored independently; faces past `n/2` are
/// conjugates of earlier ones so that `U`, `S`, `V` come out real.
pub fn tsvd_oracle(a: &Tensor3) -> Result<Tsvd> {
    let (l, m, n) = a.dims();
    if l > ORACLE_CAP || m > ORACLE_CAP || n > ORACLE_CAP {
        return Err(Error::OracleCap {
            rows: l,
            cols: m,
            cap: ORACLE_CAP,
        });
    }
    let r = l.min(m);
    let af = fft_mode3(a);
    let mut uf = FourierTensor3::zeros(l, r, n);
    let mut sf = FourierTensor3::zeros(r, r, n);
    let mut vf = FourierTensor3::zeros(m, r, n);
    for j in 0..=n / 2 {
        let mirror = (n - j) % n;
        let face = af.face(j);
        let (u, s, v) = if mirror == j {
            // Self-conjugate faces are real; a real SVD keeps them real.
            let re = DMatrix::from_fn(l, m, |i, c| face[c * l + i].re);
            let svd = re.svd(true, true);
            let u = svd.u.expect("requested U").map(|x| Complex64::new(x, 0.0));
            let vt = svd.v_t.expect("requested Vᵀ").map(|x| Complex64::new(x, 0.0));
            (u, svd.singular_values, vt.adjoint())
        } else {
            let cm = DMatrix::from_fn(l, m, |i, c| face[c * l + i]);
            let svd = cm.svd(true, true);
            let u = svd.u.expect("requested U");
            let vt = svd.v_t.expect("requested Vᴴ");
            (u, svd.singular_values, vt.adjoint())
        };
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..l {
                uf.face_mut(j)[dst * l + i] = u[(i, src)];
            }
            for i in 0..m {
                vf.face_mut(j)[dst * m + i] = v[(i, src)];
            }
            sf.face_mut(j)[dst * r + dst] = Complex64::new(s[src], 0.0);
        }
        if mirror != j {
            let (uj, sj, vj) = (uf.face(j).to_vec(), sf.face(j).to_vec(), vf.face(j).to_vec());
            conj_into(uf.face_mut(mirror), &uj);
            conj_into(sf.face_mut(mirror), &sj);
            conj_into(vf.face_mut(mirror), &vj);
        }
    }
    Ok(Tsvd {
        u: ifft_mode3(&uf)?,
        s: ifft_mode3(&sf)?,
        v: ifft_mode3(&vf)?,
    })
}

fn conj_into(dst: &mut [Complex64], src: &[Complex64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = s.conj();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{identity_tensor, tprod, ttranspose};

    #[test]
    fn identity_has_identity_singular_tubes() {
        let t = tsvd_oracle(&identity_tensor(3, 4)).unwrap();
        let id = identity_tensor(3, 4);
        for (a, b) in t.s.as_slice().iter().zip(id.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstructs_random_tensor() {
        let mut s = 17u64;
        let a = Tensor3::from_fn(4, 3, 5, |_, _, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        });
        let t = tsvd_oracle(&a).unwrap();
        let us = tprod(&t.u, &t.s).unwrap();
        let back = tprod(&us, &ttranspose(&t.v)).unwrap();
        let err: f64 = back
            .as_slice()
            .iter()
            .zip(a.as_slice())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err < 1e-10 * norm);
        let norms = t.tube_norms();
        assert!(norms.windows(2).all(|w| w[0] >= w[1]));
    }
}
