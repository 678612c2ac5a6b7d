use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::spd::Weight;
use crate::error::{Error, Result};
use crate::tensor::{fft_mode3, ifft_mode3, FourierTensor3, Tensor3};

/// Face norms at or below `sqrt(eps) * (largest face norm seen)` count as
/// zero. One tracker is shared by all normalizations of a run so that late
/// faces are judged against the scale of earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FaceTolerance {
    largest_seen: f64,
}

impl FaceTolerance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn largest_seen(&self) -> f64 {
        self.largest_seen
    }

    fn observe(&mut self, norms: &[f64]) -> f64 {
        for &a in norms {
            if a > self.largest_seen {
                self.largest_seen = a;
            }
        }
        f64::EPSILON.sqrt() * self.largest_seen
    }
}

/// Output of [`normalize`]: `x = v * a` with `‖v‖_N = 1`.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub v: Tensor3,
    pub a: Tensor3,
    /// `N * v`, a by-product that callers would otherwise recompute.
    pub wv: Tensor3,
    /// Fourier faces that were numerically zero and got a random direction.
    pub replaced_faces: Vec<usize>,
}

/// Splits a lateral slice into a unit `N`-norm direction and a tube.
///
/// Works face by face in the Fourier domain: `a⁽ʲ⁾ = ‖x̂⁽ʲ⁾‖_{N̂⁽ʲ⁾}`. A face
/// below tolerance is replaced by a random unit direction and its `a⁽ʲ⁾`
/// set to zero. If every face is below tolerance the input is zero and
/// [`Error::ZeroInput`] is returned.
pub fn normalize<W: Weight + ?Sized, R: Rng + ?Sized>(
    x: &Tensor3,
    w: &W,
    tol: &mut FaceTolerance,
    rng: &mut R,
) -> Result<Normalized> {
    let (m, cols, n) = x.dims();
    if cols != 1 || m != w.size() || n != w.depth() {
        return Err(Error::dims(
            "normalize",
            format!(
                "lateral slice {:?} against weight {}x{}x{}",
                x.dims(),
                w.size(),
                w.size(),
                w.depth()
            ),
        ));
    }
    let xf = fft_mode3(x);
    let wxf = fft_mode3(&w.apply_weight(x)?);
    let half = n / 2;
    let mut norms = vec![0.0; n];
    for (j, a) in norms.iter_mut().enumerate().take(half + 1) {
        let q: f64 = xf
            .face(j)
            .iter()
            .zip(wxf.face(j))
            .map(|(u, v)| u.re * v.re + u.im * v.im)
            .sum();
        *a = q.max(0.0).sqrt();
    }
    for j in half + 1..n {
        norms[j] = norms[n - j];
    }
    let t = tol.observe(&norms);
    if norms.iter().all(|&a| a <= t) {
        return Err(Error::ZeroInput);
    }

    let mut vf = FourierTensor3::zeros(m, 1, n);
    let mut wvf = FourierTensor3::zeros(m, 1, n);
    let mut af = FourierTensor3::zeros(1, 1, n);
    let mut replaced = Vec::new();
    for (j, &norm) in norms.iter().enumerate().take(half + 1) {
        let mirror = (n - j) % n;
        if norm > t {
            let inv = 1.0 / norm;
            for f in [j, mirror] {
                for (d, s) in vf.face_mut(f).iter_mut().zip(xf.face(f)) {
                    *d = s * inv;
                }
                for (d, s) in wvf.face_mut(f).iter_mut().zip(wxf.face(f)) {
                    *d = s * inv;
                }
                af.face_mut(f)[0] = Complex64::new(norm, 0.0);
            }
        } else {
            // A real direction keeps the mirror face its own conjugate.
            let r: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
                .collect();
            let s = w.face_quadratic(j, &r).sqrt();
            let unit: Vec<Complex64> = r.iter().map(|z| z / s).collect();
            vf.face_mut(j).copy_from_slice(&unit);
            replaced.push(j);
            if mirror != j {
                vf.face_mut(mirror).copy_from_slice(&unit);
                replaced.push(mirror);
            }
        }
    }
    replaced.sort_unstable();
    let v = ifft_mode3(&vf)?;
    let wv = if replaced.is_empty() {
        ifft_mode3(&wvf)?
    } else {
        w.apply_weight(&v)?
    };
    Ok(Normalized {
        v,
        a: ifft_mode3(&af)?,
        wv,
        replaced_faces: replaced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{weighted_norm, SpdOperator};
    use crate::tensor::tprod;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plain_vector() {
        let x = Tensor3::from_vec(2, 1, 1, vec![3.0, 4.0]).unwrap();
        let id = SpdOperator::identity(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = normalize(&x, &id, &mut FaceTolerance::new(), &mut rng).unwrap();
        assert!((out.v.get(0, 0, 0) - 0.6).abs() < 1e-15);
        assert!((out.v.get(1, 0, 0) - 0.8).abs() < 1e-15);
        assert!((out.a.get(0, 0, 0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn unit_faces_give_unit_tube() {
        // Fourier faces of e1 lateral are all the unit vector e1.
        let x = crate::tensor::e1_lateral(3, 4);
        let id = SpdOperator::identity(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = normalize(&x, &id, &mut FaceTolerance::new(), &mut rng).unwrap();
        let e = crate::tensor::e1_tube(4);
        for (a, b) in out.a.as_slice().iter().zip(e.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_face_takes_random_branch() {
        // Tube-constant slice: only Fourier face 0 is nonzero.
        let x = Tensor3::from_fn(3, 1, 4, |i, _, _| 1.0 + i as f64);
        let id = SpdOperator::identity(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let out = normalize(&x, &id, &mut FaceTolerance::new(), &mut rng).unwrap();
        assert_eq!(out.replaced_faces, vec![1, 2, 3]);
        assert!((weighted_norm(&out.v, &id).unwrap() - 1.0).abs() < 1e-12);
        let back = tprod(&out.v, &out.a).unwrap();
        for (p, q) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_input_is_an_error() {
        let x = Tensor3::zeros(3, 1, 2);
        let id = SpdOperator::identity(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            normalize(&x, &id, &mut FaceTolerance::new(), &mut rng),
            Err(Error::ZeroInput)
        ));
    }
}
