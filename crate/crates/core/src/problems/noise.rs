use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::SpdOperator;
use crate::tensor::{fro_norm, Tensor3};

/// Relative noise level `δ̃ = ‖E‖_{M⁻¹}/‖B_true‖_F` and the stream seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub noise_level: f64,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct NoiseSample {
    pub e: Tensor3,
    /// `‖E‖_{M⁻¹} = δ̃ ‖B_true‖_F`
    pub delta: f64,
    /// `‖E_j‖_{M⁻¹}` for each lateral slice.
    pub slice_deltas: Vec<f64>,
    pub rho: f64,
}

/// Standard normal tensor from a ChaCha8 stream, filled in storage order.
pub fn gaussian_tensor(rows: usize, cols: usize, depth: usize, seed: u64) -> Tensor3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tensor3::zeros(rows, cols, depth);
    for v in t.as_mut_slice() {
        *v = rng.sample(StandardNormal);
    }
    t
}

/// Correlated noise `E = Rᵀ * (ρ E₁)` with `M = Rᵀ * R`, scaled so that
/// `‖E‖_{M⁻¹} = ρ‖E₁‖_F = δ̃ ‖B_true‖_F`.
pub fn gen_noise(b_true: &Tensor3, m: &SpdOperator, spec: &NoiseSpec) -> Result<NoiseSample> {
    if !(spec.noise_level >= 0.0) || !spec.noise_level.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise level must be nonnegative, got {}",
            spec.noise_level
        )));
    }
    let (l, p, n) = b_true.dims();
    if m.size() != l || m.depth() != n {
        return Err(Error::dims(
            "gen_noise",
            format!("covariance of size {} for data {:?}", m.size(), b_true.dims()),
        ));
    }
    let e1 = gaussian_tensor(l, p, n, spec.seed);
    let rho = spec.noise_level * fro_norm(b_true) / fro_norm(&e1);
    let e_rho = e1.scale(rho);
    let e = m.apply_factor_transpose(&e_rho)?;
    let slice_deltas = (0..p).map(|j| fro_norm(&e_rho.lateral_slice(j))).collect();
    Ok(NoiseSample {
        e,
        delta: rho * fro_norm(&e1),
        slice_deltas,
        rho,
    })
}
