//! Test problem construction: blur operators, covariance and
//! regularization tensors, correlated noise, image orientation and
//! quality metrics.

mod blur;
mod metrics;
mod noise;
mod operators;
pub mod phantoms;
mod storage;

pub use blur::{build_blur, BlurSpec, BlurVariant};
pub use metrics::{metrics, Quality};
pub use noise::{gaussian_tensor, gen_noise, NoiseSample, NoiseSpec};
pub use operators::{build_covariance_m, build_reg_d, second_difference};
pub use storage::{multi_squeeze, multi_twist, squeeze, twist};
