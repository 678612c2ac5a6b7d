use thiserror::Error;

use crate::krylov::BidiagResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle refuses to materialize a {rows}x{cols} block-circulant matrix (cap {cap})")]
    OracleCap { rows: usize, cols: usize, cap: usize },

    #[error("Fourier data is not conjugate symmetric (relative defect {defect:.3e})")]
    ConjugateSymmetry { defect: f64 },

    #[error("inverse FFT left an imaginary residue of relative size {residue:.3e}")]
    ImaginaryResidue { residue: f64 },

    #[error("Fourier face {face} is not Hermitian positive definite: {reason}")]
    NotPositiveDefinite { face: usize, reason: String },

    #[error("weighted norm radicand {value:.3e} is negative; the weight is not SPD")]
    NegativeRadicand { value: f64 },

    #[error("cannot normalize a zero tensor")]
    ZeroInput,

    #[error("tube {name} is not invertible (Fourier face {face} vanished)")]
    NonInvertibleTube { name: &'static str, face: usize },

    #[error("bidiagonalization broke down at step {step}")]
    Breakdown {
        step: usize,
        partial: Option<Box<BidiagResult>>,
    },

    #[error("discrepancy target {target:.6e} is not attainable on the interval: f(hi) = {f_hi:.6e}")]
    TargetAboveRange { target: f64, f_hi: f64 },

    #[error("discrepancy target {target:.6e} lies below the interval: f(lo) = {f_lo:.6e}")]
    TargetBelowRange { target: f64, f_lo: f64 },

    #[error("discrepancy not reached after k_max = {k_max} steps (residual {residual:.6e}, target {target:.6e})")]
    KMaxReached {
        k_max: usize,
        residual: f64,
        target: f64,
    },

    #[error("slice {slice}: {source}")]
    Slice {
        slice: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            detail: detail.into(),
        }
    }
}
