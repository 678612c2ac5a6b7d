//! Weighted Golub-Kahan bidiagonalization under the t-product.
//!
//! Three processes share one driver:
//!
//! * [`wtgkb`] keeps tubal coefficients, so the reduction is a tensor
//!   bidiagonal and each lateral slice of the data is treated on its own.
//! * [`wgg_tgkb`] flattens through the weighted global inner product; the
//!   coefficients are real scalars and a whole block `B` is reduced at once.
//! * [`wg_tgkb`] is the single-slice case of the global process.
//!
//! A run can be continued with [`extend`]; the continuation performs exactly
//! the arithmetic a longer fresh run would, so results agree bitwise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    normalize, norm_from_pair, FaceTolerance, Inverse, ScalarBidiagonal, SpdOperator,
    TensorBidiagonal,
};
use crate::tensor::{inner, tprod, ttranspose, Tensor3, TensorOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Process {
    /// Tensor-valued coefficients.
    Wtgkb,
    /// Global process on a block of lateral slices.
    WggTgkb,
    /// Global process on a single lateral slice.
    WgTgkb,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::Wtgkb => "W-tGKB",
            Process::WggTgkb => "WGG-tGKB",
            Process::WgTgkb => "WG-tGKB",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BidiagOptions {
    /// Seed for the random directions that replace vanishing Fourier faces.
    pub seed: u64,
    /// One pass of weighted Gram-Schmidt against all earlier basis blocks.
    pub reorthogonalize: bool,
}

impl Default for BidiagOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            reorthogonalize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reduction {
    Tensor(TensorBidiagonal),
    Scalar(ScalarBidiagonal),
}

#[derive(Clone, Debug)]
enum Scales {
    /// Face-norm tracker shared by the `c_i` and `z_{i+1}` tubes, so a
    /// vanishing `z_2` is judged against `c_1`.
    Tensor(FaceTolerance),
    /// Largest `α_i` or `β_{i+1}` seen.
    Scalar(f64),
}

/// Bases and bidiagonal reduction after `k` completed steps.
#[derive(Clone, Debug)]
pub struct BidiagResult {
    process: Process,
    options: BidiagOptions,
    w: Vec<Tensor3>,
    q: Vec<Tensor3>,
    reduction: Reduction,
    breakdown: Option<usize>,
    // continuation state
    rng: ChaCha8Rng,
    scales: Scales,
    /// `M⁻¹ * Q_{k+1}`
    minv_q: Tensor3,
    dims: (usize, usize, usize),
}

impl BidiagResult {
    pub fn process(&self) -> Process {
        self.process
    }

    pub fn options(&self) -> BidiagOptions {
        self.options
    }

    /// Completed steps.
    pub fn k(&self) -> usize {
        self.w.len()
    }

    /// Step at which the process broke down, if it did.
    pub fn breakdown(&self) -> Option<usize> {
        self.breakdown
    }

    /// `W_1..W_k`, each `m x p x n`.
    pub fn w_blocks(&self) -> &[Tensor3] {
        &self.w
    }

    /// `Q_1..Q_{k+1}`, each `ℓ x p x n`.
    pub fn q_blocks(&self) -> &[Tensor3] {
        &self.q
    }

    /// `[W_1, ..., W_k]`
    pub fn w_tensor(&self) -> Result<Tensor3> {
        Tensor3::hcat(&self.w.iter().collect::<Vec<_>>())
    }

    /// `[Q_1, ..., Q_{k+1}]`
    pub fn q_tensor(&self) -> Result<Tensor3> {
        Tensor3::hcat(&self.q.iter().collect::<Vec<_>>())
    }

    pub fn reduction(&self) -> &Reduction {
        &self.reduction
    }

    pub fn tensor_bidiagonal(&self) -> Option<&TensorBidiagonal> {
        match &self.reduction {
            Reduction::Tensor(t) => Some(t),
            Reduction::Scalar(_) => None,
        }
    }

    pub fn scalar_bidiagonal(&self) -> Option<&ScalarBidiagonal> {
        match &self.reduction {
            Reduction::Scalar(s) => Some(s),
            Reduction::Tensor(_) => None,
        }
    }

    /// The tube `z_1` with `B = Q_1 * z_1` (tensor process only).
    pub fn z1(&self) -> Option<&Tensor3> {
        self.tensor_bidiagonal().map(|t| t.z1())
    }

    /// `β_1 = ‖B‖_{M⁻¹}` (global processes only).
    pub fn beta1(&self) -> Option<f64> {
        self.scalar_bidiagonal().map(|s| s.beta1())
    }
}

fn check_operators(
    a: &TensorOperator,
    l: &SpdOperator,
    m: &SpdOperator,
) -> Result<(usize, usize, usize)> {
    let (rows, cols, n) = a.dims();
    if l.size() != cols || l.depth() != n || m.size() != rows || m.depth() != n {
        return Err(Error::dims(
            "bidiagonalization",
            format!(
                "A is {rows}x{cols}x{n}, L is {0}x{0}x{1}, M is {2}x{2}x{3}",
                l.size(),
                l.depth(),
                m.size(),
                m.depth()
            ),
        ));
    }
    Ok((rows, cols, n))
}

fn check_rhs(b: &Tensor3, dims: (usize, usize, usize)) -> Result<()> {
    if b.rows() != dims.0 || b.depth() != dims.2 {
        return Err(Error::dims(
            "bidiagonalization",
            format!("right-hand side {:?} for A of shape {:?}", b.dims(), dims),
        ));
    }
    Ok(())
}

/// Partial weighted tensor Golub-Kahan bidiagonalization of a lateral
/// slice `b`, run for `k` steps.
pub fn wtgkb(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    k: usize,
    options: &BidiagOptions,
) -> Result<BidiagResult> {
    let dims = check_operators(a, l, m)?;
    check_rhs(b, dims)?;
    if b.cols() != 1 {
        return Err(Error::dims(
            "wtgkb",
            format!("expects a lateral slice, got {:?}", b.dims()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut tol_b = FaceTolerance::new();
    let first = normalize(b, &Inverse(m), &mut tol_b, &mut rng).map_err(|e| match e {
        Error::ZeroInput => Error::InvalidArgument("right-hand side is zero".into()),
        other => other,
    })?;
    if let Some(&face) = first.replaced_faces.first() {
        return Err(Error::NonInvertibleTube { name: "z1", face });
    }
    let minv_q = first.wv;
    let start = BidiagResult {
        process: Process::Wtgkb,
        options: *options,
        w: Vec::new(),
        q: vec![first.v],
        reduction: Reduction::Tensor(TensorBidiagonal::new(first.a)),
        breakdown: None,
        rng,
        scales: Scales::Tensor(FaceTolerance::new()),
        minv_q,
        dims,
    };
    run_steps(start, k, a, l, m)
}

/// Partial weighted generalized global bidiagonalization of a block `b`
/// with `p` lateral slices, run for `k` steps.
pub fn wgg_tgkb(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    k: usize,
    options: &BidiagOptions,
) -> Result<BidiagResult> {
    global_start(Process::WggTgkb, a, b, l, m, k, options)
}

/// Partial weighted global bidiagonalization of a single lateral slice.
pub fn wg_tgkb(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    k: usize,
    options: &BidiagOptions,
) -> Result<BidiagResult> {
    if b.cols() != 1 {
        return Err(Error::dims(
            "wg_tgkb",
            format!("expects a lateral slice, got {:?}", b.dims()),
        ));
    }
    global_start(Process::WgTgkb, a, b, l, m, k, options)
}

fn global_start(
    process: Process,
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    k: usize,
    options: &BidiagOptions,
) -> Result<BidiagResult> {
    let dims = check_operators(a, l, m)?;
    check_rhs(b, dims)?;
    let minv_b = m.apply_inverse(b)?;
    let beta1 = norm_from_pair(b, &minv_b)?;
    if !(beta1 > 0.0) {
        return Err(Error::InvalidArgument("right-hand side is zero".into()));
    }
    let start = BidiagResult {
        process,
        options: *options,
        w: Vec::new(),
        q: vec![b.scale(1.0 / beta1)],
        reduction: Reduction::Scalar(ScalarBidiagonal::new(beta1)),
        breakdown: None,
        rng: ChaCha8Rng::seed_from_u64(options.seed),
        scales: Scales::Scalar(0.0),
        minv_q: minv_b.scale(1.0 / beta1),
        dims,
    };
    run_steps(start, k, a, l, m)
}

/// Continues a run by `by` further steps. The result is the same, bit for
/// bit, as a fresh run of `k + by` steps.
pub fn extend(
    result: &BidiagResult,
    by: usize,
    a: &TensorOperator,
    l: &SpdOperator,
    m: &SpdOperator,
) -> Result<BidiagResult> {
    extend_owned(result.clone(), by, a, l, m)
}

/// [`extend`] without copying the stored bases.
pub fn extend_owned(
    result: BidiagResult,
    by: usize,
    a: &TensorOperator,
    l: &SpdOperator,
    m: &SpdOperator,
) -> Result<BidiagResult> {
    if let Some(step) = result.breakdown {
        return Err(Error::Breakdown {
            step,
            partial: Some(Box::new(result)),
        });
    }
    if check_operators(a, l, m)? != result.dims {
        return Err(Error::dims(
            "extend",
            "operators differ in shape from the original run",
        ));
    }
    let k = result.k() + by;
    run_steps(result, k, a, l, m)
}

fn run_steps(
    mut state: BidiagResult,
    k: usize,
    a: &TensorOperator,
    l: &SpdOperator,
    m: &SpdOperator,
) -> Result<BidiagResult> {
    while state.k() < k {
        let step = state.k() + 1;
        let outcome = match state.process {
            Process::Wtgkb => tensor_step(&mut state, a, l, m),
            Process::WggTgkb | Process::WgTgkb => scalar_step(&mut state, a, l, m),
        };
        match outcome {
            Ok(()) => {}
            Err(Error::ZeroInput) => {
                state.breakdown = Some(step);
                return Err(Error::Breakdown {
                    step,
                    partial: Some(Box::new(state)),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(state)
}

/// `x -= Σ_j v_j * (v_jᵀ * u)` with tube coefficients, where `u = N * x`.
fn reorth_tensor(x: &mut Tensor3, u: &Tensor3, basis: &[Tensor3]) -> Result<()> {
    for v in basis {
        let t = tprod(&ttranspose(v), u)?;
        x.axpy(-1.0, &tprod(v, &t)?)?;
    }
    Ok(())
}

/// `x -= Σ_j ⟨v_j, u⟩ v_j`, where `u = N * x`.
fn reorth_scalar(x: &mut Tensor3, u: &Tensor3, basis: &[Tensor3]) -> Result<()> {
    let coeffs: Vec<f64> = basis.iter().map(|v| inner(v, u)).collect::<Result<_>>()?;
    for (v, c) in basis.iter().zip(coeffs) {
        x.axpy(-c, v)?;
    }
    Ok(())
}

/// One step: `W_i` from `Q_i`, then `Q_{i+1}` from `W_i`. Returns
/// `ZeroInput` on breakdown with `state` holding the completed steps (plus
/// `W_i` and a zero `Q_{i+1}` when only the second half vanished).
fn tensor_step(
    state: &mut BidiagResult,
    a: &TensorOperator,
    l: &SpdOperator,
    m: &SpdOperator,
) -> Result<()> {
    let i = state.k() + 1;
    let reorth = state.options.reorthogonalize;
    let Scales::Tensor(tol) = &mut state.scales else {
        unreachable!("tensor step on a global run");
    };
    let Reduction::Tensor(pbar) = &mut state.reduction else {
        unreachable!("tensor step on a global run");
    };

    let mut wt = a.apply_transpose(&state.minv_q)?;
    if i > 1 {
        let prev = &state.w[i - 2];
        wt.axpy(-1.0, &tprod(prev, &pbar.z()[i - 1])?)?;
    }
    if reorth && !state.w.is_empty() {
        let lw = l.apply(&wt)?;
        reorth_tensor(&mut wt, &lw, &state.w)?;
    }
    let wn = normalize(&wt, l, tol, &mut state.rng)?;
    if i == 1 {
        if let Some(&face) = wn.replaced_faces.first() {
            return Err(Error::NonInvertibleTube { name: "c1", face });
        }
    }

    let mut qt = a.apply(&wn.wv)?;
    qt.axpy(-1.0, &tprod(&state.q[i - 1], &wn.a)?)?;
    if reorth {
        let mq = m.apply_inverse(&qt)?;
        reorth_tensor(&mut qt, &mq, &state.q)?;
    }
    match normalize(&qt, &Inverse(m), tol, &mut state.rng) {
        Ok(qn) => {
            state.minv_q = qn.wv;
            state.w.push(wn.v);
            state.q.push(qn.v);
            pbar.push(wn.a, qn.a);
            Ok(())
        }
        Err(Error::ZeroInput) => {
            // A L W_i = Q_i c_i: the subspace is invariant.
            let (rows, _, n) = state.dims;
            state.w.push(wn.v);
            state.q.push(Tensor3::zeros(rows, 1, n));
            pbar.push(wn.a, Tensor3::zeros(1, 1, n));
            Err(Error::ZeroInput)
        }
        Err(e) => Err(e),
    }
}

fn scalar_step(
    state: &mut BidiagResult,
    a: &TensorOperator,
    l: &SpdOperator,
    m: &SpdOperator,
) -> Result<()> {
    let i = state.k() + 1;
    let reorth = state.options.reorthogonalize;
    let Scales::Scalar(largest) = &mut state.scales
    else {
        unreachable!("global step on a tensor run");
    };
    let Reduction::Scalar(pbar) = &mut state.reduction else {
        unreachable!("global step on a tensor run");
    };
    let root_eps = f64::EPSILON.sqrt();

    let mut wt = a.apply_transpose(&state.minv_q)?;
    if i > 1 {
        wt.axpy(-pbar.beta()[i - 1], &state.w[i - 2])?;
    }
    let mut lw = l.apply(&wt)?;
    if reorth && !state.w.is_empty() {
        reorth_scalar(&mut wt, &lw, &state.w)?;
        lw = l.apply(&wt)?;
    }
    let alpha = norm_from_pair(&wt, &lw)?;
    *largest = largest.max(alpha);
    if alpha <= root_eps * *largest || alpha == 0.0 {
        return Err(Error::ZeroInput);
    }
    wt.scale_in_place(1.0 / alpha);
    lw.scale_in_place(1.0 / alpha);

    let mut qt = a.apply(&lw)?;
    qt.axpy(-alpha, &state.q[i - 1])?;
    let mut mq = m.apply_inverse(&qt)?;
    if reorth {
        reorth_scalar(&mut qt, &mq, &state.q)?;
        mq = m.apply_inverse(&qt)?;
    }
    let beta = norm_from_pair(&qt, &mq)?;
    *largest = largest.max(beta);
    if beta <= root_eps * *largest || beta == 0.0 {
        state.w.push(wt);
        state.q.push(Tensor3::zeros(qt.rows(), qt.cols(), qt.depth()));
        pbar.push(alpha, 0.0);
        return Err(Error::ZeroInput);
    }
    qt.scale_in_place(1.0 / beta);
    mq.scale_in_place(1.0 / beta);
    state.minv_q = mq;
    state.w.push(wt);
    state.q.push(qt);
    pbar.push(alpha, beta);
    Ok(())
}
