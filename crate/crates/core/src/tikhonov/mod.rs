//! Tikhonov solvers on top of the bidiagonalizations, with the number of
//! steps `k` and the parameter `μ` chosen by the discrepancy principle.
//!
//! All solvers minimize `‖A*L*Y − B‖²_{M⁻¹} + μ⁻¹‖Y‖²_L` over the Krylov
//! space and return `X = L * Y`. A larger `μ` means less regularization.

mod bisect;

use std::time::{Duration, Instant};

pub use bisect::{bisect_mu, Bisection};

use crate::error::{Error, Result};
use crate::krylov::{extend_owned, wg_tgkb, wgg_tgkb, wtgkb, BidiagOptions, BidiagResult};
use crate::linalg::{
    norm_from_pair, solve_tensor_lsq, solve_tensor_tikhonov, tensor_residual_sq,
    tensor_shifted_norm_sq, ScalarBidiagonal, SpdOperator, TensorBidiagonal,
};
use crate::tensor::{circledast, fro_norm, tprod, Tensor3, TensorOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyConfig {
    /// Safety factor `η > 1`.
    pub eta: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    /// Bisection stops once `log₁₀(hi/lo)` drops below this.
    pub log_width_tol: f64,
    pub max_bisections: usize,
    pub k_init: usize,
    pub k_max: usize,
    /// Recompute `‖A*X − B‖_{M⁻¹}` from scratch after each solve.
    pub verify: bool,
    /// In slice-by-slice methods, keep going past failed slices and leave
    /// their columns zero.
    pub allow_partial: bool,
    pub bidiag: BidiagOptions,
}

impl Default for DiscrepancyConfig {
    fn default() -> Self {
        Self {
            eta: 1.1,
            mu_lo: 1e1,
            mu_hi: 1e7,
            log_width_tol: 1e-3,
            max_bisections: 100,
            k_init: 2,
            k_max: 200,
            verify: false,
            allow_partial: false,
            bidiag: BidiagOptions::default(),
        }
    }
}

impl DiscrepancyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.eta > 1.0) {
            return bad(format!("eta must exceed 1, got {}", self.eta));
        }
        if !(self.mu_lo > 0.0 && self.mu_lo < self.mu_hi && self.mu_hi.is_finite()) {
            return bad(format!(
                "mu interval must satisfy 0 < lo < hi < inf, got [{}, {}]",
                self.mu_lo, self.mu_hi
            ));
        }
        if !(self.log_width_tol > 0.0) {
            return bad("bisection tolerance must be positive".into());
        }
        if self.k_init == 0 || self.k_init > self.k_max {
            return bad(format!(
                "need 1 <= k_init <= k_max, got k_init = {}, k_max = {}",
                self.k_init, self.k_max
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Tensor process, one lateral slice.
    WTgkt,
    /// Tensor process applied slice by slice.
    WTgktP,
    /// Global process, one lateral slice.
    WgTgkt,
    /// Global process applied slice by slice.
    WgTgktP,
    /// Global process on the whole block.
    WggTgkt,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::WTgkt => "W-tGKT",
            Method::WTgktP => "W-tGKT_p",
            Method::WgTgkt => "WG-tGKT",
            Method::WgTgktP => "WG-tGKT_p",
            Method::WggTgkt => "WGG-tGKT",
        }
    }
}

/// Outcome of one discrepancy-principle solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceReport {
    /// Lateral slice index; `None` when the whole block was solved at once.
    pub slice: Option<usize>,
    pub delta: f64,
    /// `η δ`
    pub target: f64,
    pub k: usize,
    pub mu: f64,
    /// Reduced residual `‖P̄ z − e₁ β₁‖` at `μ`, equal to `‖A*X − B‖_{M⁻¹}`.
    pub discrepancy: f64,
    /// The squared reduced residual (`φ_k` or `ψ_k` at `μ`).
    pub reduced_value: f64,
    /// Final bisection bracket and the function values at its ends.
    pub bracket: (f64, f64),
    pub bracket_values: (f64, f64),
    pub bisections: usize,
    /// Unregularized reduced residual for each `k` tried.
    pub history: Vec<(usize, f64)>,
    pub breakdown: Option<usize>,
    /// `‖A*X − B‖_{M⁻¹}` recomputed in full when verification is on.
    pub full_discrepancy: Option<f64>,
    /// Set when the slice failed and `allow_partial` kept the run going.
    pub error: Option<String>,
    /// Wall time spent on this solve.
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: Method,
    pub slices: Vec<SliceReport>,
    pub wall_time: Duration,
}

impl SolveReport {
    /// Largest `k` over the slices.
    pub fn max_k(&self) -> usize {
        self.slices.iter().map(|s| s.k).max().unwrap_or(0)
    }

    pub fn total_k(&self) -> usize {
        self.slices.iter().map(|s| s.k).sum()
    }

    pub fn all_met(&self) -> bool {
        self.slices
            .iter()
            .all(|s| s.error.is_none() && s.discrepancy <= s.target * (1.0 + 1e-6))
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Tensor3,
    pub report: SolveReport,
}

/// `φ_k(μ) = ‖(μ P̄P̄ᵀ + I)⁻¹ * e₁ * z₁‖_F²`, the squared reduced residual
/// of the regularized solution. `φ_k(0) = ‖z₁‖_F²`.
pub fn phi_k(pbar: &TensorBidiagonal, mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be nonnegative, got {mu}")));
    }
    if mu == 0.0 {
        return Ok(fro_norm(pbar.z1()).powi(2));
    }
    tensor_shifted_norm_sq(pbar, pbar.z1(), mu)
}

/// `ψ_k(μ) = β₁² e₁ᵀ(μ P̄P̄ᵀ + I)⁻² e₁`. `ψ_k(0) = β₁²`.
pub fn psi_k(pbar: &ScalarBidiagonal, mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be nonnegative, got {mu}")));
    }
    let b = pbar.beta1();
    if mu == 0.0 {
        return Ok(b * b);
    }
    Ok(pbar.shifted_norm_sq(b, mu))
}

struct Ops<'a> {
    a: &'a TensorOperator,
    l: &'a SpdOperator,
    m: &'a SpdOperator,
}

fn unwrap_breakdown(r: Result<BidiagResult>) -> Result<BidiagResult> {
    match r {
        Ok(res) => Ok(res),
        Err(Error::Breakdown {
            partial: Some(p), ..
        }) => Ok(*p),
        Err(e) => Err(e),
    }
}

struct Accepted {
    res: BidiagResult,
    bis: Bisection,
    history: Vec<(usize, f64)>,
}

/// The while-loop shared by all solvers: grow `k` until the unregularized
/// reduced residual drops below `ηδ` and the discrepancy equation has a
/// root on the `μ` interval, then bisect.
fn discrepancy_loop(
    first: Result<BidiagResult>,
    ops: &Ops<'_>,
    target: f64,
    cfg: &DiscrepancyConfig,
    lsq_sq: impl Fn(&BidiagResult) -> Result<f64>,
    value: impl Fn(&BidiagResult, f64) -> Result<f64>,
) -> Result<Accepted> {
    let target_sq = target * target;
    let mut res = unwrap_breakdown(first)?;
    let mut history = Vec::new();
    let mut last = f64::INFINITY;
    loop {
        if res.k() >= 1 {
            let r2 = lsq_sq(&res)?;
            last = r2.max(0.0).sqrt();
            history.push((res.k(), last));
            if r2 < target_sq {
                match bisect_mu(|mu| value(&res, mu), target_sq, cfg) {
                    Ok(bis) => return Ok(Accepted { res, bis, history }),
                    Err(Error::TargetAboveRange { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if let Some(step) = res.breakdown() {
            return Err(Error::Breakdown {
                step,
                partial: Some(Box::new(res)),
            });
        }
        if res.k() >= cfg.k_max {
            return Err(Error::KMaxReached {
                k_max: cfg.k_max,
                residual: last,
                target,
            });
        }
        res = unwrap_breakdown(extend_owned(res, 1, ops.a, ops.l, ops.m))?;
    }
}

fn slice_report(
    slice: Option<usize>,
    delta: f64,
    target: f64,
    acc: &Accepted,
) -> SliceReport {
    SliceReport {
        slice,
        delta,
        target,
        k: acc.res.k(),
        mu: acc.bis.mu,
        discrepancy: acc.bis.value.max(0.0).sqrt(),
        reduced_value: acc.bis.value,
        bracket: acc.bis.bracket,
        bracket_values: acc.bis.bracket_values,
        bisections: acc.bis.iterations,
        history: acc.history.clone(),
        breakdown: acc.res.breakdown(),
        full_discrepancy: None,
        error: None,
        elapsed: Duration::ZERO,
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise bound delta must be positive, got {delta}"
        )));
    }
    Ok(())
}

fn full_discrepancy(ops: &Ops<'_>, x: &Tensor3, b: &Tensor3) -> Result<f64> {
    let mut r = ops.a.apply(x)?;
    r.axpy(-1.0, b)?;
    let mr = ops.m.apply_inverse(&r)?;
    norm_from_pair(&r, &mr)
}

fn solve_tensor_slice(
    ops: &Ops<'_>,
    b: &Tensor3,
    delta: f64,
    cfg: &DiscrepancyConfig,
    slice: Option<usize>,
) -> Result<(Tensor3, SliceReport)> {
    check_delta(delta)?;
    let target = cfg.eta * delta;
    let first = wtgkb(ops.a, b, ops.l, ops.m, cfg.k_init, &cfg.bidiag);
    let acc = discrepancy_loop(
        first,
        ops,
        target,
        cfg,
        |res| {
            let p = res.tensor_bidiagonal().expect("tensor process");
            let z = solve_tensor_lsq(p, p.z1())?;
            tensor_residual_sq(p, p.z1(), &z)
        },
        |res, mu| phi_k(res.tensor_bidiagonal().expect("tensor process"), mu),
    )?;
    let pbar = acc.res.tensor_bidiagonal().expect("tensor process");
    let z = solve_tensor_tikhonov(pbar, pbar.z1(), acc.bis.mu)?;
    let y = tprod(&acc.res.w_tensor()?, &z)?;
    let x = ops.l.apply(&y)?;
    let mut rep = slice_report(slice, delta, target, &acc);
    if cfg.verify {
        rep.full_discrepancy = Some(full_discrepancy(ops, &x, b)?);
    }
    Ok((x, rep))
}

fn solve_global(
    ops: &Ops<'_>,
    b: &Tensor3,
    delta: f64,
    cfg: &DiscrepancyConfig,
    slice: Option<usize>,
    single: bool,
) -> Result<(Tensor3, SliceReport)> {
    check_delta(delta)?;
    let target = cfg.eta * delta;
    let first = if single {
        wg_tgkb(ops.a, b, ops.l, ops.m, cfg.k_init, &cfg.bidiag)
    } else {
        wgg_tgkb(ops.a, b, ops.l, ops.m, cfg.k_init, &cfg.bidiag)
    };
    let acc = discrepancy_loop(
        first,
        ops,
        target,
        cfg,
        |res| {
            let p = res.scalar_bidiagonal().expect("global process");
            let y = p.solve_lsq(p.beta1());
            Ok(p.residual_sq(p.beta1(), &y))
        },
        |res, mu| psi_k(res.scalar_bidiagonal().expect("global process"), mu),
    )?;
    let pbar = acc.res.scalar_bidiagonal().expect("global process");
    let coeffs = pbar.solve_tikhonov(pbar.beta1(), acc.bis.mu)?;
    let y = circledast(acc.res.w_blocks(), &coeffs)?;
    let x = ops.l.apply(&y)?;
    let mut rep = slice_report(slice, delta, target, &acc);
    if cfg.verify {
        rep.full_discrepancy = Some(full_discrepancy(ops, &x, b)?);
    }
    Ok((x, rep))
}

fn single_slice(b: &Tensor3, name: &str) -> Result<()> {
    if b.cols() != 1 {
        return Err(Error::dims(
            "solver",
            format!("{name} expects a lateral slice, got {:?}", b.dims()),
        ));
    }
    Ok(())
}

/// Tensor Golub-Kahan-Tikhonov on one lateral slice.
pub fn wtgkt(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    delta: f64,
    cfg: &DiscrepancyConfig,
) -> Result<Solution> {
    cfg.validate()?;
    single_slice(b, "W-tGKT")?;
    let t0 = Instant::now();
    let (x, mut rep) = solve_tensor_slice(&Ops { a, l, m }, b, delta, cfg, None)?;
    rep.elapsed = t0.elapsed();
    Ok(Solution {
        x,
        report: SolveReport {
            method: Method::WTgkt,
            slices: vec![rep],
            wall_time: t0.elapsed(),
        },
    })
}

/// Global Golub-Kahan-Tikhonov on one lateral slice.
pub fn wg_tgkt(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    delta: f64,
    cfg: &DiscrepancyConfig,
) -> Result<Solution> {
    cfg.validate()?;
    single_slice(b, "WG-tGKT")?;
    let t0 = Instant::now();
    let (x, mut rep) = solve_global(&Ops { a, l, m }, b, delta, cfg, None, true)?;
    rep.elapsed = t0.elapsed();
    Ok(Solution {
        x,
        report: SolveReport {
            method: Method::WgTgkt,
            slices: vec![rep],
            wall_time: t0.elapsed(),
        },
    })
}

/// Global Golub-Kahan-Tikhonov on a whole block with a single noise bound.
pub fn wgg_tgkt(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    delta: f64,
    cfg: &DiscrepancyConfig,
) -> Result<Solution> {
    cfg.validate()?;
    let t0 = Instant::now();
    let (x, mut rep) = solve_global(&Ops { a, l, m }, b, delta, cfg, None, false)?;
    rep.elapsed = t0.elapsed();
    Ok(Solution {
        x,
        report: SolveReport {
            method: Method::WggTgkt,
            slices: vec![rep],
            wall_time: t0.elapsed(),
        },
    })
}

fn per_slice(
    method: Method,
    ops: &Ops<'_>,
    b: &Tensor3,
    deltas: &[f64],
    cfg: &DiscrepancyConfig,
) -> Result<Solution> {
    cfg.validate()?;
    let p = b.cols();
    if deltas.len() != p {
        return Err(Error::dims(
            "slice-wise solver",
            format!("{p} slices but {} noise bounds", deltas.len()),
        ));
    }
    let t0 = Instant::now();
    let (_, cols, n) = ops.a.dims();
    let mut x = Tensor3::zeros(cols, p, n);
    let mut slices = Vec::with_capacity(p);
    for (j, &delta) in deltas.iter().enumerate() {
        let bj = b.lateral_slice(j);
        let started = Instant::now();
        let out = match method {
            Method::WTgktP => solve_tensor_slice(ops, &bj, delta, cfg, Some(j)),
            _ => solve_global(ops, &bj, delta, cfg, Some(j), true),
        };
        match out {
            Ok((xj, mut rep)) => {
                rep.elapsed = started.elapsed();
                x.set_lateral_slice(j, &xj)?;
                slices.push(rep);
            }
            Err(e) if cfg.allow_partial => slices.push(SliceReport {
                slice: Some(j),
                delta,
                target: cfg.eta * delta,
                k: 0,
                mu: f64::NAN,
                discrepancy: f64::NAN,
                reduced_value: f64::NAN,
                bracket: (f64::NAN, f64::NAN),
                bracket_values: (f64::NAN, f64::NAN),
                bisections: 0,
                history: Vec::new(),
                breakdown: None,
                full_discrepancy: None,
                error: Some(e.to_string()),
                elapsed: started.elapsed(),
            }),
            Err(e) => {
                return Err(Error::Slice {
                    slice: j,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(Solution {
        x,
        report: SolveReport {
            method,
            slices,
            wall_time: t0.elapsed(),
        },
    })
}

/// Tensor Golub-Kahan-Tikhonov applied independently to every lateral
/// slice `B_j` with its own bound `δ_j`.
pub fn wtgkt_p(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    deltas: &[f64],
    cfg: &DiscrepancyConfig,
) -> Result<Solution> {
    per_slice(Method::WTgktP, &Ops { a, l, m }, b, deltas, cfg)
}

/// Global Golub-Kahan-Tikhonov applied independently to every lateral
/// slice.
pub fn wg_tgkt_p(
    a: &TensorOperator,
    b: &Tensor3,
    l: &SpdOperator,
    m: &SpdOperator,
    deltas: &[f64],
    cfg: &DiscrepancyConfig,
) -> Result<Solution> {
    per_slice(Method::WgTgktP, &Ops { a, l, m }, b, deltas, cfg)
}
