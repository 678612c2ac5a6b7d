use super::DiscrepancyConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bisection {
    pub mu: f64,
    /// `f(mu)`
    pub value: f64,
    pub bracket: (f64, f64),
    /// `f` at the bracket ends; `value` lies between them.
    pub bracket_values: (f64, f64),
    pub iterations: usize,
}

/// Root of `f(μ) = target` for a decreasing `f` by bisection on `log₁₀ μ`
/// over `[mu_lo, mu_hi]`.
///
/// The upper end of the final bracket is returned, so `f(mu) <= target`
/// always holds: the discrepancy is met, never overshot.
///
/// `TargetAboveRange` means `f(mu_hi) > target`: the reduction is too
/// short and the caller should take more steps. `TargetBelowRange` means
/// even the strongest regularization on the interval overfits.
pub fn bisect_mu(
    mut f: impl FnMut(f64) -> Result<f64>,
    target: f64,
    cfg: &DiscrepancyConfig,
) -> Result<Bisection> {
    let (mut mu_lo, mut mu_hi) = (cfg.mu_lo, cfg.mu_hi);
    let mut f_lo = f(mu_lo)?;
    let mut f_hi = f(mu_hi)?;
    if f_hi > target {
        return Err(Error::TargetAboveRange { target, f_hi });
    }
    if f_lo < target {
        return Err(Error::TargetBelowRange { target, f_lo });
    }
    let (mut lo, mut hi) = (mu_lo.log10(), mu_hi.log10());
    let mut iterations = 0;
    while hi - lo >= cfg.log_width_tol && iterations < cfg.max_bisections {
        let mid = 0.5 * (lo + hi);
        let mu = 10f64.powf(mid);
        let fm = f(mu)?;
        if fm > target {
            lo = mid;
            mu_lo = mu;
            f_lo = fm;
        } else {
            hi = mid;
            mu_hi = mu;
            f_hi = fm;
        }
        iterations += 1;
    }
    Ok(Bisection {
        mu: mu_hi,
        value: f_hi,
        bracket: (mu_lo, mu_hi),
        bracket_values: (f_lo, f_hi),
        iterations,
    })
}
