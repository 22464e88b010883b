//! Closed-form finite-sample bounds, evaluated in log space.
//!
//! Raw values may exceed one: the bounds are vacuous at small sizes and the
//! caller should see that. [`clamp_unit`] gives the probability-scale form.

use crate::error::{Error, Result};

/// Clamps a raw bound value to [0, 1].
pub fn clamp_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonpositiveT(t));
    }
    Ok(())
}

/// Two-sided tail of a Bernoulli mean over `n` trials:
/// `2 exp(-2 n t^2)`.
pub fn hoeffding_bound(n: u64, t: f64) -> Result<f64> {
    check_t(t)?;
    if n == 0 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let nf = n as f64;
    Ok((2f64.ln() - 2.0 * nf * t * t).exp())
}

/// Tail of the realized spreading over all `n` nodes:
/// `2 n exp(-2 n t^2)`.
pub fn spreading_bound(n: u64, t: f64) -> Result<f64> {
    check_t(t)?;
    if n == 0 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let nf = n as f64;
    Ok(((2.0 * nf).ln() - 2.0 * nf * t * t).exp())
}

/// Probability that the classifier misplaces at least one node:
/// `2 n exp(-n delta^2 / 8) + Q (1 - alpha0)^{n+1}`.
pub fn error_bound(n: u64, delta: f64, alpha0: f64, q: usize) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "delta = {delta} outside (0,1]"
        )));
    }
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "alpha0 = {alpha0} outside (0,1)"
        )));
    }
    if q == 0 {
        return Err(Error::ZeroQ);
    }
    if n == 0 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let nf = n as f64;
    let misclass = ((2.0 * nf).ln() - nf * delta * delta / 8.0).exp();
    // (n + 1) exponent here; the combined estimation bound restates it with n
    let empty = ((q as f64).ln() + (nf + 1.0) * (-alpha0).ln_1p()).exp();
    Ok(misclass + empty)
}

/// Which printed form of the combined estimation bound's first exponent to
/// evaluate. The two expand to the same expression; they differ only in
/// floating-point rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimationBoundForm {
    /// `exp(-n^2 t^2 (alpha0^2 - n^{-1/4}))`
    Combined,
    /// `exp(-n^{7/4} t^2 (n^{1/4} alpha0^2 - 1))`
    Expanded,
}

/// Combined tail bound for the plug-in parameter estimates:
/// `2 Q^2 (exp(first) + 4 exp(-sqrt(n)/2)) + 2 Q exp(-2 n t^2)
///  + 2 n exp(-n delta^2 / 8) + Q (1 - alpha0)^n`.
///
/// The first exponent is positive when `alpha0^2 < n^{-1/4}`; the bound is
/// then uninformative and the raw (possibly infinite) value is returned.
pub fn estimation_bound(
    n: u64,
    t: f64,
    delta: f64,
    alpha0: f64,
    q: usize,
    form: EstimationBoundForm,
) -> Result<f64> {
    check_t(t)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "delta = {delta} outside (0,1]"
        )));
    }
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(Error::ParamOutOfRange(format!(
            "alpha0 = {alpha0} outside (0,1)"
        )));
    }
    if q == 0 {
        return Err(Error::ZeroQ);
    }
    if n == 0 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let nf = n as f64;
    let qf = q as f64;
    let first_exponent = match form {
        EstimationBoundForm::Combined => -nf * nf * t * t * (alpha0 * alpha0 - nf.powf(-0.25)),
        EstimationBoundForm::Expanded => {
            -nf.powf(1.75) * t * t * (nf.powf(0.25) * alpha0 * alpha0 - 1.0)
        }
    };
    let proportions = ((2.0 * qf * qf).ln() + first_exponent).exp()
        + ((8.0 * qf * qf).ln() - 0.5 * nf.sqrt()).exp();
    let frequencies = ((2.0 * qf).ln() - 2.0 * nf * t * t).exp();
    let misclass = ((2.0 * nf).ln() - nf * delta * delta / 8.0).exp();
    let empty = (qf.ln() + nf * (-alpha0).ln_1p()).exp();
    Ok(proportions + frequencies + misclass + empty)
}

/// Tail of a normalized product of two binomial counts:
/// `4 exp(-n t^2 / 2)`.
pub fn product_concentration_bound(n: u64, t: f64) -> Result<f64> {
    check_t(t)?;
    if n == 0 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let nf = n as f64;
    Ok((4f64.ln() - 0.5 * nf * t * t).exp())
}

/// Tail of the normalized same-class pair count `X(X-1)/(2n^2)`:
/// `4 exp(-2 n t^2)`, valid for `t` in `(0, 1/4]`.
pub fn pair_count_bound(n: u64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 0.25) {
        return Err(Error::TOutOfRange(t));
    }
    if n == 0 {
        return Err(Error::ParamOutOfRange("n must be at least 1".into()));
    }
    let nf = n as f64;
    Ok((4f64.ln() - 2.0 * nf * t * t).exp())
}

/// Smallest `n` in `[lo, hi]` with `bound(n) < level`, by bisection over a
/// nonincreasing tail region; `None` if even `hi` is not below the level.
pub fn first_n_below(
    bound: impl Fn(u64) -> Result<f64>,
    level: f64,
    lo: u64,
    hi: u64,
) -> Result<Option<u64>> {
    if bound(hi)? >= level {
        return Ok(None);
    }
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if bound(mid)? < level {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Some(lo))
}
