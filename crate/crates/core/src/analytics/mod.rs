//! Closed-form results for the buy-and-hold and barrier strategies.
//!
//! The barrier strategies reduce to the first passage of `X_t = mu t + W_t`
//! to a level `m > 0`, whose Laplace transform is
//! ```text
//! E[exp(-r tau_m)] = exp(m mu - m sqrt(2 r + mu^2))
//! ```
//! Profit, variance and loss limits for the constant barrier follow from it
//! and from the inverse Gaussian law `tau_m ~ IG(m / mu, m^2)`. The
//! deterministic barrier uses the joint law of `X_t` and its running maximum.

mod dist;
mod report;

pub use dist::{ig_cdf, ig_pdf, ig_sf, ln_normal_cdf, normal_cdf, IGParams};
pub use report::{analytic_report, AnalyticReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{to_first_passage, FirstPassageProblem, ModelParams};
use crate::strategies::StrategySpec;

/// `E[exp(-r tau_m)]`, counting paths that never hit as zero.
///
/// `r = 0` returns the hit probability.
pub fn laplace_first_passage(fp: &FirstPassageProblem, r: f64) -> Result<f64> {
    if !(fp.level > 0.0) {
        return Err(Error::domain(format!(
            "first-passage level must be > 0 (got {}); reflect the problem first",
            fp.level
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::domain(format!("discount rate must be >= 0, got {r}")));
    }
    let mu = fp.mu;
    let root = (2.0 * r + mu * mu).sqrt();
    // mu - root without cancellation when mu > 0
    let gap = if mu > 0.0 { -2.0 * r / (mu + root) } else { mu - root };
    Ok((fp.level * gap).exp())
}

fn constant_barrier(params: &ModelParams, barrier: f64) -> Result<FirstPassageProblem> {
    let fp = to_first_passage(params, &StrategySpec::LongConstBarrier { barrier })?;
    if !(fp.mu > 0.0) {
        return Err(Error::domain(format!(
            "constant-barrier limits need alpha > sigma^2/2 (mu = {} <= 0)",
            fp.mu
        )));
    }
    Ok(fp)
}

/// Limit of `E[v(t)]` for the constant barrier: `B E[e^{-r_f tau}] - S_0`.
pub fn expected_profit_limit_ex2(params: &ModelParams, barrier: f64) -> Result<f64> {
    let fp = constant_barrier(params, barrier)?;
    Ok(barrier * laplace_first_passage(&fp, params.r_f())? - params.s0())
}

/// Limit of `var(v(t))` for the constant barrier, `B^2 (L(2 r_f) - L(r_f)^2)`.
pub fn variance_limit_ex2(params: &ModelParams, barrier: f64) -> Result<f64> {
    let fp = constant_barrier(params, barrier)?;
    let l1 = laplace_first_passage(&fp, params.r_f())?;
    let l2 = laplace_first_passage(&fp, 2.0 * params.r_f())?;
    Ok((barrier * barrier * (l2 - l1 * l1)).max(0.0))
}

/// Limit of `P(v(t) < 0)` for the constant barrier: `P(tau > sigma m / r_f)`.
pub fn loss_prob_limit_ex2(params: &ModelParams, barrier: f64) -> Result<f64> {
    let fp = constant_barrier(params, barrier)?;
    if !(params.r_f() > 0.0) {
        return Err(Error::domain(
            "constant-barrier loss probability needs r_f > 0 (loss threshold sigma m / r_f undefined)",
        ));
    }
    let ig = fp.ig().ok_or_else(|| Error::domain("inverse Gaussian law undefined"))?;
    Ok(ig_sf(params.sigma() * fp.level / params.r_f(), &ig))
}

/// Sensitivities of the constant-barrier limits with respect to `B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BarrierSensitivities {
    pub d_laplace_d_barrier: f64,
    pub d_profit_d_barrier: f64,
}

pub fn barrier_sensitivities_ex2(params: &ModelParams, barrier: f64) -> Result<BarrierSensitivities> {
    let fp = constant_barrier(params, barrier)?;
    let laplace = laplace_first_passage(&fp, params.r_f())?;
    let mu = fp.mu;
    let exponent = (mu - (2.0 * params.r_f() + mu * mu).sqrt()) / params.sigma();
    let d_laplace = exponent * laplace / barrier;
    Ok(BarrierSensitivities {
        d_laplace_d_barrier: d_laplace,
        d_profit_d_barrier: laplace + barrier * d_laplace,
    })
}

pub fn buyhold_mean(params: &ModelParams, t: f64) -> f64 {
    params.s0() * ((params.alpha() - params.r_f()) * t).exp_m1()
}

pub fn buyhold_variance(params: &ModelParams, t: f64) -> f64 {
    let s0 = params.s0();
    (params.sigma().powi(2) * t).exp_m1() * s0 * s0 * (2.0 * (params.alpha() - params.r_f()) * t).exp()
}

/// `P(S_t e^{-r_f t} < S_0)` for buy-and-hold.
pub fn buyhold_loss_prob(params: &ModelParams, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    normal_cdf(-params.discounted_drift() * t.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VarianceGrowth {
    DivergesOverT,
    DecaysOverT,
}

/// Long-run behaviour of `var(v(t)) / t` for buy and hold.
pub fn variance_growth_class(params: &ModelParams) -> VarianceGrowth {
    if params.alpha() - params.r_f() > -0.5 * params.sigma() * params.sigma() {
        VarianceGrowth::DivergesOverT
    } else {
        VarianceGrowth::DecaysOverT
    }
}

/// `P(M(t) < level)` for `X = nu t + W` started at zero.
pub fn prob_max_below(nu: f64, level: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return if level > 0.0 { 1.0 } else { 0.0 };
    }
    let st = t.sqrt();
    let first = normal_cdf((level - nu * t) / st);
    let second = (2.0 * nu * level + ln_normal_cdf((-level - nu * t) / st)).exp();
    (first - second).clamp(0.0, 1.0)
}

/// `P(X_t < 0, M(t) < level)` for `X = nu t + W`: the reflection-principle
/// joint law of the endpoint and the running maximum.
pub fn prob_below_zero_and_max_below(nu: f64, level: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let st = t.sqrt();
    let first = normal_cdf(-nu * st);
    let second = (2.0 * nu * level + ln_normal_cdf((-2.0 * level - nu * t) / st)).exp();
    (first - second).clamp(0.0, 1.0)
}

fn det_barrier_level(k: f64, sigma: f64) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::domain(format!("barrier fraction k must be > 0, got {k}")));
    }
    Ok(k.ln_1p() / sigma)
}

/// `P(v(t) < 0)` for the long deterministic-barrier strategy.
pub fn loss_prob_ex3(params: &ModelParams, k: f64, t: f64) -> Result<f64> {
    let level = det_barrier_level(k, params.sigma())?;
    if t < 0.0 {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    Ok(prob_below_zero_and_max_below(params.discounted_drift(), level, t))
}

/// Limit of [`loss_prob_ex3`]: the probability the barrier is never reached.
pub fn loss_prob_limit_ex3(params: &ModelParams, k: f64) -> Result<f64> {
    let level = det_barrier_level(k, params.sigma())?;
    Ok(never_hit(params.discounted_drift(), level))
}

/// `P(v(t) < 0)` for the short deterministic-barrier strategy.
pub fn loss_prob_short(params: &ModelParams, k: f64, t: f64) -> Result<f64> {
    let level = det_barrier_level(k, params.sigma())?;
    if t < 0.0 {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    Ok(prob_below_zero_and_max_below(-params.discounted_drift(), level, t))
}

pub fn loss_prob_limit_short(params: &ModelParams, k: f64) -> Result<f64> {
    let level = det_barrier_level(k, params.sigma())?;
    Ok(never_hit(-params.discounted_drift(), level))
}

fn never_hit(nu: f64, level: f64) -> f64 {
    if nu >= 0.0 {
        0.0
    } else {
        -(2.0 * level * nu).exp_m1()
    }
}
