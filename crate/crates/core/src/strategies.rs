//! Trading strategies and their discounted cumulative profits `v(t)`.
//!
//! Every strategy is zero-cost at inception: the stock position is financed
//! by (or invested in) the money market, so `v(0) = 0`. Barrier strategies
//! close the stock position at the first grid time the barrier is touched
//! and hold cash afterwards, which freezes the discounted value.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bridge_rng, ModelParams, Path};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    /// Long one share financed at the risk-free rate, held forever.
    BuyHold,
    /// Long until the price reaches the constant level `barrier`.
    LongConstBarrier { barrier: f64 },
    /// Long until `S_t >= S_0 (1 + k) e^{r_f t}`.
    LongDetBarrier { k: f64 },
    /// Short until `S_t <= S_0 (1 + k)^{-1} e^{r_f t}`.
    ShortDetBarrier { k: f64 },
}

impl StrategySpec {
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        match *self {
            StrategySpec::BuyHold => Ok(()),
            StrategySpec::LongConstBarrier { barrier } => {
                if barrier.is_finite() && barrier > params.s0() {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "constant barrier B must exceed s0 (B = {barrier}, s0 = {})",
                        params.s0()
                    )))
                }
            }
            StrategySpec::LongDetBarrier { k } | StrategySpec::ShortDetBarrier { k } => {
                if k.is_finite() && k > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("barrier fraction k must be > 0, got {k}")))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StrategySpec::BuyHold => "buy_hold",
            StrategySpec::LongConstBarrier { .. } => "long_const_barrier",
            StrategySpec::LongDetBarrier { .. } => "long_det_barrier",
            StrategySpec::ShortDetBarrier { .. } => "short_det_barrier",
        }
    }

    pub fn has_barrier(&self) -> bool {
        !matches!(self, StrategySpec::BuyHold)
    }
}

/// How barrier touches are detected between grid points.
#[derive(Clone, Debug, Default)]
pub enum Monitoring {
    /// Only grid prices are checked.
    #[default]
    Discrete,
    /// Grid prices plus a Brownian-bridge crossing draw per interval; a
    /// crossing inside `(t_i, t_{i+1})` is booked at `t_{i+1}`.
    BrownianBridge { seed: u64, path_index: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub index: usize,
    pub time: f64,
}

/// `v(t)` on the grid of one path.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfitSeries {
    pub times: Vec<f64>,
    pub v: Vec<f64>,
    pub hit_time: Option<f64>,
    pub hit_index: Option<usize>,
    pub terminal_v: f64,
}

/// Distance to the barrier in unit-volatility coordinates; the barrier is
/// touched when it reaches zero or below.
fn barrier_gap(strategy: &StrategySpec, params: &ModelParams, path: &Path, i: usize) -> f64 {
    let sigma = params.sigma();
    match *strategy {
        StrategySpec::BuyHold => f64::INFINITY,
        StrategySpec::LongConstBarrier { barrier } => {
            let level = (barrier / params.s0()).ln() / sigma;
            level - (path.x[i] + params.r_f() * path.times[i] / sigma)
        }
        StrategySpec::LongDetBarrier { k } => k.ln_1p() / sigma - path.x[i],
        StrategySpec::ShortDetBarrier { k } => k.ln_1p() / sigma + path.x[i],
    }
}

fn touches(strategy: &StrategySpec, params: &ModelParams, path: &Path, i: usize) -> bool {
    let s0 = params.s0();
    let price = path.prices[i];
    let t = path.times[i];
    match *strategy {
        StrategySpec::BuyHold => false,
        StrategySpec::LongConstBarrier { barrier } => price >= barrier,
        StrategySpec::LongDetBarrier { k } => price >= s0 * (1.0 + k) * (params.r_f() * t).exp(),
        StrategySpec::ShortDetBarrier { k } => price <= s0 / (1.0 + k) * (params.r_f() * t).exp(),
    }
}

/// First grid time at which the barrier condition holds.
pub fn detect_hit(
    path: &Path,
    strategy: &StrategySpec,
    params: &ModelParams,
    monitoring: &Monitoring,
) -> Option<Hit> {
    if !strategy.has_barrier() || path.is_empty() {
        return None;
    }
    let mut bridge: Option<(ChaCha8Rng, f64)> = match *monitoring {
        Monitoring::Discrete => None,
        Monitoring::BrownianBridge { seed, path_index } => {
            let dt = if path.len() > 1 { path.times[1] - path.times[0] } else { 1.0 };
            Some((bridge_rng(seed, path_index), dt))
        }
    };
    let hit_at = |index: usize| Some(Hit {
        index,
        time: path.times[index],
    });
    if touches(strategy, params, path, 0) {
        return hit_at(0);
    }
    for i in 1..path.len() {
        if touches(strategy, params, path, i) {
            return hit_at(i);
        }
        if let Some((rng, dt)) = bridge.as_mut() {
            let before = barrier_gap(strategy, params, path, i - 1);
            let after = barrier_gap(strategy, params, path, i);
            let u: f64 = rng.random();
            if u < (-2.0 * before * after / *dt).exp() {
                return hit_at(i);
            }
        }
    }
    None
}

/// Discounted cumulative profit along `path`, checking the barrier on the grid only.
pub fn evaluate(strategy: &StrategySpec, path: &Path, params: &ModelParams) -> Result<ProfitSeries> {
    evaluate_with(strategy, path, params, &Monitoring::Discrete)
}

pub fn evaluate_with(
    strategy: &StrategySpec,
    path: &Path,
    params: &ModelParams,
    monitoring: &Monitoring,
) -> Result<ProfitSeries> {
    strategy.validate(params)?;
    if path.is_empty() || path.prices[0] != params.s0() {
        return Err(Error::domain("path was not generated under these parameters (S(0) != s0)"));
    }
    let s0 = params.s0();
    let hit = detect_hit(path, strategy, params, monitoring);
    let stop = hit.map_or(path.len(), |h| h.index);

    let mut v = Vec::with_capacity(path.len());
    let short = matches!(strategy, StrategySpec::ShortDetBarrier { .. });
    v.extend(path.discounted[..stop].iter().map(|&d| if short { s0 - d } else { d - s0 }));
    if let Some(h) = hit {
        let exit = match *strategy {
            StrategySpec::LongConstBarrier { barrier } => barrier * (-params.r_f() * h.time).exp() - s0,
            StrategySpec::LongDetBarrier { k } => s0 * k,
            StrategySpec::ShortDetBarrier { k } => s0 * k / (1.0 + k),
            StrategySpec::BuyHold => unreachable!("buy-and-hold never hits"),
        };
        v.resize(path.len(), exit);
    }
    let terminal_v = *v.last().expect("non-empty path");
    Ok(ProfitSeries {
        times: path.times.clone(),
        v,
        hit_time: hit.map(|h| h.time),
        hit_index: hit.map(|h| h.index),
        terminal_v,
    })
}
