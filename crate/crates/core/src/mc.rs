//! Monte Carlo experiments over a set of investment horizons.
//!
//! Paths are simulated once to the longest horizon and every shorter horizon
//! is read off the same paths. Each path draws from its own
//! `(seed, path_index)` stream and results are gathered in path order before
//! any reduction, so estimates are bit-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    buyhold_loss_prob, buyhold_mean, buyhold_variance, expected_profit_limit_ex2,
    loss_prob_ex3, loss_prob_limit_ex2, loss_prob_limit_ex3, loss_prob_limit_short,
    loss_prob_short, variance_limit_ex2,
};
use crate::error::{Error, Result};
use crate::model::{simulate_path, to_first_passage, ModelParams, PathGrid};
use crate::strategies::{evaluate_with, Monitoring, StrategySpec};

pub const HISTOGRAM_BINS: usize = 60;
/// Deviations beyond this many standard errors are flagged in comparisons.
pub const FLAG_SE: f64 = 4.0;
pub const MIN_PATHS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub strategy: StrategySpec,
    pub horizons: Vec<f64>,
    pub paths: usize,
    pub steps_per_year: u32,
    pub seed: u64,
    #[serde(default)]
    pub bridge_correction: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<PathGrid> {
        if self.paths < MIN_PATHS {
            return Err(Error::config("paths", format!("must be >= {MIN_PATHS}, got {}", self.paths)));
        }
        if self.horizons.is_empty() {
            return Err(Error::config("horizons", "at least one horizon is required"));
        }
        if self.horizons.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::config("horizons", "horizons must be positive"));
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("horizons", "horizons must be strictly increasing"));
        }
        self.strategy
            .validate(&self.params)
            .map_err(|e| Error::config("strategy", e.to_string()))?;
        let last = *self.horizons.last().expect("non-empty");
        let grid = PathGrid::new(self.steps_per_year, last).map_err(|e| match e {
            Error::Config { reason, .. } if self.steps_per_year == 0 => Error::config("steps_per_year", reason),
            Error::Config { reason, .. } => Error::config("horizons", reason),
            other => other,
        })?;
        for &h in &self.horizons {
            grid.index_of(h).map_err(|e| match e {
                Error::Config { reason, .. } => Error::config("horizons", reason),
                other => other,
            })?;
        }
        Ok(grid)
    }
}

/// Profits of every path at every horizon, stored path-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub horizons: Vec<f64>,
    pub paths: usize,
    values: Vec<f64>,
    /// Largest `|v(0)|` over all paths.
    pub initial_max_abs: f64,
}

impl Ensemble {
    pub fn new(horizons: Vec<f64>, values: Vec<f64>, initial_max_abs: f64) -> Result<Self> {
        let h = horizons.len();
        if h == 0 || !values.len().is_multiple_of(h) {
            return Err(Error::domain("ensemble values do not tile the horizon list"));
        }
        Ok(Self {
            paths: values.len() / h,
            horizons,
            values,
            initial_max_abs,
        })
    }

    pub fn value(&self, path: usize, horizon: usize) -> f64 {
        self.values[path * self.horizons.len() + horizon]
    }

    pub fn path_values(&self, path: usize) -> &[f64] {
        let h = self.horizons.len();
        &self.values[path * h..(path + 1) * h]
    }

    pub fn column(&self, horizon: usize) -> Vec<f64> {
        (0..self.paths).map(|p| self.value(p, horizon)).collect()
    }
}

/// Simulates all paths on the current rayon pool.
pub fn simulate_ensemble(config: &ExperimentConfig) -> Result<Ensemble> {
    let grid = config.validate()?;
    let indices: Vec<usize> = config
        .horizons
        .iter()
        .map(|&h| grid.index_of(h))
        .collect::<Result<_>>()?;
    let per_path: Vec<(f64, Vec<f64>)> = (0..config.paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_path(&config.params, &grid, config.seed, i);
            let monitoring = if config.bridge_correction {
                Monitoring::BrownianBridge {
                    seed: config.seed,
                    path_index: i,
                }
            } else {
                Monitoring::Discrete
            };
            let ps = evaluate_with(&config.strategy, &path, &config.params, &monitoring)?;
            Ok((ps.v[0].abs(), indices.iter().map(|&j| ps.v[j]).collect()))
        })
        .collect::<Result<_>>()?;
    let initial = per_path.iter().fold(0.0_f64, |m, (v0, _)| m.max(*v0));
    let values = per_path.into_iter().flat_map(|(_, v)| v).collect();
    Ensemble::new(config.horizons.clone(), values, initial)
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub center: f64,
    pub count: u64,
}

/// Monte Carlo estimates at one horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HorizonEstimate {
    pub horizon: f64,
    pub mean: f64,
    pub se_mean: f64,
    pub var: f64,
    /// Delta-method standard error of the sample variance.
    pub se_var: Option<f64>,
    pub var_over_t: f64,
    pub loss_prob: f64,
    pub se_loss: f64,
    /// Exact finite-horizon values, when a closed form exists.
    pub analytic_mean: Option<f64>,
    pub analytic_var: Option<f64>,
    pub analytic_loss: Option<f64>,
    pub histogram: Vec<HistogramBin>,
}

/// Closed-form long-horizon limits for the experiment's strategy.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalyticLimits {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub loss_prob: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateSeries {
    pub paths: usize,
    pub initial_max_abs: f64,
    pub rows: Vec<HorizonEstimate>,
    pub limits: AnalyticLimits,
}

impl EstimateSeries {
    pub fn row_at(&self, horizon: f64) -> Option<&HorizonEstimate> {
        self.rows.iter().find(|r| r.horizon == horizon)
    }

    pub fn last(&self) -> Option<&HorizonEstimate> {
        self.rows.last()
    }
}

fn histogram(values: &[f64]) -> Vec<HistogramBin> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        // point mass
        return vec![HistogramBin {
            center: lo,
            count: values.len() as u64,
        }];
    }
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            center: lo + (i as f64 + 0.5) * width,
            count,
        })
        .collect()
}

fn horizon_estimate(horizon: f64, values: &[f64]) -> HorizonEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &v in values {
        let d = (v - mean) * (v - mean);
        m2 += d;
        m4 += d * d;
    }
    let var = m2 / (n - 1.0);
    let central4 = m4 / n;
    let biased = m2 / n;
    let se_var = ((central4 - biased * biased).max(0.0) / n).sqrt();
    let losses = values.iter().filter(|&&v| v < 0.0).count() as f64;
    let loss_prob = losses / n;
    HorizonEstimate {
        horizon,
        mean,
        se_mean: (var / n).sqrt(),
        var,
        se_var: Some(se_var),
        var_over_t: var / horizon,
        loss_prob,
        se_loss: (loss_prob * (1.0 - loss_prob) / n).sqrt(),
        analytic_mean: None,
        analytic_var: None,
        analytic_loss: None,
        histogram: histogram(values),
    }
}

/// Sample statistics of an ensemble, without analytic counterparts.
pub fn estimate(ensemble: &Ensemble) -> EstimateSeries {
    let rows = ensemble
        .horizons
        .iter()
        .enumerate()
        .map(|(j, &h)| horizon_estimate(h, &ensemble.column(j)))
        .collect();
    EstimateSeries {
        paths: ensemble.paths,
        initial_max_abs: ensemble.initial_max_abs,
        rows,
        limits: AnalyticLimits::default(),
    }
}

/// Fills in exact per-horizon values and long-run limits where the regime defines them.
pub fn attach_analytics(series: &mut EstimateSeries, params: &ModelParams, strategy: &StrategySpec) {
    let s0 = params.s0();
    for row in &mut series.rows {
        let t = row.horizon;
        match *strategy {
            StrategySpec::BuyHold => {
                row.analytic_mean = Some(buyhold_mean(params, t));
                row.analytic_var = Some(buyhold_variance(params, t));
                row.analytic_loss = Some(buyhold_loss_prob(params, t));
            }
            StrategySpec::LongConstBarrier { .. } => {}
            StrategySpec::LongDetBarrier { k } => row.analytic_loss = loss_prob_ex3(params, k, t).ok(),
            StrategySpec::ShortDetBarrier { k } => row.analytic_loss = loss_prob_short(params, k, t).ok(),
        }
    }
    let settles = to_first_passage(params, strategy).is_ok_and(|fp| fp.hits_almost_surely());
    series.limits = match *strategy {
        StrategySpec::BuyHold => AnalyticLimits::default(),
        StrategySpec::LongConstBarrier { barrier } => AnalyticLimits {
            mean: expected_profit_limit_ex2(params, barrier).ok(),
            variance: variance_limit_ex2(params, barrier).ok(),
            loss_prob: loss_prob_limit_ex2(params, barrier).ok(),
        },
        StrategySpec::LongDetBarrier { k } => AnalyticLimits {
            mean: settles.then_some(s0 * k),
            variance: settles.then_some(0.0),
            loss_prob: loss_prob_limit_ex3(params, k).ok(),
        },
        StrategySpec::ShortDetBarrier { k } => AnalyticLimits {
            mean: settles.then_some(s0 * k / (1.0 + k)),
            variance: settles.then_some(0.0),
            loss_prob: loss_prob_limit_short(params, k).ok(),
        },
    };
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<EstimateSeries> {
    let ensemble = simulate_ensemble(config)?;
    let mut series = estimate(&ensemble);
    attach_analytics(&mut series, &config.params, &config.strategy);
    Ok(series)
}

pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<EstimateSeries> {
    with_workers(workers, || run_experiment(config))?
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    Mean,
    Variance,
    LossProb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Reference {
    /// Exact value at this horizon.
    Exact,
    /// Long-horizon limit compared at the longest horizon.
    Limit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub horizon: f64,
    pub quantity: Quantity,
    pub reference: Reference,
    pub mc: f64,
    pub analytic: f64,
    pub abs_diff: f64,
    pub se: f64,
    /// `abs_diff / se`; infinite when the estimate has zero spread but misses.
    pub se_ratio: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<Comparison>,
    pub skipped: Vec<String>,
}

impl ConvergenceReport {
    pub fn find(&self, horizon: f64, quantity: Quantity, reference: Reference) -> Option<&Comparison> {
        self.rows
            .iter()
            .find(|c| c.horizon == horizon && c.quantity == quantity && c.reference == reference)
    }

    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|c| c.flagged)
    }
}

fn compare(horizon: f64, quantity: Quantity, reference: Reference, mc: f64, analytic: f64, se: f64) -> Comparison {
    let abs_diff = (mc - analytic).abs();
    let se_ratio = if abs_diff == 0.0 {
        0.0
    } else if se > 0.0 {
        abs_diff / se
    } else {
        f64::INFINITY
    };
    Comparison {
        horizon,
        quantity,
        reference,
        mc,
        analytic,
        abs_diff,
        se,
        se_ratio,
        flagged: se_ratio > FLAG_SE,
    }
}

/// Monte Carlo versus closed form, per horizon and at the longest horizon for limits.
pub fn convergence_report(series: &EstimateSeries) -> ConvergenceReport {
    let mut report = ConvergenceReport::default();
    for row in &series.rows {
        let se_var = row.se_var.unwrap_or(0.0);
        let exact = [
            (Quantity::Mean, row.mean, row.analytic_mean, row.se_mean),
            (Quantity::Variance, row.var, row.analytic_var, se_var),
            (Quantity::LossProb, row.loss_prob, row.analytic_loss, row.se_loss),
        ];
        for (q, mc, analytic, se) in exact {
            match analytic {
                Some(a) => report.rows.push(compare(row.horizon, q, Reference::Exact, mc, a, se)),
                None => report.skipped.push(format!("{q:?} at T={}: no exact closed form", row.horizon)),
            }
        }
    }
    if let Some(last) = series.last() {
        let limits = [
            (Quantity::Mean, last.mean, series.limits.mean, last.se_mean),
            (Quantity::Variance, last.var, series.limits.variance, last.se_var.unwrap_or(0.0)),
            (Quantity::LossProb, last.loss_prob, series.limits.loss_prob, last.se_loss),
        ];
        for (q, mc, analytic, se) in limits {
            match analytic {
                Some(a) => report.rows.push(compare(last.horizon, q, Reference::Limit, mc, a, se)),
                None => report.skipped.push(format!("{q:?}: no limit in this regime")),
            }
        }
    }
    report
}
