//! Statistical-arbitrage classification and checks over estimate series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc::{Ensemble, EstimateSeries};
use crate::model::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `alpha - r_f > sigma^2/2`: long-until-barrier strategies are statistical arbitrage.
    LongStatArb,
    /// `alpha - r_f < sigma^2/2`: short-until-barrier strategies are statistical arbitrage.
    ShortStatArb,
    /// `alpha - r_f = sigma^2/2`: neither barrier family hits almost surely.
    NoBarrierStatArb,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArbClassification {
    pub verdict: Verdict,
    pub margin: f64,
    pub note: String,
}

pub fn classify(params: &ModelParams) -> ArbClassification {
    let margin = params.margin();
    let (verdict, note) = if margin > 0.0 {
        (
            Verdict::LongStatArb,
            "long the stock until it reaches S0(1+k)e^{r_f t}; the discounted price drifts up and hits almost surely",
        )
    } else if margin < 0.0 {
        (
            Verdict::ShortStatArb,
            "short the stock until it reaches S0(1+k)^{-1}e^{r_f t}; the discounted price drifts down and hits almost surely",
        )
    } else {
        (
            Verdict::NoBarrierStatArb,
            "alpha - r_f = sigma^2/2: no barrier strategy family is assigned",
        )
    };
    ArbClassification {
        verdict,
        margin,
        note: note.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefinitionTolerances {
    /// Largest acceptable loss probability at the longest horizon.
    pub loss: f64,
    /// Largest acceptable `var/t` at the longest horizon, relative to the first horizon.
    pub var_rel: f64,
}

impl Default for DefinitionTolerances {
    fn default() -> Self {
        Self {
            loss: 0.005,
            var_rel: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub holds: bool,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefinitionVerdict {
    pub c1_zero_start: bool,
    pub c2_positive_mean: Condition,
    pub c3_loss_decay: Condition,
    pub c4_var_over_t_decay: Condition,
    /// Whether some horizon shows a positive loss probability, which makes condition 4 binding.
    pub c4_required: bool,
    pub overall: bool,
}

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

/// Empirical check of the four statistical-arbitrage conditions.
pub fn check_definition(series: &EstimateSeries, tol: &DefinitionTolerances) -> Result<DefinitionVerdict> {
    let n = series.rows.len();
    if n < 3 {
        return Err(Error::config("horizons", format!("need at least 3 horizons, got {n}")));
    }
    let last = &series.rows[n - 1];
    let tail = &series.rows[n - 3..];

    let c1 = series.initial_max_abs == 0.0;

    let c2 = Condition {
        holds: last.mean > 3.0 * last.se_mean && last.mean > 0.0,
        evidence: format!("mean {:.6} vs 3 SE {:.6} at T={}", last.mean, 3.0 * last.se_mean, last.horizon),
    };

    let loss_tail: Vec<f64> = tail.iter().map(|r| r.loss_prob).collect();
    let c3 = Condition {
        holds: last.loss_prob <= tol.loss && nonincreasing(&loss_tail),
        evidence: format!(
            "loss {:.6} (tol {}) at T={}; last three {:?}",
            last.loss_prob, tol.loss, last.horizon, loss_tail
        ),
    };

    let first = &series.rows[0];
    let vt_tail: Vec<f64> = tail.iter().map(|r| r.var_over_t).collect();
    let bound = tol.var_rel * first.var_over_t;
    let c4 = Condition {
        holds: last.var_over_t <= bound && nonincreasing(&vt_tail),
        evidence: format!(
            "var/t {:.6e} vs {:.6e} ({} x value at T={}); last three {:?}",
            last.var_over_t, bound, tol.var_rel, first.horizon, vt_tail
        ),
    };

    let c4_required = series.rows.iter().any(|r| r.loss_prob > 0.0);
    let overall = c1 && c2.holds && c3.holds && (!c4_required || c4.holds);
    Ok(DefinitionVerdict {
        c1_zero_start: c1,
        c2_positive_mean: c2,
        c3_loss_decay: c3,
        c4_var_over_t_decay: c4,
        c4_required,
        overall,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CantelliRow {
    pub horizon: f64,
    /// The bound applies only where the mean is positive.
    pub applicable: bool,
    pub bound: f64,
    pub loss_prob: f64,
    pub holds: bool,
}

/// One-sided Chebyshev bound `P(v < 0) <= var / (var + mean^2)` per horizon.
pub fn cantelli_check(series: &EstimateSeries) -> Vec<CantelliRow> {
    series
        .rows
        .iter()
        .map(|r| {
            let applicable = r.mean > 0.0;
            let bound = if applicable { r.var / (r.var + r.mean * r.mean) } else { 1.0 };
            CantelliRow {
                horizon: r.horizon,
                applicable,
                bound,
                loss_prob: r.loss_prob,
                holds: !applicable || r.loss_prob <= bound + 3.0 * r.se_loss,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PortfolioWeights {
    pub a_hat: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
}

impl PortfolioWeights {
    pub fn variance_at(&self, a: f64) -> f64 {
        let (s1, s2) = (self.sigma1, self.sigma2);
        a * a * s1 * s1 + (1.0 - a) * (1.0 - a) * s2 * s2 + 2.0 * a * (1.0 - a) * self.rho * s1 * s2
    }

    pub fn variance(&self) -> f64 {
        self.variance_at(self.a_hat)
    }
}

/// Weight on the first strategy minimising the variance of `a v1 + (1 - a) v2`, `a` in `[0, 1]`.
pub fn min_variance_weights(sigma1: f64, sigma2: f64, rho: f64) -> Result<PortfolioWeights> {
    if !(sigma1.is_finite() && sigma1 > 0.0 && sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::domain(format!(
            "standard deviations must be > 0 (sigma1 = {sigma1}, sigma2 = {sigma2})"
        )));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!("correlation must lie in [-1, 1], got {rho}")));
    }
    let cross = rho * sigma1 * sigma2;
    let denom = sigma1 * sigma1 + sigma2 * sigma2 - 2.0 * cross;
    if denom <= 1e-14 * (sigma1 * sigma1 + sigma2 * sigma2) {
        return Err(Error::domain(
            "degenerate variance form: rho = 1 with sigma1 = sigma2 leaves the weight undetermined",
        ));
    }
    Ok(PortfolioWeights {
        a_hat: ((sigma2 * sigma2 - cross) / denom).clamp(0.0, 1.0),
        sigma1,
        sigma2,
        rho,
    })
}

/// Pathwise `a v1 + (1 - a) v2` of two ensembles on the same horizons.
pub fn combine_series(v1: &Ensemble, v2: &Ensemble, a: f64) -> Result<Ensemble> {
    if v1.horizons != v2.horizons {
        return Err(Error::domain("ensembles are on different horizon grids"));
    }
    if v1.paths != v2.paths {
        return Err(Error::domain(format!(
            "ensembles have different path counts ({} vs {})",
            v1.paths, v2.paths
        )));
    }
    let values = (0..v1.paths)
        .flat_map(|p| {
            v1.path_values(p)
                .iter()
                .zip(v2.path_values(p))
                .map(|(x, y)| a * x + (1.0 - a) * y)
                .collect::<Vec<_>>()
        })
        .collect();
    let initial = (a * v1.initial_max_abs).abs() + ((1.0 - a) * v2.initial_max_abs).abs();
    Ensemble::new(v1.horizons.clone(), values, initial)
}
