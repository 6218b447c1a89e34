use serde::Serialize;

use super::{
    barrier_sensitivities_ex2, expected_profit_limit_ex2, laplace_first_passage,
    loss_prob_limit_ex2, loss_prob_limit_ex3, loss_prob_limit_short, variance_limit_ex2,
    BarrierSensitivities, IGParams,
};
use crate::error::{Error, Result};
use crate::model::{to_first_passage, FirstPassageProblem, ModelParams};
use crate::strategies::StrategySpec;

/// Closed-form long-run summary of one barrier strategy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub first_passage: FirstPassageProblem,
    /// Absent when no closed form applies in this regime.
    pub expected_profit_limit: Option<f64>,
    pub variance_limit: Option<f64>,
    pub loss_prob_limit: f64,
    pub laplace_at_rf: f64,
    pub ig: Option<IGParams>,
    pub sensitivities: Option<BarrierSensitivities>,
}

pub fn analytic_report(params: &ModelParams, strategy: &StrategySpec) -> Result<AnalyticReport> {
    let fp = to_first_passage(params, strategy)?;
    let laplace_at_rf = laplace_first_passage(&fp, params.r_f())?;
    let s0 = params.s0();
    let (expected, variance, loss, sensitivities) = match *strategy {
        StrategySpec::BuyHold => {
            return Err(Error::domain("analytic report requires a barrier strategy"))
        }
        StrategySpec::LongConstBarrier { barrier } => (
            Some(expected_profit_limit_ex2(params, barrier)?),
            Some(variance_limit_ex2(params, barrier)?),
            loss_prob_limit_ex2(params, barrier)?,
            Some(barrier_sensitivities_ex2(params, barrier)?),
        ),
        StrategySpec::LongDetBarrier { k } => {
            let settled = fp.hits_almost_surely();
            (
                settled.then_some(s0 * k),
                settled.then_some(0.0),
                loss_prob_limit_ex3(params, k)?,
                None,
            )
        }
        StrategySpec::ShortDetBarrier { k } => {
            let settled = fp.hits_almost_surely();
            (
                settled.then_some(s0 * k / (1.0 + k)),
                settled.then_some(0.0),
                loss_prob_limit_short(params, k)?,
                None,
            )
        }
    };
    Ok(AnalyticReport {
        first_passage: fp,
        expected_profit_limit: expected,
        variance_limit: variance,
        loss_prob_limit: loss,
        laplace_at_rf,
        ig: fp.ig(),
        sensitivities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_barrier_report() {
        let p = ModelParams::new(0.16, 0.04, 0.2, 1.0).unwrap();
        let r = analytic_report(&p, &StrategySpec::LongConstBarrier { barrier: 1.2 }).unwrap();
        assert!((r.expected_profit_limit.unwrap() - 0.14134).abs() < 1e-5);
        assert!(r.laplace_at_rf > 0.0 && r.laplace_at_rf <= 1.0);
        let ig = r.ig.unwrap();
        assert!((ig.mean() - 1.30230).abs() < 1e-5);
        assert!((ig.shape() - 0.83103).abs() < 1e-5);
        assert!(r.sensitivities.is_some());
    }

    #[test]
    fn det_barrier_reports() {
        let p = ModelParams::new(0.16, 0.04, 0.2, 1.0).unwrap();
        let r = analytic_report(&p, &StrategySpec::LongDetBarrier { k: 0.05 }).unwrap();
        assert_eq!(r.loss_prob_limit, 0.0);
        assert_eq!(r.expected_profit_limit, Some(0.05));

        let q = ModelParams::new(0.05, 0.04, 0.2, 1.0).unwrap();
        let r = analytic_report(&q, &StrategySpec::LongDetBarrier { k: 0.05 }).unwrap();
        assert!(r.expected_profit_limit.is_none());
        assert!(r.ig.is_none());
        assert!((r.loss_prob_limit - 0.0241).abs() < 1e-4);

        let s = ModelParams::new(0.01, 0.05, 0.2, 1.0).unwrap();
        let r = analytic_report(&s, &StrategySpec::ShortDetBarrier { k: 0.05 }).unwrap();
        assert!((r.expected_profit_limit.unwrap() - 0.05 / 1.05).abs() < 1e-15);
        assert_eq!(r.loss_prob_limit, 0.0);
    }

    #[test]
    fn regime_violations_name_the_precondition() {
        let p = ModelParams::new(0.16, 0.0, 0.2, 1.0).unwrap();
        let err = analytic_report(&p, &StrategySpec::LongConstBarrier { barrier: 1.2 }).unwrap_err();
        assert!(err.to_string().contains("r_f > 0"), "{err}");
        assert!(analytic_report(&p, &StrategySpec::BuyHold).is_err());
    }
}
