//! The command-line subcommands as library functions returning rendered output.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::analytics::analytic_report;
use crate::classify::{
    cantelli_check, check_definition, classify, min_variance_weights, DefinitionTolerances, Verdict,
};
use crate::error::{Error, Result};
use crate::io::config::ConfigFile;
use crate::io::output::{
    format_number, parse_estimates_csv, write_run, Format, KeyValues, RunManifest, MANIFEST_FILE,
};
use crate::mc::{convergence_report, run_experiment_with_workers, ConvergenceReport, EstimateSeries, ExperimentConfig};
use crate::model::ModelParams;

pub fn cmd_analytic(config: &ConfigFile, format: Format) -> Result<String> {
    let params = config.params()?;
    let strategy = config.strategy()?;
    strategy.validate(&params)?;
    let report = analytic_report(&params, &strategy)?;
    let mut kv = KeyValues::default();
    kv.push("strategy", strategy.name());
    kv.push("mu", report.first_passage.mu);
    kv.push("level", report.first_passage.level);
    kv.push("hits_almost_surely", report.first_passage.hits_almost_surely());
    kv.push("expected_profit_limit", report.expected_profit_limit);
    kv.push("variance_limit", report.variance_limit);
    kv.push("loss_prob_limit", report.loss_prob_limit);
    kv.push("laplace_at_rf", report.laplace_at_rf);
    kv.push("ig_mean", report.ig.map(|ig| ig.mean()));
    kv.push("ig_shape", report.ig.map(|ig| ig.shape()));
    kv.push("d_laplace_d_barrier", report.sensitivities.map(|s| s.d_laplace_d_barrier));
    kv.push("d_profit_d_barrier", report.sensitivities.map(|s| s.d_profit_d_barrier));
    kv.render(format)
}

pub fn cmd_classify(params: &ModelParams, format: Format) -> Result<String> {
    let c = classify(params);
    let mut kv = KeyValues::default();
    kv.push("alpha", params.alpha());
    kv.push("r_f", params.r_f());
    kv.push("sigma", params.sigma());
    kv.push("margin", c.margin);
    let (verdict, family) = match c.verdict {
        Verdict::LongStatArb => ("LongStatArb", "long_det_barrier"),
        Verdict::ShortStatArb => ("ShortStatArb", "short_det_barrier"),
        Verdict::NoBarrierStatArb => ("NoBarrierStatArb", ""),
    };
    kv.push("verdict", verdict);
    kv.push("strategy_family", family);
    kv.push("note", c.note);
    kv.render(format)
}

pub fn cmd_portfolio(sigma1: f64, sigma2: f64, rho: f64, format: Format) -> Result<String> {
    let w = min_variance_weights(sigma1, sigma2, rho)?;
    let mut kv = KeyValues::default();
    kv.push("sigma1", sigma1);
    kv.push("sigma2", sigma2);
    kv.push("rho", rho);
    kv.push("a_hat", w.a_hat);
    kv.push("b_hat", 1.0 - w.a_hat);
    kv.push("portfolio_sd", w.variance().max(0.0).sqrt());
    kv.render(format)
}

pub struct SimulateOutcome {
    pub manifest: RunManifest,
    pub series: EstimateSeries,
    pub report: ConvergenceReport,
}

impl SimulateOutcome {
    /// Short human-readable table of the run.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let c = &self.manifest.config;
        writeln!(
            out,
            "{} paths, {} steps/year, seed {}, strategy {}{} ({:.2} s)",
            c.paths,
            c.steps_per_year,
            c.seed,
            c.strategy.name(),
            if c.bridge_correction { ", bridge-corrected" } else { "" },
            self.manifest.wall_time_secs
        )
        .unwrap();
        writeln!(out, "{:>8} {:>14} {:>12} {:>14} {:>10}", "T", "mean", "se_mean", "var/T", "loss").unwrap();
        for r in &self.series.rows {
            writeln!(
                out,
                "{:>8} {:>14.6} {:>12.2e} {:>14.4e} {:>10.5}",
                r.horizon, r.mean, r.se_mean, r.var_over_t, r.loss_prob
            )
            .unwrap();
        }
        for cmp in &self.report.rows {
            writeln!(
                out,
                "{:?} {:?} at T={}: mc {:.6} vs {:.6} ({:.2} SE){}",
                cmp.quantity,
                cmp.reference,
                cmp.horizon,
                cmp.mc,
                cmp.analytic,
                cmp.se_ratio,
                if cmp.flagged { "  FLAGGED" } else { "" }
            )
            .unwrap();
        }
        out
    }
}

pub fn cmd_simulate(config: &ExperimentConfig, out: &Path, workers: usize) -> Result<SimulateOutcome> {
    config.validate()?;
    let start = Instant::now();
    let series = run_experiment_with_workers(config, workers)?;
    let wall = start.elapsed().as_secs_f64();
    let manifest = write_run(out, config, &series, wall)?;
    let report = convergence_report(&series);
    Ok(SimulateOutcome {
        manifest,
        series,
        report,
    })
}

pub struct CheckOutcome {
    pub rendered: String,
    pub passed: bool,
}

/// Runs the four-condition check and Cantelli bounds on an `estimates.csv`.
///
/// A `manifest.json` next to the file supplies the path count and the
/// observed `max |v(0)|`; without one the zero start is taken as given.
pub fn cmd_check(estimates: &Path, tol: &DefinitionTolerances, format: Format) -> Result<CheckOutcome> {
    let text = std::fs::read_to_string(estimates).map_err(|e| Error::io(estimates, e))?;
    let manifest_path = estimates.with_file_name(MANIFEST_FILE);
    let (paths, initial) = if manifest_path.exists() {
        let m = RunManifest::read(&manifest_path)?;
        (m.paths, m.initial_value_max_abs)
    } else {
        (0, 0.0)
    };
    let series = parse_estimates_csv(&text, paths, initial)?;
    let verdict = check_definition(&series, tol)?;
    let cantelli = cantelli_check(&series);

    let mut kv = KeyValues::default();
    kv.push("c1_zero_start", verdict.c1_zero_start);
    kv.push("c2_positive_mean", verdict.c2_positive_mean.holds);
    kv.push("c2_evidence", verdict.c2_positive_mean.evidence.clone());
    kv.push("c3_loss_decay", verdict.c3_loss_decay.holds);
    kv.push("c3_evidence", verdict.c3_loss_decay.evidence.clone());
    kv.push("c4_var_over_t_decay", verdict.c4_var_over_t_decay.holds);
    kv.push("c4_required", verdict.c4_required);
    kv.push("c4_evidence", verdict.c4_var_over_t_decay.evidence.clone());
    for c in &cantelli {
        let key = format!("cantelli_T{}", format_number(c.horizon)?);
        let value = if c.applicable {
            format!(
                "{} (loss {} <= bound {})",
                if c.holds { "holds" } else { "violated" },
                format_number(c.loss_prob)?,
                format_number(c.bound)?
            )
        } else {
            "n/a (mean <= 0)".to_string()
        };
        kv.push(key, value);
    }
    kv.push("statistical_arbitrage", verdict.overall);
    Ok(CheckOutcome {
        rendered: kv.render(format)?,
        passed: verdict.overall,
    })
}
