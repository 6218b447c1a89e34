//! Python module `statarb_py`.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use statarb::analytics;
use statarb::classify::{self as cls, Verdict};
use statarb::mc::{self, ExperimentConfig, HorizonEstimate};
use statarb::model;

fn to_py(e: statarb::Error) -> PyErr {
    match e {
        statarb::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams(statarb::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (alpha, r_f, sigma, s0 = 1.0))]
    fn new(alpha: f64, r_f: f64, sigma: f64, s0: f64) -> PyResult<Self> {
        statarb::ModelParams::new(alpha, r_f, sigma, s0).map(Self).map_err(to_py)
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn r_f(&self) -> f64 {
        self.0.r_f()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    #[getter]
    fn s0(&self) -> f64 {
        self.0.s0()
    }

    /// `(alpha - r_f) - sigma^2 / 2`
    fn margin(&self) -> f64 {
        self.0.margin()
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(alpha={}, r_f={}, sigma={}, s0={})",
            self.0.alpha(),
            self.0.r_f(),
            self.0.sigma(),
            self.0.s0()
        )
    }
}

#[pyclass(name = "Strategy", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyStrategy(statarb::StrategySpec);

#[pymethods]
impl PyStrategy {
    #[staticmethod]
    fn buy_hold() -> Self {
        Self(statarb::StrategySpec::BuyHold)
    }

    #[staticmethod]
    fn long_const_barrier(barrier: f64) -> Self {
        Self(statarb::StrategySpec::LongConstBarrier { barrier })
    }

    #[staticmethod]
    fn long_det_barrier(k: f64) -> Self {
        Self(statarb::StrategySpec::LongDetBarrier { k })
    }

    #[staticmethod]
    fn short_det_barrier(k: f64) -> Self {
        Self(statarb::StrategySpec::ShortDetBarrier { k })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.name()
    }

    fn __repr__(&self) -> String {
        format!("Strategy({:?})", self.0)
    }
}

/// One simulated path as a dict of equal-length lists.
#[pyfunction]
#[pyo3(signature = (params, horizon, steps_per_year, seed, path_index = 0))]
fn simulate_path<'py>(
    py: Python<'py>,
    params: PyRef<'py, PyModelParams>,
    horizon: f64,
    steps_per_year: u32,
    seed: u64,
    path_index: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = statarb::PathGrid::new(steps_per_year, horizon).map_err(to_py)?;
    let path = model::simulate_path(&params.0, &grid, seed, path_index);
    let d = PyDict::new(py);
    d.set_item("times", path.times)?;
    d.set_item("prices", path.prices)?;
    d.set_item("discounted", path.discounted)?;
    Ok(d)
}

/// Discounted profits `v(t)` of a strategy along one simulated path.
#[pyfunction]
#[pyo3(signature = (params, strategy, horizon, steps_per_year, seed, path_index = 0))]
fn profit_series<'py>(
    py: Python<'py>,
    params: PyRef<'py, PyModelParams>,
    strategy: PyRef<'py, PyStrategy>,
    horizon: f64,
    steps_per_year: u32,
    seed: u64,
    path_index: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = statarb::PathGrid::new(steps_per_year, horizon).map_err(to_py)?;
    let path = model::simulate_path(&params.0, &grid, seed, path_index);
    let ps = statarb::strategies::evaluate(&strategy.0, &path, &params.0).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("times", ps.times)?;
    d.set_item("v", ps.v)?;
    d.set_item("hit_time", ps.hit_time)?;
    Ok(d)
}

#[pyfunction]
fn normal_cdf(x: f64) -> f64 {
    analytics::normal_cdf(x)
}

#[pyfunction]
fn ig_cdf(x: f64, mean: f64, shape: f64) -> PyResult<f64> {
    let ig = analytics::IGParams::new(mean, shape).map_err(to_py)?;
    Ok(analytics::ig_cdf(x, &ig))
}

/// Closed-form limits of a barrier strategy as a dict; absent values are `None`.
#[pyfunction]
fn analytic_report<'py>(
    py: Python<'py>,
    params: PyRef<'py, PyModelParams>,
    strategy: PyRef<'py, PyStrategy>,
) -> PyResult<Bound<'py, PyDict>> {
    let r = analytics::analytic_report(&params.0, &strategy.0).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("mu", r.first_passage.mu)?;
    d.set_item("level", r.first_passage.level)?;
    d.set_item("expected_profit_limit", r.expected_profit_limit)?;
    d.set_item("variance_limit", r.variance_limit)?;
    d.set_item("loss_prob_limit", r.loss_prob_limit)?;
    d.set_item("laplace_at_rf", r.laplace_at_rf)?;
    d.set_item("ig_mean", r.ig.map(|ig| ig.mean()))?;
    d.set_item("ig_shape", r.ig.map(|ig| ig.shape()))?;
    d.set_item("d_laplace_d_barrier", r.sensitivities.map(|s| s.d_laplace_d_barrier))?;
    d.set_item("d_profit_d_barrier", r.sensitivities.map(|s| s.d_profit_d_barrier))?;
    Ok(d)
}

/// `"LongStatArb"`, `"ShortStatArb"` or `"NoBarrierStatArb"`.
#[pyfunction]
fn classify(params: PyRef<'_, PyModelParams>) -> &'static str {
    match cls::classify(&params.0).verdict {
        Verdict::LongStatArb => "LongStatArb",
        Verdict::ShortStatArb => "ShortStatArb",
        Verdict::NoBarrierStatArb => "NoBarrierStatArb",
    }
}

/// `(a, 1 - a)` minimising the variance of the mixed profit.
#[pyfunction]
fn min_variance_weights(sigma1: f64, sigma2: f64, rho: f64) -> PyResult<(f64, f64)> {
    let w = cls::min_variance_weights(sigma1, sigma2, rho).map_err(to_py)?;
    Ok((w.a_hat, 1.0 - w.a_hat))
}

fn row_dict<'py>(py: Python<'py>, r: &HorizonEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("horizon", r.horizon)?;
    d.set_item("mean", r.mean)?;
    d.set_item("se_mean", r.se_mean)?;
    d.set_item("var", r.var)?;
    d.set_item("se_var", r.se_var)?;
    d.set_item("var_over_t", r.var_over_t)?;
    d.set_item("loss_prob", r.loss_prob)?;
    d.set_item("se_loss", r.se_loss)?;
    d.set_item("analytic_mean", r.analytic_mean)?;
    d.set_item("analytic_var", r.analytic_var)?;
    d.set_item("analytic_loss", r.analytic_loss)?;
    Ok(d)
}

/// Monte Carlo estimates per horizon, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (params, strategy, horizons, paths, steps_per_year, seed, bridge_correction = false, workers = 1))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    params: PyRef<'py, PyModelParams>,
    strategy: PyRef<'py, PyStrategy>,
    horizons: Vec<f64>,
    paths: usize,
    steps_per_year: u32,
    seed: u64,
    bridge_correction: bool,
    workers: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = ExperimentConfig {
        params: params.0,
        strategy: strategy.0,
        horizons,
        paths,
        steps_per_year,
        seed,
        bridge_correction,
    };
    let series = py
        .detach(|| mc::run_experiment_with_workers(&config, workers))
        .map_err(to_py)?;
    series.rows.iter().map(|r| row_dict(py, r)).collect()
}

#[pymodule]
fn statarb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyStrategy>()?;
    m.add_function(wrap_pyfunction!(simulate_path, m)?)?;
    m.add_function(wrap_pyfunction!(profit_series, m)?)?;
    m.add_function(wrap_pyfunction!(normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(ig_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_report, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(min_variance_weights, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
