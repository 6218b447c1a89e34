//! Black-Scholes world: parameters, time grids and path simulation.
//!
//! Paths are simulated with the exact lognormal step
//! ```text
//! S(t + dt) = S(t) * exp((alpha - sigma^2/2) dt + sigma sqrt(dt) Z)
//! ```
//! so the grid marginals carry no discretization error. Randomness is drawn
//! from a ChaCha8 stream selected by `(seed, path_index)`: path `i` is the
//! same no matter which worker produces it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analytics::IGParams;
use crate::error::{Error, Result};
use crate::strategies::StrategySpec;

/// Key offset separating the Brownian-bridge uniforms from the normal draws.
const BRIDGE_KEY: u64 = 0x9E37_79B9_7F4A_7C15;

/// Growth rate, risk-free rate, volatility and initial price.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    alpha: f64,
    r_f: f64,
    sigma: f64,
    s0: f64,
}

#[derive(Deserialize)]
struct RawParams {
    alpha: Option<f64>,
    r_f: Option<f64>,
    sigma: Option<f64>,
    s0: Option<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::config(name, "missing"));
        ModelParams::new(
            need(raw.alpha, "alpha")?,
            need(raw.r_f, "r_f")?,
            need(raw.sigma, "sigma")?,
            need(raw.s0, "s0")?,
        )
    }
}

impl ModelParams {
    pub fn new(alpha: f64, r_f: f64, sigma: f64, s0: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::config("alpha", format!("must be finite, got {alpha}")));
        }
        if !(r_f.is_finite() && r_f >= 0.0) {
            return Err(Error::config("r_f", format!("must be >= 0, got {r_f}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::config("sigma", format!("must be > 0, got {sigma}")));
        }
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::config("s0", format!("must be > 0, got {s0}")));
        }
        Ok(Self {
            alpha,
            r_f,
            sigma,
            s0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r_f(&self) -> f64 {
        self.r_f
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn with_s0(&self, s0: f64) -> Result<Self> {
        Self::new(self.alpha, self.r_f, self.sigma, s0)
    }

    /// `alpha - r_f - sigma^2 / 2`, the drift of the discounted log price.
    pub fn margin(&self) -> f64 {
        (self.alpha - self.r_f) - 0.5 * self.sigma * self.sigma
    }

    /// Drift of `ln(e^{-r_f t} S_t / S_0) / sigma`.
    pub fn discounted_drift(&self) -> f64 {
        self.margin() / self.sigma
    }
}

/// Uniform time grid starting at zero with `steps_per_year` steps per year.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathGrid {
    steps_per_year: u32,
    n_steps: usize,
}

impl PathGrid {
    /// The horizon must be a whole number of steps.
    pub fn new(steps_per_year: u32, horizon_years: f64) -> Result<Self> {
        if steps_per_year == 0 {
            return Err(Error::config("steps_per_year", "must be positive"));
        }
        let n_steps = steps_for(steps_per_year, horizon_years, "horizon_years")?;
        if n_steps == 0 {
            return Err(Error::config("horizon_years", "must be positive"));
        }
        Ok(Self {
            steps_per_year,
            n_steps,
        })
    }

    pub fn steps_per_year(&self) -> u32 {
        self.steps_per_year
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.steps_per_year as f64
    }

    pub fn horizon_years(&self) -> f64 {
        self.time(self.n_steps)
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 / self.steps_per_year as f64
    }

    /// Grid index of `t`, which must lie on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let i = steps_for(self.steps_per_year, t, "horizon")?;
        if i > self.n_steps {
            return Err(Error::config(
                "horizon",
                format!("{t} lies beyond the grid horizon {}", self.horizon_years()),
            ));
        }
        Ok(i)
    }
}

/// Number of steps covering `t` years, rejecting partial final steps.
pub(crate) fn steps_for(steps_per_year: u32, t: f64, field: &str) -> Result<usize> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::config(field, format!("must be a finite non-negative time, got {t}")));
    }
    let exact = t * steps_per_year as f64;
    let n = exact.round();
    if (exact - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::config(
            field,
            format!("{t} is not an integer multiple of dt = 1/{steps_per_year}"),
        ));
    }
    Ok(n as usize)
}

/// One simulated trajectory on a [`PathGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    /// `S(t) e^{-r_f t}`.
    pub discounted: Vec<f64>,
    /// `X(t) = ln(e^{-r_f t} S(t) / S_0) / sigma`.
    pub x: Vec<f64>,
    pub running_max_x: Vec<f64>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Normal-draw stream for one path.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// Independent uniform stream for bridge-crossing decisions on one path.
pub fn bridge_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BRIDGE_KEY);
    rng.set_stream(path_index);
    rng
}

pub fn simulate_path(params: &ModelParams, grid: &PathGrid, seed: u64, path_index: u64) -> Path {
    let mut rng = path_rng(seed, path_index);
    let n = grid.n_steps() + 1;
    let dt = grid.dt();
    let sigma = params.sigma();
    let drift = (params.alpha() - 0.5 * sigma * sigma) * dt;
    let vol = sigma * dt.sqrt();

    let mut times = Vec::with_capacity(n);
    let mut prices = Vec::with_capacity(n);
    let mut discounted = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut running_max_x = Vec::with_capacity(n);

    let s0 = params.s0();
    let mut log_s = 0.0_f64;
    let mut max_x = 0.0_f64;
    times.push(0.0);
    prices.push(s0);
    discounted.push(s0);
    x.push(0.0);
    running_max_x.push(0.0);

    for i in 1..n {
        let z: f64 = StandardNormal.sample(&mut rng);
        log_s += drift + vol * z;
        let t = grid.time(i);
        let log_disc = log_s - params.r_f() * t;
        let xi = log_disc / sigma;
        max_x = max_x.max(xi);
        times.push(t);
        prices.push(s0 * log_s.exp());
        discounted.push(s0 * log_disc.exp());
        x.push(xi);
        running_max_x.push(max_x);
    }

    Path {
        times,
        prices,
        discounted,
        x,
        running_max_x,
    }
}

/// Brownian motion with drift `X_t = mu t + W_t` and the level it must reach.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FirstPassageProblem {
    pub mu: f64,
    pub level: f64,
}

impl FirstPassageProblem {
    /// Law of the passage time, defined when both the drift and the level are positive.
    pub fn ig(&self) -> Option<IGParams> {
        if self.mu > 0.0 && self.level > 0.0 {
            IGParams::new(self.level / self.mu, self.level * self.level).ok()
        } else {
            None
        }
    }

    pub fn hits_almost_surely(&self) -> bool {
        self.mu >= 0.0
    }

    /// `P(tau < infinity)`.
    pub fn hit_probability(&self) -> f64 {
        if self.mu >= 0.0 {
            1.0
        } else {
            (2.0 * self.mu * self.level).exp()
        }
    }
}

/// Maps a barrier strategy onto its Brownian first-passage problem.
pub fn to_first_passage(params: &ModelParams, strategy: &StrategySpec) -> Result<FirstPassageProblem> {
    strategy.validate(params)?;
    let sigma = params.sigma();
    match *strategy {
        StrategySpec::BuyHold => Err(Error::domain(
            "buy-and-hold has no barrier and no first-passage problem",
        )),
        StrategySpec::LongConstBarrier { barrier } => Ok(FirstPassageProblem {
            mu: (params.alpha() - 0.5 * sigma * sigma) / sigma,
            level: (barrier / params.s0()).ln() / sigma,
        }),
        StrategySpec::LongDetBarrier { k } => Ok(FirstPassageProblem {
            mu: params.discounted_drift(),
            level: k.ln_1p() / sigma,
        }),
        StrategySpec::ShortDetBarrier { k } => Ok(FirstPassageProblem {
            mu: (0.5 * sigma * sigma - (params.alpha() - params.r_f())) / sigma,
            level: k.ln_1p() / sigma,
        }),
    }
}

/// First grid time at which `mu t + W_t` reaches `level`, simulated with
/// `steps_per_year` steps up to `max_years`. `None` when the level is not
/// reached within the cap.
pub fn sample_hitting_time(
    fp: &FirstPassageProblem,
    steps_per_year: u32,
    max_years: f64,
    seed: u64,
    path_index: u64,
) -> Result<Option<f64>> {
    let grid = PathGrid::new(steps_per_year, max_years)?;
    let mut rng = path_rng(seed, path_index);
    let dt = grid.dt();
    let drift = fp.mu * dt;
    let vol = dt.sqrt();
    let mut x = 0.0_f64;
    if x >= fp.level {
        return Ok(Some(0.0));
    }
    for i in 1..=grid.n_steps() {
        let z: f64 = StandardNormal.sample(&mut rng);
        x += drift + vol * z;
        if x >= fp.level {
            return Ok(Some(grid.time(i)));
        }
    }
    Ok(None)
}
