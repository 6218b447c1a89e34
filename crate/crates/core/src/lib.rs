//! Barrier-stopped trading strategies on a geometric Brownian motion stock.
//!
//! The crate is split the same way the computation flows:
//!
//! - [`model`]: model parameters, time grids, exact lognormal path simulation
//!   and the change of variables onto a Brownian motion with drift.
//! - [`analytics`]: normal and inverse Gaussian distributions, first-passage
//!   Laplace transforms, limiting profit/variance/loss formulas.
//! - [`strategies`]: buy-and-hold and the three barrier strategies, evaluated
//!   path by path as discounted cumulative profits.
//! - [`mc`]: Monte Carlo experiments over several horizons with standard
//!   errors and analytic counterparts.
//! - [`classify`]: the statistical-arbitrage regime classification, the
//!   empirical four-condition checker, Cantelli bounds and two-strategy
//!   minimum-variance weights.
//! - [`io`]: configuration files, CSV/JSON emission and run manifests used by
//!   the `statarb` command-line tool.

// `!(x > 0.0)` is how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod classify;
pub mod error;
pub mod io;
pub mod mc;
pub mod model;
pub mod strategies;

pub use error::{Error, Result};
pub use model::{FirstPassageProblem, ModelParams, Path, PathGrid};
pub use strategies::{Monitoring, ProfitSeries, StrategySpec};
