//! Robust estimation for high-dimensional heavy-tailed time series.
//!
//! - [`linalg`]: dense matrices, norms, spectral radius and the `(tau, gamma)`
//!   dependence profile of a transition matrix.
//! - [`sim`]: innovation laws, VAR(1) / linear-process / AR error simulators,
//!   the benchmark transition designs and the regression dataset.
//! - [`mean`]: coordinatewise Huber mean estimation.
//! - [`huber`]: weighted l1-penalized Huber regression and its tuner.
//! - [`var`]: truncation, robust Lasso and Dantzig estimators of a VAR
//!   transition matrix, plain baselines and error metrics.
//! - [`concentration`]: Bernstein-type tail bounds and their Monte Carlo check.
//! - [`bench`]: seeded, replicated experiments with CSV reports.

pub mod bench;
pub mod concentration;
pub mod error;
pub mod huber;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod mean;
pub mod sim;
pub mod var;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DependenceProfile};
pub use sim::{InnovationDist, SeriesSample, SimRng, VarDesign};
