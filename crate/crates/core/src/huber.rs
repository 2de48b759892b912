//! Weighted l1-penalized Huber regression.
//!
//! Minimizes
//!
//! ```text
//! (1/n) sum_i Phi_nu((Y_i - X_i' beta) w(X_i)) + lambda |beta|_1
//! ```
//!
//! where `Phi_nu` is the Huber loss and `w(x) = min(1, b / |Bx|_2)` shrinks
//! covariate vectors with a large norm. The solver is proximal gradient with
//! backtracking; [`tune`] grid-searches `(nu, lambda)` on a holdout block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2, DenseMatrix};
use crate::mean::{clip, log_dim, mad_scale};

/// Huber loss: `x^2 / 2` on `|x| <= nu`, `nu |x| - nu^2 / 2` beyond.
pub fn huber_loss(x: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    Ok(loss(x, nu))
}

#[inline]
fn loss(x: f64, nu: f64) -> f64 {
    let a = x.abs();
    if a <= nu {
        0.5 * x * x
    } else {
        nu * a - 0.5 * nu * nu
    }
}

/// `sign(z) * max(|z| - t, 0)`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Parameters of the covariate weight `w(x) = min(1, b / |Bx|_2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    /// Symmetric positive definite shaping matrix; `None` means identity.
    pub shape: Option<DenseMatrix>,
    pub b: f64,
}

impl WeightSpec {
    pub fn identity(b: f64) -> Result<Self> {
        Self::new(None, b)
    }

    pub fn new(shape: Option<DenseMatrix>, b: f64) -> Result<Self> {
        if !(b > 0.0) || b.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "weight bound b must be positive, got {b}"
            )));
        }
        if let Some(m) = &shape {
            let lmin = linalg::min_eigenvalue_spd(m)?;
            if !(lmin > 0.0) {
                return Err(Error::InvalidParameter(
                    "weight matrix must be positive definite".into(),
                ));
            }
        }
        Ok(Self { shape, b })
    }

    /// `b0 = b / lambda_min(B)`, the bound on `|w(x) x|_2`.
    pub fn b0(&self) -> Result<f64> {
        match &self.shape {
            None => Ok(self.b),
            Some(m) => Ok(self.b / linalg::min_eigenvalue_spd(m)?),
        }
    }
}

/// `min(1, b / |Bx|_2)`, and 1 at `Bx = 0`.
pub fn weight(x: &[f64], spec: &WeightSpec) -> f64 {
    let norm = match &spec.shape {
        None => norm2(x),
        Some(m) => norm2(&m.matvec(x)),
    };
    if norm == 0.0 || norm <= spec.b {
        1.0
    } else {
        spec.b / norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuberConfig {
    pub nu: f64,
    pub lambda: f64,
    /// `None` disables weighting (`w = 1`), i.e. plain Huber regression.
    pub weight: Option<WeightSpec>,
    pub max_iter: usize,
    /// Stop once the l-infinity change of the iterate falls below
    /// `tol * min(1, step)`.
    pub tol: f64,
    /// Step shrink factor in backtracking.
    pub backtrack: f64,
}

impl HuberConfig {
    pub fn new(nu: f64, lambda: f64) -> Self {
        Self {
            nu,
            lambda,
            weight: None,
            max_iter: 10_000,
            tol: 1e-8,
            backtrack: 0.5,
        }
    }

    pub fn with_weight(mut self, weight: Option<WeightSpec>) -> Self {
        self.weight = weight;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidParameter("tol > 0 and max_iter >= 1 required".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::InvalidParameter("backtrack factor must be in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    /// Objective at the start and after every accepted step.
    pub objective: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub active_set: Vec<usize>,
    /// Worst violation of the l1 optimality conditions at `beta_hat`.
    pub kkt_residual: f64,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective.last().expect("objective trace is never empty")
    }
}

/// Data with weights applied once per fit.
struct Problem<'a> {
    x: &'a DenseMatrix,
    y: &'a [f64],
    w: Vec<f64>,
    nu: f64,
    lambda: f64,
}

impl Problem<'_> {
    fn n(&self) -> f64 {
        self.x.rows() as f64
    }

    fn residuals(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.x.rows())
            .map(|i| self.y[i] - dot(self.x.row(i), beta))
            .collect()
    }

    fn smooth(&self, resid: &[f64]) -> f64 {
        resid
            .iter()
            .zip(&self.w)
            .map(|(r, w)| loss(r * w, self.nu))
            .sum::<f64>()
            / self.n()
    }

    fn gradient(&self, resid: &[f64]) -> Vec<f64> {
        let coef: Vec<f64> = resid
            .iter()
            .zip(&self.w)
            .map(|(r, w)| -clip(r * w, self.nu) * w / self.n())
            .collect();
        self.x.t_matvec(&coef)
    }

    fn penalty(&self, beta: &[f64]) -> f64 {
        self.lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }
}

fn kkt_residual(grad: &[f64], beta: &[f64], lambda: f64) -> f64 {
    grad.iter()
        .zip(beta)
        .map(|(&g, &b)| {
            if b != 0.0 {
                (g + lambda * b.signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Curvature bound of the smooth part: the top eigenvalue of
/// `(1/n) sum w_i^2 X_i X_i'`, capped by its trace `(1/n) sum w_i^2 |X_i|^2`.
fn lipschitz(x: &DenseMatrix, w: &[f64]) -> Result<f64> {
    let n = x.rows() as f64;
    let scaled = DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| x.get(i, j) * w[i] / n.sqrt());
    let trace: f64 = (0..x.rows())
        .map(|i| w[i] * w[i] * dot(x.row(i), x.row(i)))
        .sum::<f64>()
        / n;
    let top = linalg::operator_norm_2(&scaled)?.powi(2);
    Ok(top.min(trace))
}

pub fn fit(x: &DenseMatrix, y: &[f64], cfg: &HuberConfig) -> Result<FitResult> {
    fit_from(x, y, cfg, None)
}

/// [`fit`] started from `warm` instead of zero.
pub fn fit_from(x: &DenseMatrix, y: &[f64], cfg: &HuberConfig, warm: Option<&[f64]>) -> Result<FitResult> {
    cfg.validate()?;
    let (n, p) = (x.rows(), x.cols());
    if n < 2 || y.len() != n {
        return Err(Error::Shape(format!(
            "need n >= 2 rows with matching y, got {n} rows and {} responses",
            y.len()
        )));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite data".into()));
    }
    let w = match &cfg.weight {
        None => vec![1.0; n],
        Some(spec) => (0..n).map(|i| weight(x.row(i), spec)).collect(),
    };
    let prob = Problem {
        x,
        y,
        w,
        nu: cfg.nu,
        lambda: cfg.lambda,
    };
    let lip = lipschitz(x, &prob.w)?;
    let base_step = if lip > 0.0 { 1.0 / lip } else { 1.0 };

    let mut beta = match warm {
        Some(b) if b.len() == p => b.to_vec(),
        _ => vec![0.0; p],
    };
    let mut resid = prob.residuals(&beta);
    let mut smooth = prob.smooth(&resid);
    let mut obj = smooth + prob.penalty(&beta);
    let mut grad = prob.gradient(&resid);
    let mut trace = vec![obj];
    let mut converged = false;
    let mut iterations = 0;
    let mut step;

    while iterations < cfg.max_iter {
        iterations += 1;
        step = base_step;
        let (cand, cand_resid, cand_smooth) = loop {
            let cand: Vec<f64> = beta
                .iter()
                .zip(&grad)
                .map(|(b, g)| soft_threshold(b - step * g, step * prob.lambda))
                .collect();
            let cand_resid = prob.residuals(&cand);
            let cand_smooth = prob.smooth(&cand_resid);
            let diff: Vec<f64> = cand.iter().zip(&beta).map(|(c, b)| c - b).collect();
            let model = smooth + dot(&grad, &diff) + dot(&diff, &diff) / (2.0 * step);
            if cand_smooth <= model + 1e-15 * smooth.abs().max(1.0) || step <= base_step * 1e-6 {
                break (cand, cand_resid, cand_smooth);
            }
            step *= cfg.backtrack;
        };
        let cand_obj = cand_smooth + prob.penalty(&cand);
        let change = cand.iter().zip(&beta).fold(0.0, |m: f64, (c, b)| m.max((c - b).abs()));
        if cand_obj > obj + 1e-12 * obj.abs().max(1.0) {
            converged = change < cfg.tol;
            break;
        }
        beta = cand;
        resid = cand_resid;
        smooth = cand_smooth;
        // Upticks at rounding level are not recorded.
        obj = cand_obj.min(obj);
        grad = prob.gradient(&resid);
        trace.push(obj);
        if change < cfg.tol * step.min(1.0) {
            converged = true;
            break;
        }
    }
    let kkt = kkt_residual(&grad, &beta, prob.lambda);
    let active_set = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();
    Ok(FitResult {
        beta_hat: beta,
        objective: trace,
        converged,
        iterations,
        active_set,
        kkt_residual: kkt,
    })
}

/// The full objective at `beta` (for checks and oracles).
pub fn objective(x: &DenseMatrix, y: &[f64], beta: &[f64], cfg: &HuberConfig) -> f64 {
    let w: Vec<f64> = match &cfg.weight {
        None => vec![1.0; x.rows()],
        Some(spec) => (0..x.rows()).map(|i| weight(x.row(i), spec)).collect(),
    };
    let prob = Problem {
        x,
        y,
        w,
        nu: cfg.nu,
        lambda: cfg.lambda,
    };
    prob.smooth(&prob.residuals(beta)) + prob.penalty(beta)
}

/// `|grad at 0|_inf`, the smallest lambda whose solution is zero.
pub fn lambda_max(x: &DenseMatrix, y: &[f64], nu: f64, weight_spec: Option<&WeightSpec>) -> f64 {
    let n = x.rows() as f64;
    let coef: Vec<f64> = (0..x.rows())
        .map(|i| {
            let w = weight_spec.map_or(1.0, |s| weight(x.row(i), s));
            clip(y[i] * w, nu) * w / n
        })
        .collect();
    x.t_matvec(&coef).iter().fold(0.0, |m: f64, g| m.max(g.abs()))
}

/// Default tuning grids.
///
/// `nu` in `sigma * sqrt(n / ln p) * {0.25, 0.5, 1, 2, 4}` with `sigma` the
/// MAD scale of `Y`; for each `nu` ten geometric `lambda` values from
/// [`lambda_max`] down by a factor of 1000.
pub fn default_nu_grid(x: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    let sigma = mad_scale(y);
    let sigma = if sigma > 0.0 { sigma } else { 1.0 };
    let center = sigma * (x.rows() as f64 / log_dim(x.cols())).sqrt();
    [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|f| f * center).collect()
}

pub fn default_lambda_grid(lambda_max: f64) -> Vec<f64> {
    geometric_grid(lambda_max, 1e-3, 10)
}

/// `points` values from `top` down to `top * ratio`, geometrically spaced.
pub fn geometric_grid(top: f64, ratio: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![top];
    }
    (0..points)
        .map(|k| top * ratio.powf(k as f64 / (points - 1) as f64))
        .collect()
}

/// A `lambda` grid: explicit values, or the default grid per `nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaGrid {
    Auto,
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub nu: f64,
    pub lambda: f64,
    pub fit: FitResult,
    pub holdout_mse: f64,
    /// Number of `(nu, lambda)` pairs fitted.
    pub evaluated: usize,
    /// Fits that hit the iteration cap (excluded from selection).
    pub nonconverged: usize,
}

fn sorted_unique(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

/// Holdout grid search over `(nu, lambda)`.
///
/// Every pair is fitted (warm-started along decreasing `lambda`), and the pair
/// with the smallest mean squared prediction error on `(x_hold, y_hold)` wins;
/// ties go to the smaller `nu`, then the smaller `lambda`. Grids are
/// deduplicated first.
pub fn tune(
    x: &DenseMatrix,
    y: &[f64],
    nu_grid: &[f64],
    lambda_grid: &LambdaGrid,
    holdout: (&DenseMatrix, &[f64]),
    base: &HuberConfig,
) -> Result<TuneResult> {
    let nus = sorted_unique(nu_grid);
    if nus.is_empty() {
        return Err(Error::InvalidParameter("empty nu grid".into()));
    }
    if let LambdaGrid::Values(v) = lambda_grid {
        if v.is_empty() {
            return Err(Error::InvalidParameter("empty lambda grid".into()));
        }
    }
    let (xh, yh) = holdout;
    if xh.cols() != x.cols() || xh.rows() != yh.len() || yh.is_empty() {
        return Err(Error::Shape("holdout does not match training data".into()));
    }
    let mut best: Option<TuneResult> = None;
    let mut evaluated = 0;
    let mut nonconverged = 0;
    for &nu in &nus {
        let lambdas = match lambda_grid {
            LambdaGrid::Values(v) => sorted_unique(v),
            LambdaGrid::Auto => sorted_unique(&default_lambda_grid(lambda_max(x, y, nu, base.weight.as_ref()))),
        };
        let mut warm: Option<Vec<f64>> = None;
        // Descending lambda for warm starts; selection uses values only.
        for &lambda in lambdas.iter().rev() {
            let cfg = HuberConfig {
                nu,
                lambda,
                ..base.clone()
            };
            let f = fit_from(x, y, &cfg, warm.as_deref())?;
            evaluated += 1;
            warm = Some(f.beta_hat.clone());
            if !f.converged {
                nonconverged += 1;
                continue;
            }
            let mse = (0..xh.rows())
                .map(|i| (yh[i] - dot(xh.row(i), &f.beta_hat)).powi(2))
                .sum::<f64>()
                / xh.rows() as f64;
            let better = match &best {
                None => true,
                Some(b) => {
                    mse < b.holdout_mse || (mse == b.holdout_mse && (nu < b.nu || (nu == b.nu && lambda < b.lambda)))
                }
            };
            if better {
                best = Some(TuneResult {
                    nu,
                    lambda,
                    fit: f,
                    holdout_mse: mse,
                    evaluated: 0,
                    nonconverged: 0,
                });
            }
        }
    }
    let mut best = best.ok_or_else(|| Error::TuningFailed("no grid point converged".into()))?;
    best.evaluated = evaluated;
    best.nonconverged = nonconverged;
    Ok(best)
}
