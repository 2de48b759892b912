//! Sparse VAR(1) transition matrix estimation from heavy-tailed series.
//!
//! Both estimators work on an elementwise truncated copy of the data. The
//! Lasso solves one penalized least-squares problem per row of `A`; the
//! Dantzig estimator solves one linear program per column of the lag-0 /
//! lag-1 Yule-Walker system. With `Sigma_1 = (1/n) sum X_{i-1} X_i'` that
//! system is `Sigma_0 A' = Sigma_1`, so the concatenated program solutions
//! estimate `A'` and are transposed before being returned. Every returned
//! estimate is oriented so that `X_i ~ A_hat X_{i-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::huber::soft_threshold;
use crate::linalg::{self, DenseMatrix};
use crate::lp::{DualSimplex, LpOutcome};
use crate::mean::{log_dim, pilot_scale};
use crate::sim::SeriesSample;

/// Coordinate descent stops when no coordinate moves by more than this.
pub const LASSO_TOL: f64 = 1e-9;
/// Sweep cap for one Lasso problem.
pub const LASSO_MAX_SWEEPS: usize = 100_000;
/// Relative KKT tolerance, as a multiple of `lambda`.
pub const LASSO_KKT_TOL: f64 = 1e-6;
/// Absolute slack allowed on the Dantzig constraint.
pub const DANTZIG_FEAS_TOL: f64 = 1e-8;

/// Elementwise clipped copy of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSeries {
    pub x_tilde: DenseMatrix,
    pub nu: f64,
}

/// Clips every entry to `[-nu, nu]`. `nu = inf` leaves the data unchanged.
pub fn truncate(sample: &SeriesSample, nu: f64) -> Result<TruncatedSeries> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    let x = &sample.x;
    let data = x.as_slice().iter().map(|v| crate::mean::clip(*v, nu)).collect();
    Ok(TruncatedSeries {
        x_tilde: DenseMatrix::new(x.rows(), x.cols(), data)?,
        nu,
    })
}

/// One Lasso solve with its optimality certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Largest KKT violation; see [`lasso_kkt_residual`].
    pub kkt_residual: f64,
}

/// Largest violation of the Lasso KKT conditions for
/// `(1/n)|y - Z b|^2 + lambda |b|_1` written through `G = Z'Z/n`, `q = Z'y/n`.
///
/// Active coordinates contribute `|grad_j + lambda sign(b_j)|`, zero
/// coordinates `max(0, |grad_j| - lambda)`, where `grad = 2 (G b - q)`.
pub fn lasso_kkt_residual(g: &DenseMatrix, q: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let gb = g.matvec(beta);
    beta.iter()
        .zip(gb.iter().zip(q))
        .map(|(&b, (&gb, &q))| {
            let grad = 2.0 * (gb - q);
            if b != 0.0 {
                (grad + lambda * b.signum()).abs()
            } else {
                (grad.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

fn kkt_limit(lambda: f64, q: &[f64]) -> f64 {
    let scale = 1.0 + q.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    (LASSO_KKT_TOL * lambda).max(1e-10 * scale)
}

/// Cyclic coordinate descent in covariance form, warm-started from `warm`.
///
/// Alternates full sweeps with sweeps over the current support. Once the
/// largest coordinate move drops below [`LASSO_TOL`] the KKT residual is
/// recomputed from scratch; if it is still too large the move tolerance is
/// tightened and descent continues.
pub fn lasso_gram(g: &DenseMatrix, q: &[f64], lambda: f64, warm: Option<&[f64]>) -> Result<LassoFit> {
    let p = q.len();
    if g.rows() != p || g.cols() != p {
        return Err(Error::Shape(format!("gram is {}x{}, q has {p}", g.rows(), g.cols())));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let mut beta = match warm {
        Some(w) if w.len() == p => w.to_vec(),
        Some(w) => return Err(Error::Shape(format!("warm start has {} entries for {p}", w.len()))),
        None => vec![0.0; p],
    };
    let gb = g.matvec(&beta);
    let mut r: Vec<f64> = q.iter().zip(&gb).map(|(q, v)| q - v).collect();
    let half = 0.5 * lambda;
    let limit = kkt_limit(lambda, q);
    let mut tol = LASSO_TOL;
    let mut sweeps = 0;

    let update = |j: usize, beta: &mut [f64], r: &mut [f64]| -> f64 {
        let gjj = g.get(j, j);
        if gjj <= 0.0 {
            return 0.0;
        }
        let z = r[j] + gjj * beta[j];
        let new = soft_threshold(z, half) / gjj;
        let d = new - beta[j];
        if d != 0.0 {
            for (rk, gk) in r.iter_mut().zip(g.row(j)) {
                *rk -= gk * d;
            }
            beta[j] = new;
        }
        d.abs()
    };

    loop {
        let mut change: f64 = 0.0;
        for j in 0..p {
            change = change.max(update(j, &mut beta, &mut r));
        }
        sweeps += 1;
        if change < tol {
            let gb = g.matvec(&beta);
            r.iter_mut().zip(q.iter().zip(&gb)).for_each(|(r, (q, v))| *r = q - v);
            let kkt = lasso_kkt_residual(g, q, &beta, lambda);
            if kkt <= limit {
                return Ok(LassoFit {
                    beta,
                    sweeps,
                    converged: true,
                    kkt_residual: kkt,
                });
            }
            tol *= 0.1;
            if tol < 1e-18 {
                return Ok(LassoFit {
                    beta,
                    sweeps,
                    converged: false,
                    kkt_residual: kkt,
                });
            }
            continue;
        }
        // Settle the current support before the next full sweep.
        let support: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
        while sweeps < LASSO_MAX_SWEEPS {
            let mut change: f64 = 0.0;
            for &j in &support {
                change = change.max(update(j, &mut beta, &mut r));
            }
            sweeps += 1;
            if change < tol {
                break;
            }
        }
        if sweeps >= LASSO_MAX_SWEEPS {
            let kkt = lasso_kkt_residual(g, q, &beta, lambda);
            return Ok(LassoFit {
                beta,
                sweeps,
                converged: false,
                kkt_residual: kkt,
            });
        }
    }
}

/// Lasso fit of `y` on the rows of `z` with full diagnostics.
pub fn lasso_row_fit(z: &DenseMatrix, y: &[f64], lambda: f64) -> Result<LassoFit> {
    let n = z.rows();
    if y.len() != n {
        return Err(Error::Shape(format!("design has {n} rows, response {}", y.len())));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty design".into()));
    }
    let g = z.gram().scale(1.0 / n as f64);
    let q: Vec<f64> = z.t_matvec(y).iter().map(|v| v / n as f64).collect();
    lasso_gram(&g, &q, lambda, None)
}

/// Minimizer of `(1/n) sum (y_i - b'z_i)^2 + lambda |b|_1`.
pub fn lasso_row(z: &DenseMatrix, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    Ok(lasso_row_fit(z, y, lambda)?.beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarMethod {
    Lasso,
    Dantzig,
    LassoPlain,
    DantzigPlain,
}

impl VarMethod {
    pub const ALL: [VarMethod; 4] = [Self::Lasso, Self::Dantzig, Self::LassoPlain, Self::DantzigPlain];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lasso => "lasso",
            Self::Dantzig => "dantzig",
            Self::LassoPlain => "lasso_plain",
            Self::DantzigPlain => "dantzig_plain",
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown method {name:?}")))
    }

    pub fn is_robust(self) -> bool {
        matches!(self, Self::Lasso | Self::Dantzig)
    }

    pub fn is_lasso(self) -> bool {
        matches!(self, Self::Lasso | Self::LassoPlain)
    }
}

/// Outcome of one row (Lasso) or column (Dantzig) subproblem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemDiag {
    pub index: usize,
    pub converged: bool,
    /// Coordinate sweeps or simplex pivots.
    pub iterations: usize,
    /// KKT residual (Lasso) or constraint residual `|Sigma_0 b - c|_inf`.
    pub residual: f64,
    /// The largest residual the certificate accepts.
    pub limit: f64,
}

impl SubproblemDiag {
    pub fn certified(&self) -> bool {
        self.converged && self.residual <= self.limit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarEstimate {
    pub a_hat: DenseMatrix,
    pub method: VarMethod,
    /// Truncation level; infinite for the plain methods.
    pub nu: f64,
    pub lambda: f64,
    pub diagnostics: Vec<SubproblemDiag>,
}

impl VarEstimate {
    /// Number of subproblems whose certificate failed.
    pub fn certificate_violations(&self) -> usize {
        self.diagnostics.iter().filter(|d| !d.certified()).count()
    }
}

fn check_sample(sample: &SeriesSample) -> Result<()> {
    if sample.n() < 2 || sample.p() < 1 {
        return Err(Error::InvalidInput(format!(
            "need observations X_0..X_n with n >= 2, got {} rows of dimension {}",
            sample.x.rows(),
            sample.p()
        )));
    }
    if !sample.x.is_finite() {
        return Err(Error::InvalidInput("series has non-finite entries".into()));
    }
    Ok(())
}

/// Normal equations of the row problems: `G = (1/n) sum X~_{i-1} X~_{i-1}'`
/// and `Q[j] = (1/n) sum X~_{i-1} X~_{ij}`, i.e. `Q[j]` is column `j` of the
/// lag-1 autocovariance.
struct LassoSystem {
    g: DenseMatrix,
    q: Vec<Vec<f64>>,
}

impl LassoSystem {
    fn new(xt: &DenseMatrix) -> Self {
        let (rows, p) = (xt.rows(), xt.cols());
        let n = rows - 1;
        let inv = 1.0 / n as f64;
        let mut g = DenseMatrix::zeros(p, p);
        let mut q = vec![vec![0.0; p]; p];
        for i in 1..rows {
            let prev = xt.row(i - 1);
            let cur = xt.row(i);
            for a in 0..p {
                let pa = prev[a];
                if pa == 0.0 {
                    continue;
                }
                let grow = g.row_mut(a);
                for (gb, pb) in grow.iter_mut().zip(prev) {
                    *gb += pa * pb;
                }
                for (j, cj) in cur.iter().enumerate() {
                    q[j][a] += pa * cj;
                }
            }
        }
        g = g.scale(inv);
        for qj in &mut q {
            qj.iter_mut().for_each(|v| *v *= inv);
        }
        Self { g, q }
    }

    fn lambda_max(&self) -> f64 {
        self.q
            .iter()
            .flat_map(|qj| qj.iter())
            .fold(0.0, |m: f64, v| m.max(2.0 * v.abs()))
    }

    /// Solves every row along a path of `lambda` values, warm-starting each
    /// row from its previous solution.
    fn path(&self, lambdas: &[f64]) -> Result<Vec<(DenseMatrix, Vec<SubproblemDiag>)>> {
        let p = self.g.rows();
        let mut out: Vec<(DenseMatrix, Vec<SubproblemDiag>)> = lambdas
            .iter()
            .map(|_| (DenseMatrix::zeros(p, p), Vec::with_capacity(p)))
            .collect();
        for (j, qj) in self.q.iter().enumerate() {
            let mut warm: Option<Vec<f64>> = None;
            for (k, &lambda) in lambdas.iter().enumerate() {
                let fit = lasso_gram(&self.g, qj, lambda, warm.as_deref())?;
                out[k].0.row_mut(j).copy_from_slice(&fit.beta);
                out[k].1.push(SubproblemDiag {
                    index: j,
                    converged: fit.converged,
                    iterations: fit.sweeps,
                    residual: fit.kkt_residual,
                    limit: kkt_limit(lambda, qj),
                });
                warm = Some(fit.beta);
            }
        }
        Ok(out)
    }
}

fn lasso_var(sample: &SeriesSample, nu: f64, lambda: f64, method: VarMethod) -> Result<VarEstimate> {
    check_sample(sample)?;
    let xt = truncate(sample, nu)?.x_tilde;
    let sys = LassoSystem::new(&xt);
    let (a_hat, diagnostics) = sys.path(&[lambda])?.pop().expect("one lambda");
    Ok(VarEstimate {
        a_hat,
        method,
        nu,
        lambda,
        diagnostics,
    })
}

/// Row-wise Lasso on the truncated sample `X_0..X_n`: row `j` of `A_hat`
/// regresses `X~_{ij}` on `X~_{i-1}` for `i = 1..n`.
pub fn robust_lasso_var(sample: &SeriesSample, nu: f64, lambda: f64) -> Result<VarEstimate> {
    lasso_var(sample, nu, lambda, VarMethod::Lasso)
}

/// The untruncated Lasso baseline.
pub fn plain_lasso_var(sample: &SeriesSample, lambda: f64) -> Result<VarEstimate> {
    lasso_var(sample, f64::INFINITY, lambda, VarMethod::LassoPlain)
}

/// `(1/n) sum_{i=1}^n X~_{i-k} X~_i'` for `k` in `{0, 1}`.
pub fn autocov_robust(sample: &SeriesSample, nu: f64, k: usize) -> Result<DenseMatrix> {
    if k > 1 {
        return Err(Error::InvalidParameter(format!("lag must be 0 or 1, got {k}")));
    }
    if sample.n() < 1 {
        return Err(Error::InvalidInput("need at least two observations".into()));
    }
    let xt = truncate(sample, nu)?.x_tilde;
    Ok(autocov(&xt, k))
}

fn autocov(xt: &DenseMatrix, k: usize) -> DenseMatrix {
    let (rows, p) = (xt.rows(), xt.cols());
    let n = rows - 1;
    let mut s = DenseMatrix::zeros(p, p);
    for i in 1..rows {
        let lag = xt.row(i - k);
        let cur = xt.row(i);
        for (a, &la) in lag.iter().enumerate() {
            if la == 0.0 {
                continue;
            }
            for (v, c) in s.row_mut(a).iter_mut().zip(cur) {
                *v += la * c;
            }
        }
    }
    s.scale(1.0 / n as f64)
}

/// One Dantzig column solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DantzigFit {
    pub beta: Vec<f64>,
    pub l1_norm: f64,
    /// `|Sigma_0 beta - c|_inf`, recomputed from the returned point.
    pub residual: f64,
    pub pivots: usize,
}

/// Column programs `min |b|_1 s.t. |Sigma_0 b - c|_inf <= lambda` sharing
/// one `Sigma_0`, written as an LP in `b+, b- >= 0`.
#[derive(Debug, Clone)]
pub struct DantzigSolver {
    sigma0: DenseMatrix,
    template: DualSimplex,
}

impl DantzigSolver {
    pub fn new(sigma0: &DenseMatrix) -> Result<Self> {
        if !sigma0.is_square() {
            return Err(Error::Shape(format!("Sigma_0 is {}x{}", sigma0.rows(), sigma0.cols())));
        }
        if !sigma0.is_finite() {
            return Err(Error::InvalidInput("Sigma_0 has non-finite entries".into()));
        }
        let p = sigma0.rows();
        // [ S  -S ]
        // [-S   S ]
        let a = DenseMatrix::from_fn(2 * p, 2 * p, |i, j| {
            let v = sigma0.get(i % p, j % p);
            if (i < p) == (j < p) {
                v
            } else {
                -v
            }
        });
        Ok(Self {
            sigma0: sigma0.clone(),
            template: DualSimplex::new(a, vec![1.0; 2 * p])?,
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma0.rows()
    }

    fn rhs(c: &[f64], lambda: f64) -> Vec<f64> {
        c.iter()
            .map(|v| v + lambda)
            .chain(c.iter().map(|v| lambda - v))
            .collect()
    }

    fn residual(&self, beta: &[f64], c: &[f64]) -> f64 {
        self.sigma0
            .matvec(beta)
            .iter()
            .zip(c)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
    }

    /// Smallest achievable `|Sigma_0 b - c|_inf`.
    pub fn min_residual(&self, c: &[f64]) -> Result<f64> {
        let p = self.dim();
        self.check_c(c)?;
        // variables (b+, b-, t): Sigma_0 b - t <= c, -Sigma_0 b - t <= -c
        let a = DenseMatrix::from_fn(2 * p, 2 * p + 1, |i, j| {
            if j == 2 * p {
                return -1.0;
            }
            let v = self.sigma0.get(i % p, j % p);
            if (i < p) == (j < p) {
                v
            } else {
                -v
            }
        });
        let mut cost = vec![0.0; 2 * p + 1];
        cost[2 * p] = 1.0;
        let mut lp = DualSimplex::new(a, cost)?;
        let rhs: Vec<f64> = c.iter().copied().chain(c.iter().map(|v| -v)).collect();
        match lp.solve(&rhs)? {
            LpOutcome::Optimal { x, .. } => {
                let beta: Vec<f64> = (0..p).map(|k| x[k] - x[p + k]).collect();
                Ok(self.residual(&beta, c))
            }
            LpOutcome::Infeasible { .. } => Err(Error::Solver("residual program reported infeasible".into())),
        }
    }

    fn check_c(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.dim() {
            return Err(Error::Shape(format!(
                "c has {} entries for p = {}",
                c.len(),
                self.dim()
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite target".into()));
        }
        Ok(())
    }

    /// Solves for each `lambda` in turn, reusing the basis. Descending
    /// order is fastest. Once a value is infeasible, so is every smaller
    /// one; those share the same error.
    pub fn path(&self, c: &[f64], lambdas: &[f64]) -> Result<Vec<Result<DantzigFit>>> {
        self.check_c(c)?;
        let p = self.dim();
        let mut lp = self.template.clone();
        let mut min_residual: Option<f64> = None;
        let mut out = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            if !(lambda >= 0.0) || !lambda.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "lambda must be finite and >= 0, got {lambda}"
                )));
            }
            if let Some(r) = min_residual {
                if lambda < r {
                    out.push(Err(Error::Infeasible {
                        lambda,
                        min_residual: r,
                    }));
                    continue;
                }
            }
            match lp.solve(&Self::rhs(c, lambda))? {
                LpOutcome::Optimal { x, pivots, .. } => {
                    let beta: Vec<f64> = (0..p).map(|k| x[k] - x[p + k]).collect();
                    let residual = self.residual(&beta, c);
                    if residual > lambda + DANTZIG_FEAS_TOL {
                        return Err(Error::Solver(format!(
                            "returned point violates the constraint: residual {residual} > lambda {lambda}"
                        )));
                    }
                    out.push(Ok(DantzigFit {
                        l1_norm: beta.iter().map(|v| v.abs()).sum(),
                        beta,
                        residual,
                        pivots,
                    }));
                }
                LpOutcome::Infeasible { .. } => {
                    let r = match min_residual {
                        Some(r) => r,
                        None => self.min_residual(c)?,
                    };
                    min_residual = Some(r);
                    out.push(Err(Error::Infeasible {
                        lambda,
                        min_residual: r,
                    }));
                }
            }
        }
        Ok(out)
    }

    pub fn solve(&self, c: &[f64], lambda: f64) -> Result<DantzigFit> {
        self.path(c, &[lambda])?.pop().expect("one lambda")
    }
}

/// `argmin |b|_1  s.t.  |Sigma_0 b - c|_inf <= lambda`.
pub fn dantzig_column(sigma0: &DenseMatrix, c: &[f64], lambda: f64) -> Result<Vec<f64>> {
    Ok(DantzigSolver::new(sigma0)?.solve(c, lambda)?.beta)
}

/// Lag-0 and lag-1 autocovariances of a truncated sample with the column
/// solver for them.
struct DantzigSystem {
    solver: DantzigSolver,
    sigma1: DenseMatrix,
}

impl DantzigSystem {
    fn new(xt: &DenseMatrix) -> Result<Self> {
        Ok(Self {
            solver: DantzigSolver::new(&autocov(xt, 0))?,
            sigma1: autocov(xt, 1),
        })
    }

    fn lambda_max(&self) -> f64 {
        self.sigma1.max_abs()
    }

    /// Per lambda: the estimate (already transposed to `A` orientation) or
    /// the first column error.
    fn path(&self, lambdas: &[f64]) -> Result<Vec<Result<(DenseMatrix, Vec<SubproblemDiag>)>>> {
        let p = self.solver.dim();
        let mut mats: Vec<Result<(DenseMatrix, Vec<SubproblemDiag>)>> = lambdas
            .iter()
            .map(|_| Ok((DenseMatrix::zeros(p, p), Vec::with_capacity(p))))
            .collect();
        for j in 0..p {
            let c = self.sigma1.column(j);
            let fits = self.solver.path(&c, lambdas)?;
            for ((slot, fit), &lambda) in mats.iter_mut().zip(fits).zip(lambdas) {
                let Ok((a_hat, diags)) = slot else { continue };
                match fit {
                    Ok(fit) => {
                        // column j of the program solution is row j of A_hat
                        a_hat.row_mut(j).copy_from_slice(&fit.beta);
                        diags.push(SubproblemDiag {
                            index: j,
                            converged: true,
                            iterations: fit.pivots,
                            residual: fit.residual,
                            limit: lambda + DANTZIG_FEAS_TOL,
                        });
                    }
                    Err(e) => *slot = Err(e),
                }
            }
        }
        Ok(mats)
    }
}

fn dantzig_var(sample: &SeriesSample, nu: f64, lambda: f64, method: VarMethod) -> Result<VarEstimate> {
    check_sample(sample)?;
    let xt = truncate(sample, nu)?.x_tilde;
    let sys = DantzigSystem::new(&xt)?;
    let (a_hat, diagnostics) = sys.path(&[lambda])?.pop().expect("one lambda")?;
    Ok(VarEstimate {
        a_hat,
        method,
        nu,
        lambda,
        diagnostics,
    })
}

/// Column-wise Dantzig estimator on the truncated autocovariances. Fails
/// with [`Error::Infeasible`] if any column program is infeasible.
pub fn robust_dantzig_var(sample: &SeriesSample, nu: f64, lambda: f64) -> Result<VarEstimate> {
    dantzig_var(sample, nu, lambda, VarMethod::Dantzig)
}

/// The untruncated Dantzig baseline.
pub fn plain_dantzig_var(sample: &SeriesSample, lambda: f64) -> Result<VarEstimate> {
    dantzig_var(sample, f64::INFINITY, lambda, VarMethod::DantzigPlain)
}

/// Dispatches on `method`; `nu` is ignored by the plain methods.
pub fn fit_var(method: VarMethod, sample: &SeriesSample, nu: f64, lambda: f64) -> Result<VarEstimate> {
    match method {
        VarMethod::Lasso => robust_lasso_var(sample, nu, lambda),
        VarMethod::Dantzig => robust_dantzig_var(sample, nu, lambda),
        VarMethod::LassoPlain => plain_lasso_var(sample, lambda),
        VarMethod::DantzigPlain => plain_dantzig_var(sample, lambda),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimationErrors {
    pub linf_induced: f64,
    pub l1_induced: f64,
    pub frobenius: f64,
    pub max_abs: f64,
}

impl EstimationErrors {
    pub const NAMES: [&'static str; 4] = ["linf", "l1", "fro", "max"];

    /// Values in the order of [`Self::NAMES`].
    pub fn values(&self) -> [f64; 4] {
        [self.linf_induced, self.l1_induced, self.frobenius, self.max_abs]
    }
}

pub fn estimation_errors(a_hat: &DenseMatrix, a: &DenseMatrix) -> Result<EstimationErrors> {
    let n = linalg::matrix_norms(&a_hat.sub(a)?)?;
    Ok(EstimationErrors {
        linf_induced: n.linf_induced,
        l1_induced: n.l1_induced,
        frobenius: n.frobenius,
        max_abs: n.max_abs,
    })
}

/// Shared inputs of the error-rate evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub mu_q: f64,
    pub gamma: f64,
    pub tau: f64,
    pub n: usize,
    pub p: usize,
    /// Moment order, at least 2.
    pub q: f64,
    pub c: f64,
}

impl RateInputs {
    /// `mu_q gamma tau (log p / n)^(1/2 - 1/(2q - 2))`, without `C`.
    fn core(&self) -> Result<f64> {
        if !(self.q >= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "moment order must be >= 2, got {}",
                self.q
            )));
        }
        if self.n == 0 || self.p < 2 {
            return Err(Error::InvalidParameter("rates need n >= 1 and p >= 2".into()));
        }
        let exponent = 0.5 - 1.0 / (2.0 * self.q - 2.0);
        let ratio = (self.p as f64).ln() / self.n as f64;
        Ok(self.mu_q * self.gamma * self.tau * ratio.powf(exponent))
    }
}

/// Lasso bound on `|A_hat - A|_inf`: `C mu_q gamma tau (|A|_inf + 1) s r`.
pub fn lasso_linf_rate(inp: &RateInputs, a_linf: f64, s: f64) -> Result<f64> {
    Ok(inp.c * (inp.core()? * (a_linf + 1.0) * s))
}

/// Lasso bound on `|A_hat - A|_F`: `C mu_q gamma tau (|A|_inf + 1) sqrt(S) r`.
pub fn lasso_frobenius_rate(inp: &RateInputs, a_linf: f64, total_support: f64) -> Result<f64> {
    Ok(inp.c * (inp.core()? * (a_linf + 1.0) * total_support.sqrt()))
}

/// Dantzig bound on `|A_hat - A|_max`:
/// `C mu_q gamma tau |Sigma_0^-1|_1 (|A|_1 + 1) r`.
pub fn dantzig_max_rate(inp: &RateInputs, sigma0_inv_l1: f64, a_l1: f64) -> Result<f64> {
    Ok(inp.c * (inp.core()? * sigma0_inv_l1 * (a_l1 + 1.0)))
}

/// Dantzig bound on `|A_hat - A|_1`: the max-norm rate times `s*`.
pub fn dantzig_l1_rate(inp: &RateInputs, sigma0_inv_l1: f64, a_l1: f64, s_star: f64) -> Result<f64> {
    Ok(inp.c * (inp.core()? * sigma0_inv_l1 * (a_l1 + 1.0) * s_star))
}

/// Mean squared one-step prediction error `(1/m) sum |H_t - A_hat H_{t-1}|^2`
/// over the consecutive pairs of `holdout`.
pub fn prediction_error(a_hat: &DenseMatrix, holdout: &SeriesSample) -> Result<f64> {
    let h = &holdout.x;
    if h.cols() != a_hat.cols() || !a_hat.is_square() {
        return Err(Error::Shape(format!(
            "estimate is {}x{}, holdout has dimension {}",
            a_hat.rows(),
            a_hat.cols(),
            h.cols()
        )));
    }
    let m = holdout.n();
    if m == 0 {
        return Err(Error::InvalidInput("holdout needs at least two observations".into()));
    }
    let mut total = 0.0;
    for t in 1..h.rows() {
        let pred = a_hat.matvec(h.row(t - 1));
        total += h.row(t).iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / m as f64)
}

/// Truncation levels searched by [`tune_var`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuGrid {
    /// Multiples of [`nu_center`] computed on the training block.
    Auto {
        multipliers: Vec<f64>,
    },
    Values(Vec<f64>),
}

impl Default for NuGrid {
    fn default() -> Self {
        Self::Auto {
            multipliers: vec![0.5, 0.5f64.sqrt(), 1.0, 2f64.sqrt(), 2.0],
        }
    }
}

/// Penalty levels searched by [`tune_var`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSpec {
    /// `points` values `lambda_max * 10^(-decades * k / points)`, `k = 1..points`,
    /// where `lambda_max` is the smallest value giving the zero estimate.
    Auto {
        points: usize,
        decades: f64,
    },
    Values(Vec<f64>),
}

impl Default for LambdaSpec {
    fn default() -> Self {
        Self::Auto {
            points: 8,
            decades: 2.0,
        }
    }
}

impl LambdaSpec {
    /// Resolved values in decreasing order.
    pub fn values(&self, lambda_max: f64) -> Result<Vec<f64>> {
        let mut v = match self {
            Self::Auto { points, decades } => {
                if *points == 0 || !(*decades > 0.0) {
                    return Err(Error::Config("lambda grid needs points >= 1 and decades > 0".into()));
                }
                (1..=*points)
                    .map(|k| lambda_max * 10f64.powf(-decades * k as f64 / *points as f64))
                    .collect()
            }
            Self::Values(v) => v.clone(),
        };
        if v.is_empty() || v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Config("lambda grid must be non-empty, finite and >= 0".into()));
        }
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup();
        Ok(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VarGrid {
    pub nu: NuGrid,
    pub lambda: LambdaSpec,
}

/// Pilot truncation level `sigma_hat (n / ln p)^(1/6)`: the MAD scale of
/// the series times the growth rate that a fourth-moment bound suggests.
pub fn nu_center(train: &SeriesSample) -> f64 {
    let sigma = pilot_scale(&train.x);
    let sigma = if sigma > 0.0 { sigma } else { 1.0 };
    sigma * (train.n() as f64 / log_dim(train.p())).powf(1.0 / 6.0)
}

impl NuGrid {
    /// Resolved values in increasing order.
    pub fn values(&self, train: &SeriesSample) -> Result<Vec<f64>> {
        let mut v = match self {
            Self::Auto { multipliers } => {
                let c = nu_center(train);
                multipliers.iter().map(|m| m * c).collect()
            }
            Self::Values(v) => v.clone(),
        };
        if v.is_empty() || v.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Config("nu grid must be non-empty and positive".into()));
        }
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarTuneResult {
    pub estimate: VarEstimate,
    pub holdout_error: f64,
    /// Grid points with a usable estimate.
    pub evaluated: usize,
    /// Grid points skipped as infeasible or non-converged.
    pub skipped: usize,
    /// Subproblem certificate failures over all grid points.
    pub certificate_violations: usize,
}

/// Grid search over `(nu, lambda)` minimizing one-step prediction error on
/// `holdout`. The fit uses `train` (`X_0..X_n`); plain methods search
/// `lambda` only. Ties go to the smaller `nu`, then the larger `lambda`.
pub fn tune_var(
    method: VarMethod,
    train: &SeriesSample,
    holdout: &SeriesSample,
    grid: &VarGrid,
) -> Result<VarTuneResult> {
    check_sample(train)?;
    if holdout.p() != train.p() {
        return Err(Error::Shape(format!(
            "holdout dimension {} differs from {}",
            holdout.p(),
            train.p()
        )));
    }
    let nus = if method.is_robust() {
        grid.nu.values(train)?
    } else {
        vec![f64::INFINITY]
    };
    let mut best: Option<(f64, VarEstimate)> = None;
    let (mut evaluated, mut skipped, mut violations) = (0, 0, 0);
    let mut consider = |err: f64, est: VarEstimate| {
        if best.as_ref().is_none_or(|(b, _)| err < *b) {
            best = Some((err, est));
        }
    };
    for &nu in &nus {
        let xt = truncate(train, nu)?.x_tilde;
        let results: Vec<Result<(DenseMatrix, Vec<SubproblemDiag>)>>;
        let lambdas;
        if method.is_lasso() {
            let sys = LassoSystem::new(&xt);
            lambdas = grid.lambda.values(sys.lambda_max())?;
            results = sys.path(&lambdas)?.into_iter().map(Ok).collect();
        } else {
            let sys = DantzigSystem::new(&xt)?;
            lambdas = grid.lambda.values(sys.lambda_max())?;
            results = sys.path(&lambdas)?;
        }
        for (res, &lambda) in results.into_iter().zip(&lambdas) {
            let Ok((a_hat, diagnostics)) = res else {
                skipped += 1;
                continue;
            };
            let est = VarEstimate {
                a_hat,
                method,
                nu,
                lambda,
                diagnostics,
            };
            let bad = est.certificate_violations();
            violations += bad;
            if bad > 0 {
                skipped += 1;
                continue;
            }
            evaluated += 1;
            let err = prediction_error(&est.a_hat, holdout)?;
            consider(err, est);
        }
    }
    let (holdout_error, estimate) = best.ok_or_else(|| {
        Error::TuningFailed(format!(
            "{}: no grid point produced a certified estimate",
            method.name()
        ))
    })?;
    Ok(VarTuneResult {
        estimate,
        holdout_error,
        evaluated,
        skipped,
        certificate_violations: violations,
    })
}
