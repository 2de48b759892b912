//! Bernstein-type tail bounds for sums of bounded Lipschitz functionals of
//! a dependent linear process, and Monte Carlo checks that they hold.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, DependenceProfile};
use crate::mean::{huber_mean_vector, mean_error_bound, NuChoice};
use crate::sim::{default_burn_in, replication_rng, simulate_var, InnovationDist};

/// Inputs of the dependent Bernstein bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub rho0: f64,
    pub tau: f64,
    pub gamma: f64,
    /// Innovation standard deviation.
    pub sigma: f64,
    /// Uniform bound on the functional.
    pub m: f64,
    pub n: usize,
}

/// `(C1, C2)` for a decay level `rho0`:
/// `C1 = 16 e^2 / (sqrt(2 pi) rho0^4 ln(1/rho0)^3)`, `C2 = 8 e / ln(1/rho0)`.
pub fn bernstein_constants(rho0: f64) -> Result<(f64, f64)> {
    if !(rho0 > 0.0 && rho0 < 1.0) {
        return Err(Error::InvalidParameter(format!("rho0 = {rho0} not in (0,1)")));
    }
    let e = std::f64::consts::E;
    let l = (1.0 / rho0).ln();
    let c1 = 16.0 * e * e / ((2.0 * std::f64::consts::PI).sqrt() * rho0.powi(4) * l.powi(3));
    let c2 = 8.0 * e / l;
    Ok((c1, c2))
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        bernstein_constants(self.rho0)?;
        if !(self.tau >= 1.0) || !(self.gamma >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need tau >= 1 and gamma >= 1, got {} and {}",
                self.tau, self.gamma
            )));
        }
        if !(self.sigma > 0.0) || !(self.m > 0.0) || self.n == 0 {
            return Err(Error::InvalidParameter("need sigma > 0, M > 0, n >= 1".into()));
        }
        Ok(())
    }

    pub fn c1(&self) -> f64 {
        bernstein_constants(self.rho0).map(|c| c.0).unwrap_or(f64::NAN)
    }

    pub fn c2(&self) -> f64 {
        bernstein_constants(self.rho0).map(|c| c.1).unwrap_or(f64::NAN)
    }

    /// Sub-Gaussian denominator `C1 n sigma^2 tau^2 gamma^2`.
    fn variance_term(&self) -> f64 {
        self.c1() * self.n as f64 * (self.sigma * self.tau * self.gamma).powi(2)
    }

    /// Sub-exponential slope `C2 tau M`.
    fn scale_term(&self) -> f64 {
        self.c2() * self.tau * self.m
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::InvalidParameter(format!("x must be >= 0, got {x}")));
    }
    Ok(())
}

/// `2 exp{-x^2 / (C1 n sigma^2 tau^2 gamma^2 + C2 tau M x)}`. May exceed 1.
pub fn bernstein_bound(x: f64, params: &BoundParams) -> Result<f64> {
    check_x(x)?;
    params.validate()?;
    if x == 0.0 {
        return Ok(2.0);
    }
    Ok(2.0 * (-x * x / (params.variance_term() + params.scale_term() * x)).exp())
}

/// [`bernstein_bound`] capped at 1.
pub fn bernstein_bound_clipped(x: f64, params: &BoundParams) -> Result<f64> {
    Ok(bernstein_bound(x, params)?.min(1.0))
}

/// `2 exp{-x^2 / (C3 n theta^2 tau^2 gamma^2 + C4 gamma tau x)}` for
/// innovations with a finite exponential moment. No closed form for
/// `C3`, `C4` is known, so they are inputs.
pub fn bernstein_bound_expmoment(x: f64, n: usize, theta: f64, gamma: f64, tau: f64, c3: f64, c4: f64) -> Result<f64> {
    check_x(x)?;
    if !(c3 > 0.0 && c4 > 0.0 && theta > 0.0 && gamma > 0.0 && tau > 0.0) || n == 0 {
        return Err(Error::InvalidParameter("constants and scales must be positive".into()));
    }
    if x == 0.0 {
        return Ok(2.0);
    }
    let denom = c3 * n as f64 * (theta * tau * gamma).powi(2) + c4 * gamma * tau * x;
    Ok(2.0 * (-x * x / denom).exp())
}

/// Heuristic defaults for the exponential-moment constants: `(C1, C2)`.
pub fn default_expmoment_constants(rho0: f64) -> Result<(f64, f64)> {
    bernstein_constants(rho0)
}

/// Classical Bernstein bound for i.i.d. summands: `exp{-x^2 / (2 n sigma^2 + 2 M x / 3)}`.
pub fn classical_bernstein(x: f64, n: usize, sigma: f64, m: f64) -> f64 {
    (-x * x / (2.0 * n as f64 * sigma * sigma + 2.0 * m * x / 3.0)).exp()
}

/// `G(x) = sum_j a_j clip(x_j, M)` with `|a|_1 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTransform {
    pub a: Vec<f64>,
    pub clip: f64,
}

impl LipschitzTransform {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(x)
            .map(|(a, v)| a * crate::mean::clip(*v, self.clip))
            .sum()
    }

    /// Weights `g_j = |a_j|` of the Lipschitz condition.
    pub fn lipschitz_weights(&self) -> Vec<f64> {
        self.a.iter().map(|v| v.abs()).collect()
    }

    /// Uniform bound `M`.
    pub fn bound(&self) -> f64 {
        self.clip
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }
}

pub fn clipped_linear_transform(a: &[f64], m: f64) -> Result<LipschitzTransform> {
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("clip level must be positive, got {m}")));
    }
    let l1: f64 = a.iter().map(|v| v.abs()).sum();
    if a.is_empty() || !((l1 - 1.0).abs() <= 1e-12) {
        return Err(Error::InvalidWeights(format!("|a|_1 = {l1}, expected 1")));
    }
    Ok(LipschitzTransform { a: a.to_vec(), clip: m })
}

/// A stationary VAR(1) with i.i.d. innovations; `A = 0` is the i.i.d. case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub a: DenseMatrix,
    pub innovation: InnovationDist,
    pub rho0: f64,
    pub label: String,
}

impl TailModel {
    pub fn iid(p: usize, innovation: InnovationDist) -> Self {
        Self {
            a: DenseMatrix::zeros(p, p),
            innovation,
            rho0: 0.5,
            label: "iid".into(),
        }
    }

    pub fn ar1(coef: f64, innovation: InnovationDist) -> Self {
        Self {
            a: DenseMatrix::from_diag(&[coef]),
            innovation,
            rho0: 0.5,
            label: format!("ar1({coef})"),
        }
    }

    pub fn profile(&self) -> Result<DependenceProfile> {
        linalg::dependence_profile(&self.a, self.rho0, 10_000)
    }
}

/// Streams `X_t = A X_{t-1} + eps_t` and reports `G(X_t)` for each step.
fn run_chain<R: Rng + ?Sized>(
    model: &TailModel,
    g: &LipschitzTransform,
    burn_in: usize,
    len: usize,
    rng: &mut R,
    mut visit: impl FnMut(f64),
) -> Result<()> {
    let p = model.a.rows();
    let sampler = model.innovation.sampler()?;
    let mut state = vec![0.0; p];
    let mut next = vec![0.0; p];
    let mut eps = vec![0.0; p];
    for step in 0..burn_in + len {
        sampler.fill(rng, &mut eps);
        for (i, nx) in next.iter_mut().enumerate() {
            *nx = linalg::dot(model.a.row(i), &state) + eps[i];
        }
        std::mem::swap(&mut state, &mut next);
        if step >= burn_in {
            visit(g.eval(&state));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub x: f64,
    pub empirical: f64,
    /// Clipped dependent Bernstein bound.
    pub bound: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub label: String,
    pub params: BoundParams,
    pub mean_estimate: f64,
    pub mean_stderr: f64,
    pub reps: usize,
    pub rows: Vec<TailRow>,
}

/// Default grid `{0.5, 1, ..., 5} * sqrt(n sigma^2) * gamma * tau`.
pub fn default_x_grid(params: &BoundParams) -> Vec<f64> {
    let unit = (params.n as f64).sqrt() * params.sigma * params.gamma * params.tau;
    (1..=10).map(|k| 0.5 * k as f64 * unit).collect()
}

/// Bound parameters for `n`-term sums of `g` under `model`.
pub fn bound_params(model: &TailModel, g: &LipschitzTransform, n: usize) -> Result<BoundParams> {
    let prof = model.profile()?;
    let params = BoundParams {
        rho0: model.rho0,
        tau: prof.tau as f64,
        gamma: prof.gamma.max(1.0),
        sigma: model.innovation.variance().sqrt(),
        m: g.bound(),
        n,
    };
    params.validate()?;
    Ok(params)
}

/// Survival function of `S = sum_{i=1}^n (G(X_i) - E G)` at each grid point.
///
/// `E G` comes from one stationary pre-run of `10^5 tau` steps; its batch-means
/// standard error, propagated through the local slope of the empirical
/// survival function, is added in quadrature to the binomial error.
pub fn empirical_tail<R: RngCore + ?Sized>(
    model: &TailModel,
    g: &LipschitzTransform,
    n: usize,
    x_grid: &[f64],
    reps: usize,
    rng: &mut R,
) -> Result<TailTable> {
    if g.dim() != model.a.rows() {
        return Err(Error::Shape(format!(
            "transform has {} weights for a {}-dimensional model",
            g.dim(),
            model.a.rows()
        )));
    }
    if reps < 1000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1000 replications, got {reps}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if x_grid.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::InvalidParameter("grid points must be >= 0".into()));
    }
    let params = bound_params(model, g, n)?;
    let burn_in = default_burn_in(&model.a)?;

    let pre_len = 100_000 * params.tau as usize;
    let batch = 1000.max(20 * params.tau as usize);
    let mut batch_means = Vec::with_capacity(pre_len / batch + 1);
    let (mut acc, mut count) = (0.0, 0);
    run_chain(model, g, burn_in, pre_len, rng, |v| {
        acc += v;
        count += 1;
        if count == batch {
            batch_means.push(acc / batch as f64);
            acc = 0.0;
            count = 0;
        }
    })?;
    let nb = batch_means.len() as f64;
    let mean_estimate = batch_means.iter().sum::<f64>() / nb;
    let var_b = batch_means.iter().map(|b| (b - mean_estimate).powi(2)).sum::<f64>() / (nb - 1.0);
    let mean_stderr = (var_b / nb).sqrt();

    let mut sums = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut s = 0.0;
        run_chain(model, g, burn_in, n, rng, |v| s += v - mean_estimate)?;
        sums.push(s);
    }
    let mut sorted_x: Vec<f64> = x_grid.to_vec();
    sorted_x.sort_by(|a, b| a.total_cmp(b));
    let surv: Vec<f64> = sorted_x
        .iter()
        .map(|&x| sums.iter().filter(|&&s| s >= x).count() as f64 / reps as f64)
        .collect();
    let shift = n as f64 * mean_stderr;
    let mut rows = Vec::with_capacity(sorted_x.len());
    for (k, &x) in sorted_x.iter().enumerate() {
        let p = surv[k];
        let slope = local_slope(&sorted_x, &surv, k);
        let stderr = (p * (1.0 - p) / reps as f64 + (slope * shift).powi(2)).sqrt();
        rows.push(TailRow {
            x,
            empirical: p,
            bound: bernstein_bound_clipped(x, &params)?,
            stderr,
        });
    }
    Ok(TailTable {
        label: model.label.clone(),
        params,
        mean_estimate,
        mean_stderr,
        reps,
        rows,
    })
}

/// Finite-difference magnitude of the survival slope at grid index `k`.
fn local_slope(x: &[f64], f: &[f64], k: usize) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let (lo, hi) = if k == 0 {
        (0, 1)
    } else if k + 1 == x.len() {
        (k - 1, k)
    } else {
        (k - 1, k + 1)
    };
    let dx = x[hi] - x[lo];
    if dx > 0.0 {
        ((f[hi] - f[lo]) / dx).abs()
    } else {
        0.0
    }
}

/// Fails on the first grid point where the empirical tail exceeds the
/// clipped bound by more than three standard errors.
pub fn check_domination(table: &TailTable) -> Result<()> {
    for r in &table.rows {
        if r.empirical > r.bound + 3.0 * r.stderr {
            return Err(Error::BoundViolated {
                design: table.label.clone(),
                x: r.x,
                empirical: r.empirical,
                bound: r.bound,
                stderr: r.stderr,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCheckRow {
    pub n: usize,
    /// Average of `|mu_hat - mu|_inf` over replications.
    pub mean_error: f64,
    pub sd: f64,
    /// `C (gamma + mu2) tau sqrt(ln p / n)`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCheck {
    pub p: usize,
    pub reps: usize,
    pub rows: Vec<MeanCheckRow>,
    /// Least-squares slope of log mean error on log n.
    pub slope: f64,
}

/// Robust-mean error against sample size for i.i.d. standardized `t(5)`
/// coordinates (true mean zero). Replication `r` at the `k`-th sample size
/// uses stream `base_seed + k * reps + r`.
pub fn mean_bound_check(n_list: &[usize], p: usize, reps: usize, base_seed: u64, c: f64) -> Result<MeanCheck> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] < 2 {
        return Err(Error::InvalidParameter(
            "n_list must be increasing with at least two sizes >= 2".into(),
        ));
    }
    if reps == 0 || p == 0 {
        return Err(Error::InvalidParameter("need reps >= 1 and p >= 1".into()));
    }
    let innov = InnovationDist::standard_t5();
    let a = DenseMatrix::zeros(p, p);
    let prof = linalg::dependence_profile(&a, 0.5, 10)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let mut errs = Vec::with_capacity(reps);
        for r in 0..reps {
            let mut rng = replication_rng(base_seed, (k * reps + r) as u64);
            // n observations X_1..X_n
            let x = simulate_var(&a, n - 1, &innov, 0, &mut rng)?;
            let est = huber_mean_vector(&x, NuChoice::default())?;
            errs.push(est.mu_hat.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
        }
        let mean = errs.iter().sum::<f64>() / reps as f64;
        let sd = if reps > 1 {
            (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
        } else {
            0.0
        };
        rows.push(MeanCheckRow {
            n,
            mean_error: mean,
            sd,
            bound: mean_error_bound(n, p.max(2) as f64, prof.gamma, 1.0, prof.tau as f64, c),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_error.ln()).collect();
    Ok(MeanCheck {
        p,
        reps,
        slope: ols_slope(&xs, &ys),
        rows,
    })
}

pub(crate) fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SimRng;
    use rand::SeedableRng;

    fn params() -> BoundParams {
        BoundParams {
            rho0: 0.5,
            tau: 1.0,
            gamma: 1.0,
            sigma: 1.0,
            m: 1.0,
            n: 100,
        }
    }

    #[test]
    fn constants_at_half() {
        let (c1, c2) = bernstein_constants(0.5).unwrap();
        // 16 e^2 / (sqrt(2 pi) / 16 * ln(2)^3) and 8 e / ln 2
        let e = std::f64::consts::E;
        let l = std::f64::consts::LN_2;
        assert!((c1 - 256.0 * e * e / ((2.0 * std::f64::consts::PI).sqrt() * l * l * l)).abs() < 1e-9);
        assert!((c2 - 31.37).abs() < 0.01);
        assert!(bernstein_constants(1.0).is_err());
    }

    #[test]
    fn bound_shape() {
        let p = params();
        assert_eq!(bernstein_bound(0.0, &p).unwrap(), 2.0);
        assert_eq!(bernstein_bound_clipped(0.0, &p).unwrap(), 1.0);
        let mut prev = 2.0;
        for k in 1..50 {
            let b = bernstein_bound(k as f64 * 50.0, &p).unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(bernstein_bound(-1.0, &p).is_err());
    }

    #[test]
    fn expmoment_congruence() {
        let p = params();
        let x = 300.0;
        let a = bernstein_bound(x, &p).unwrap();
        let b = bernstein_bound_expmoment(x, p.n, p.sigma, 1.0, 1.0, p.c1(), p.c2() * p.m).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert_eq!(
            bernstein_bound_expmoment(0.0, 10, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(),
            2.0
        );
    }

    #[test]
    fn transform_examples() {
        let g = clipped_linear_transform(&[1.0], 2.0).unwrap();
        assert_eq!(g.eval(&[3.0]), 2.0);
        let u = clipped_linear_transform(&[0.25; 4], 1.0).unwrap();
        assert_eq!(u.eval(&[0.0; 4]), 0.0);
        assert!(clipped_linear_transform(&[0.5, 0.4], 1.0).is_err());
    }

    #[test]
    fn zero_functional_has_no_tail() {
        let model = TailModel::iid(1, InnovationDist::Gaussian { sigma: 1.0 });
        // zero weights make G identically zero
        let g = LipschitzTransform {
            a: vec![0.0],
            clip: 1.0,
        };
        let mut rng = SimRng::seed_from_u64(1);
        let t = empirical_tail(&model, &g, 10, &[0.1, 1.0], 1000, &mut rng).unwrap();
        assert!(t.rows.iter().all(|r| r.empirical == 0.0));
    }
}
