//! Simulators for heavy-tailed linear processes.
//!
//! All generators take an explicit random stream. The crate-wide stream is
//! [`SimRng`] (ChaCha8, a counter-based generator); replication `r` of an
//! experiment with base seed `s` uses `SimRng::seed_from_u64(s + r)`.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, StudentT, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, DependenceProfile};

/// Random stream used by every simulator.
pub type SimRng = ChaCha8Rng;

/// Stream for replication `index` of an experiment seeded with `base_seed`.
pub fn replication_rng(base_seed: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(base_seed.wrapping_add(index))
}

/// `floor(ln p)`, the default sparsity level of the VAR designs.
pub fn default_sparsity(p: usize) -> usize {
    (p as f64).ln().floor().max(0.0) as usize
}

/// Distribution of the i.i.d. innovation coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationDist {
    Gaussian {
        sigma: f64,
    },
    /// Student t scaled by `sqrt((df - 2) / df)` to unit variance.
    StudentTStandardized {
        df: f64,
    },
    /// Plain Student t (variance `df / (df - 2)`).
    StudentT {
        df: f64,
    },
}

impl InnovationDist {
    pub fn standard_t5() -> Self {
        Self::StudentTStandardized { df: 5.0 }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Self::Gaussian { sigma } => sigma * sigma,
            Self::StudentTStandardized { .. } => 1.0,
            Self::StudentT { df } => df / (df - 2.0),
        }
    }

    pub fn sampler(&self) -> Result<InnovationSampler> {
        match *self {
            Self::Gaussian { sigma } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParameter(format!("gaussian sigma {sigma}")));
                }
                Ok(InnovationSampler::Gaussian(sigma))
            }
            Self::StudentTStandardized { df } | Self::StudentT { df } => {
                if !(df > 2.0) {
                    return Err(Error::InvalidParameter(format!("student t needs df > 2, got {df}")));
                }
                let t = StudentT::new(df).map_err(|e| Error::InvalidParameter(format!("student t: {e}")))?;
                let scale = if matches!(self, Self::StudentTStandardized { .. }) {
                    ((df - 2.0) / df).sqrt()
                } else {
                    1.0
                };
                Ok(InnovationSampler::StudentT(t, scale))
            }
        }
    }
}

/// A ready-to-draw innovation distribution.
#[derive(Debug, Clone, Copy)]
pub enum InnovationSampler {
    Gaussian(f64),
    StudentT(StudentT<f64>, f64),
}

impl InnovationSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian(sigma) => {
                let z: f64 = rng.sample(StandardNormal);
                sigma * z
            }
            Self::StudentT(t, scale) => scale * t.sample(rng),
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out {
            *v = self.draw(rng);
        }
    }
}

/// Transition-matrix recipes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignKind {
    /// `a_ij = lambda^|i-j|` for `|i-j| <= s`.
    Banded { lambda: f64, s: Option<usize> },
    /// Diagonal blocks of size `block`, each an [`DesignKind::ExampleShift`]
    /// block with bandwidth `shift` and its own `lambda_i ~ U(-0.8, 0.8)`.
    BlockDiag { block: Option<usize>, shift: usize },
    /// `a_ij = lambda^|i-j|`.
    Toeplitz { lambda: f64 },
    /// Diagonal `U(-0.8, 0.8)` plus `s^2` off-diagonal `N(0,1)` entries on a
    /// uniformly random support.
    RandomSparse { s: Option<usize> },
    /// Upper shift design `a_ij = lambda^(j-i+1)` for `0 <= j-i <= shift-1`.
    ExampleShift { lambda: f64, shift: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarDesign {
    pub kind: DesignKind,
    /// Divide by `2 * spectral_radius` so the result has radius 0.5.
    pub stabilize: bool,
}

impl VarDesign {
    pub fn banded() -> Self {
        Self {
            kind: DesignKind::Banded { lambda: 0.5, s: None },
            stabilize: true,
        }
    }

    pub fn block_diag() -> Self {
        Self {
            kind: DesignKind::BlockDiag { block: None, shift: 2 },
            stabilize: false,
        }
    }

    pub fn toeplitz() -> Self {
        Self {
            kind: DesignKind::Toeplitz { lambda: 0.5 },
            stabilize: true,
        }
    }

    pub fn random_sparse() -> Self {
        Self {
            kind: DesignKind::RandomSparse { s: None },
            stabilize: true,
        }
    }

    pub fn example_shift(lambda: f64, shift: usize) -> Self {
        Self {
            kind: DesignKind::ExampleShift { lambda, shift },
            stabilize: false,
        }
    }

    /// Short name used in reports and on the command line.
    pub fn name(&self) -> &'static str {
        match self.kind {
            DesignKind::Banded { .. } => "banded",
            DesignKind::BlockDiag { .. } => "block",
            DesignKind::Toeplitz { .. } => "toeplitz",
            DesignKind::RandomSparse { .. } => "random",
            DesignKind::ExampleShift { .. } => "shift",
        }
    }

    /// The four simulation-study designs by name (`banded`, `block`,
    /// `toeplitz`, `random`).
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "banded" => Ok(Self::banded()),
            "block" | "block_diag" => Ok(Self::block_diag()),
            "toeplitz" => Ok(Self::toeplitz()),
            "random" | "random_sparse" => Ok(Self::random_sparse()),
            other => Err(Error::InvalidDesign(format!("unknown design '{other}'"))),
        }
    }

    /// Whether building this design consumes random draws.
    pub fn is_random(&self) -> bool {
        matches!(
            self.kind,
            DesignKind::BlockDiag { .. } | DesignKind::RandomSparse { .. }
        )
    }

    /// Sparsity parameter used for `p`.
    pub fn sparsity(&self, p: usize) -> usize {
        match self.kind {
            DesignKind::Banded { s, .. } | DesignKind::RandomSparse { s } => s.unwrap_or_else(|| default_sparsity(p)),
            DesignKind::BlockDiag { block, .. } => block.unwrap_or_else(|| default_sparsity(p)),
            DesignKind::Toeplitz { .. } => p,
            DesignKind::ExampleShift { shift, .. } => shift,
        }
    }
}

fn shift_block(size: usize, lambda: f64, shift: usize) -> DenseMatrix {
    DenseMatrix::from_fn(size, size, |i, j| {
        if j >= i && j - i < shift {
            lambda.powi((j - i + 1) as i32)
        } else {
            0.0
        }
    })
}

/// Materializes a design for dimension `p`.
pub fn build_design<R: Rng + ?Sized>(design: &VarDesign, p: usize, rng: &mut R) -> Result<DenseMatrix> {
    if p < 2 {
        return Err(Error::InvalidDesign(format!("p = {p} < 2")));
    }
    let raw = match design.kind {
        DesignKind::Banded { lambda, s } => {
            let s = s.unwrap_or_else(|| default_sparsity(p));
            if s >= p {
                return Err(Error::InvalidDesign(format!("band width {s} >= p = {p}")));
            }
            DenseMatrix::from_fn(p, p, |i, j| {
                let d = i.abs_diff(j);
                if d <= s {
                    lambda.powi(d as i32)
                } else {
                    0.0
                }
            })
        }
        DesignKind::Toeplitz { lambda } => DenseMatrix::from_fn(p, p, |i, j| lambda.powi(i.abs_diff(j) as i32)),
        DesignKind::ExampleShift { lambda, shift } => {
            if shift == 0 || shift > p {
                return Err(Error::InvalidDesign(format!("shift {shift} not in 1..={p}")));
            }
            shift_block(p, lambda, shift)
        }
        DesignKind::BlockDiag { block, shift } => {
            let size = block.unwrap_or_else(|| default_sparsity(p)).max(1);
            if shift == 0 {
                return Err(Error::InvalidDesign("block shift must be >= 1".into()));
            }
            let unif = Uniform::new(-0.8, 0.8).expect("valid range");
            let mut a = DenseMatrix::zeros(p, p);
            let mut start = 0;
            while start < p {
                // The last block is truncated to the remainder.
                let len = size.min(p - start);
                let block = shift_block(len, unif.sample(rng), shift.min(len));
                for i in 0..len {
                    for j in 0..len {
                        a.set(start + i, start + j, block.get(i, j));
                    }
                }
                start += len;
            }
            a
        }
        DesignKind::RandomSparse { s } => {
            let s = s.unwrap_or_else(|| default_sparsity(p));
            random_sparse(p, s, rng)?
        }
    };
    if design.stabilize {
        let radius = linalg::spectral_radius(&raw)?;
        if radius <= 0.0 {
            return Err(Error::InvalidDesign("design has zero spectral radius".into()));
        }
        Ok(raw.scale(1.0 / (2.0 * radius)))
    } else {
        Ok(raw)
    }
}

fn random_sparse<R: Rng + ?Sized>(p: usize, s: usize, rng: &mut R) -> Result<DenseMatrix> {
    let off_diag = p * (p - 1);
    let count = (s * s).min(off_diag);
    let unif = Uniform::new(-0.8, 0.8).expect("valid range");
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    for _ in 0..100 {
        let mut a = DenseMatrix::zeros(p, p);
        for i in 0..p {
            a.set(i, i, unif.sample(rng));
        }
        let mut support: Vec<usize> = index::sample(rng, off_diag, count).into_vec();
        support.sort_unstable();
        for idx in support {
            let i = idx / (p - 1);
            let mut j = idx % (p - 1);
            if j >= i {
                j += 1;
            }
            a.set(i, j, normal.sample(rng));
        }
        if linalg::spectral_radius(&a)? > 1e-12 {
            return Ok(a);
        }
    }
    Err(Error::InvalidDesign("random sparse design kept degenerating".into()))
}

/// An observed block `X_0, ..., X_n` (one row per time index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub x: DenseMatrix,
    pub seed: Option<u64>,
    pub label: String,
}

impl SeriesSample {
    pub fn new(x: DenseMatrix) -> Self {
        Self {
            x,
            seed: None,
            label: String::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `n`, the index of the last observation.
    pub fn n(&self) -> usize {
        self.x.rows().saturating_sub(1)
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// Rows `start..end` as a new sample.
    pub fn slice(&self, start: usize, end: usize) -> Result<SeriesSample> {
        if start > end || end > self.x.rows() {
            return Err(Error::Shape(format!("rows {start}..{end} out of 0..{}", self.x.rows())));
        }
        let p = self.p();
        let data = self.x.as_slice()[start * p..end * p].to_vec();
        Ok(SeriesSample {
            x: DenseMatrix::new(end - start, p, data)?,
            seed: self.seed,
            label: self.label.clone(),
        })
    }
}

/// `max(200, 10 * tau)` with `tau` taken at `rho0 = 0.5`.
pub fn default_burn_in(a: &DenseMatrix) -> Result<usize> {
    let radius = linalg::spectral_radius(a)?;
    if radius >= 1.0 {
        return Err(Error::NonStationary { radius });
    }
    let tau = first_contraction_lag(a, 0.5, 10_000)?;
    Ok((10 * tau).max(200))
}

fn first_contraction_lag(a: &DenseMatrix, rho0: f64, kmax: usize) -> Result<usize> {
    let mut power = a.clone();
    for k in 1..=kmax {
        if k > 1 {
            power = power.matmul(a)?;
        }
        if linalg::operator_norm_2(&power)? <= rho0 {
            return Ok(k);
        }
    }
    Err(Error::HorizonExceeded { kmax, rho0 })
}

/// VAR(1) recursion `X_t = A X_{t-1} + eps_t` started from zero; the first
/// `burn_in` states are discarded and `X_0 ..= X_n` are returned.
pub fn simulate_var<R: Rng + ?Sized>(
    a: &DenseMatrix,
    n: usize,
    innov: &InnovationDist,
    burn_in: usize,
    rng: &mut R,
) -> Result<SeriesSample> {
    let radius = linalg::spectral_radius(a)?;
    if radius >= 1.0 {
        return Err(Error::NonStationary { radius });
    }
    let sampler = innov.sampler()?;
    let p = a.rows();
    let mut state = vec![0.0; p];
    let mut next = vec![0.0; p];
    let mut eps = vec![0.0; p];
    let mut out = Vec::with_capacity((n + 1) * p);
    for step in 0..burn_in + n + 1 {
        sampler.fill(rng, &mut eps);
        for (i, nx) in next.iter_mut().enumerate() {
            *nx = linalg::dot(a.row(i), &state) + eps[i];
        }
        std::mem::swap(&mut state, &mut next);
        if step >= burn_in {
            out.extend_from_slice(&state);
        }
    }
    Ok(SeriesSample::new(DenseMatrix::new(n + 1, p, out)?).with_label(format!("var1 p={p} n={n}")))
}

/// Truncated moving average `X_t = mu + sum_{k=0}^{K} A_k eps_{t-k}` for
/// `t = 0..=n`.
///
/// When a dependence profile is supplied the horizon must make the neglected
/// tail `gamma * rho0^(K / tau)` smaller than `1e-8`.
pub fn simulate_linear_process<R: Rng + ?Sized>(
    coeffs: &[DenseMatrix],
    mu: &[f64],
    n: usize,
    innov: &InnovationDist,
    truncation: usize,
    profile: Option<&DependenceProfile>,
    rng: &mut R,
) -> Result<SeriesSample> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::InvalidModel("no coefficients".into()))?;
    let p = mu.len();
    if first.rows() != p || first.cols() != p {
        return Err(Error::InvalidModel("A_0 must be p x p".into()));
    }
    if first.sub(&DenseMatrix::identity(p))?.max_abs() > 1e-12 {
        return Err(Error::InvalidModel("A_0 must be the identity".into()));
    }
    if coeffs.iter().any(|c| c.rows() != p || c.cols() != p) {
        return Err(Error::InvalidModel("all coefficients must be p x p".into()));
    }
    if let Some(prof) = profile {
        let tail = prof.envelope(truncation);
        if tail >= 1e-8 {
            return Err(Error::InvalidModel(format!(
                "truncation {truncation} leaves tail bound {tail:.3e} >= 1e-8"
            )));
        }
    }
    let k_used = truncation.min(coeffs.len() - 1);
    let sampler = innov.sampler()?;
    // eps[t + k_used] holds eps_t for t = -k_used..=n
    let total = n + 1 + k_used;
    let mut eps = vec![0.0; total * p];
    sampler.fill(rng, &mut eps);
    let mut out = Vec::with_capacity((n + 1) * p);
    let mut row = vec![0.0; p];
    for t in 0..=n {
        row.copy_from_slice(mu);
        for (k, coeff) in coeffs.iter().enumerate().take(k_used + 1) {
            let idx = t + k_used - k;
            let e = &eps[idx * p..(idx + 1) * p];
            if k == 0 {
                for (r, v) in row.iter_mut().zip(e) {
                    *r += v;
                }
            } else {
                for (i, r) in row.iter_mut().enumerate() {
                    *r += linalg::dot(coeff.row(i), e);
                }
            }
        }
        out.extend_from_slice(&row);
    }
    Ok(
        SeriesSample::new(DenseMatrix::new(n + 1, p, out)?)
            .with_label(format!("linear process p={p} n={n} K={k_used}")),
    )
}

/// AR(1) error process `xi_i = rho xi_{i-1} + eta_i` (the geometric moving
/// average with `b_k = rho^k`), returned after a burn-in.
pub fn simulate_ar_error<R: Rng + ?Sized>(rho: f64, n: usize, innov: &InnovationDist, rng: &mut R) -> Result<Vec<f64>> {
    if !(rho.abs() < 1.0) {
        return Err(Error::NonStationary { radius: rho.abs() });
    }
    let sampler = innov.sampler()?;
    let burn_in = if rho == 0.0 {
        0
    } else {
        ((1e-16f64).ln() / rho.abs().ln()).ceil().max(200.0) as usize
    };
    let mut xi = 0.0;
    for _ in 0..burn_in {
        xi = rho * xi + sampler.draw(rng);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        xi = rho * xi + sampler.draw(rng);
        out.push(xi);
    }
    Ok(out)
}

/// Sparse linear regression with serially dependent covariates and errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDataset {
    /// `n x p` covariates, one row per time index.
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub beta_star: Vec<f64>,
    pub xi: Vec<f64>,
    /// AR coefficient of the error process.
    pub rho: f64,
    pub s: usize,
}

impl RegressionDataset {
    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<RegressionDataset> {
        let p = self.x.cols();
        if start > end || end > self.x.rows() {
            return Err(Error::Shape(format!("rows {start}..{end} out of range")));
        }
        Ok(RegressionDataset {
            x: DenseMatrix::new(end - start, p, self.x.as_slice()[start * p..end * p].to_vec())?,
            y: self.y[start..end].to_vec(),
            beta_star: self.beta_star.clone(),
            xi: self.xi[start..end].to_vec(),
            rho: self.rho,
            s: self.s,
        })
    }
}

/// Knobs of the regression simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionRecipe {
    /// Innovations of the covariate VAR.
    pub covariate_innov: InnovationDist,
    /// Innovations of the AR error process.
    pub error_innov: InnovationDist,
    /// `rho ~ U(-rho_max, rho_max)`.
    pub rho_max: f64,
}

impl Default for RegressionRecipe {
    fn default() -> Self {
        Self {
            covariate_innov: InnovationDist::StudentT { df: 5.0 },
            error_innov: InnovationDist::StudentT { df: 5.0 },
            rho_max: 0.8,
        }
    }
}

/// `2 * floor(ln p)` ones followed by zeros.
pub fn regression_sparsity(p: usize) -> usize {
    (2 * default_sparsity(p)).min(p)
}

pub fn make_regression_dataset<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> Result<RegressionDataset> {
    make_regression_dataset_with(&RegressionRecipe::default(), p, n, rng)
}

/// Covariates from the stabilized Toeplitz(0.5) VAR, errors from an AR(1)
/// with `rho` drawn fresh, `Y = X beta* + xi`.
pub fn make_regression_dataset_with<R: Rng + ?Sized>(
    recipe: &RegressionRecipe,
    p: usize,
    n: usize,
    rng: &mut R,
) -> Result<RegressionDataset> {
    if p < 4 || n < 1 {
        return Err(Error::InvalidInput(format!("need p >= 4 and n >= 1, got p={p}, n={n}")));
    }
    let rho = Uniform::new(-recipe.rho_max, recipe.rho_max)
        .map_err(|e| Error::InvalidParameter(format!("rho range: {e}")))?
        .sample(rng);
    let a = build_design(&VarDesign::toeplitz(), p, rng)?;
    let burn = default_burn_in(&a)?;
    let series = simulate_var(&a, n - 1, &recipe.covariate_innov, burn, rng)?;
    let xi = simulate_ar_error(rho, n, &recipe.error_innov, rng)?;
    let s = regression_sparsity(p);
    let beta_star: Vec<f64> = (0..p).map(|j| if j < s { 1.0 } else { 0.0 }).collect();
    let x = series.x;
    let y = (0..n).map(|i| linalg::dot(x.row(i), &beta_star) + xi[i]).collect();
    Ok(RegressionDataset {
        x,
        y,
        beta_star,
        xi,
        rho,
        s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    #[test]
    fn banded_entries() {
        let d = VarDesign {
            kind: DesignKind::Banded {
                lambda: 0.5,
                s: Some(2),
            },
            stabilize: false,
        };
        let a = build_design(&d, 5, &mut rng(0)).unwrap();
        assert_eq!(a.get(0, 1), 0.5);
        assert_eq!(a.get(0, 2), 0.25);
        assert_eq!(a.get(0, 3), 0.0);
        assert_eq!(a.get(2, 2), 1.0);
    }

    #[test]
    fn degenerate_band_rejected() {
        let d = VarDesign {
            kind: DesignKind::Banded {
                lambda: 0.5,
                s: Some(5),
            },
            stabilize: false,
        };
        assert!(matches!(build_design(&d, 5, &mut rng(0)), Err(Error::InvalidDesign(_))));
    }

    #[test]
    fn stabilized_designs_have_radius_half() {
        for d in [VarDesign::banded(), VarDesign::toeplitz(), VarDesign::random_sparse()] {
            for seed in 0..5 {
                let a = build_design(&d, 30, &mut rng(seed)).unwrap();
                let r = linalg::spectral_radius(&a).unwrap();
                assert!((r - 0.5).abs() < 1e-8, "{} radius {r}", d.name());
            }
        }
    }

    #[test]
    fn block_diag_truncates_last_block() {
        // p = 50 -> s = 3, sixteen full blocks and one of size 2
        let a = build_design(&VarDesign::block_diag(), 50, &mut rng(1)).unwrap();
        assert_eq!(a.get(48, 49), a.get(48, 48).powi(2));
        assert_eq!(a.get(47, 48), 0.0);
        assert!(linalg::spectral_radius(&a).unwrap() < 0.8);
    }

    #[test]
    fn random_sparse_support_size() {
        let d = VarDesign {
            kind: DesignKind::RandomSparse { s: Some(3) },
            stabilize: false,
        };
        let a = build_design(&d, 20, &mut rng(3)).unwrap();
        let off = (0..20)
            .flat_map(|i| (0..20).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && a.get(i, j) != 0.0)
            .count();
        assert_eq!(off, 9);
    }

    #[test]
    fn var_with_zero_matrix_reproduces_innovations() {
        let p = 3;
        let innov = InnovationDist::standard_t5();
        let s = simulate_var(&DenseMatrix::zeros(p, p), 10, &innov, 5, &mut rng(9)).unwrap();
        let mut r = rng(9);
        let sampler = innov.sampler().unwrap();
        let mut all = vec![0.0; (5 + 11) * p];
        sampler.fill(&mut r, &mut all);
        assert_eq!(s.x.as_slice(), &all[5 * p..]);
    }

    #[test]
    fn var_is_deterministic_and_rejects_unstable() {
        let a = build_design(&VarDesign::toeplitz(), 6, &mut rng(0)).unwrap();
        let innov = InnovationDist::standard_t5();
        let s1 = simulate_var(&a, 50, &innov, 200, &mut rng(4)).unwrap();
        let s2 = simulate_var(&a, 50, &innov, 200, &mut rng(4)).unwrap();
        assert_eq!(s1, s2);
        let unstable = DenseMatrix::identity(2);
        assert!(matches!(
            simulate_var(&unstable, 5, &innov, 1, &mut rng(0)),
            Err(Error::NonStationary { .. })
        ));
    }

    #[test]
    fn linear_process_requires_identity_lead() {
        let innov = InnovationDist::Gaussian { sigma: 1.0 };
        let bad = vec![DenseMatrix::from_diag(&[2.0, 1.0])];
        assert!(matches!(
            simulate_linear_process(&bad, &[0.0, 0.0], 5, &innov, 0, None, &mut rng(0)),
            Err(Error::InvalidModel(_))
        ));
        let ok = vec![DenseMatrix::identity(2)];
        let s = simulate_linear_process(&ok, &[0.0, 0.0], 5, &innov, 0, None, &mut rng(0)).unwrap();
        assert_eq!(s.x.rows(), 6);
    }

    #[test]
    fn linear_process_tail_requirement() {
        let a = DenseMatrix::from_diag(&[0.5]);
        let prof = linalg::dependence_profile(&a, 0.5, 10).unwrap();
        let coeffs: Vec<_> = (0..5).map(|k| DenseMatrix::from_diag(&[0.5f64.powi(k)])).collect();
        let innov = InnovationDist::Gaussian { sigma: 1.0 };
        assert!(simulate_linear_process(&coeffs, &[0.0], 10, &innov, 4, Some(&prof), &mut rng(0)).is_err());
        assert!(simulate_linear_process(&coeffs, &[0.0], 10, &innov, 40, Some(&prof), &mut rng(0)).is_ok());
    }

    #[test]
    fn ar_error_zero_rho_is_innovations() {
        let innov = InnovationDist::Gaussian { sigma: 1.0 };
        let xi = simulate_ar_error(0.0, 20, &innov, &mut rng(2)).unwrap();
        let sampler = innov.sampler().unwrap();
        let mut r = rng(2);
        let eta: Vec<f64> = (0..20).map(|_| sampler.draw(&mut r)).collect();
        assert_eq!(xi, eta);
        assert!(simulate_ar_error(1.0, 5, &innov, &mut rng(0)).is_err());
        assert_eq!(
            simulate_ar_error(0.3, 30, &innov, &mut rng(5)).unwrap(),
            simulate_ar_error(0.3, 30, &innov, &mut rng(5)).unwrap()
        );
    }

    #[test]
    fn regression_dataset_construction() {
        let d = make_regression_dataset(100, 50, &mut rng(1)).unwrap();
        assert_eq!(d.s, 8);
        assert_eq!(d.beta_star.iter().filter(|&&b| b == 1.0).count(), 8);
        assert!(d.beta_star[..8].iter().all(|&b| b == 1.0));
        for i in 0..50 {
            let fitted = linalg::dot(d.x.row(i), &d.beta_star);
            assert!((d.y[i] - fitted - d.xi[i]).abs() <= 1e-12 * d.y[i].abs().max(1.0));
        }
        assert!(d.rho.abs() < 0.8);
        assert!(make_regression_dataset(3, 10, &mut rng(0)).is_err());
    }
}
