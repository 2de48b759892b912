//! Huber M-estimation of the mean vector of a heavy-tailed process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SeriesSample;

/// Gaussian consistency factor of the median absolute deviation.
pub const MAD_SCALE: f64 = 1.4826;

/// The Huber function `phi_nu(x) = max(-nu, min(x, nu))`.
pub fn huber_score(x: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    Ok(clip(x, nu))
}

#[inline]
pub(crate) fn clip(x: f64, nu: f64) -> f64 {
    x.min(nu).max(-nu)
}

fn score(samples: &[f64], a: f64, nu: f64) -> f64 {
    samples.iter().map(|&x| clip(x - a, nu)).sum()
}

/// Root of the non-increasing map `a -> sum_i phi_nu(x_i - a)`.
///
/// Bisection on `[min x - nu, max x + nu]`, run to machine resolution. When
/// the score vanishes on a whole interval the midpoint is returned.
pub fn huber_mean_scalar(samples: &[f64], nu: f64) -> Result<f64> {
    Ok(huber_mean_scalar_counted(samples, nu)?.0)
}

fn huber_mean_scalar_counted(samples: &[f64], nu: f64) -> Result<(f64, usize)> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if lo == hi {
        return Ok((lo, 0));
    }
    let (lo, hi) = (lo - nu, hi + nu);
    let mut iters = 0;
    // Smallest a with score(a) <= 0 and largest a with score(a) >= 0.
    let left = bisect(lo, hi, |a| score(samples, a, nu) <= 0.0, &mut iters);
    let right = bisect(lo, hi, |a| score(samples, a, nu) < 0.0, &mut iters);
    Ok((0.5 * (left + right), iters))
}

// Boundary of a monotone predicate that is false at `lo` and true at `hi`.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool, iters: &mut usize) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if pred(lo) { lo } else { hi };
        }
        *iters += 1;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}

/// Robustification parameter for the vector estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuChoice {
    /// `c * sigma_hat * sqrt(n / ln p)` with `sigma_hat` the median over
    /// coordinates of `1.4826 * MAD`.
    Auto {
        c: f64,
    },
    Fixed(f64),
}

impl Default for NuChoice {
    fn default() -> Self {
        Self::Auto { c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuberMeanResult {
    pub mu_hat: Vec<f64>,
    pub nu: f64,
    /// Bisection steps spent on each coordinate.
    pub iterations: Vec<usize>,
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// `1.4826 * median |x - median(x)|`.
pub fn mad_scale(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
    MAD_SCALE * median(&mut dev)
}

/// Median over columns of the per-column MAD scale.
pub fn pilot_scale(x: &crate::linalg::DenseMatrix) -> f64 {
    let mut scales: Vec<f64> = (0..x.cols()).map(|j| mad_scale(&x.column(j))).collect();
    if scales.is_empty() {
        return 0.0;
    }
    median(&mut scales)
}

/// `ln p`, floored at `ln 2` so that `p = 1` keeps a finite tuning scale.
pub(crate) fn log_dim(p: usize) -> f64 {
    (p.max(2) as f64).ln()
}

/// Coordinatewise Huber mean over every row of the sample.
pub fn huber_mean_vector(sample: &SeriesSample, nu: NuChoice) -> Result<HuberMeanResult> {
    let x = &sample.x;
    let (rows, p) = (x.rows(), x.cols());
    if rows < 2 || p < 1 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 observations and 1 coordinate, got {rows}x{p}"
        )));
    }
    let nu = match nu {
        NuChoice::Fixed(v) => v,
        NuChoice::Auto { c } => {
            let sigma = pilot_scale(x);
            let sigma = if sigma > 0.0 { sigma } else { 1.0 };
            c * sigma * (rows as f64 / log_dim(p)).sqrt()
        }
    };
    let mut mu_hat = Vec::with_capacity(p);
    let mut iterations = Vec::with_capacity(p);
    for j in 0..p {
        let (m, it) = huber_mean_scalar_counted(&x.column(j), nu)?;
        mu_hat.push(m);
        iterations.push(it);
    }
    Ok(HuberMeanResult { mu_hat, nu, iterations })
}

/// `C (gamma + mu2) tau sqrt(ln p / n)`.
/// `p` is real so the bound can be evaluated off the integer grid.
pub fn mean_error_bound(n: usize, p: f64, gamma: f64, mu2: f64, tau: f64, c: f64) -> f64 {
    c * (gamma + mu2) * tau * (p.ln() / n as f64).sqrt()
}
