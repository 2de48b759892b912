//! Seeded Monte Carlo harness for the VAR and regression studies and the
//! matrix-power profiles.
//!
//! Replication `r` always draws from stream `base_seed + r`, so a run is a
//! pure function of its config. Every run produces a summary table, a raw
//! per-replication log the summary can be recomputed from, and metadata.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::huber::{self, HuberConfig, LambdaGrid, WeightSpec};
use crate::io;
use crate::linalg::{self, DenseMatrix};
use crate::sim::{
    build_design, default_burn_in, make_regression_dataset_with, regression_sparsity, replication_rng, simulate_var,
    InnovationDist, RegressionRecipe, VarDesign,
};
use crate::var::{self, tune_var, EstimationErrors, VarGrid, VarMethod};

/// Written as the first line of every summary and raw CSV.
pub const SCHEMA_VERSION: &str = "robust-ts bench schema v1";

fn default_max_failure_rate() -> f64 {
    0.05
}

fn default_innovation() -> InnovationDist {
    InnovationDist::standard_t5()
}

fn default_methods() -> Vec<String> {
    VarMethod::ALL.iter().map(|m| m.name().to_string()).collect()
}

fn default_designs() -> Vec<String> {
    ["banded", "block", "toeplitz", "random"].map(String::from).to_vec()
}

/// Configuration of the VAR study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarBenchConfig {
    #[serde(default = "default_designs")]
    pub designs: Vec<String>,
    pub p: usize,
    pub n: usize,
    pub reps: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default)]
    pub grid: VarGrid,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_innovation")]
    pub innovation: InnovationDist,
    /// Directory receiving the CSV and JSON outputs.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_max_failure_rate")]
    pub max_failure_rate: f64,
}

impl VarBenchConfig {
    pub fn new(p: usize, n: usize, reps: usize) -> Self {
        Self {
            designs: default_designs(),
            p,
            n,
            reps,
            methods: default_methods(),
            grid: VarGrid::default(),
            base_seed: 0,
            innovation: default_innovation(),
            output: None,
            max_failure_rate: default_max_failure_rate(),
        }
    }

    pub fn validate(&self) -> Result<(Vec<VarDesign>, Vec<VarMethod>)> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be >= 1".into()));
        }
        if self.p < 2 || self.n < 2 {
            return Err(Error::Config(format!(
                "need p >= 2 and n >= 2, got p={} n={}",
                self.p, self.n
            )));
        }
        if self.designs.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("designs and methods must be non-empty".into()));
        }
        let (var::NuGrid::Values(nus) | var::NuGrid::Auto { multipliers: nus }) = &self.grid.nu;
        if nus.is_empty() {
            return Err(Error::Config("nu grid is empty".into()));
        }
        if let var::LambdaSpec::Values(v) = &self.grid.lambda {
            if v.is_empty() {
                return Err(Error::Config("lambda grid is empty".into()));
            }
        }
        let designs = self
            .designs
            .iter()
            .map(|d| VarDesign::by_name(d).map_err(|_| Error::Config(format!("unknown design {d:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let methods = self
            .methods
            .iter()
            .map(|m| VarMethod::by_name(m))
            .collect::<Result<Vec<_>>>()?;
        Ok((designs, methods))
    }
}

/// One aggregated cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub design: String,
    pub p: usize,
    pub n: usize,
    pub s: usize,
    pub method: String,
    pub norm: String,
    pub mean: f64,
    pub sd: f64,
    pub reps: usize,
    pub base_seed: u64,
}

/// One successful (design, replication, method) fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub design: String,
    pub rep: usize,
    pub seed: u64,
    pub method: String,
    pub nu: f64,
    pub lambda: f64,
    pub holdout_error: f64,
    pub norm: String,
    pub error: f64,
    pub certificate_violations: usize,
    /// Summary of the random draws behind this replication.
    pub draw: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub design: String,
    pub rep: usize,
    pub method: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub schema: String,
    pub crate_version: String,
    pub kind: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub attempts: usize,
    pub failures: Vec<FailureRecord>,
    pub certificate_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub rows: Vec<ResultRow>,
    pub raw: Vec<RepRecord>,
    pub metadata: RunMetadata,
}

impl BenchOutput {
    /// The row for `(design, method, norm)`, if present.
    pub fn find(&self, design: &str, method: &str, norm: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.design == design && r.method == method && r.norm == norm)
    }

    /// Writes `{stem}_summary.csv`, `{stem}_raw.csv` and `{stem}_meta.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        io::save_records(
            &dir.join(format!("{stem}_summary.csv")),
            Some(&format!("{SCHEMA_VERSION} summary")),
            &self.rows,
        )?;
        io::save_records(
            &dir.join(format!("{stem}_raw.csv")),
            Some(&format!("{SCHEMA_VERSION} raw")),
            &self.raw,
        )?;
        io::save_json(&dir.join(format!("{stem}_meta.json")), &self.metadata)
    }

    /// The summary CSV as bytes.
    pub fn summary_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        io::write_records(&mut buf, Some(&format!("{SCHEMA_VERSION} summary")), &self.rows)?;
        Ok(buf)
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

/// Groups `raw` by `(design, method, norm)` in first-appearance order.
pub fn aggregate(
    raw: &[RepRecord],
    p: usize,
    n: usize,
    s_of: impl Fn(&str) -> usize,
    base_seed: u64,
) -> Vec<ResultRow> {
    let mut keys: Vec<(&str, &str, &str)> = Vec::new();
    for r in raw {
        let k = (r.design.as_str(), r.method.as_str(), r.norm.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(d, m, nm)| {
            let vals: Vec<f64> = raw
                .iter()
                .filter(|r| r.design == d && r.method == m && r.norm == nm)
                .map(|r| r.error)
                .collect();
            let (mean, sd) = mean_sd(&vals);
            ResultRow {
                design: d.to_string(),
                p,
                n,
                s: s_of(d),
                method: m.to_string(),
                norm: nm.to_string(),
                mean,
                sd,
                reps: vals.len(),
                base_seed,
            }
        })
        .collect()
}

fn check_failures(failures: &[FailureRecord], attempts: usize, limit: f64) -> Result<()> {
    if failures.len() as f64 > limit * attempts as f64 {
        return Err(Error::TooManyFailures {
            failures: failures.len(),
            attempts,
        });
    }
    Ok(())
}

fn design_draw(a: &DenseMatrix) -> String {
    let nnz = a.as_slice().iter().filter(|v| **v != 0.0).count();
    let fro = linalg::norm2(a.as_slice());
    format!("nnz={nnz} fro={fro}")
}

/// The VAR study: per replication, build the design, simulate `X_0..X_2n`,
/// tune each method on `X_0..X_n` against the holdout `X_n..X_2n`, and
/// score the tuned estimate in all four norms.
pub fn run_var_benchmark(cfg: &VarBenchConfig) -> Result<BenchOutput> {
    let (designs, methods) = cfg.validate()?;
    let (p, n) = (cfg.p, cfg.n);
    let mut raw = Vec::new();
    let mut failures = Vec::new();
    let mut violations = 0;
    let mut attempts = 0;
    for design in &designs {
        let dname = design.name().to_string();
        for rep in 0..cfg.reps {
            let seed = cfg.base_seed.wrapping_add(rep as u64);
            let mut rng = replication_rng(cfg.base_seed, rep as u64);
            let prepared = build_design(design, p, &mut rng).and_then(|a| {
                let burn = default_burn_in(&a)?;
                let x = simulate_var(&a, 2 * n, &cfg.innovation, burn, &mut rng)?;
                Ok((a, x))
            });
            let (a, x) = match prepared {
                Ok(v) => v,
                Err(e) => {
                    for m in &methods {
                        attempts += 1;
                        failures.push(FailureRecord {
                            design: dname.clone(),
                            rep,
                            method: m.name().into(),
                            message: e.to_string(),
                        });
                    }
                    continue;
                }
            };
            let train = x.slice(0, n + 1)?;
            let hold = x.slice(n, 2 * n + 1)?;
            let draw = design_draw(&a);
            for &m in &methods {
                attempts += 1;
                let res = tune_var(m, &train, &hold, &cfg.grid)
                    .and_then(|t| Ok((var::estimation_errors(&t.estimate.a_hat, &a)?, t)));
                match res {
                    Ok((errs, t)) => {
                        violations += t.certificate_violations;
                        push_var_records(&mut raw, &dname, rep, seed, m, &t, errs, &draw);
                    }
                    Err(e) => failures.push(FailureRecord {
                        design: dname.clone(),
                        rep,
                        method: m.name().into(),
                        message: e.to_string(),
                    }),
                }
            }
        }
        check_failures(&failures, attempts, cfg.max_failure_rate)?;
    }
    let rows = aggregate(
        &raw,
        p,
        n,
        |d| VarDesign::by_name(d).map(|v| v.sparsity(p)).unwrap_or(0),
        cfg.base_seed,
    );
    let metadata = RunMetadata {
        schema: SCHEMA_VERSION.into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        kind: "var".into(),
        config: serde_json::to_value(cfg)?,
        seeds: (0..cfg.reps as u64).map(|r| cfg.base_seed.wrapping_add(r)).collect(),
        attempts,
        failures,
        certificate_violations: violations,
    };
    Ok(BenchOutput { rows, raw, metadata })
}

#[allow(clippy::too_many_arguments)]
fn push_var_records(
    raw: &mut Vec<RepRecord>,
    design: &str,
    rep: usize,
    seed: u64,
    m: VarMethod,
    t: &var::VarTuneResult,
    errs: EstimationErrors,
    draw: &str,
) {
    for (norm, error) in EstimationErrors::NAMES.iter().zip(errs.values()) {
        raw.push(RepRecord {
            design: design.into(),
            rep,
            seed,
            method: m.name().into(),
            nu: t.estimate.nu,
            lambda: t.estimate.lambda,
            holdout_error: t.holdout_error,
            norm: (*norm).into(),
            error,
            certificate_violations: t.certificate_violations,
            draw: draw.into(),
        });
    }
}

fn default_b_values() -> Vec<f64> {
    vec![5.0, 15.0, 50.0, 100.0]
}

fn default_true() -> bool {
    true
}

/// Configuration of the regression study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionBenchConfig {
    pub p: usize,
    pub n: usize,
    pub reps: usize,
    /// Weight radii for the weighted fits (`B = I`).
    #[serde(default = "default_b_values")]
    pub b_values: Vec<f64>,
    /// Also fit the unweighted Huber estimator.
    #[serde(default = "default_true")]
    pub include_plain: bool,
    /// Multipliers of the `nu` pilot; `None` uses the library default.
    #[serde(default)]
    pub nu_multipliers: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub recipe: RegressionRecipe,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_max_failure_rate")]
    pub max_failure_rate: f64,
}

impl RegressionBenchConfig {
    pub fn new(p: usize, n: usize, reps: usize) -> Self {
        Self {
            p,
            n,
            reps,
            b_values: default_b_values(),
            include_plain: true,
            nu_multipliers: None,
            lambda_grid: None,
            base_seed: 0,
            recipe: RegressionRecipe::default(),
            output: None,
            max_failure_rate: default_max_failure_rate(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 || self.n < 2 || self.p < 4 {
            return Err(Error::Config("need reps >= 1, n >= 2, p >= 4".into()));
        }
        if !self.include_plain && self.b_values.is_empty() {
            return Err(Error::Config("no estimator selected".into()));
        }
        if self.b_values.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Config("weight radii must be positive".into()));
        }
        if matches!(&self.nu_multipliers, Some(v) if v.is_empty() || v.iter().any(|m| !(*m > 0.0))) {
            return Err(Error::Config("nu multipliers must be non-empty and positive".into()));
        }
        if matches!(&self.lambda_grid, Some(v) if v.is_empty()) {
            return Err(Error::Config("lambda grid is empty".into()));
        }
        Ok(())
    }

    /// `(method name, weight)` for every estimator in the study.
    pub fn estimators(&self) -> Result<Vec<(String, Option<WeightSpec>)>> {
        let mut out = Vec::new();
        if self.include_plain {
            out.push(("huber".to_string(), None));
        }
        for &b in &self.b_values {
            out.push((format!("weighted_b{b}"), Some(WeightSpec::identity(b)?)));
        }
        Ok(out)
    }
}

/// The regression study: per replication, draw `2n` observations, tune
/// each estimator on the first `n` against the last `n`, and record
/// `|beta_hat - beta*|_2`.
pub fn run_regression_benchmark(cfg: &RegressionBenchConfig) -> Result<BenchOutput> {
    cfg.validate()?;
    let estimators = cfg.estimators()?;
    let (p, n) = (cfg.p, cfg.n);
    let design = "regression";
    let mut raw = Vec::new();
    let mut failures = Vec::new();
    let mut attempts = 0;
    for rep in 0..cfg.reps {
        let seed = cfg.base_seed.wrapping_add(rep as u64);
        let mut rng = replication_rng(cfg.base_seed, rep as u64);
        let split = make_regression_dataset_with(&cfg.recipe, p, 2 * n, &mut rng)
            .and_then(|d| Ok((d.slice(0, n)?, d.slice(n, 2 * n)?, d)));
        let (train, hold, data) = match split {
            Ok(v) => v,
            Err(e) => {
                for (name, _) in &estimators {
                    attempts += 1;
                    failures.push(FailureRecord {
                        design: design.into(),
                        rep,
                        method: name.clone(),
                        message: e.to_string(),
                    });
                }
                continue;
            }
        };
        let nus: Vec<f64> = match &cfg.nu_multipliers {
            None => huber::default_nu_grid(&train.x, &train.y),
            Some(mults) => {
                let base = huber::default_nu_grid(&train.x, &train.y)[2];
                mults.iter().map(|m| m * base).collect()
            }
        };
        let lambdas = match &cfg.lambda_grid {
            None => LambdaGrid::Auto,
            Some(v) => LambdaGrid::Values(v.clone()),
        };
        let draw = format!("rho={}", data.rho);
        for (name, weight) in &estimators {
            attempts += 1;
            let base = HuberConfig::new(1.0, 0.0).with_weight(weight.clone());
            match huber::tune(&train.x, &train.y, &nus, &lambdas, (&hold.x, &hold.y), &base) {
                Ok(t) => {
                    let err = t
                        .fit
                        .beta_hat
                        .iter()
                        .zip(&data.beta_star)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    raw.push(RepRecord {
                        design: design.into(),
                        rep,
                        seed,
                        method: name.clone(),
                        nu: t.nu,
                        lambda: t.lambda,
                        holdout_error: t.holdout_mse,
                        norm: "l2".into(),
                        error: err,
                        certificate_violations: t.nonconverged,
                        draw: draw.clone(),
                    });
                }
                Err(e) => failures.push(FailureRecord {
                    design: design.into(),
                    rep,
                    method: name.clone(),
                    message: e.to_string(),
                }),
            }
        }
    }
    check_failures(&failures, attempts, cfg.max_failure_rate)?;
    let rows = aggregate(&raw, p, n, |_| regression_sparsity(p), cfg.base_seed);
    let metadata = RunMetadata {
        schema: SCHEMA_VERSION.into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        kind: "regression".into(),
        config: serde_json::to_value(cfg)?,
        seeds: (0..cfg.reps as u64).map(|r| cfg.base_seed.wrapping_add(r)).collect(),
        attempts,
        failures,
        certificate_violations: 0,
    };
    Ok(BenchOutput { rows, raw, metadata })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub design: String,
    pub p: usize,
    pub k: usize,
    pub norm: f64,
}

/// `||A^k||` for `k = 0..=kmax` for each design and dimension. Random
/// designs are drawn from stream `seed + 0`.
pub fn emit_profile(designs: &[VarDesign], p_list: &[usize], kmax: usize, seed: u64) -> Result<Vec<ProfileRow>> {
    let mut rows = Vec::new();
    for d in designs {
        for &p in p_list {
            let a = build_design(d, p, &mut replication_rng(seed, 0))?;
            let label = match d.kind {
                crate::sim::DesignKind::ExampleShift { lambda, shift } => {
                    format!("example_shift(lambda={lambda},B={shift})")
                }
                _ => d.name().to_string(),
            };
            for (k, norm) in linalg::power_norms(&a, kmax)?.into_iter().enumerate() {
                rows.push(ProfileRow {
                    design: label.clone(),
                    p,
                    k,
                    norm,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_profile(path: &Path, rows: &[ProfileRow]) -> Result<()> {
    io::save_records(path, None, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_sd_basics() {
        assert_eq!(mean_sd(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut c = VarBenchConfig::new(10, 30, 1);
        assert!(c.validate().is_ok());
        c.methods = vec!["ridge".into()];
        assert!(c.validate().is_err());
        let mut c = VarBenchConfig::new(10, 30, 0);
        assert!(c.validate().is_err());
        c.reps = 1;
        c.designs = vec!["spiral".into()];
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: VarBenchConfig = serde_json::from_str(r#"{"p": 10, "n": 40, "reps": 2}"#).unwrap();
        assert_eq!(c.methods.len(), 4);
        assert_eq!(c.designs.len(), 4);
        assert_eq!(c.max_failure_rate, 0.05);
    }

    #[test]
    fn small_var_run_is_deterministic() {
        let mut c = VarBenchConfig::new(6, 40, 2);
        c.designs = vec!["banded".into(), "random_sparse".into()];
        c.base_seed = 9;
        let a = run_var_benchmark(&c).unwrap();
        let b = run_var_benchmark(&c).unwrap();
        assert_eq!(a.summary_csv().unwrap(), b.summary_csv().unwrap());
        assert_eq!(a.rows.len(), 2 * 4 * 4);
        assert_eq!(a.metadata.certificate_violations, 0);
    }

    #[test]
    fn banded_profile_is_geometric() {
        let rows = emit_profile(&[VarDesign::banded()], &[30], 10, 0).unwrap();
        for r in rows {
            assert!((r.norm - 0.5f64.powi(r.k as i32)).abs() < 1e-8);
        }
    }
}
