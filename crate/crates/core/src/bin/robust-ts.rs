use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::json;

use robust_ts::bench::{self, RegressionBenchConfig, VarBenchConfig};
use robust_ts::concentration::{self, TailModel};
use robust_ts::huber::{self, HuberConfig, LambdaGrid, WeightSpec};
use robust_ts::io;
use robust_ts::mean::{huber_mean_vector, NuChoice};
use robust_ts::var::{self, LambdaSpec, NuGrid, VarGrid, VarMethod};
use robust_ts::{Error, InnovationDist, Result, SimRng, VarDesign};

#[derive(Parser)]
#[command(
    name = "robust-ts",
    version,
    about = "Robust estimation for heavy-tailed time series"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coordinatewise Huber mean of a series; writes `j,mu_hat`.
    EstimateMean {
        #[arg(long)]
        input: PathBuf,
        /// `auto` or a positive value.
        #[arg(long, default_value = "auto")]
        nu: String,
        /// Constant in the automatic choice.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted l1-penalized Huber regression; prints JSON.
    HuberReg(HuberArgs),
    /// Robust (or plain) Lasso estimate of a VAR(1) transition matrix.
    VarLasso(VarArgs),
    /// Robust (or plain) Dantzig estimate of a VAR(1) transition matrix.
    VarDantzig(VarArgs),
    /// Empirical tail of a clipped sum against the dependent Bernstein bound.
    Concentration(ConcArgs),
    /// Benchmark harness.
    Bench {
        #[command(subcommand)]
        cmd: BenchCmd,
    },
}

#[derive(Args)]
struct HuberArgs {
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    /// Weight radius; omit for the unweighted estimator.
    #[arg(long)]
    b: Option<f64>,
    /// `identity` or a CSV file with a positive definite matrix.
    #[arg(long = "B", default_value = "identity")]
    shape: String,
    /// `auto` or comma-separated values.
    #[arg(long, default_value = "auto")]
    nu_grid: String,
    /// `auto` or comma-separated values.
    #[arg(long, default_value = "auto")]
    lambda_grid: String,
    /// Holdout design for tuning; without it the data are split in half for
    /// tuning and the chosen pair is refitted on everything.
    #[arg(long, requires = "holdout_y")]
    holdout_x: Option<PathBuf>,
    #[arg(long, requires = "holdout_x")]
    holdout_y: Option<PathBuf>,
}

#[derive(Args)]
struct VarArgs {
    #[arg(long)]
    input: PathBuf,
    /// `auto`, `inf` (no truncation) or comma-separated values.
    #[arg(long, default_value = "auto")]
    nu: String,
    /// `auto` or comma-separated values.
    #[arg(long, default_value = "auto")]
    lambda: String,
    /// Series used to pick `(nu, lambda)` when more than one pair is given.
    #[arg(long)]
    holdout: Option<PathBuf>,
    #[arg(long, default_value = "estimate.csv")]
    out: PathBuf,
    /// Diagnostics JSON; defaults to the estimate path with `.json`.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Var,
    Iid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Innov {
    Gaussian,
    T5,
}

#[derive(Args)]
struct ConcArgs {
    #[arg(long, value_enum, default_value = "var")]
    model: ModelKind,
    #[arg(long, default_value_t = 0.5)]
    ar: f64,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = 0.5)]
    rho0: f64,
    /// Clip level `M`.
    #[arg(long, default_value_t = 2.0)]
    clip: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    innovation: Innov,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "tail.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum BenchCmd {
    Var {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Regression {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Profile {
        /// Comma-separated design names.
        #[arg(long, default_value = "toeplitz")]
        design: String,
        /// Comma-separated dimensions.
        #[arg(long, default_value = "100,500")]
        p: String,
        #[arg(long, default_value_t = 80)]
        kmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
    },
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} value {v:?}")))
        })
        .collect()
}

fn estimate_mean(input: PathBuf, nu: String, c: f64, out: Option<PathBuf>) -> Result<()> {
    let sample = io::load_series(&input)?;
    let choice = if nu == "auto" {
        NuChoice::Auto { c }
    } else {
        NuChoice::Fixed(parse_list::<f64>(&nu, "nu")?[0])
    };
    let res = huber_mean_vector(&sample, choice)?;
    match out {
        Some(p) => io::save_vector(&p, "mu_hat", &res.mu_hat),
        None => io::write_vector_csv(std::io::stdout().lock(), "mu_hat", &res.mu_hat),
    }
}

fn huber_reg(a: HuberArgs) -> Result<()> {
    let x = io::load_matrix(&a.x)?;
    let y = io::load_vector(&a.y)?;
    let weight = match a.b {
        None => None,
        Some(b) => {
            let shape = if a.shape == "identity" {
                None
            } else {
                Some(io::load_matrix(&PathBuf::from(&a.shape))?)
            };
            Some(WeightSpec::new(shape, b)?)
        }
    };
    let base = HuberConfig::new(1.0, 0.0).with_weight(weight);
    let lambdas = if a.lambda_grid == "auto" {
        LambdaGrid::Auto
    } else {
        LambdaGrid::Values(parse_list(&a.lambda_grid, "lambda")?)
    };
    let nus_for = |x: &robust_ts::DenseMatrix, y: &[f64]| -> Result<Vec<f64>> {
        if a.nu_grid == "auto" {
            Ok(huber::default_nu_grid(x, y))
        } else {
            parse_list(&a.nu_grid, "nu")
        }
    };
    let (nu, lambda, fit) = match (&a.holdout_x, &a.holdout_y) {
        (Some(hx), Some(hy)) => {
            let (hx, hy) = (io::load_matrix(hx)?, io::load_vector(hy)?);
            let t = huber::tune(&x, &y, &nus_for(&x, &y)?, &lambdas, (&hx, &hy), &base)?;
            (t.nu, t.lambda, t.fit)
        }
        _ => {
            let n = x.rows();
            if n < 4 {
                return Err(Error::InvalidInput("need at least 4 rows to split for tuning".into()));
            }
            let half = n / 2;
            let p = x.cols();
            let xa = robust_ts::DenseMatrix::new(half, p, x.as_slice()[..half * p].to_vec())?;
            let xb = robust_ts::DenseMatrix::new(n - half, p, x.as_slice()[half * p..].to_vec())?;
            let t = huber::tune(
                &xa,
                &y[..half],
                &nus_for(&xa, &y[..half])?,
                &lambdas,
                (&xb, &y[half..]),
                &base,
            )?;
            let cfg = HuberConfig {
                nu: t.nu,
                lambda: t.lambda,
                ..base.clone()
            };
            (t.nu, t.lambda, huber::fit(&x, &y, &cfg)?)
        }
    };
    let out = json!({
        "beta_hat": fit.beta_hat,
        "nu": nu,
        "lambda": lambda,
        "objective": fit.final_objective(),
        "kkt_residual": fit.kkt_residual,
        "converged": fit.converged,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn var_cmd(lasso: bool, a: VarArgs) -> Result<()> {
    let sample = io::load_series(&a.input)?;
    let plain = a.nu == "inf";
    let method = match (lasso, plain) {
        (true, false) => VarMethod::Lasso,
        (true, true) => VarMethod::LassoPlain,
        (false, false) => VarMethod::Dantzig,
        (false, true) => VarMethod::DantzigPlain,
    };
    let nu = if a.nu == "auto" || plain {
        NuGrid::default()
    } else {
        NuGrid::Values(parse_list(&a.nu, "nu")?)
    };
    let lambda = if a.lambda == "auto" {
        LambdaSpec::default()
    } else {
        LambdaSpec::Values(parse_list(&a.lambda, "lambda")?)
    };
    let single = |g: &NuGrid| matches!(g, NuGrid::Values(v) if v.len() == 1) || plain;
    let single_lambda = matches!(&lambda, LambdaSpec::Values(v) if v.len() == 1);
    let (estimate, holdout_error) = if single(&nu) && single_lambda {
        let nu_val = match &nu {
            NuGrid::Values(v) if !plain => v[0],
            _ => f64::INFINITY,
        };
        let LambdaSpec::Values(l) = &lambda else { unreachable!() };
        (var::fit_var(method, &sample, nu_val, l[0])?, None)
    } else {
        let hold = a
            .holdout
            .as_ref()
            .ok_or_else(|| Error::Config("--holdout is required when searching a grid".into()))?;
        let hold = io::load_series(hold)?;
        let t = var::tune_var(method, &sample, &hold, &VarGrid { nu, lambda })?;
        (t.estimate, Some(t.holdout_error))
    };
    io::save_matrix(&a.out, &estimate.a_hat)?;
    let diag_path = a.diagnostics.unwrap_or_else(|| a.out.with_extension("json"));
    io::save_json(
        &diag_path,
        &json!({
            "method": estimate.method,
            "nu": if estimate.nu.is_finite() { json!(estimate.nu) } else { json!("inf") },
            "lambda": estimate.lambda,
            "holdout_error": holdout_error,
            "certificate_violations": estimate.certificate_violations(),
            "subproblems": estimate.diagnostics,
        }),
    )?;
    eprintln!(
        "{}: nu = {}, lambda = {}, wrote {}",
        estimate.method.name(),
        estimate.nu,
        estimate.lambda,
        a.out.display()
    );
    Ok(())
}

fn concentration_cmd(a: ConcArgs) -> Result<()> {
    let innov = match a.innovation {
        Innov::Gaussian => InnovationDist::Gaussian { sigma: 1.0 },
        Innov::T5 => InnovationDist::standard_t5(),
    };
    let mut model = match a.model {
        ModelKind::Iid => TailModel::iid(1, innov),
        ModelKind::Var => TailModel::ar1(a.ar, innov),
    };
    model.rho0 = a.rho0;
    let g = concentration::clipped_linear_transform(&[1.0], a.clip)?;
    let params = concentration::bound_params(&model, &g, a.n)?;
    let grid = concentration::default_x_grid(&params);
    let mut rng = SimRng::seed_from_u64(a.seed);
    let table = concentration::empirical_tail(&model, &g, a.n, &grid, a.reps, &mut rng)?;
    io::save_records(&a.out, None, &table.rows)?;
    match concentration::check_domination(&table) {
        Ok(()) => {
            eprintln!("bound dominates at all {} grid points", table.rows.len());
            Ok(())
        }
        Err(e) => Err(e),
    }
}

fn bench_cmd(cmd: BenchCmd) -> Result<()> {
    match cmd {
        BenchCmd::Var { config, out } => {
            let cfg: VarBenchConfig = serde_json::from_reader(std::fs::File::open(&config)?)?;
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("bench_out"));
            let res = bench::run_var_benchmark(&cfg)?;
            res.write(&dir, "var")?;
            print_rows(&res);
            Ok(())
        }
        BenchCmd::Regression { config, out } => {
            let cfg: RegressionBenchConfig = serde_json::from_reader(std::fs::File::open(&config)?)?;
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("bench_out"));
            let res = bench::run_regression_benchmark(&cfg)?;
            res.write(&dir, "regression")?;
            print_rows(&res);
            Ok(())
        }
        BenchCmd::Profile {
            design,
            p,
            kmax,
            seed,
            out,
        } => {
            let designs = design
                .split(',')
                .map(|d| VarDesign::by_name(d.trim()))
                .collect::<Result<Vec<_>>>()?;
            let rows = bench::emit_profile(&designs, &parse_list(&p, "p")?, kmax, seed)?;
            bench::write_profile(&out, &rows)
        }
    }
}

fn print_rows(res: &bench::BenchOutput) {
    for r in &res.rows {
        println!(
            "{:10} {:16} {:5} {:.3} ({:.3}) reps={}",
            r.design, r.method, r.norm, r.mean, r.sd, r.reps
        );
    }
    if !res.metadata.failures.is_empty() {
        eprintln!("{} failed fits recorded", res.metadata.failures.len());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::EstimateMean { input, nu, c, out } => estimate_mean(input, nu, c, out),
        Cmd::HuberReg(a) => huber_reg(a),
        Cmd::VarLasso(a) => var_cmd(true, a),
        Cmd::VarDantzig(a) => var_cmd(false, a),
        Cmd::Concentration(a) => concentration_cmd(a),
        Cmd::Bench { cmd } => bench_cmd(cmd),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
