//! A small replicated VAR benchmark: every design and method, summary table
//! on stdout and the three report files in `bench_out/`.
//!
//! Run: `cargo run --release --example var_benchmark [-- reps]`

use std::path::Path;

use robust_ts::bench::{run_var_benchmark, VarBenchConfig};

fn main() -> robust_ts::Result<()> {
    let reps = std::env::args().nth(1).map_or(Ok(5), |s| s.parse()).unwrap_or(5);
    let cfg = VarBenchConfig::new(30, 80, reps);
    let out = run_var_benchmark(&cfg)?;
    for r in out.rows.iter().filter(|r| r.norm == "fro") {
        println!("{:9} {:14} L_F {:.3} ({:.3})", r.design, r.method, r.mean, r.sd);
    }
    println!(
        "{} fits, {} failures, {} certificate violations",
        out.metadata.attempts,
        out.metadata.failures.len(),
        out.metadata.certificate_violations
    );
    out.write(Path::new("bench_out"), "var")?;
    Ok(())
}
