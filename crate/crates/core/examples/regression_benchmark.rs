//! Replicated comparison of plain and weighted Huber regression across the
//! weight radius `b`.
//!
//! Run: `cargo run --release --example regression_benchmark [-- reps]`

use robust_ts::bench::{run_regression_benchmark, RegressionBenchConfig};

fn main() -> robust_ts::Result<()> {
    let reps = std::env::args().nth(1).map_or(Ok(20), |s| s.parse()).unwrap_or(20);
    let out = run_regression_benchmark(&RegressionBenchConfig::new(10, 100, reps))?;
    for r in &out.rows {
        println!("{:12} |beta - beta*|_2 {:.3} ({:.3})", r.method, r.mean, r.sd);
    }
    Ok(())
}
