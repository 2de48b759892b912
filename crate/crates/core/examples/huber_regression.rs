//! Plain and weighted l1-penalized Huber regression on the dependent
//! heavy-tailed regression dataset, tuned on a holdout block.
//!
//! Run: `cargo run --example huber_regression`

use rand::SeedableRng;
use robust_ts::huber::{self, HuberConfig, LambdaGrid, WeightSpec};
use robust_ts::linalg::norm2;
use robust_ts::sim::make_regression_dataset;
use robust_ts::SimRng;

fn main() -> robust_ts::Result<()> {
    let (p, n) = (10, 100);
    let mut rng = SimRng::seed_from_u64(3);
    let data = make_regression_dataset(p, 2 * n, &mut rng)?;
    let (train, hold) = (data.slice(0, n)?, data.slice(n, 2 * n)?);
    println!("p = {p}, n = {n}, s = {}, error AR coefficient {:.3}", data.s, data.rho);

    let nus = huber::default_nu_grid(&train.x, &train.y);
    for (name, weight) in [
        ("huber", None),
        ("weighted b=15", Some(WeightSpec::new(None, 15.0)?)),
        ("weighted b=5", Some(WeightSpec::new(None, 5.0)?)),
    ] {
        let base = HuberConfig::new(1.0, 0.0).with_weight(weight);
        let t = huber::tune(&train.x, &train.y, &nus, &LambdaGrid::Auto, (&hold.x, &hold.y), &base)?;
        let err: Vec<f64> = t.fit.beta_hat.iter().zip(&data.beta_star).map(|(b, s)| b - s).collect();
        println!(
            "{name:14} nu {:7.3}  lambda {:.4}  |beta - beta*|_2 {:.3}  support {:?}",
            t.nu,
            t.lambda,
            norm2(&err),
            t.fit.active_set
        );
    }
    Ok(())
}
