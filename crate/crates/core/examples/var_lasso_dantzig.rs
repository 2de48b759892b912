//! Robust and plain Lasso / Dantzig estimates of a sparse VAR(1) transition
//! matrix from one heavy-tailed path, each tuned on a holdout block.
//!
//! Run: `cargo run --example var_lasso_dantzig [-- design]`

use rand::SeedableRng;
use robust_ts::sim::{build_design, default_burn_in, simulate_var};
use robust_ts::var::{estimation_errors, tune_var, VarGrid, VarMethod};
use robust_ts::{InnovationDist, SimRng, VarDesign};

fn main() -> robust_ts::Result<()> {
    let design = VarDesign::by_name(&std::env::args().nth(1).unwrap_or_else(|| "banded".into()))?;
    let (p, n) = (30, 100);
    let mut rng = SimRng::seed_from_u64(5);
    let a = build_design(&design, p, &mut rng)?;
    let path = simulate_var(
        &a,
        2 * n,
        &InnovationDist::standard_t5(),
        default_burn_in(&a)?,
        &mut rng,
    )?;
    let (train, hold) = (path.slice(0, n + 1)?, path.slice(n, 2 * n + 1)?);

    println!("design {}, p = {p}, n = {n}", design.name());
    println!(
        "{:14} {:>8} {:>8} {:>7} {:>7} {:>7}",
        "method", "nu", "lambda", "L_inf", "L_1", "L_F"
    );
    for method in VarMethod::ALL {
        let t = tune_var(method, &train, &hold, &VarGrid::default())?;
        let e = estimation_errors(&t.estimate.a_hat, &a)?;
        println!(
            "{:14} {:8.3} {:8.4} {:7.3} {:7.3} {:7.3}",
            method.name(),
            t.estimate.nu,
            t.estimate.lambda,
            e.linf_induced,
            e.l1_induced,
            e.frobenius
        );
        assert_eq!(t.certificate_violations, 0);
    }
    Ok(())
}
