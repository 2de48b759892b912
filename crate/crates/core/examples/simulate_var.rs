//! Build each benchmark transition design, simulate a heavy-tailed VAR(1)
//! path from it and save the path as CSV.
//!
//! Run: `cargo run --example simulate_var [-- out_dir]`

use std::path::PathBuf;

use rand::SeedableRng;
use robust_ts::linalg::{matrix_norms, spectral_radius};
use robust_ts::sim::{build_design, default_burn_in, simulate_var};
use robust_ts::{io, InnovationDist, SimRng, VarDesign};

fn main() -> robust_ts::Result<()> {
    let out_dir = std::env::args().nth(1).map(PathBuf::from);
    let (p, n) = (20, 200);
    let innov = InnovationDist::standard_t5();

    for design in [
        VarDesign::banded(),
        VarDesign::block_diag(),
        VarDesign::toeplitz(),
        VarDesign::random_sparse(),
    ] {
        let mut rng = SimRng::seed_from_u64(11);
        let a = build_design(&design, p, &mut rng)?;
        let burn = default_burn_in(&a)?;
        let sample = simulate_var(&a, n, &innov, burn, &mut rng)?;
        let largest = sample.x.max_abs();
        println!(
            "{:8} radius {:.3}  ||A||_1 {:.3}  burn-in {burn:4}  max |x| {largest:.2}",
            design.name(),
            spectral_radius(&a)?,
            matrix_norms(&a)?.l1_induced,
        );
        if let Some(dir) = &out_dir {
            io::save_series(&dir.join(format!("{}.csv", design.name())), &sample)?;
            io::save_matrix(&dir.join(format!("{}_A.csv", design.name())), &a)?;
        }
    }
    Ok(())
}
