//! Spectral norms of the powers of the shift design used to illustrate slow
//! onset of decay: `||A^k||` first grows, then falls off geometrically.
//!
//! Run: `cargo run --example dependence_profile [-- out.csv]`

use std::path::PathBuf;

use rand::SeedableRng;
use robust_ts::linalg::{dependence_profile, spectral_radius};
use robust_ts::sim::build_design;
use robust_ts::{io, SimRng, VarDesign};

fn main() -> robust_ts::Result<()> {
    let mut rng = SimRng::seed_from_u64(0);
    let a = build_design(&VarDesign::example_shift(0.55, 3), 30, &mut rng)?;
    let prof = dependence_profile(&a, 0.5, 120)?;

    let (kpeak, peak) = prof
        .norms
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    let cross = prof.norms.iter().skip(kpeak).position(|&v| v < 0.1).map(|i| i + kpeak);

    println!("spectral radius   {:.4}", spectral_radius(&a)?);
    println!("peak ||A^k||      {peak:.4} at k = {kpeak}");
    match cross {
        Some(k) => println!("first k below 0.1 {k}"),
        None => println!("profile stays above 0.1 up to k = 120"),
    }
    println!("tau = {}, gamma = {:.3}", prof.tau, prof.gamma);
    for k in (0..=60).step_by(5) {
        let bar = "#".repeat((prof.norms[k] * 40.0).round() as usize);
        println!("{k:3} {:7.4} {bar}", prof.norms[k]);
    }

    if let Some(out) = std::env::args().nth(1).map(PathBuf::from) {
        io::write_profile_csv(std::fs::File::create(&out)?, &prof.norms)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
