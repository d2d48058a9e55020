//! Entanglement map over the interaction strengths at `phi = pi/2`: the
//! Schmidt number of the most entangled eigenstate and its renormalized
//! current, with the ridge positions along `V/U`.
//!
//!     cargo run --release --example uv_sweep -- 41

use std::f64::consts::FRAC_PI_2;

use gauge_ring::harness::commands::RIDGE_BIN;
use gauge_ring::harness::uv_sweep;
use gauge_ring::model::ModelParams;

fn main() -> gauge_ring::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(41, |a| a.parse().expect("grid size"));
    let axis: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
    let template = ModelParams::new(3, 2, 1.0, 1.0, 1.0)?.with_phase(FRAC_PI_2);
    let sweep = uv_sweep(&template, &axis, &axis)?;

    let worst_diagonal = sweep
        .diagonal()
        .map(|c| (c.schmidt - 1.0).abs().max((c.renormalized_current - 1.0).abs()))
        .fold(0.0, f64::max);
    println!("{n} x {n} grid, U = V diagonal: max |K - 1|, |Jr - 1| = {worst_diagonal:.2e}");
    println!("Spearman(K, Jr) = {:.4}", sweep.schmidt_current_correlation());
    println!("ridges along V/U:");
    for (ratio, k) in sweep.ridges(RIDGE_BIN) {
        println!("    V/U = {ratio:.4}  mean K = {k:.4}");
    }
    println!("profile (V < U):");
    for (ratio, k) in sweep.ratio_profile(RIDGE_BIN) {
        println!("    {ratio:.4}  {}", "#".repeat((k * 50.0) as usize));
    }
    Ok(())
}
