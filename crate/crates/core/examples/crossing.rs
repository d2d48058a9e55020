//! Avoided crossing of the lowest band and the Landau-Zener estimate of the
//! diabatic passage, compared with the probability measured by evolving
//! through the crossing.
//!
//! Levels belonging to different momentum sectors cross exactly, so the
//! analysis runs inside the sector of the `phi = 0` ground state.
//!
//!     cargo run --release --example crossing -- 0.25    # U = V = 0.25 C

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use gauge_ring::analytic::lz_probability;
use gauge_ring::dynamics::{evolve, initial_ground_state, EvolveSettings, RampSchedule};
use gauge_ring::measures::fidelity;
use gauge_ring::model::{momentum_of, HamiltonianParts, ModelParams};
use gauge_ring::spectra::{locate_sector_crossing, scan_sector, sector_ground_state};

fn main() -> gauge_ring::Result<()> {
    let u: f64 = std::env::args().nth(1).map_or(1.0, |a| a.parse().expect("U as a number"));
    let params = ModelParams::new(3, 2, 1.0, u, u)?;
    let parts = HamiltonianParts::new(&params)?;
    let (ground, _) = initial_ground_state(&parts)?;
    let k = momentum_of(parts.basis(), &ground).expect("ground state carries a momentum");

    let grid: Vec<f64> = (0..=160).map(|i| FRAC_PI_2 * i as f64 / 160.0).collect();
    let scan = scan_sector(&params, k, &grid, true)?;
    let crossing = locate_sector_crossing(&params, k, &scan, (0, 1))?;
    println!("U = V = {u} C, momentum sector k = {k}");
    println!(
        "crossing at phi_c = {:.6} (pi/3 {:+.4}), gap = {:.3e} C, diabatic slope = {:.4} C/rad",
        crossing.phi_c,
        crossing.phi_c - FRAC_PI_3,
        crossing.gap,
        crossing.diabatic_slope
    );

    // ramp from phi = 0 to just past the crossing and count what stayed diabatic
    let stop = crossing.phi_c + 0.1;
    let (_, adiabatic) = sector_ground_state(&params, k, stop)?;
    let settings = EvolveSettings {
        samples: 2,
        ..EvolveSettings::default()
    };
    println!("   alpha    measured  Landau-Zener");
    for alpha in [0.003, 0.01, 0.03, 0.1] {
        let schedule = RampSchedule::linear(alpha, 0.0, stop)?;
        let trajectory = evolve(&ground, &parts, &schedule, &settings, None)?;
        let measured = 1.0 - fidelity(trajectory.final_state(), &adiabatic)?;
        let lz = lz_probability(crossing.gap, crossing.diabatic_slope, alpha)?;
        println!("{alpha:8.3}  {measured:10.6}  {lz:10.6}");
    }
    Ok(())
}
