//! Spectrum of the ring against the common Peierls phase, with the
//! zero-energy points where the closed-form entangled states live.
//!
//!     cargo run --release --example spectrum_scan [-- out.csv]

use std::f64::consts::PI;

use gauge_ring::analytic::mes_phase;
use gauge_ring::harness::commands::spectrum_csv;
use gauge_ring::model::ModelParams;
use gauge_ring::spectra::scan_spectrum;

fn main() -> gauge_ring::Result<()> {
    // strong, balanced interactions: U = V = 10 C
    let params = ModelParams::new(3, 2, 1.0, 10.0, 10.0)?;
    let grid: Vec<f64> = (0..=240).map(|i| PI * i as f64 / 240.0).collect();
    let scan = scan_spectrum(&params, &grid, false)?;

    println!("levels per phase: {}", scan.levels());
    for (phi, energies) in scan.phi_grid.iter().zip(&scan.energies) {
        let closest = energies.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
        if closest < 1e-10 {
            println!("zero-energy level at phi = {phi:.6} (|E|min = {closest:.1e})");
        }
    }
    let expected: Vec<String> = (0..6)
        .map(|m| mes_phase(3, m))
        .filter(|&p| p <= PI)
        .map(|p| format!("{p:.6}"))
        .collect();
    println!("quantized phases in [0, pi]: {}", expected.join(", "));

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, spectrum_csv(&scan, &params, None))?;
        println!("wrote {path}");
    }
    Ok(())
}
