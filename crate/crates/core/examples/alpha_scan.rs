//! Final fidelity against the ramp rate for a few interaction strengths.
//!
//!     cargo run --release --example alpha_scan -- 12

use gauge_ring::analytic::construct_mes;
use gauge_ring::dynamics::{log_grid, scan_alpha, EvolveSettings};
use gauge_ring::model::ModelParams;

fn main() -> gauge_ring::Result<()> {
    let points: usize = std::env::args().nth(1).map_or(12, |a| a.parse().expect("point count"));
    let rates = log_grid(1e-3, 1e-1, points);
    let settings = EvolveSettings {
        samples: 21,
        ..EvolveSettings::default()
    };
    for (label, u) in [("C = 8U", 0.125), ("C = 4U", 0.25), ("C = U", 1.0)] {
        let params = ModelParams::new(3, 2, 1.0, u, u)?;
        let target = construct_mes(&params.basis(), 3);
        let rows = scan_alpha(&params, &rates, &target, &settings)?;
        let best = rows.iter().max_by(|a, b| a.fidelity.total_cmp(&b.fidelity)).expect("non-empty grid");
        println!("{label}: best F = {:.4} at alpha = {:.4} (peak K {:.3})", best.fidelity, best.rate, best.peak_schmidt);
        for r in &rows {
            println!("    alpha = {:.5}  F = {:.5}  K_final = {:.4}", r.rate, r.fidelity, r.final_schmidt);
        }
    }
    Ok(())
}
