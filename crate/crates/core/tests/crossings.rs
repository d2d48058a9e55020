use std::f64::consts::{FRAC_PI_3, PI};

use gauge_ring::analytic::lz_probability;
use gauge_ring::dynamics::{evolve, initial_ground_state, EvolveSettings, RampSchedule};
use gauge_ring::measures::fidelity;
use gauge_ring::model::{momentum_of, HamiltonianParts, HermitianOperator, ModelParams, OperatorLabel};
use gauge_ring::spectra::{locate_crossing, locate_sector_crossing, scan_family, scan_sector, sector_ground_state, CrossingReport};
use gauge_ring::Complex64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_level(phi0: f64, slope: f64, gap: f64) -> impl Fn(f64) -> DMatrix<Complex64> + Sync {
    move |phi| {
        let z = 0.5 * slope * (phi - phi0);
        let x = 0.5 * gap;
        DMatrix::from_row_slice(2, 2, &[z, x, x, -z]).map(Complex64::from)
    }
}

#[test]
fn two_level_crossing_parameters_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    for _ in 0..100 {
        let phi0 = rng.random_range(0.2..0.8);
        let slope = rng.random_range(0.5..5.0);
        let gap = slope * 10f64.powf(rng.random_range(-3.0..0.0));
        let h = two_level(phi0, slope, gap);
        let family = |phi: f64| Ok(HermitianOperator::from_dense(h(phi), OperatorLabel::Generic));
        let scan = scan_family(family, &grid, false, 10.0 * slope).unwrap();
        let report = locate_crossing(&scan, (0, 1), |phi| {
            let mut e: Vec<f64> = h(phi).symmetric_eigenvalues().iter().copied().collect();
            e.sort_by(|a, b| a.total_cmp(b));
            Ok(e)
        })
        .unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(report.phi_c, phi0) < 1e-6, "phi0 {phi0} -> {}", report.phi_c);
        assert!(rel(report.gap, gap) < 1e-6, "gap {gap} -> {}", report.gap);
        assert!(rel(report.diabatic_slope, slope) < 1e-6, "slope {slope} -> {}", report.diabatic_slope);
    }
}

fn ground_sector_crossing(u: f64) -> (ModelParams, usize, CrossingReport) {
    let params = ModelParams::new(3, 2, 1.0, u, u).unwrap();
    let parts = HamiltonianParts::new(&params).unwrap();
    let (ground, _) = initial_ground_state(&parts).unwrap();
    let k = momentum_of(parts.basis(), &ground).unwrap();
    let grid: Vec<f64> = (0..=160).map(|i| PI / 2.0 * i as f64 / 160.0).collect();
    let scan = scan_sector(&params, k, &grid, true).unwrap();
    (params, k, locate_sector_crossing(&params, k, &scan, (0, 1)).unwrap())
}

#[test]
fn lowest_band_crossing_sits_near_pi_over_three() {
    for u in [1.0, 0.25] {
        let (_, _, report) = ground_sector_crossing(u);
        assert!((report.phi_c - FRAC_PI_3).abs() < 0.15, "U={u}: {}", report.phi_c);
        assert!(report.gap > 0.0 && report.diabatic_slope > 0.0);
    }
}

#[test]
fn measured_transfer_agrees_with_landau_zener() {
    let settings = EvolveSettings {
        samples: 2,
        ..EvolveSettings::default()
    };
    for (u, rates) in [(1.0, [0.01, 0.0316, 0.1]), (0.25, [0.001, 0.00316, 0.01])] {
        let (params, k, report) = ground_sector_crossing(u);
        let parts = HamiltonianParts::new(&params).unwrap();
        let (ground, _) = initial_ground_state(&parts).unwrap();
        let stop = report.phi_c + 0.1;
        let (_, adiabatic) = sector_ground_state(&params, k, stop).unwrap();
        for alpha in rates {
            let schedule = RampSchedule::linear(alpha, 0.0, stop).unwrap();
            let run = evolve(&ground, &parts, &schedule, &settings, None).unwrap();
            let measured = 1.0 - fidelity(run.final_state(), &adiabatic).unwrap();
            let predicted = lz_probability(report.gap, report.diabatic_slope, alpha).unwrap();
            let ratio = measured / predicted;
            assert!((0.5..=2.0).contains(&ratio), "U={u} alpha={alpha}: {measured} vs {predicted}");
        }
    }
}
