use std::f64::consts::PI;

use gauge_ring::analytic::{construct_mes, lz_probability, mes_condition_mixed, mes_phase};
use gauge_ring::fock::{dimension, Basis, FockState};
use gauge_ring::measures::{current_expectation, reduce_to_b, schmidt_number};
use gauge_ring::model::{build_hamiltonian, build_interaction, build_kinetic_joint, ModelParams};

fn residuals(p: &ModelParams, m: i64) -> (f64, f64, f64) {
    let basis = p.basis();
    let psi = construct_mes(&basis, m).into_vector();
    (
        build_kinetic_joint(p).apply(&psi).unwrap().norm(),
        build_interaction(&basis, p.intra(), p.inter()).apply(&psi).unwrap().norm(),
        build_hamiltonian(p).apply(&psi).unwrap().norm(),
    )
}

#[test]
fn zero_energy_for_all_sizes_and_windings() {
    for l in 3..=5 {
        for n in 1..=2 {
            for m in 0..(2 * l as i64) {
                let p = ModelParams::new(l, n, 1.0, 0.8, 0.8).unwrap().with_phase(mes_phase(l, m));
                let (k, i, h) = residuals(&p, m);
                assert!(k < 1e-12 && i < 1e-12 && h < 1e-12, "L={l} N={n} m={m}: {k:e} {i:e} {h:e}");
            }
        }
    }
}

#[test]
fn mixed_phases_with_the_right_mean() {
    for &delta in &[0.1, 0.3, 0.7] {
        for m in 0..3 {
            let phi = mes_phase(3, m);
            let p = ModelParams::new(3, 2, 1.0, 0.5, 0.5).unwrap().with_phases(phi + delta, phi - delta);
            assert_eq!(mes_condition_mixed(p.phase_a(), p.phase_b(), 3).map(|w| w.rem_euclid(3)), Some(m));
            let (_, _, h) = residuals(&p, m);
            assert!(h < 1e-12, "delta={delta} m={m}: {h:e}");
        }
    }
}

#[test]
fn residual_grows_off_the_quantized_phase() {
    for m in 0..3 {
        let p = ModelParams::new(3, 2, 1.0, 0.5, 0.5).unwrap().with_phase(mes_phase(3, m) + 0.1);
        let (k, _, _) = residuals(&p, m);
        assert!(k > 0.1, "m={m}: {k}");
    }
}

#[test]
fn closed_form_states_are_maximally_entangled_and_currentless() {
    for l in 3..=5 {
        let basis = Basis::new(l, 2).unwrap();
        for m in 0..l as i64 {
            let psi = construct_mes(&basis, m).into_vector();
            let k = schmidt_number(&psi, basis.dim()).unwrap();
            assert!((k.normalized - 1.0).abs() < 1e-10);
            let rho = reduce_to_b(&psi, basis.dim()).unwrap();
            for e in rho.eigenvalues() {
                assert!((e - 1.0 / basis.dim() as f64).abs() < 1e-12);
            }
            let p = ModelParams::new(l, 2, 1.0, 1.0, 1.0).unwrap().with_phase(mes_phase(l, m));
            assert!(current_expectation(&psi, &p).unwrap().current.abs() < 1e-10 / l as f64);
        }
    }
}

#[test]
fn quantized_phases_for_three_sites() {
    // (2l - 1) pi / 6 for l = 1..6
    let mut phases: Vec<f64> = (0..6).map(|m| mes_phase(3, m)).collect();
    phases.sort_by(|a, b| a.total_cmp(b));
    for (l, phi) in (1..=6).zip(phases) {
        assert!((phi - (2 * l - 1) as f64 * PI / 6.0).abs() < 1e-12);
    }
}

#[test]
fn landau_zener_limits() {
    assert_eq!(lz_probability(0.0, 1.0, 0.1).unwrap(), 1.0);
    assert!(lz_probability(1.0, 1.0, 1e-6).unwrap() < 1e-100);
    let p = lz_probability(0.2, 3.0, 0.05).unwrap();
    assert!((p - (-2.0 * PI * 0.01 / 0.15f64).exp()).abs() < 1e-15);
}

fn golden(path: &str) -> Vec<Vec<u8>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().skip(1).map(|t| t.parse().unwrap()).collect())
        .collect()
}

#[test]
fn basis_matches_golden_enumeration() {
    for (l, n) in [(3, 2), (4, 3)] {
        let expected = golden(&format!("{}/tests/data/fock_L{l}_N{n}.txt", env!("CARGO_MANIFEST_DIR")));
        let basis = Basis::new(l, n).unwrap();
        assert_eq!(basis.dim(), expected.len());
        assert_eq!(dimension(l, n).unwrap(), expected.len());
        for (i, occ) in expected.into_iter().enumerate() {
            assert_eq!(basis.state(i).occupations(), occ.as_slice());
            assert_eq!(basis.index_of(&FockState::new(occ)), Some(i));
        }
    }
}
