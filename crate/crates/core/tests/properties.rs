use gauge_ring::fock::Basis;
use gauge_ring::measures::{fidelity, reduce_to_a, reduce_to_b, schmidt_number};
use gauge_ring::Complex64;
use nalgebra::DVector;
use proptest::prelude::*;

const D: usize = 6;

fn joint_state() -> impl Strategy<Value = DVector<Complex64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * D * D)
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
        .prop_map(|v| {
            let psi = DVector::from_fn(D * D, |i, _| Complex64::new(v[2 * i], v[2 * i + 1]));
            let n = psi.norm();
            psi / Complex64::from(n)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn reduced_state_is_a_density_matrix(psi in joint_state()) {
        let rho = reduce_to_b(&psi, D).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        let m = rho.matrix();
        prop_assert!((m - m.adjoint()).camax() < 1e-12);
        for e in rho.eigenvalues() {
            prop_assert!(e > -1e-12);
        }
    }
}

proptest! {
    #[test]
    fn schmidt_number_is_symmetric_and_bounded(psi in joint_state()) {
        let from_b = 1.0 / reduce_to_b(&psi, D).unwrap().purity();
        let from_a = 1.0 / reduce_to_a(&psi, D).unwrap().purity();
        prop_assert!((from_a - from_b).abs() < 1e-10);
        let k = schmidt_number(&psi, D).unwrap();
        prop_assert!(k.raw >= 1.0 - 1e-12 && k.raw <= D as f64 + 1e-12);
        prop_assert!(k.normalized >= -1e-12 && k.normalized <= 1.0 + 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(psi in joint_state(), theta in 0.0f64..std::f64::consts::TAU) {
        let rotated = &psi * Complex64::from_polar(1.0, theta);
        prop_assert!((fidelity(&psi, &rotated).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hop_round_trip(l in 3usize..=8, n in 1usize..=6, pick in 0usize..10_000, from in 0usize..8, shift in 1usize..8) {
        let basis = Basis::new(l, n).unwrap();
        let state = basis.state(pick % basis.dim()).clone();
        let from = from % l;
        let to = (from + shift % (l - 1) + 1) % l;
        prop_assume!(to != from);
        if let Some((moved, amp)) = state.hop(from, to) {
            let (back, amp_back) = moved.hop(to, from).unwrap();
            prop_assert_eq!(&back, &state);
            // a^dag_to a_from followed by its reverse gives n_from (n_to + 1)
            let occ = state.occupations();
            let expected = occ[from] as f64 * (occ[to] as f64 + 1.0);
            prop_assert!((amp * amp_back - expected).abs() < 1e-12);
            prop_assert!(basis.index_of(&moved).is_some());
        } else {
            prop_assert_eq!(state.occupations()[from], 0);
        }
    }
}

#[test]
fn schmidt_extremes() {
    let mut product = DVector::zeros(D * D);
    product[2 * D + 4] = Complex64::from(1.0);
    let k = schmidt_number(&product, D).unwrap();
    assert!((k.raw - 1.0).abs() < 1e-14 && k.normalized.abs() < 1e-14);

    let maximal = DVector::from_fn(D * D, |i, _| {
        if i / D == i % D {
            Complex64::from_polar(1.0 / (D as f64).sqrt(), i as f64)
        } else {
            Complex64::from(0.0)
        }
    });
    let k = schmidt_number(&maximal, D).unwrap();
    assert!((k.raw - D as f64).abs() < 1e-12 && (k.normalized - 1.0).abs() < 1e-12);
}
