//! Checks the closed-form maximally entangled states against the kinetic,
//! interaction and total Hamiltonians, for several ring sizes and for
//! unequal species phases with the same mean.

use gauge_ring::analytic::{construct_mes, mes_phase};
use gauge_ring::measures::{current_expectation, schmidt_number};
use gauge_ring::model::{build_hamiltonian, build_interaction, build_kinetic_joint, ModelParams};

fn main() -> gauge_ring::Result<()> {
    println!(" L  N  m  phi_A    phi_B    |K psi|   |Hint psi|  |H psi|    K      J");
    for sites in 3..=5 {
        for m in 0..sites as i64 {
            for delta in [0.0, 0.3] {
                let phi = mes_phase(sites, m);
                let params = ModelParams::new(sites, 2, 1.0, 0.7, 0.7)?.with_phases(phi + delta, phi - delta);
                let basis = params.basis();
                let mes = construct_mes(&basis, m);
                let psi = mes.vector();
                let kin = build_kinetic_joint(&params).apply(psi)?.norm();
                let int = build_interaction(&basis, params.intra(), params.inter()).apply(psi)?.norm();
                let tot = build_hamiltonian(&params).apply(psi)?.norm();
                let k = schmidt_number(psi, basis.dim())?.normalized;
                let j = current_expectation(psi, &params)?.current;
                println!(
                    "{sites:2} {:2} {m:2}  {:.5}  {:.5}  {kin:.1e}  {int:.1e}  {tot:.1e}  {k:.4}  {j:+.1e}",
                    2,
                    params.phase_a(),
                    params.phase_b()
                );
            }
        }
    }

    // unbalanced interactions break the zero-energy property
    let params = ModelParams::new(3, 2, 1.0, 1.0, 0.5)?.with_phase(mes_phase(3, 3));
    let mes = construct_mes(&params.basis(), 3);
    let r = build_hamiltonian(&params).apply(mes.vector())?.norm();
    println!("U = 1, V = 0.5: |H psi| = {r:.4}");
    Ok(())
}
