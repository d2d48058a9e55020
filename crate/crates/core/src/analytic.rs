//! Closed-form zero-energy maximally entangled states and the Landau-Zener
//! estimate.
//!
//! For `U = V` and equal phases `phi = m pi / L - pi/2`, the paired state
//!
//! ```text
//! |psi_m> = d^{-1/2} sum_n exp(2 pi i m p(n) / L) |n>_A |n>_B
//! ```
//!
//! is annihilated separately by the kinetic and the interaction terms. The
//! integer `p(n)` must grow by one whenever a particle moves from site
//! `j+1` to site `j`; we use `p(n) = -sum_j j n_j` with one-based `j`.
//! The condition only involves `phi_A + phi_B`, so the same state survives
//! for unequal phases with the right average.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{Basis, FockState};
use crate::model::{joint_index, reduce_phase};

/// Absolute tolerance used by [`mes_condition_mixed`].
pub const PHASE_MATCH_TOL: f64 = 1e-9;

/// Phase `m pi / L - pi/2` reduced to `[0, 2pi)`. `m` is not reduced.
pub fn mes_phase(sites: usize, winding: i64) -> f64 {
    reduce_phase(winding as f64 * PI / sites as f64 - FRAC_PI_2)
}

/// Winding `m` in `0..2L` with `(phi_A + phi_B)/2 == mes_phase(L, m)`, if any.
pub fn mes_condition_mixed(phase_a: f64, phase_b: f64, sites: usize) -> Option<i64> {
    let mean = 0.5 * (phase_a + phase_b);
    (0..2 * sites as i64).find(|&m| {
        let diff = (mean - mes_phase(sites, m)).rem_euclid(TAU);
        diff.min(TAU - diff) < PHASE_MATCH_TOL
    })
}

/// `p(n) = -sum_j j n_j` with one-based site labels.
pub fn phase_index(state: &FockState) -> i64 {
    -state
        .occupations()
        .iter()
        .enumerate()
        .map(|(j, &n)| (j as i64 + 1) * n as i64)
        .sum::<i64>()
}

/// Analytic maximally entangled state `|psi_m>` on the joint space.
#[derive(Clone, Debug)]
pub struct MesState {
    winding: i64,
    species_dim: usize,
    sites: usize,
    phase_indices: Vec<i64>,
    amplitudes: DVector<Complex64>,
}

impl MesState {
    /// Winding reduced to `0..L`.
    pub fn winding(&self) -> i64 {
        self.winding
    }

    pub fn species_dim(&self) -> usize {
        self.species_dim
    }

    /// Phase at which this state is a zero-energy eigenstate (for `U = V`).
    pub fn phase(&self) -> f64 {
        mes_phase(self.sites, self.winding)
    }

    /// `p(n)` for the `q`-th basis state.
    pub fn phase_indices(&self) -> &[i64] {
        &self.phase_indices
    }

    pub fn vector(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_vector(self) -> DVector<Complex64> {
        self.amplitudes
    }
}

/// Builds `|psi_m>`; `m` only matters modulo `L`.
pub fn construct_mes(basis: &Basis, winding: i64) -> MesState {
    let d = basis.dim();
    let sites = basis.sites() as i64;
    let winding = winding.rem_euclid(sites);
    let norm = 1.0 / (d as f64).sqrt();
    let mut amplitudes = DVector::zeros(d * d);
    let mut phase_indices = Vec::with_capacity(d);
    for (q, state) in basis.iter() {
        let p = phase_index(state);
        // reduce the exponent exactly before going to floating point
        let k = (winding * p).rem_euclid(sites);
        let angle = TAU * k as f64 / sites as f64;
        amplitudes[joint_index(q, q, d)] = Complex64::from_polar(norm, angle);
        phase_indices.push(p);
    }
    MesState {
        winding,
        species_dim: d,
        sites: basis.sites(),
        phase_indices,
        amplitudes,
    }
}

/// Landau-Zener probability of a diabatic passage, `exp(-2 pi D^2 / v)`,
/// with `D = gap / 2` (half the minimal adiabatic splitting) and
/// `v = rate * slope` the sweep rate of the diabatic energy difference
/// (`slope` in energy per radian, `rate` in radians per unit time).
pub fn lz_probability(gap: f64, slope: f64, rate: f64) -> Result<f64> {
    if !(gap >= 0.0) {
        return Err(Error::Domain(format!("gap must be >= 0, got {gap}")));
    }
    if !(slope > 0.0) {
        return Err(Error::Domain(format!("diabatic slope must be > 0, got {slope}")));
    }
    if !(rate > 0.0) {
        return Err(Error::Domain(format!("sweep rate must be > 0, got {rate}")));
    }
    let half = 0.5 * gap;
    Ok((-TAU * half * half / (rate * slope)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_6;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn phases_for_three_sites() {
        assert!(close(mes_phase(3, 3), FRAC_PI_2));
        assert!(close(mes_phase(3, 2), FRAC_PI_6));
        assert!(close(mes_phase(3, 1), 11.0 * FRAC_PI_6));
        assert!(close(mes_phase(4, 2), 0.0));
    }

    #[test]
    fn mixed_condition() {
        assert_eq!(mes_condition_mixed(FRAC_PI_2, FRAC_PI_2, 3), Some(3));
        assert_eq!(mes_condition_mixed(FRAC_PI_2 + 0.3, FRAC_PI_2 - 0.3, 3), Some(3));
        assert_eq!(mes_condition_mixed(0.0, 0.0, 3), None);
        assert_eq!(mes_condition_mixed(FRAC_PI_2 + 1e-6, FRAC_PI_2, 3), None);
    }

    #[test]
    fn uniform_amplitudes_for_multiples_of_l() {
        let basis = Basis::new(3, 2).unwrap();
        let d = basis.dim();
        for m in [0, 3, -3, 6] {
            let mes = construct_mes(&basis, m);
            for q in 0..d {
                let a = mes.vector()[joint_index(q, q, d)];
                assert!((a - Complex64::from(1.0 / 6f64.sqrt())).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn support_and_norm() {
        let basis = Basis::new(4, 2).unwrap();
        let d = basis.dim();
        let mes = construct_mes(&basis, 1);
        assert!((mes.vector().norm() - 1.0).abs() < 1e-14);
        let nonzero: Vec<usize> = (0..d * d).filter(|&i| mes.vector()[i].norm() > 0.0).collect();
        assert_eq!(nonzero.len(), d);
        for i in nonzero {
            assert_eq!(i / d, i % d);
            assert!((mes.vector()[i].norm() - 1.0 / (d as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn phase_index_recursion() {
        let basis = Basis::new(4, 3).unwrap();
        for state in basis.states() {
            for j in 0..4 {
                // moving a particle from site j+1 to site j raises p by one
                if let Some((moved, _)) = state.hop(j + 1, j) {
                    let expected = if j + 1 == 4 { 1 - 4 } else { 1 };
                    assert_eq!(phase_index(&moved) - phase_index(state), expected);
                }
            }
        }
    }

    #[test]
    fn landau_zener() {
        assert_eq!(lz_probability(0.0, 1.0, 0.1).unwrap(), 1.0);
        assert!(lz_probability(1.0, 1.0, 1e-6).unwrap() < 1e-100);
        // 2 pi D^2 / v = ln 2 with D = gap/2
        let v = 0.3 * 2.0;
        let half = (2f64.ln() * v / TAU).sqrt();
        assert!((lz_probability(2.0 * half, 2.0, 0.3).unwrap() - 0.5).abs() < 1e-14);
        assert!(lz_probability(1.0, 0.0, 1.0).is_err());
        assert!(lz_probability(1.0, 1.0, -1.0).is_err());
        assert!(lz_probability(-1.0, 1.0, 1.0).is_err());
    }
}
