//! Entanglement and transport observables on joint pure states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_current_joint, joint_index, HermitianOperator, ModelParams};

/// Tolerance on `| ||psi|| - 1 |` accepted by the measures.
pub const NORM_TOL: f64 = 1e-6;

fn check_normalized(state: &DVector<Complex64>) -> Result<()> {
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

fn check_joint(state: &DVector<Complex64>, d: usize) -> Result<()> {
    if state.len() != d * d {
        return Err(Error::DimensionMismatch {
            expected: d * d,
            found: state.len(),
        });
    }
    Ok(())
}

/// Reduced density matrix of one species.
#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix(DMatrix<Complex64>);

impl ReducedDensityMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr(rho^2)`; equals the Frobenius norm squared for Hermitian `rho`.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// `-Tr(rho ln rho)`; diagnostic only.
    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .filter(|&p| p > 1e-300)
            .map(|p| -p * p.ln())
            .sum()
    }
}

/// `rho_B[q, q'] = sum_p psi[p d + q] conj(psi[p d + q'])`.
pub fn reduce_to_b(state: &DVector<Complex64>, d: usize) -> Result<ReducedDensityMatrix> {
    check_joint(state, d)?;
    check_normalized(state)?;
    let mut rho = DMatrix::zeros(d, d);
    for p in 0..d {
        for q in 0..d {
            let a = state[joint_index(p, q, d)];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for r in 0..d {
                rho[(q, r)] += a * state[joint_index(p, r, d)].conj();
            }
        }
    }
    Ok(ReducedDensityMatrix(rho))
}

/// `rho_A[p, p'] = sum_q psi[p d + q] conj(psi[p' d + q])`.
pub fn reduce_to_a(state: &DVector<Complex64>, d: usize) -> Result<ReducedDensityMatrix> {
    check_joint(state, d)?;
    check_normalized(state)?;
    let mut rho = DMatrix::zeros(d, d);
    for p in 0..d {
        for r in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for q in 0..d {
                acc += state[joint_index(p, q, d)] * state[joint_index(r, q, d)].conj();
            }
            rho[(p, r)] = acc;
        }
    }
    Ok(ReducedDensityMatrix(rho))
}

/// Raw Schmidt number `1 / Tr(rho_B^2)` and its normalized form
/// `(raw - 1) / (d - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchmidtNumber {
    pub raw: f64,
    pub normalized: f64,
}

impl SchmidtNumber {
    pub fn from_purity(purity: f64, d: usize) -> Self {
        let raw = 1.0 / purity;
        let normalized = if d > 1 { (raw - 1.0) / (d as f64 - 1.0) } else { 0.0 };
        SchmidtNumber { raw, normalized }
    }
}

pub fn schmidt_number(state: &DVector<Complex64>, d: usize) -> Result<SchmidtNumber> {
    let rho = reduce_to_b(state, d)?;
    Ok(SchmidtNumber::from_purity(rho.purity(), d))
}

/// `|<target|state>|^2`.
pub fn fidelity(state: &DVector<Complex64>, target: &DVector<Complex64>) -> Result<f64> {
    if state.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: target.len(),
            found: state.len(),
        });
    }
    check_normalized(state)?;
    check_normalized(target)?;
    Ok(target.dotc(state).norm_sqr())
}

/// Current `J = <J_A + J_B>` and the renormalized `1 - J / C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurrentReading {
    pub current: f64,
    pub renormalized: f64,
}

/// Uses a prebuilt joint current operator.
pub fn current_expectation_with(
    state: &DVector<Complex64>,
    current_op: &HermitianOperator,
    tunneling: f64,
) -> Result<CurrentReading> {
    check_normalized(state)?;
    if !(tunneling > 0.0) {
        return Err(Error::Domain(
            "renormalized current needs tunneling C > 0".into(),
        ));
    }
    let current = current_op.expectation(state)?;
    Ok(CurrentReading {
        current,
        renormalized: 1.0 - current / tunneling,
    })
}

pub fn current_expectation(state: &DVector<Complex64>, params: &ModelParams) -> Result<CurrentReading> {
    let op = build_current_joint(params);
    current_expectation_with(state, &op, params.tunneling())
}
