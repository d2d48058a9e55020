//! Two-species Bose-Hubbard rings threaded by synthetic gauge (Peierls) phases.
//!
//! Each species holds `N` bosons on an `L`-site ring and forms a qudit of
//! dimension `d = binom(N + L - 1, N)`. With balanced interactions (`U = V`)
//! and suitably quantized phases, the paired states `|psi_m>` are zero-energy
//! eigenstates of both the kinetic and interaction terms and are maximally
//! entangled between the species. The crate covers
//!
//! * [`fock`]: Fock bases and bosonic hopping,
//! * [`model`]: Hamiltonian, interaction and current operators,
//! * [`analytic`]: the closed-form maximally entangled states and the
//!   Landau-Zener estimate,
//! * [`spectra`]: eigendecomposition, phase scans and avoided crossings,
//! * [`dynamics`]: the phase-ramp preparation protocol,
//! * [`measures`]: Schmidt number, fidelity and current,
//! * [`harness`]: run configuration, sweeps and CSV/JSON output.
//!
//! Natural units `hbar = 1` are used throughout; energies are in units of the
//! tunneling `C` where that matters.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod harness;
pub mod measures;
pub mod model;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64;
