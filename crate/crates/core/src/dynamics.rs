//! Time evolution under a phase ramp `phi(t)` and the preparation protocol.
//!
//! The propagator is a fourth-order Magnus scheme (two Gauss-Legendre nodes)
//! whose exponentials are taken exactly through Hermitian eigendecomposition,
//! so each step is unitary to rounding. Step size is controlled by step
//! doubling. The state is never renormalized; norm drift is checked instead.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::MesState;
use crate::error::{Error, Result};
use crate::measures::{fidelity, schmidt_number, SchmidtNumber};
use crate::model::{momentum_of, momentum_sector_basis, HamiltonianParts, ModelParams};
use crate::spectra::{eigendecompose_matrix, DEGENERACY_REL_TOL};

/// Largest tolerated `| ||psi|| - 1 |` along a trajectory.
pub const NORM_DRIFT_TOL: f64 = 1e-8;
/// Upper bound on recorded samples per trajectory.
pub const MAX_SAMPLES: usize = 400;

/// A Hamiltonian that depends on time.
pub trait TimeDependentHamiltonian {
    fn dim(&self) -> usize;
    fn matrix(&self, t: f64) -> DMatrix<Complex64>;
}

impl<F> TimeDependentHamiltonian for (usize, F)
where
    F: Fn(f64) -> DMatrix<Complex64>,
{
    fn dim(&self) -> usize {
        self.0
    }
    fn matrix(&self, t: f64) -> DMatrix<Complex64> {
        (self.1)(t)
    }
}

/// How the phase approaches its final value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RampShape {
    /// Constant velocity, stopped instantaneously at `stop`.
    Linear,
    /// Constant velocity, then uniform deceleration to zero velocity over
    /// `duration` (time units), arriving at `stop`.
    SmoothStop { duration: f64 },
}

/// `phi(t) = start + rate * t` until `stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RampSchedule {
    rate: f64,
    start: f64,
    stop: f64,
    shape: RampShape,
}

impl RampSchedule {
    pub fn linear(rate: f64, start: f64, stop: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::Domain(format!("ramp rate must be positive, got {rate}")));
        }
        if !(stop > start) {
            return Err(Error::Domain(format!("ramp must end above its start ({start} -> {stop})")));
        }
        Ok(RampSchedule {
            rate,
            start,
            stop,
            shape: RampShape::Linear,
        })
    }

    pub fn with_smooth_stop(mut self, duration: f64) -> Result<Self> {
        if !(duration > 0.0) || 0.5 * self.rate * duration > self.stop - self.start {
            return Err(Error::Domain(format!(
                "smooth stop of duration {duration} does not fit the ramp"
            )));
        }
        self.shape = RampShape::SmoothStop { duration };
        Ok(self)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn start(&self) -> f64 {
        self.start
    }
    pub fn stop(&self) -> f64 {
        self.stop
    }
    pub fn shape(&self) -> RampShape {
        self.shape
    }

    pub fn duration(&self) -> f64 {
        let linear = (self.stop - self.start) / self.rate;
        match self.shape {
            RampShape::Linear => linear,
            RampShape::SmoothStop { duration } => linear + 0.5 * duration,
        }
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        match self.shape {
            RampShape::Linear => (self.start + self.rate * t).min(self.stop),
            RampShape::SmoothStop { duration } => {
                let cruise = self.duration() - duration;
                if t <= cruise {
                    self.start + self.rate * t
                } else {
                    let s = (t - cruise).min(duration);
                    self.start + self.rate * cruise + self.rate * s - 0.5 * self.rate * s * s / duration
                }
            }
        }
    }
}

/// Counters from one propagation call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Adaptive fourth-order Magnus propagator for `i d psi/dt = H(t) psi`.
#[derive(Clone, Copy, Debug)]
pub struct MagnusPropagator {
    /// Error per unit time, in units of `energy_scale`.
    accuracy: f64,
    energy_scale: f64,
}

const ROUNDING_FLOOR: f64 = 1e-14;
const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_43; // sqrt(3)/12

impl MagnusPropagator {
    /// `accuracy` must lie in `[1e-12, 1e-6]`; the accepted local error per
    /// step of length `h` is `accuracy * h * energy_scale`.
    pub fn new(accuracy: f64, energy_scale: f64) -> Result<Self> {
        if !(1e-12..=1e-6).contains(&accuracy) {
            return Err(Error::Domain(format!("accuracy must lie in [1e-12, 1e-6], got {accuracy}")));
        }
        if !(energy_scale > 0.0) {
            return Err(Error::Domain(format!("energy scale must be positive, got {energy_scale}")));
        }
        Ok(MagnusPropagator { accuracy, energy_scale })
    }

    fn step<H: TimeDependentHamiltonian>(&self, h: &H, psi: &DVector<Complex64>, t: f64, dt: f64) -> Result<DVector<Complex64>> {
        let h1 = h.matrix(t + (0.5 - GAUSS_OFFSET) * dt);
        let h2 = h.matrix(t + (0.5 + GAUSS_OFFSET) * dt);
        let comm = &h2 * &h1 - &h1 * &h2;
        // Omega = -i M with M Hermitian
        let m = (&h1 + &h2) * Complex64::from(0.5 * dt) + comm * Complex64::new(0.0, -COMMUTATOR_WEIGHT * dt * dt);
        let sys = eigendecompose_matrix(m, "magnus-generator")?;
        let coeffs = sys.vectors.adjoint() * psi;
        let phased = DVector::from_fn(coeffs.len(), |k, _| coeffs[k] * Complex64::from_polar(1.0, -sys.values[k]));
        Ok(&sys.vectors * phased)
    }

    /// Propagates `psi` from `t0` to `t1`, starting with step `dt_hint` and
    /// returning the state and the step size to reuse next time.
    pub fn propagate<H: TimeDependentHamiltonian>(
        &self,
        h: &H,
        psi: &DVector<Complex64>,
        t0: f64,
        t1: f64,
        dt_hint: f64,
        stats: &mut StepStats,
    ) -> Result<(DVector<Complex64>, f64)> {
        if psi.len() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: psi.len(),
            });
        }
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok((psi.clone(), dt_hint));
        }
        let min_dt = 1e-12 * span.max(1.0);
        let mut psi = psi.clone();
        let mut t = t0;
        let mut dt = dt_hint.min(span).max(min_dt);
        let mut next_hint = dt;
        while t < t1 {
            let remaining = t1 - t;
            let last = dt >= remaining;
            let step_dt = if last { remaining } else { dt };
            let coarse = self.step(h, &psi, t, step_dt)?;
            let half = self.step(h, &psi, t, 0.5 * step_dt)?;
            let fine = self.step(h, &half, t + 0.5 * step_dt, 0.5 * step_dt)?;
            // Richardson estimate of the fine solution's local error (order 4)
            let err = (&fine - &coarse).norm() / 15.0;
            // short slivers before a sample time would otherwise ask for less
            // than the rounding noise of the exponential itself
            let tol = (self.accuracy * step_dt * self.energy_scale).max(ROUNDING_FLOOR);
            let factor = if err > 0.0 {
                (0.9 * (tol / err).powf(0.2)).clamp(0.2, 2.0)
            } else {
                2.0
            };
            if err <= tol {
                psi = fine;
                t = if last { t1 } else { t + step_dt };
                stats.accepted += 1;
                if !last {
                    dt = step_dt * factor;
                    next_hint = dt;
                } else {
                    next_hint = dt.max(step_dt * factor);
                }
                let drift = (psi.norm() - 1.0).abs();
                if drift > NORM_DRIFT_TOL {
                    return Err(Error::NormDrift { drift, time: t });
                }
            } else {
                stats.rejected += 1;
                dt = step_dt * factor;
                if dt < min_dt {
                    return Err(Error::StepUnderflow { time: t });
                }
            }
        }
        Ok((psi, next_hint))
    }
}

/// Settings shared by trajectory-producing operations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvolveSettings {
    /// Number of recorded samples including both end points (2..=400).
    pub samples: usize,
    /// Integrator accuracy per unit time, in units of `C`.
    pub accuracy: f64,
    /// Propagate inside the initial state's momentum sector when the initial
    /// state is a translation eigenstate (exact; translation commutes with
    /// `H(phi)` along the ramp).
    pub use_translation_symmetry: bool,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        EvolveSettings {
            samples: 200,
            accuracy: 1e-9,
            use_translation_symmetry: true,
        }
    }
}

/// Observables recorded at one sample time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub time: f64,
    pub phase: f64,
    pub fidelity: Option<f64>,
    pub schmidt: SchmidtNumber,
    pub energy: f64,
    pub current: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
    pub observables: Vec<Observables>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<Complex64> {
        self.states.last().expect("trajectories have at least two samples")
    }

    pub fn peak_schmidt(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| o.schmidt.normalized)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.observables.iter().map(|o| (o.norm - 1.0).abs()).fold(0.0, f64::max)
    }
}

struct Ramp<'a> {
    parts: &'a HamiltonianParts,
    schedule: RampSchedule,
}

impl TimeDependentHamiltonian for Ramp<'_> {
    fn dim(&self) -> usize {
        self.parts.dim()
    }
    fn matrix(&self, t: f64) -> DMatrix<Complex64> {
        let phi = self.schedule.phase_at(t);
        self.parts.matrix_at(phi, phi)
    }
}

/// Evolves `initial` under `H(phi(t))` with both species following the
/// schedule. `target`, when given, is used for the recorded fidelity.
pub fn evolve(
    initial: &DVector<Complex64>,
    parts: &HamiltonianParts,
    schedule: &RampSchedule,
    settings: &EvolveSettings,
    target: Option<&DVector<Complex64>>,
) -> Result<Trajectory> {
    if !(2..=MAX_SAMPLES).contains(&settings.samples) {
        return Err(Error::Domain(format!(
            "sample count must lie in 2..={MAX_SAMPLES}, got {}",
            settings.samples
        )));
    }
    let norm = initial.norm();
    if (norm - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let params = parts.params();
    let scale = if params.tunneling() > 0.0 { params.tunneling() } else { 1.0 };
    let propagator = MagnusPropagator::new(settings.accuracy, scale)?;
    let d = parts.basis().dim();
    let total = schedule.duration();
    let times: Vec<f64> = (0..settings.samples)
        .map(|i| total * i as f64 / (settings.samples - 1) as f64)
        .collect();

    let record = |t: f64, psi: &DVector<Complex64>| -> Result<Observables> {
        let phi = schedule.phase_at(t);
        let h = parts.matrix_at(phi, phi);
        let j = parts.current_at(phi, phi);
        let norm = psi.norm();
        let unit = psi / Complex64::from(norm);
        Ok(Observables {
            time: t,
            phase: phi,
            fidelity: target.map(|tgt| fidelity(&unit, tgt)).transpose()?,
            schmidt: schmidt_number(&unit, d)?,
            energy: psi.dotc(&(&h * psi)).re,
            current: psi.dotc(&(&j * psi)).re,
            norm,
        })
    };

    // propagate in a momentum sector when possible, mapping back at samples
    let embedding = if settings.use_translation_symmetry {
        momentum_of(parts.basis(), initial).map(|k| momentum_sector_basis(parts.basis(), k))
    } else {
        None
    };
    let reduced_parts = embedding.as_ref().map(|q| parts.projected(q));
    let ramp = Ramp {
        parts: reduced_parts.as_ref().unwrap_or(parts),
        schedule: *schedule,
    };
    let mut reduced = match &embedding {
        Some(q) => q.adjoint() * initial,
        None => initial.clone(),
    };
    let expand = |v: &DVector<Complex64>| match &embedding {
        Some(q) => q * v,
        None => v.clone(),
    };

    let mut stats = StepStats::default();
    let mut states = Vec::with_capacity(times.len());
    let mut observables = Vec::with_capacity(times.len());
    // start with a fraction of the fastest oscillation period
    let mut dt = 0.1 / (scale * (1.0 + parts.params().sites() as f64));
    observables.push(record(0.0, initial)?);
    states.push(initial.clone());
    for w in times.windows(2) {
        let (next, hint) = propagator.propagate(&ramp, &reduced, w[0], w[1], dt, &mut stats)?;
        reduced = next;
        dt = hint;
        let psi = expand(&reduced);
        observables.push(record(w[1], &psi)?);
        states.push(psi);
    }
    Ok(Trajectory {
        times,
        states,
        observables,
        stats,
    })
}

/// Result of one preparation run.
#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub rate: f64,
    pub fidelity: f64,
    pub final_schmidt: SchmidtNumber,
    pub peak_schmidt: f64,
    /// The ground state at `phi = 0` was degenerate (the start is then
    /// ambiguous and the solver's choice is used).
    pub degenerate_start: bool,
    pub trajectory: Trajectory,
}

impl ProtocolOutcome {
    pub fn final_state(&self) -> &DVector<Complex64> {
        self.trajectory.final_state()
    }
}

/// Ground state of `H(0)` for the template.
pub fn initial_ground_state(parts: &HamiltonianParts) -> Result<(DVector<Complex64>, bool)> {
    let sys = eigendecompose_matrix(parts.matrix_at(0.0, 0.0), "total")?;
    let clusters = sys.clusters(DEGENERACY_REL_TOL);
    let degenerate = clusters.first().is_some_and(|c| c.len() > 1);
    Ok((sys.vector(0), degenerate))
}

/// Ramps from the `phi = 0` ground state to `phi = pi/2` at rate `rate`
/// and compares with `target`.
pub fn run_protocol(template: &ModelParams, rate: f64, target: &MesState, settings: &EvolveSettings) -> Result<ProtocolOutcome> {
    let parts = HamiltonianParts::new(&template.with_phase(0.0))?;
    run_protocol_with(&parts, rate, target.vector(), settings)
}

/// [`run_protocol`] with prebuilt parts and an arbitrary target vector.
pub fn run_protocol_with(
    parts: &HamiltonianParts,
    rate: f64,
    target: &DVector<Complex64>,
    settings: &EvolveSettings,
) -> Result<ProtocolOutcome> {
    let params = parts.params();
    if params.intra() != params.inter() {
        log::warn!(
            "protocol run with U = {} != V = {}: the target is not an eigenstate",
            params.intra(),
            params.inter()
        );
    }
    let (initial, degenerate_start) = initial_ground_state(parts)?;
    if degenerate_start {
        log::warn!("ground state at phi = 0 is degenerate");
    }
    let schedule = RampSchedule::linear(rate, 0.0, FRAC_PI_2)?;
    let trajectory = evolve(&initial, parts, &schedule, settings, Some(target))?;
    let last = trajectory.observables.last().expect("at least two samples");
    Ok(ProtocolOutcome {
        rate,
        fidelity: last.fidelity.expect("target supplied"),
        final_schmidt: last.schmidt,
        peak_schmidt: trajectory.peak_schmidt(),
        degenerate_start,
        trajectory,
    })
}

/// One row of an α scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaPoint {
    pub rate: f64,
    pub fidelity: f64,
    pub final_schmidt: f64,
    pub peak_schmidt: f64,
}

/// Runs the protocol for every rate in parallel; rows keep grid order.
pub fn scan_alpha(template: &ModelParams, rates: &[f64], target: &MesState, settings: &EvolveSettings) -> Result<Vec<AlphaPoint>> {
    if rates.is_empty() || rates.iter().any(|&a| !(a > 0.0)) || rates.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("rate grid must be positive and strictly ascending".into()));
    }
    let parts = HamiltonianParts::new(&template.with_phase(0.0))?;
    rates
        .par_iter()
        .map(|&rate| {
            run_protocol_with(&parts, rate, target.vector(), settings).map(|o| AlphaPoint {
                rate,
                fidelity: o.fidelity,
                final_schmidt: o.final_schmidt.normalized,
                peak_schmidt: o.peak_schmidt,
            })
        })
        .collect()
}

/// `n` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_phases() {
        let s = RampSchedule::linear(0.5, 0.0, 1.0).unwrap();
        assert_eq!(s.duration(), 2.0);
        assert_eq!(s.phase_at(1.0), 0.5);
        assert_eq!(s.phase_at(5.0), 1.0);
        let smooth = s.with_smooth_stop(1.0).unwrap();
        assert_eq!(smooth.duration(), 2.5);
        assert!((smooth.phase_at(2.5) - 1.0).abs() < 1e-15);
        assert!((smooth.phase_at(1.5) - 0.75).abs() < 1e-15);
        assert!(RampSchedule::linear(0.0, 0.0, 1.0).is_err());
        assert!(RampSchedule::linear(1.0, 1.0, 1.0).is_err());
        assert!(s.with_smooth_stop(10.0).is_err());
    }

    #[test]
    fn rabi_oscillation() {
        let omega = 0.7;
        let c = Complex64::from;
        let h = (2usize, move |_t: f64| DMatrix::from_row_slice(2, 2, &[c(0.0), c(omega), c(omega), c(0.0)]));
        let prop = MagnusPropagator::new(1e-10, omega).unwrap();
        let psi0 = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let mut stats = StepStats::default();
        for &t in &[0.3, 1.0, 2.2, 5.0] {
            let (psi, _) = prop.propagate(&h, &psi0, 0.0, t, 0.01, &mut stats).unwrap();
            let transfer = psi[1].norm_sqr();
            assert!((transfer - (omega * t).sin().powi(2)).abs() < 1e-6);
        }
    }

    #[test]
    fn tiny_final_step_is_accepted() {
        let c = Complex64::from;
        let h = (2usize, |t: f64| DMatrix::from_row_slice(2, 2, &[c(3.0 * t), c(0.4), c(0.4), c(-3.0 * t)]));
        let prop = MagnusPropagator::new(1e-9, 1.0).unwrap();
        let psi0 = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let mut stats = StepStats::default();
        let (psi, _) = prop.propagate(&h, &psi0, 0.0, 1.0, 0.1, &mut stats).unwrap();
        let (psi, _) = prop.propagate(&h, &psi, 1.0, 1.0 + 1e-9, 0.1, &mut stats).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn accuracy_range_enforced() {
        assert!(MagnusPropagator::new(1e-5, 1.0).is_err());
        assert!(MagnusPropagator::new(1e-13, 1.0).is_err());
        assert!(MagnusPropagator::new(1e-9, 0.0).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e-1, 30);
        assert_eq!(g.len(), 30);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[29] - 1e-1).abs() < 1e-15);
        assert_eq!(log_grid(0.02, 1.0, 1), vec![0.02]);
    }
}
