//! The five harness tasks: typed results and their CSV/JSON renderings.
//!
//! Every numeric CSV field is written with 17 significant digits and all
//! parallel work is assembled in grid order, so a given configuration always
//! produces the same bytes.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::io::Write as _;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{RunConfig, Task};
use super::sweep::{uv_sweep, SweepResult};
use crate::analytic::{construct_mes, mes_condition_mixed, mes_phase, MesState};
use crate::dynamics::{run_protocol, scan_alpha, AlphaPoint, ProtocolOutcome};
use crate::error::{Error, Result};
use crate::measures::schmidt_number;
use crate::model::{
    build_current_joint, build_hamiltonian, build_interaction, build_kinetic_joint, momentum_sector_basis,
    HamiltonianParts, ModelParams,
};
use crate::spectra::{scan_family, SpectrumScan};

/// Relative residual below which a closed-form state counts as an eigenstate.
pub const EIGENSTATE_TOL: f64 = 1e-10;

/// Bin width in `V/U` used for ridge positions in the sweep header.
pub const RIDGE_BIN: f64 = 0.025;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn model_line(p: &ModelParams) -> String {
    format!(
        "# L={} N={} C={} U={} V={} (energies in units of C, hbar = 1)\n",
        p.sites(),
        p.particles(),
        num(p.tunneling()),
        num(p.intra()),
        num(p.inter())
    )
}

/// Runs `task` inside a worker pool of `config.threads` threads and returns
/// the rendered output.
pub fn run(config: &RunConfig, task: Task) -> Result<String> {
    config.validate(task)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| match task {
        Task::Spectrum => spectrum(config).map(|(scan, p)| spectrum_csv(&scan, &p, config.spectrum.sector)),
        Task::MesCheck => mes_check(config).and_then(|r| {
            serde_json::to_string_pretty(&r)
                .map(|s| s + "\n")
                .map_err(|e| Error::Domain(e.to_string()))
        }),
        Task::Protocol => protocol(config).map(|(o, m)| protocol_csv(&o, &m, config)),
        Task::AlphaScan => alpha_scan(config).map(|(rows, m)| alpha_scan_csv(&rows, &m, config)),
        Task::UvSweep => uv_sweep_task(config).map(|s| uv_sweep_csv(&s)),
    })
}

/// [`run`], then writes to `config.out` or standard output.
pub fn run_and_write(config: &RunConfig, task: Task) -> Result<()> {
    let text = run(config, task)?;
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::config("out", format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Phase scan with `phi_A = phi + phase_a`, `phi_B = phi + phase_b`.
pub fn spectrum(config: &RunConfig) -> Result<(SpectrumScan, ModelParams)> {
    let params = config.model.params(0.0, 0.0)?;
    let grid = config.spectrum.grid()?;
    let (da, db) = (params.phase_a(), params.phase_b());
    let mut parts = HamiltonianParts::new(&params)?;
    if let Some(k) = config.spectrum.sector {
        parts = parts.projected(&momentum_sector_basis(parts.basis(), k));
    }
    let unit = if params.tunneling() > 0.0 { params.tunneling() } else { 1.0 };
    let scan = scan_family(|phi| Ok(parts.at(phi + da, phi + db)), &grid, false, unit)?;
    Ok((scan, params))
}

pub fn spectrum_csv(scan: &SpectrumScan, params: &ModelParams, sector: Option<usize>) -> String {
    let mut out = String::new();
    out.push_str("# spectrum of H(phi + phase_a, phi + phase_b), ascending per row\n");
    out.push_str(&model_line(params));
    let _ = writeln!(
        out,
        "# phase_a={} phase_b={} sector={}",
        num(params.phase_a()),
        num(params.phase_b()),
        sector.map_or("all".to_string(), |k| k.to_string())
    );
    if params.tunneling() > 0.0 {
        out.push_str("# columns: phi [rad], E_1..E_n [C]\n");
    } else {
        out.push_str("# columns: phi [rad], E_1..E_n [absolute, C = 0]\n");
    }
    out.push_str("phi");
    for i in 1..=scan.levels() {
        let _ = write!(out, ",E_{i}");
    }
    out.push('\n');
    for (phi, row) in scan.phi_grid.iter().zip(&scan.energies) {
        out.push_str(&num(*phi));
        for e in row {
            out.push(',');
            out.push_str(&num(e / scan.energy_unit));
        }
        out.push('\n');
    }
    out
}

/// Residuals and observables of one closed-form state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MesEntry {
    pub winding: i64,
    pub phi_tilde: f64,
    pub phase_a: f64,
    pub phase_b: f64,
    pub kinetic_residual: f64,
    pub interaction_residual: f64,
    pub total_residual: f64,
    pub schmidt_raw: f64,
    pub schmidt: f64,
    pub current: f64,
    pub renormalized_current: Option<f64>,
    /// Total residual below `EIGENSTATE_TOL` times the largest energy scale.
    pub eigenstate: bool,
    /// Largest relative residual `|H psi| / max(C', U, V)` over random
    /// rescalings `C' = C * 10^u`, `u` uniform in `[-1, 1]`.
    pub robustness_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MesReport {
    pub sites: usize,
    pub particles: usize,
    pub tunneling: f64,
    pub intra: f64,
    pub inter: f64,
    pub seed: u64,
    pub entries: Vec<MesEntry>,
}

fn residual(op: &crate::model::HermitianOperator, psi: &DVector<Complex64>) -> Result<f64> {
    Ok(op.apply(psi)?.norm())
}

/// Checks `|psi_m>` against the operators. Each winding is evaluated at its
/// own phase unless the model section fixes the phases.
pub fn mes_check(config: &RunConfig) -> Result<MesReport> {
    let base = config.model.params(0.0, 0.0)?;
    let sites = base.sites();
    let windings: Vec<i64> = if config.mes_check.windings.is_empty() {
        (0..sites as i64).collect()
    } else {
        config.mes_check.windings.clone()
    };
    let fixed_phases = config.model.phase_a.is_some() || config.model.phase_b.is_some();
    let basis = base.basis();
    let d = basis.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut entries = Vec::with_capacity(windings.len());
    for m in windings {
        let mes = construct_mes(&basis, m);
        let phi_tilde = mes_phase(sites, m);
        let params = if fixed_phases {
            base
        } else {
            base.with_phase(phi_tilde)
        };
        let psi = mes.vector();
        let kinetic_residual = residual(&build_kinetic_joint(&params), psi)?;
        let interaction_residual = residual(&build_interaction(&basis, params.intra(), params.inter()), psi)?;
        let total_residual = residual(&build_hamiltonian(&params), psi)?;
        let scale = energy_scale(&params);
        let current = build_current_joint(&params).expectation(psi)?;
        let renormalized_current = (params.tunneling() > 0.0).then(|| 1.0 - current / params.tunneling());
        let schmidt = schmidt_number(psi, d)?;
        let robustness_residual = if config.mes_check.robustness_draws > 0 {
            let mut worst: f64 = 0.0;
            for _ in 0..config.mes_check.robustness_draws {
                let factor = 10f64.powf(rng.random_range(-1.0..=1.0));
                let scaled = params.with_tunneling(params.tunneling() * factor)?;
                let r = residual(&build_hamiltonian(&scaled), psi)? / energy_scale(&scaled);
                worst = worst.max(r);
            }
            Some(worst)
        } else {
            None
        };
        entries.push(MesEntry {
            winding: mes.winding(),
            phi_tilde,
            phase_a: params.phase_a(),
            phase_b: params.phase_b(),
            kinetic_residual,
            interaction_residual,
            total_residual,
            schmidt_raw: schmidt.raw,
            schmidt: schmidt.normalized,
            current,
            renormalized_current,
            eigenstate: total_residual <= EIGENSTATE_TOL * scale,
            robustness_residual,
        });
    }
    Ok(MesReport {
        sites,
        particles: base.particles(),
        tunneling: base.tunneling(),
        intra: base.intra(),
        inter: base.inter(),
        seed: config.seed,
        entries,
    })
}

fn energy_scale(p: &ModelParams) -> f64 {
    let s = p.tunneling().max(p.intra()).max(p.inter());
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Target winding for a ramp ending at `pi/2`.
fn target_state(params: &ModelParams, winding: Option<i64>) -> Result<MesState> {
    let m = match winding {
        Some(m) => m,
        None => mes_condition_mixed(FRAC_PI_2, FRAC_PI_2, params.sites())
            .ok_or_else(|| Error::Domain("no closed-form state at pi/2".into()))?,
    };
    Ok(construct_mes(&params.basis(), m))
}

pub fn protocol(config: &RunConfig) -> Result<(ProtocolOutcome, MesState)> {
    let params = config.model.params(0.0, 0.0)?.with_phase(0.0);
    let target = target_state(&params, config.protocol.winding)?;
    let outcome = run_protocol(&params, config.protocol.rate, &target, &config.protocol.settings()?)?;
    Ok((outcome, target))
}

pub fn protocol_csv(outcome: &ProtocolOutcome, target: &MesState, config: &RunConfig) -> String {
    let params = config.model.params(0.0, 0.0).expect("validated");
    let mut out = String::new();
    out.push_str("# phase ramp from the phi = 0 ground state to phi = pi/2\n");
    out.push_str(&model_line(&params));
    let _ = writeln!(
        out,
        "# alpha={} [C] target winding={} final F={} peak K={} degenerate_start={}",
        num(outcome.rate),
        target.winding(),
        num(outcome.fidelity),
        num(outcome.peak_schmidt),
        outcome.degenerate_start
    );
    out.push_str("# columns: t [1/C], phi [rad], F [1], K [1], norm [1]\n");
    out.push_str("t,phi,F,K,norm\n");
    for o in &outcome.trajectory.observables {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(o.time),
            num(o.phase),
            num(o.fidelity.unwrap_or(f64::NAN)),
            num(o.schmidt.normalized),
            num(o.norm)
        );
    }
    out
}

pub fn alpha_scan(config: &RunConfig) -> Result<(Vec<AlphaPoint>, MesState)> {
    let params = config.model.params(0.0, 0.0)?.with_phase(0.0);
    let target = target_state(&params, config.alpha_scan.winding)?;
    let rows = scan_alpha(&params, &config.alpha_scan.grid()?, &target, &config.alpha_scan.settings()?)?;
    Ok((rows, target))
}

pub fn alpha_scan_csv(rows: &[AlphaPoint], target: &MesState, config: &RunConfig) -> String {
    let params = config.model.params(0.0, 0.0).expect("validated");
    let mut out = String::new();
    out.push_str("# fidelity against the ramp rate alpha\n");
    out.push_str(&model_line(&params));
    let _ = writeln!(out, "# target winding={}", target.winding());
    out.push_str("# columns: alpha [C], F [1], K_final [1], K_peak [1]\n");
    out.push_str("alpha,F,K_final,K_peak\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(r.rate),
            num(r.fidelity),
            num(r.final_schmidt),
            num(r.peak_schmidt)
        );
    }
    out
}

/// Interaction map at the model phases (default `pi/2` for both species).
pub fn uv_sweep_task(config: &RunConfig) -> Result<SweepResult> {
    let template = config.model.params(FRAC_PI_2, FRAC_PI_2)?;
    let (u, v) = config.uv_sweep.axes()?;
    uv_sweep(&template, &u, &v)
}

pub fn uv_sweep_csv(sweep: &SweepResult) -> String {
    let p = &sweep.template;
    let mut out = String::new();
    out.push_str("# most entangled eigenstate over the (U, V) grid\n");
    let _ = writeln!(
        out,
        "# L={} N={} C={} phase_a={} phase_b={} (hbar = 1)",
        p.sites(),
        p.particles(),
        num(p.tunneling()),
        num(p.phase_a()),
        num(p.phase_b())
    );
    let _ = writeln!(out, "# spearman(K, Jr)={}", num(sweep.schmidt_current_correlation()));
    let ridges: Vec<String> = sweep.ridges(RIDGE_BIN).iter().map(|(r, k)| format!("{r:.4}:{k:.4}")).collect();
    let _ = writeln!(out, "# K ridges along V/U (ratio:K, bin {RIDGE_BIN}): {}", ridges.join(" "));
    out.push_str(
        "# columns: U [C], V [C], V_over_U [1], K [1], K0 [1], J [C], Jr [1], level [index], E [C], cluster [count], degenerate [0/1]\n",
    );
    out.push_str("U,V,V_over_U,K,K0,J,Jr,level,E,cluster,degenerate\n");
    for c in &sweep.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(c.intra),
            num(c.inter),
            num(c.inter / c.intra),
            num(c.schmidt),
            num(c.schmidt_raw),
            num(c.current / p.tunneling()),
            num(c.renormalized_current),
            c.level,
            num(c.energy / p.tunneling()),
            c.cluster_size,
            u8::from(c.degenerate())
        );
    }
    out
}
