//! Run configuration: one TOML document, optionally overridden by flags.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolveSettings, MAX_SAMPLES};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// The five harness tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Spectrum,
    MesCheck,
    Protocol,
    AlphaScan,
    UvSweep,
}

impl Task {
    pub const ALL: [Task; 5] = [Task::Spectrum, Task::MesCheck, Task::Protocol, Task::AlphaScan, Task::UvSweep];

    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::MesCheck => "mes-check",
            Task::Protocol => "protocol",
            Task::AlphaScan => "alpha-scan",
            Task::UvSweep => "uv-sweep",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::config("task", format!("unknown task `{s}`")))
    }
}

/// Model section. Phases are optional because each task has its own
/// natural default (see the task sections).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub sites: usize,
    pub particles: usize,
    pub tunneling: f64,
    pub intra: f64,
    pub inter: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_b: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            sites: 3,
            particles: 2,
            tunneling: 1.0,
            intra: 1.0,
            inter: 1.0,
            phase_a: None,
            phase_b: None,
        }
    }
}

impl ModelSection {
    /// Validated parameters with the given default phases for unset fields.
    pub fn params(&self, default_a: f64, default_b: f64) -> Result<ModelParams> {
        for (field, value) in [
            ("model.tunneling", self.tunneling),
            ("model.intra", self.intra),
            ("model.inter", self.inter),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(field, format!("must be finite and >= 0, got {value}")));
            }
        }
        for (field, value) in [("model.phase_a", self.phase_a), ("model.phase_b", self.phase_b)] {
            if value.is_some_and(|v| !v.is_finite()) {
                return Err(Error::config(field, "must be finite"));
            }
        }
        let params = ModelParams::new(self.sites, self.particles, self.tunneling, self.intra, self.inter)
            .map_err(|e| Error::config("model", e.to_string()))?;
        Ok(params.with_phases(self.phase_a.unwrap_or(default_a), self.phase_b.unwrap_or(default_b)))
    }

    fn has_phases(&self) -> bool {
        self.phase_a.is_some() || self.phase_b.is_some()
    }
}

/// Phase scan. Species phases are `phi + phase_a` and `phi + phase_b`
/// (offsets default to zero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub phi_min: f64,
    pub phi_max: f64,
    pub points: usize,
    /// Restrict to one momentum sector `k` (levels of one translation
    /// symmetry class only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<usize>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection {
            phi_min: 0.0,
            phi_max: PI,
            points: 241,
            sector: None,
        }
    }
}

impl SpectrumSection {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !(self.phi_min.is_finite() && self.phi_max.is_finite()) {
            return Err(Error::config("spectrum.phi_min", "phase bounds must be finite"));
        }
        match self.points {
            0 => Err(Error::config("spectrum.points", "grid must not be empty")),
            1 => Ok(vec![self.phi_min]),
            n => {
                if self.phi_max <= self.phi_min {
                    return Err(Error::config("spectrum.phi_max", "must exceed phi_min"));
                }
                let step = (self.phi_max - self.phi_min) / (n - 1) as f64;
                Ok((0..n).map(|i| self.phi_min + step * i as f64).collect())
            }
        }
    }
}

/// Residual report for the closed-form states. Without model phases each
/// winding is checked at its own quantized phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MesCheckSection {
    /// Windings to check; empty means `0..L`.
    pub windings: Vec<i64>,
    /// Random rescalings of `C` used for the robustness residual (0 = off).
    pub robustness_draws: usize,
}

impl Default for MesCheckSection {
    fn default() -> Self {
        MesCheckSection {
            windings: Vec::new(),
            robustness_draws: 0,
        }
    }
}

fn integrator_settings(section: &str, samples: usize, accuracy: f64, use_translation_symmetry: bool) -> Result<EvolveSettings> {
    if !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(Error::config(format!("{section}.samples"), format!("must lie in 2..={MAX_SAMPLES}")));
    }
    if !(1e-12..=1e-6).contains(&accuracy) {
        return Err(Error::config(format!("{section}.accuracy"), "must lie in [1e-12, 1e-6]"));
    }
    Ok(EvolveSettings {
        samples,
        accuracy,
        use_translation_symmetry,
    })
}

/// Single preparation run from the `phi = 0` ground state to `phi = pi/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub rate: f64,
    /// Target winding; by default the one whose phase is `pi/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
    pub samples: usize,
    pub accuracy: f64,
    pub use_translation_symmetry: bool,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            rate: 0.02,
            winding: None,
            samples: EvolveSettings::default().samples,
            accuracy: EvolveSettings::default().accuracy,
            use_translation_symmetry: true,
        }
    }
}

/// Fidelity versus ramp rate. An explicit `rates` list wins over the
/// log-spaced `[rate_min, rate_max]` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlphaScanSection {
    pub rate_min: f64,
    pub rate_max: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rates: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winding: Option<i64>,
    pub samples: usize,
    pub accuracy: f64,
    pub use_translation_symmetry: bool,
}

impl Default for AlphaScanSection {
    fn default() -> Self {
        AlphaScanSection {
            rate_min: 1e-3,
            rate_max: 1e-1,
            points: 30,
            rates: Vec::new(),
            winding: None,
            samples: EvolveSettings::default().samples,
            accuracy: EvolveSettings::default().accuracy,
            use_translation_symmetry: true,
        }
    }
}

impl ProtocolSection {
    pub fn settings(&self) -> Result<EvolveSettings> {
        integrator_settings("protocol", self.samples, self.accuracy, self.use_translation_symmetry)
    }
}

impl AlphaScanSection {
    pub fn settings(&self) -> Result<EvolveSettings> {
        integrator_settings("alpha_scan", self.samples, self.accuracy, self.use_translation_symmetry)
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let grid = if self.rates.is_empty() {
            if !(self.rate_min > 0.0 && self.rate_max >= self.rate_min && self.rate_max.is_finite()) {
                return Err(Error::config("alpha_scan.rate_min", "need 0 < rate_min <= rate_max"));
            }
            if self.points == 0 {
                return Err(Error::config("alpha_scan.points", "grid must not be empty"));
            }
            crate::dynamics::log_grid(self.rate_min, self.rate_max, self.points)
        } else {
            self.rates.clone()
        };
        if grid.iter().any(|&a| !(a > 0.0 && a.is_finite())) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("alpha_scan.rates", "rates must be positive and strictly ascending"));
        }
        Ok(grid)
    }
}

/// Interaction map. `U` and `V` run over `max * i / points` for
/// `i = 1..=points`, in the units of the model section (normally `C = 1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UvSweepSection {
    pub points_u: usize,
    pub points_v: usize,
    pub max_u: f64,
    pub max_v: f64,
}

impl Default for UvSweepSection {
    fn default() -> Self {
        UvSweepSection {
            points_u: 81,
            points_v: 81,
            max_u: 1.0,
            max_v: 1.0,
        }
    }
}

impl UvSweepSection {
    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let axis = |n: usize, max: f64, field: &str| -> Result<Vec<f64>> {
            if n == 0 {
                return Err(Error::config(format!("uv_sweep.points_{field}"), "grid must not be empty"));
            }
            if !(max > 0.0 && max.is_finite()) {
                return Err(Error::config(format!("uv_sweep.max_{field}"), "must be positive"));
            }
            Ok((1..=n).map(|i| max * i as f64 / n as f64).collect())
        };
        Ok((axis(self.points_u, self.max_u, "u")?, axis(self.points_v, self.max_v, "v")?))
    }
}

/// Full configuration of one harness run.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, a run of a different task is rejected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    /// Seed for randomized checks.
    pub seed: u64,
    /// Worker threads; defaults to all available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Output file; standard output when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub model: ModelSection,
    pub spectrum: SpectrumSection,
    pub mes_check: MesCheckSection,
    pub protocol: ProtocolSection,
    pub alpha_scan: AlphaScanSection,
    pub uv_sweep: UvSweepSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks everything `task` will use, so that configuration problems
    /// surface before any numerics start.
    pub fn validate(&self, task: Task) -> Result<()> {
        if let Some(t) = self.task {
            if t != task {
                return Err(Error::config("task", format!("config is for `{t}`, not `{task}`")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be at least 1"));
        }
        self.model.params(0.0, 0.0)?;
        match task {
            Task::Spectrum => {
                self.spectrum.grid()?;
                if let Some(k) = self.spectrum.sector {
                    if k >= self.model.sites {
                        return Err(Error::config("spectrum.sector", format!("must be below L = {}", self.model.sites)));
                    }
                }
            }
            Task::MesCheck => {}
            Task::Protocol => {
                let p = &self.protocol;
                if !(p.rate > 0.0 && p.rate.is_finite()) {
                    return Err(Error::config("protocol.rate", "must be positive"));
                }
                p.settings()?;
            }
            Task::AlphaScan => {
                self.alpha_scan.grid()?;
                self.alpha_scan.settings()?;
            }
            Task::UvSweep => {
                self.uv_sweep.axes()?;
            }
        }
        if matches!(task, Task::Protocol | Task::AlphaScan) && self.model.has_phases() {
            log::warn!("{task} ramps both phases from zero; model phases are ignored");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = RunConfig::from_toml(
            "task = \"uv-sweep\"\n[model]\nsites = 3\nparticles = 2\ntunneling = 1.0\nintra = 0.5\ninter = 0.5\n[uv_sweep]\npoints_u = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.task, Some(Task::UvSweep));
        assert_eq!(cfg.uv_sweep.points_u, 5);
        assert_eq!(cfg.uv_sweep.points_v, 81);
        assert!(cfg.validate(Task::UvSweep).is_ok());
        assert!(matches!(cfg.validate(Task::Spectrum), Err(Error::Config { .. })));
    }

    #[test]
    fn errors_name_the_field() {
        let mut cfg = RunConfig::default();
        cfg.model.tunneling = -1.0;
        match cfg.validate(Task::Spectrum) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "model.tunneling"),
            other => panic!("unexpected {other:?}"),
        }
        let mut cfg = RunConfig::default();
        cfg.alpha_scan.rates = vec![0.1, 0.05];
        assert!(cfg.validate(Task::AlphaScan).is_err());
        assert!(RunConfig::from_toml("[model]\nsitez = 3").is_err());
    }

    #[test]
    fn grids() {
        let s = SpectrumSection {
            phi_min: 0.0,
            phi_max: 1.0,
            points: 3,
            sector: None,
        };
        assert_eq!(s.grid().unwrap(), vec![0.0, 0.5, 1.0]);
        let (u, v) = UvSweepSection {
            points_u: 2,
            points_v: 4,
            max_u: 1.0,
            max_v: 2.0,
        }
        .axes()
        .unwrap();
        assert_eq!(u, vec![0.5, 1.0]);
        assert_eq!(v, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!("alpha-scan".parse::<Task>().unwrap(), Task::AlphaScan);
    }
}
