use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gauge_ring::harness::{run_and_write, RunConfig, Task};
use gauge_ring::Error;

#[derive(Parser)]
#[command(name = "gauge-ring", version, about = "Two-species boson rings with Peierls phases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels over a phase grid (CSV)
    Spectrum(Common),
    /// Residuals and observables of the closed-form entangled states (JSON)
    MesCheck(Common),
    /// One phase-ramp preparation run (CSV trajectory)
    Protocol(Common),
    /// Final fidelity against ramp rate (CSV)
    AlphaScan(Common),
    /// Most entangled eigenstate over a (U, V) grid (CSV)
    UvSweep(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags below override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sites
    #[arg(long = "L")]
    sites: Option<usize>,
    /// Particles per species
    #[arg(long = "N")]
    particles: Option<usize>,
    /// Tunneling amplitude
    #[arg(long = "C")]
    tunneling: Option<f64>,
    /// Intra-species interaction
    #[arg(long = "U")]
    intra: Option<f64>,
    /// Inter-species interaction (magnitude)
    #[arg(long = "V")]
    inter: Option<f64>,
    #[arg(long = "phi-a", allow_hyphen_values = true)]
    phi_a: Option<f64>,
    #[arg(long = "phi-b", allow_hyphen_values = true)]
    phi_b: Option<f64>,
    /// Output file (standard output if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let m = &mut cfg.model;
        if let Some(v) = self.sites {
            m.sites = v;
        }
        if let Some(v) = self.particles {
            m.particles = v;
        }
        if let Some(v) = self.tunneling {
            m.tunneling = v;
        }
        if let Some(v) = self.intra {
            m.intra = v;
        }
        if let Some(v) = self.inter {
            m.inter = v;
        }
        if self.phi_a.is_some() {
            m.phase_a = self.phi_a;
        }
        if self.phi_b.is_some() {
            m.phase_b = self.phi_b;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (task, common) = match &cli.command {
        Command::Spectrum(c) => (Task::Spectrum, c),
        Command::MesCheck(c) => (Task::MesCheck, c),
        Command::Protocol(c) => (Task::Protocol, c),
        Command::AlphaScan(c) => (Task::AlphaScan, c),
        Command::UvSweep(c) => (Task::UvSweep, c),
    };
    match common.config().and_then(|cfg| run_and_write(&cfg, task)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gauge-ring {task}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
