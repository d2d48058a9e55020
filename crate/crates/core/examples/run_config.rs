//! Drives the harness from a TOML configuration, exactly as the command-line
//! tool does, and shows that the configuration round-trips.
//!
//!     cargo run --release --example run_config

use gauge_ring::harness::{run, RunConfig, Task};

const CONFIG: &str = r#"
seed = 7

[model]
sites = 3
particles = 2
tunneling = 1.0
intra = 1.0
inter = 1.0

[spectrum]
phi_min = 0.0
phi_max = 1.5707963267948966
points = 5

[mes_check]
windings = [3]
robustness_draws = 20
"#;

fn main() -> gauge_ring::Result<()> {
    let config = RunConfig::from_toml(CONFIG)?;
    assert_eq!(RunConfig::from_toml(&config.to_toml()?)?, config);

    print!("{}", run(&config, Task::Spectrum)?);
    print!("{}", run(&config, Task::MesCheck)?);
    Ok(())
}
