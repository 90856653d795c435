//! Loads a JSON config, prints the derived constants and runs it.
//!
//! `cargo run --release --example config_run -- crates/core/configs/reference-one.json`

use std::path::PathBuf;

use spheroid_sim::cli::run;
use spheroid_sim::config::SimConfig;

fn main() -> spheroid_sim::Result<()> {
    let path: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| {
            concat!(env!("CARGO_MANIFEST_DIR"), "/configs/reference-one.json").into()
        })
        .into();
    let mut cfg = SimConfig::load(&path)?;
    let d = cfg.derived();
    println!(
        "{}: {} particles, {} steps",
        cfg.scenario,
        cfg.run.n_particles,
        cfg.run.schedule()?.n_steps
    );
    println!(
        "porosity {:.4}, tortuosity {:.4}, D_eff {:.4e} m^2/s, step conversion probability {:.3e}",
        d.porosity, d.tortuosity, d.d_eff_m2_per_s, d.conversion_probability
    );
    if std::env::var_os("FULL").is_none() {
        cfg.run.n_particles = cfg.run.n_particles.min(10_000);
        println!(
            "running with {} particles; set FULL=1 for the configured count",
            cfg.run.n_particles
        );
    }
    let report = run(&cfg)?;
    println!("wrote {}", report.dir.display());
    Ok(())
}
