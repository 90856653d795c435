//! Runs all six presets at a small particle count and writes grids, heatmaps
//! and manifests under `out/gallery/`.
//!
//! `cargo run --release --example scenario_gallery -- [particles]`

use spheroid_sim::cli::run;
use spheroid_sim::config::SimConfig;
use spheroid_sim::ScenarioKind;

fn main() -> spheroid_sim::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(20_000);
    for kind in ScenarioKind::ALL {
        let mut cfg = SimConfig::reference(kind);
        cfg.run.n_particles = n;
        cfg.run.t_end = 3000.0;
        cfg.output.dir = "out/gallery".into();
        let report = run(&cfg)?;
        let last = report.manifest.snapshots.last().expect("snapshots");
        println!(
            "{kind:<13} {:>5.1} s  A in grid at {} min: {:>6}  -> {}",
            report.manifest.wall_clock_s,
            last.minutes,
            last.count_a as u64 - last.out_of_extent_a,
            report.dir.display()
        );
    }
    Ok(())
}
