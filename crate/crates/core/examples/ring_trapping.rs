//! How much of the release a porous ring holds near the transmitter.
//!
//! Compares the fraction of molecules within the ring's outer radius for the
//! ring around the transmitter, the ring beside it, and free diffusion.

use spheroid_sim::scene::{build_scenario, ScenarioKind, ScenarioParams};
use spheroid_sim::stepper::{run_simulation, RunSettings};
use spheroid_sim::MICRON;

fn main() -> spheroid_sim::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50_000);
    let params = ScenarioParams::reference();
    let settings = RunSettings {
        n_particles: n,
        t_end: 3000.0,
        ..RunSettings::default()
    };
    let radius = params.ring_outer;
    println!(
        "fraction of molecules within r <= {} um of the origin",
        radius / MICRON
    );
    print!("{:<13}", "t (s)");
    for t in &settings.snapshot_times {
        print!("{t:>8}");
    }
    println!();
    for kind in [
        ScenarioKind::Transparent,
        ScenarioKind::RingCenter,
        ScenarioKind::RingOutside,
    ] {
        let run = run_simulation(&build_scenario(kind, &params)?, &settings)?;
        print!("{kind:<13}");
        for snap in &run.snapshots {
            let inside = snap
                .particles
                .iter()
                .filter(|p| p.position.norm() <= radius)
                .count();
            print!("{:>8.4}", inside as f64 / n as f64);
        }
        println!();
    }
    Ok(())
}
