//! Uptake by two and four receivers: where converted molecules end up.
//!
//! With `k_f = 0.01 1/s`, molecules converted inside a receiver stop moving,
//! so the converted population records where diffusing molecules spent time.
//! The half of each receiver facing the transmitter collects more.

use spheroid_sim::scene::{build_scenario, ScenarioKind, ScenarioParams};
use spheroid_sim::stepper::{run_simulation, RunSettings};
use spheroid_sim::{Region, Species, MICRON};

fn main() -> spheroid_sim::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50_000);
    let params = ScenarioParams {
        k_f: 0.01,
        ..ScenarioParams::reference()
    };
    for kind in [ScenarioKind::Two, ScenarioKind::Four] {
        let scene = build_scenario(kind, &params)?;
        let settings = RunSettings {
            n_particles: n,
            t_end: 3000.0,
            ..RunSettings::default()
        };
        let run = run_simulation(&scene, &settings)?;
        println!(
            "{kind}: conversions per receiver {:?}",
            run.diagnostics.conversions_per_region
        );
        for snap in &run.snapshots {
            print!("  t={:>5} s  E={:>6}", snap.time, snap.count(Species::E));
            for region in &scene.regions {
                let Region::Spheroid(s) = region else {
                    continue;
                };
                let toward = scene.tx_position - s.center;
                let (mut near, mut far) = (0, 0);
                for p in snap
                    .positions(Species::E)
                    .filter(|&p| s.boundary().contains(p))
                {
                    if (p - s.center).dot(toward) > 0.0 {
                        near += 1;
                    } else {
                        far += 1;
                    }
                }
                print!(
                    "  ({:>4},{:>4}) um near/far {near}/{far}",
                    s.center.x / MICRON,
                    s.center.y / MICRON
                );
            }
            println!();
        }
    }
    Ok(())
}
