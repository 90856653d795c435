//! Single steps across a spheroid boundary, and the concentration jump the
//! scaling rule builds up over many steps.
//!
//! A step that leaves one medium for another keeps its direction, but the
//! part beyond the boundary is rescaled by `√(D_dest/D_src)`. Repeated
//! crossings in both directions leave the interior about `√(D/D_eff)` times
//! denser than the fluid just outside.

use spheroid_sim::scene::{build_scenario, ScenarioKind, ScenarioParams};
use spheroid_sim::stepper::{propagate, run_simulation, RunSettings, DEFAULT_MAX_CROSSINGS};
use spheroid_sim::{Region, Vec2, MICRON};

fn um(x: f64, y: f64) -> Vec2 {
    Vec2::new(x * MICRON, y * MICRON)
}

fn main() -> spheroid_sim::Result<()> {
    let scene = build_scenario(ScenarioKind::One, &ScenarioParams::reference())?;
    let Region::Spheroid(s) = &scene.regions[0] else {
        unreachable!()
    };
    println!(
        "spheroid at ({:.0}, {:.0}) um, radius {:.0} um, D_eff/D = {:.4}",
        s.center.x / MICRON,
        s.center.y / MICRON,
        s.radius / MICRON,
        s.medium.d_eff / scene.d_bulk
    );

    for (start, step) in [
        ((200.0, 0.0), (100.0, 0.0)),
        ((240.0, 0.0), (-30.0, 0.0)),
        ((100.0, 0.0), (50.0, 0.0)),
    ] {
        let p0 = um(start.0, start.1);
        let out = propagate(
            &scene,
            p0,
            scene.region_at(p0),
            um(step.0, step.1),
            DEFAULT_MAX_CROSSINGS,
        );
        println!(
            "start ({:>6.2}, {:>4.1}) um, step ({:>6.1}, {:>4.1}) um -> ({:>8.4}, {:>4.1}) um, {} crossing(s)",
            start.0,
            start.1,
            step.0,
            step.1,
            out.end.x / MICRON,
            out.end.y / MICRON,
            out.crossings
        );
    }

    let settings = RunSettings {
        n_particles: 40_000,
        t_end: 1500.0,
        snapshot_times: vec![1500.0],
        ..RunSettings::default()
    };
    let run = run_simulation(&scene, &settings)?;
    let shell = |lo: f64, hi: f64| {
        let n = run.snapshots[0]
            .particles
            .iter()
            .filter(|p| {
                let r = (p.position - s.center).norm() / MICRON;
                r >= lo && r < hi
            })
            .count();
        n as f64 / (std::f64::consts::PI * (hi * hi - lo * lo))
    };
    let r = s.radius / MICRON;
    let ratio = shell(r - 40.0, r) / shell(r, r + 40.0);
    println!(
        "density just inside / just outside after 1500 s: {ratio:.2} (sqrt(D/D_eff) = {:.2})",
        (scene.d_bulk / s.medium.d_eff).sqrt()
    );
    println!(
        "{} crossings, {} clamped steps",
        run.diagnostics.crossings, run.diagnostics.clamp_events
    );
    Ok(())
}
