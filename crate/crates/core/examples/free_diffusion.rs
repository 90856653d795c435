//! Free diffusion from the transmitter compared with the 2-D heat kernel.
//!
//! `cargo run --release --example free_diffusion -- [particles]`

use spheroid_sim::histogram::{radial_profile_by, GridSpec, SnapshotGrid};
use spheroid_sim::oracle::free_green_2d;
use spheroid_sim::scene::{build_scenario, ScenarioKind, ScenarioParams};
use spheroid_sim::stepper::{run_simulation, RunSettings};
use spheroid_sim::{Species, Vec2, MICRON};

fn main() -> spheroid_sim::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200_000);
    let t = 100.0;
    let scene = build_scenario(ScenarioKind::Transparent, &ScenarioParams::reference())?;
    let run = run_simulation(
        &scene,
        &RunSettings {
            n_particles: n,
            t_end: t,
            snapshot_times: vec![t],
            ..RunSettings::default()
        },
    )?;
    let spec = GridSpec::default();
    let grid = SnapshotGrid::from_particles(&run.snapshots[0].particles, Species::A, t, &spec);
    let observed = grid.radial_profile(Vec2::ZERO, 100.0)?;
    let expected = radial_profile_by(&spec, Vec2::ZERO, 100.0, |ix, iy| {
        let r = spec.pixel_center(ix, iy).norm() * MICRON;
        free_green_2d(r, t, n as f64, scene.d_bulk).unwrap() * spec.pixel_area_m2()
    })?;
    println!(
        "N = {n}, t = {t} s, sigma = {:.0} um",
        (2.0 * scene.d_bulk * t).sqrt() / MICRON
    );
    println!(
        "{:>12} {:>10} {:>12} {:>9}",
        "annulus um", "observed", "heat kernel", "rel err"
    );
    for (o, e) in observed.iter().zip(&expected).filter(|(_, e)| e.complete) {
        println!(
            "{:>5}-{:<6} {:>10} {:>12.1} {:>+9.4}",
            o.r_min,
            o.r_max,
            o.total,
            e.total,
            o.total / e.total - 1.0
        );
    }
    Ok(())
}
