//! Bins a small run, writes the grid CSV, reads it back and renders it with
//! both color scales.
//!
//! Output goes to `out/render/`.

use std::path::Path;

use spheroid_sim::histogram::{render_heatmap, write_heatmap, ColorScale, MaxCount, SnapshotGrid};
use spheroid_sim::scene::{build_scenario, ScenarioKind, ScenarioParams};
use spheroid_sim::stepper::{run_simulation, RunSettings};
use spheroid_sim::{Error, Species};

fn main() -> spheroid_sim::Result<()> {
    let dir = Path::new("out/render");
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.into(),
        source: e,
    })?;
    let scene = build_scenario(ScenarioKind::Four, &ScenarioParams::reference())?;
    let settings = RunSettings {
        n_particles: 30_000,
        t_end: 498.0,
        snapshot_times: vec![498.0],
        ..RunSettings::default()
    };
    let snap = &run_simulation(&scene, &settings)?.snapshots[0];
    let grid =
        SnapshotGrid::from_particles(&snap.particles, Species::A, snap.time, &Default::default());

    let csv = dir.join("A_t498.csv");
    std::fs::write(&csv, grid.to_csv()).map_err(|e| Error::Io {
        path: csv.clone(),
        source: e,
    })?;
    let text = std::fs::read_to_string(&csv).map_err(|e| Error::Io {
        path: csv.clone(),
        source: e,
    })?;
    let back = SnapshotGrid::from_csv(&text)?;
    assert_eq!(back, grid);

    for (scale, name) in [(ColorScale::Linear, "linear"), (ColorScale::Log, "log")] {
        let image = dir.join(format!("A_t498_{name}.ppm"));
        let heatmap = render_heatmap(&back, scale, MaxCount::Auto);
        write_heatmap(&image, &heatmap)?;
        println!(
            "{} ({}x{}, max {})",
            image.display(),
            heatmap.width,
            heatmap.height,
            heatmap.scale.max
        );
    }
    Ok(())
}
