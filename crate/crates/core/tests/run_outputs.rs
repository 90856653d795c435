//! Output directory layout, manifests and the command-line binary.

use std::path::Path;
use std::process::Command;

use spheroid_sim::cli::run;
use spheroid_sim::config::SimConfig;
use spheroid_sim::histogram::SnapshotGrid;
use spheroid_sim::{effective_diffusion, porosity, sphere_volume, ScenarioKind, Species, MICRON};

fn small(kind: ScenarioKind, dir: &Path) -> SimConfig {
    let mut cfg = SimConfig::reference(kind);
    cfg.run.n_particles = 2_000;
    cfg.run.t_end = 3000.0;
    cfg.output.dir = dir.to_path_buf();
    cfg
}

fn names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

#[test]
fn one_preset_writes_four_grids_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ScenarioKind::One, tmp.path());
    cfg.output.emit_ppm = false;
    let report = run(&cfg).unwrap();
    assert_eq!(report.dir, tmp.path().join("one"));
    assert_eq!(
        names(&report.dir),
        [
            "A_t1500.csv",
            "A_t3000.csv",
            "A_t498.csv",
            "A_t96.csv",
            "manifest.json"
        ]
    );
    let minutes: Vec<&str> = report
        .manifest
        .snapshots
        .iter()
        .map(|s| s.minutes.as_str())
        .collect();
    assert_eq!(minutes, ["1.6", "8.3", "25", "50"]);

    let text = std::fs::read_to_string(report.dir.join("A_t96.csv")).unwrap();
    assert!(
        text.starts_with("# t=96 species=A extent=-1000,1000,-1000,1000µm pixel=10 out_of_extent=")
    );
    let grid = SnapshotGrid::from_csv(&text).unwrap();
    assert_eq!(grid.total(), 2_000);
}

#[test]
fn manifest_echoes_derived_values_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ScenarioKind::Two, tmp.path());
    cfg.run.t_end = 100.0;
    cfg.run.snapshot_times = vec![100.0];
    cfg.output.emit_ppm = false;
    let report = run(&cfg).unwrap();
    let text = std::fs::read_to_string(report.dir.join("manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let eps = porosity(sphere_volume(275.0 * MICRON), 24_000, 3.14e-15).unwrap();
    assert_eq!(json["derived"]["porosity"].as_f64().unwrap(), eps);
    assert_eq!(
        json["derived"]["d_eff_m2_per_s"].as_f64().unwrap(),
        effective_diffusion(1e-9, eps).unwrap()
    );
    assert_eq!(json["seed"].as_u64().unwrap(), 1);
    assert_eq!(json["config"]["n_cells"].as_u64().unwrap(), 24_000);
    assert!(json["diagnostics"]["particle_steps"].as_u64().unwrap() == 2_000 * 200);
    // The echoed config is itself a loadable config.
    let echoed = SimConfig::from_json(&json["config"].to_string()).unwrap();
    assert_eq!(echoed, cfg);
}

#[test]
fn uptake_run_writes_both_species_and_images() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(ScenarioKind::Four, tmp.path());
    cfg.params.k_f = 0.01;
    let report = run(&cfg).unwrap();
    let files = names(&report.dir);
    let csv = files.iter().filter(|f| f.ends_with(".csv")).count();
    let ppm = files.iter().filter(|f| f.ends_with(".ppm")).count();
    let scale = files.iter().filter(|f| f.ends_with(".scale.txt")).count();
    assert_eq!((csv, ppm, scale), (8, 8, 8));
    for s in &report.manifest.snapshots {
        assert_eq!(s.count_a + s.count_e, 2_000);
        let e = SnapshotGrid::from_csv(
            &std::fs::read_to_string(report.dir.join(format!("E_t{}.csv", s.time_s))).unwrap(),
        )
        .unwrap();
        assert_eq!(e.species, Species::E);
        assert_eq!(e.total(), s.count_e as u64);
    }
    let sidecar = std::fs::read_to_string(report.dir.join("E_t3000.scale.txt")).unwrap();
    assert!(sidecar.contains("colormap=viridis-v1") && sidecar.contains("scale=linear"));
}

#[test]
fn identical_configs_give_identical_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for sub in ["first", "second"] {
        let mut cfg = small(ScenarioKind::RingOutside, &tmp.path().join(sub));
        cfg.run.t_end = 500.0;
        cfg.run.snapshot_times = vec![96.0, 498.0];
        dirs.push(run(&cfg).unwrap().dir);
    }
    for name in names(&dirs[0]).iter().filter(|n| !n.ends_with(".json")) {
        let a = std::fs::read(dirs[0].join(name)).unwrap();
        let b = std::fs::read(dirs[1].join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spheroid-sim"))
}

#[test]
fn binary_simulates_and_renders() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"porosity": 0.2791, "n_particles": 500, "t_end_s": 100, "snapshot_times_s": [50, 100]}"#,
    )
    .unwrap();
    let out = tmp.path().join("out");
    let status = binary()
        .args(["simulate", "--config"])
        .arg(&config)
        .args([
            "--preset",
            "ring-center",
            "--seed",
            "3",
            "--workers",
            "2",
            "--no-images",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        names(&out.join("ring-center")),
        ["A_t100.csv", "A_t50.csv", "manifest.json"]
    );

    let image = tmp.path().join("a.ppm");
    let status = binary()
        .args(["render", "--scale", "log", "--grid"])
        .arg(out.join("ring-center/A_t100.csv"))
        .arg("--out")
        .arg(&image)
        .status()
        .unwrap();
    assert!(status.success());
    let bytes = std::fs::read(&image).unwrap();
    assert!(bytes.starts_with(b"P6\n200 200\n255\n"));
    assert_eq!(bytes.len(), "P6\n200 200\n255\n".len() + 200 * 200 * 3);
    assert!(tmp.path().join("a.scale.txt").exists());
}

#[test]
fn binary_rejects_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.json");
    std::fs::write(&config, r#"{"porosity": 0.2, "snapshot_times_s": [97.3]}"#).unwrap();
    let output = binary()
        .args(["simulate", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("snapshot_times_s"));

    let output = binary().args(["simulate"]).output().unwrap();
    assert!(!output.status.success());

    let missing = binary()
        .args(["render", "--grid", "/nonexistent/grid.csv", "--out"])
        .arg(tmp.path().join("x.ppm"))
        .output()
        .unwrap();
    assert!(!missing.status.success());
}
