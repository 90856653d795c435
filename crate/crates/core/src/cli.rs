//! Run orchestration and the command-line front end.
//!
//! [`run`] simulates one configured scenario and writes, under
//! `<output_dir>/<scenario>/`:
//!
//! - `A_t<seconds>.csv` for every snapshot, plus `E_t<seconds>.csv` when the
//!   receivers take molecules up;
//! - a `.ppm` heatmap and `.scale.txt` colorbar next to each grid, unless
//!   images are disabled;
//! - `manifest.json` with the resolved config, derived constants, seed,
//!   timings, diagnostics and per-snapshot counts.
//!
//! Grid files depend only on the config and seed, never on the worker count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{Derived, RawConfig, SimConfig, FULL_SCALE_PARTICLES};
use crate::histogram::{
    read_grid_csv, render_heatmap, render_values, write_heatmap, ColorScale, MaxCount, SnapshotGrid,
};
use crate::scene::ScenarioKind;
use crate::stepper::{run_simulation_with, RunDiagnostics, Species};
use crate::validate::{self, Suite};
use crate::{Error, Result};

/// File stem for one species at one time, e.g. `A_t96`.
pub fn snapshot_stem(species: Species, time: f64) -> String {
    format!("{}_t{}", species.label(), time)
}

/// Minutes with at most one decimal: 96 s → `1.6`, 1500 s → `25`.
pub fn minute_label(time: f64) -> String {
    let tenths = (time / 6.0).round() / 10.0;
    format!("{tenths}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotRecord {
    pub time_s: f64,
    pub minutes: String,
    pub step: u64,
    pub count_a: usize,
    pub count_e: usize,
    pub out_of_extent_a: u64,
    pub out_of_extent_e: Option<u64>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: ScenarioKind,
    pub config: RawConfig,
    pub derived: Derived,
    pub seed: u64,
    pub n_particles: usize,
    pub wall_clock_s: f64,
    pub diagnostics: Option<RunDiagnostics>,
    pub snapshots: Vec<SnapshotRecord>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    /// `<output_dir>/<scenario>`.
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub diagnostics: RunDiagnostics,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Simulates `config` and populates its output directory.
pub fn run(config: &SimConfig) -> Result<RunReport> {
    let started = Instant::now();
    let scene = config.scene()?;
    let dir = config.output.dir.join(config.scenario.name());
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let species: &[Species] = if scene.has_uptake() {
        &[Species::A, Species::E]
    } else {
        &[Species::A]
    };
    let out = &config.output;

    let mut records = Vec::with_capacity(config.run.snapshot_times.len());
    let diagnostics = run_simulation_with(&scene, &config.run, |view| {
        let mut record = SnapshotRecord {
            time_s: view.time,
            minutes: minute_label(view.time),
            step: view.step,
            count_a: view.count(Species::A),
            count_e: view.count(Species::E),
            out_of_extent_a: 0,
            out_of_extent_e: None,
            files: Vec::new(),
        };
        for &sp in species {
            let grid = SnapshotGrid::from_particles(view.particles, sp, view.time, &config.grid);
            match sp {
                Species::A => record.out_of_extent_a = grid.out_of_extent,
                Species::E => record.out_of_extent_e = Some(grid.out_of_extent),
            }
            let stem = snapshot_stem(sp, view.time);
            if out.emit_csv {
                let name = format!("{stem}.csv");
                write_file(&dir.join(&name), grid.to_csv().as_bytes())?;
                record.files.push(name);
            }
            if out.emit_ppm {
                let name = format!("{stem}.ppm");
                let heatmap = render_heatmap(&grid, out.color_scale, MaxCount::Auto);
                write_heatmap(&dir.join(&name), &heatmap)?;
                record.files.push(name);
            }
        }
        records.push(record);
        Ok(())
    })?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        scenario: config.scenario,
        config: config.to_raw(),
        derived: config.derived(),
        seed: config.run.seed,
        n_particles: config.run.n_particles,
        wall_clock_s: started.elapsed().as_secs_f64(),
        diagnostics: out.emit_diagnostics.then(|| diagnostics.clone()),
        snapshots: records,
    };
    let path = dir.join("manifest.json");
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    write_file(&path, json.as_bytes())?;
    Ok(RunReport {
        dir,
        manifest,
        diagnostics,
    })
}

/// Re-renders a grid file (counts or concentrations) as a PPM heatmap.
pub fn render_grid_file(grid: &Path, image: &Path, scale: ColorScale, max: MaxCount) -> Result<()> {
    let text = fs::read_to_string(grid).map_err(|e| Error::io(grid, e))?;
    let (header, values) = read_grid_csv(&text)?;
    write_heatmap(image, &render_values(&header.spec, &values, scale, max))
}

#[derive(Debug, Parser)]
#[command(
    name = "spheroid-sim",
    version,
    about = "Molecule propagation through porous spheroid receivers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

impl From<ScaleArg> for ColorScale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Linear => ColorScale::Linear,
            ScaleArg::Log => ColorScale::Log,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write grids, heatmaps and a manifest.
    Simulate {
        /// JSON config file; may be omitted when --preset is given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// transparent | one | two | four | ring-center | ring-outside
        #[arg(long)]
        preset: Option<ScenarioKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Skip PPM heatmaps.
        #[arg(long)]
        no_images: bool,
        /// Release 10⁷ molecules instead of the configured count (about
        /// 100× the desk-scale run time).
        #[arg(long)]
        full_scale: bool,
    },
    /// Run a validation suite and print one line per criterion.
    Validate {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Render a grid CSV to a PPM heatmap.
    Render {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "linear")]
        scale: ScaleArg,
        /// Value shown at full brightness; defaults to the grid maximum.
        #[arg(long)]
        max: Option<f64>,
    },
}

impl Command {
    pub fn execute(self) -> Result<bool> {
        match self {
            Command::Simulate {
                config,
                preset,
                seed,
                out,
                workers,
                no_images,
                full_scale,
            } => {
                let mut cfg = match (&config, preset) {
                    (Some(path), _) => SimConfig::load(path)?,
                    (None, Some(kind)) => SimConfig::reference(kind),
                    (None, None) => {
                        return Err(Error::config("config", "give --config, --preset, or both"))
                    }
                };
                if let Some(kind) = preset {
                    cfg.scenario = kind;
                    cfg.scene()?;
                }
                if let Some(s) = seed {
                    cfg.run.seed = s;
                }
                if let Some(dir) = out {
                    cfg.output.dir = dir;
                }
                if let Some(n) = workers {
                    if n == 0 {
                        return Err(Error::config("workers", "must be at least 1"));
                    }
                    cfg.run.workers = Some(n);
                }
                if no_images {
                    cfg.output.emit_ppm = false;
                }
                if full_scale {
                    cfg.run.n_particles = FULL_SCALE_PARTICLES;
                }
                let report = run(&cfg)?;
                for s in &report.manifest.snapshots {
                    println!(
                        "t={} s ({} min): A={} E={} out_of_extent={}",
                        s.time_s, s.minutes, s.count_a, s.count_e, s.out_of_extent_a
                    );
                }
                println!(
                    "wrote {} in {:.1} s",
                    report.dir.display(),
                    report.manifest.wall_clock_s
                );
                Ok(true)
            }
            Command::Validate { suite } => {
                let results =
                    validate::run_suite(suite, &validate::Scale::desk(), |r| println!("{r}"))?;
                let passed = results.iter().filter(|r| r.passed).count();
                println!("{passed}/{} criteria passed", results.len());
                Ok(passed == results.len())
            }
            Command::Render {
                grid,
                out,
                scale,
                max,
            } => {
                let max = max.map_or(MaxCount::Auto, MaxCount::Fixed);
                render_grid_file(&grid, &out, scale.into(), max)?;
                println!("wrote {}", out.display());
                Ok(true)
            }
        }
    }
}

/// Entry point shared by the binary: 0 on success, 1 on failed checks or
/// errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command.execute() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
