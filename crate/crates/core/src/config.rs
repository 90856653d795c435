//! Run configuration files.
//!
//! A config is a flat JSON object whose keys carry their units. Unknown keys
//! are rejected. Every key is optional except the porosity, which must come
//! either directly (`porosity`) or from a cell census (`n_cells` together
//! with `cell_volume_m3`, measured against a sphere of `spheroid_radius_um`).
//!
//! ```json
//! {
//!   "scenario": "four",
//!   "n_particles": 100000,
//!   "dt_s": 0.5,
//!   "t_end_s": 3600,
//!   "snapshot_times_s": [96, 498, 1500, 3000],
//!   "d_bulk_m2_per_s": 1e-9,
//!   "n_cells": 24000,
//!   "cell_volume_m3": 3.14e-15,
//!   "spheroid_radius_um": 275,
//!   "distance_um": 500,
//!   "k_f_per_s": 0.01,
//!   "seed": 7,
//!   "grid_extent_um": [-1000, 1000, -1000, 1000],
//!   "pixel_um": 10,
//!   "workers": "auto",
//!   "output_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::histogram::{ColorScale, GridSpec};
use crate::scene::{
    build_scenario, effective_diffusion, porosity, sphere_volume, tortuosity, ScenarioKind,
    ScenarioParams, Scene,
};
use crate::stepper::{RunSettings, DEFAULT_MAX_CROSSINGS};
use crate::{Error, Result, MICRON};

/// Cells per reference spheroid.
pub const REFERENCE_CELL_COUNT: u64 = 24_000;
/// Volume of one cell, m³.
pub const REFERENCE_CELL_VOLUME: f64 = 3.14e-15;
/// Molecules released in the full-scale runs.
pub const FULL_SCALE_PARTICLES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Workers {
    Count(usize),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl Workers {
    pub fn get(self) -> Option<usize> {
        match self {
            Workers::Count(n) => Some(n),
            Workers::Auto(_) => None,
        }
    }
}

/// The file format, one field per key.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_particles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_times_s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_bulk_m2_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub porosity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_volume_m3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spheroid_radius_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ring_inner_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ring_outer_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_f_per_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_extent_um: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pixel_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<Workers>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit_csv: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit_ppm: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit_diagnostics: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_crossings: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color_scale: Option<ColorScale>,
}

/// Where the receivers' porosity comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PorositySource {
    Direct(f64),
    /// Cells counted in a sphere of the spheroid radius.
    Cells {
        n_cells: u64,
        cell_volume_m3: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub emit_csv: bool,
    pub emit_ppm: bool,
    pub emit_diagnostics: bool,
    pub color_scale: ColorScale,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            emit_csv: true,
            emit_ppm: true,
            emit_diagnostics: true,
            color_scale: ColorScale::Linear,
        }
    }
}

/// Quantities computed from the config, echoed into run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    pub spheroid_volume_m3: f64,
    pub porosity: f64,
    pub tortuosity: f64,
    pub d_eff_m2_per_s: f64,
    pub conversion_probability: f64,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: ScenarioKind,
    /// Geometry in meters; `porosity` already resolved from the source.
    pub params: ScenarioParams,
    pub porosity_source: PorositySource,
    pub run: RunSettings,
    pub grid: GridSpec,
    pub output: OutputOptions,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be positive, got {v}")))
    }
}

impl SimConfig {
    /// A reference-parameter run of the given scenario at desk scale (10⁵ molecules).
    pub fn reference(scenario: ScenarioKind) -> Self {
        RawConfig {
            scenario: Some(scenario),
            n_cells: Some(REFERENCE_CELL_COUNT),
            cell_volume_m3: Some(REFERENCE_CELL_VOLUME),
            ..RawConfig::default()
        }
        .resolve()
        .expect("reference defaults are valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text)?;
        raw.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn scene(&self) -> Result<Scene> {
        build_scenario(self.scenario, &self.params)
    }

    pub fn derived(&self) -> Derived {
        let eps = self.params.porosity;
        Derived {
            spheroid_volume_m3: sphere_volume(self.params.spheroid_radius),
            porosity: eps,
            tortuosity: tortuosity(eps).expect("validated"),
            d_eff_m2_per_s: effective_diffusion(self.params.d_bulk, eps).expect("validated"),
            conversion_probability: crate::stepper::conversion_probability(
                self.params.k_f,
                self.run.dt,
            ),
        }
    }

    /// The fully explicit file form of this config; loading it gives back an
    /// equal config.
    pub fn to_raw(&self) -> RawConfig {
        let p = &self.params;
        let (porosity, n_cells, cell_volume_m3) = match self.porosity_source {
            PorositySource::Direct(e) => (Some(e), None, None),
            PorositySource::Cells {
                n_cells,
                cell_volume_m3,
            } => (None, Some(n_cells), Some(cell_volume_m3)),
        };
        RawConfig {
            scenario: Some(self.scenario),
            n_particles: Some(self.run.n_particles),
            dt_s: Some(self.run.dt),
            t_end_s: Some(self.run.t_end),
            snapshot_times_s: Some(self.run.snapshot_times.clone()),
            d_bulk_m2_per_s: Some(p.d_bulk),
            porosity,
            n_cells,
            cell_volume_m3,
            spheroid_radius_um: Some(p.spheroid_radius / MICRON),
            distance_um: Some(p.distance / MICRON),
            ring_inner_um: Some(p.ring_inner / MICRON),
            ring_outer_um: Some(p.ring_outer / MICRON),
            k_f_per_s: Some(p.k_f),
            seed: Some(self.run.seed),
            grid_extent_um: Some(self.grid.extent()),
            pixel_um: Some(self.grid.pixel),
            workers: Some(match self.run.workers {
                Some(n) => Workers::Count(n),
                None => Workers::Auto(AutoTag::Auto),
            }),
            output_dir: Some(self.output.dir.clone()),
            emit_csv: Some(self.output.emit_csv),
            emit_ppm: Some(self.output.emit_ppm),
            emit_diagnostics: Some(self.output.emit_diagnostics),
            max_crossings: Some(self.run.max_crossings),
            color_scale: Some(self.output.color_scale),
        }
    }
}

impl RawConfig {
    pub fn resolve(self) -> Result<SimConfig> {
        let scenario = self.scenario.unwrap_or(ScenarioKind::One);
        let d_bulk = positive("d_bulk_m2_per_s", self.d_bulk_m2_per_s.unwrap_or(1e-9))?;
        let r_s = positive(
            "spheroid_radius_um",
            self.spheroid_radius_um.unwrap_or(275.0),
        )?;
        let d = positive("distance_um", self.distance_um.unwrap_or(500.0))?;
        let r_in = positive("ring_inner_um", self.ring_inner_um.unwrap_or(d - r_s))?;
        let r_out = positive("ring_outer_um", self.ring_outer_um.unwrap_or(d + r_s))?;
        if r_out <= r_in {
            return Err(Error::config(
                "ring_outer_um",
                format!("must exceed ring_inner_um ({r_out} ≤ {r_in})"),
            ));
        }
        let k_f = self.k_f_per_s.unwrap_or(0.0);
        if !(k_f >= 0.0) || !k_f.is_finite() {
            return Err(Error::config(
                "k_f_per_s",
                format!("must be non-negative, got {k_f}"),
            ));
        }

        let source = match (self.porosity, self.n_cells, self.cell_volume_m3) {
            (Some(e), None, None) => PorositySource::Direct(e),
            (None, Some(n_cells), Some(cell_volume_m3)) => PorositySource::Cells {
                n_cells,
                cell_volume_m3,
            },
            (None, None, None) => {
                return Err(Error::config(
                    "porosity",
                    "give either `porosity` or both `n_cells` and `cell_volume_m3`",
                ))
            }
            (Some(_), _, _) => {
                return Err(Error::config(
                    "porosity",
                    "`porosity` cannot be combined with `n_cells`/`cell_volume_m3`",
                ))
            }
            (None, _, _) => {
                return Err(Error::config(
                    "n_cells",
                    "`n_cells` and `cell_volume_m3` must be given together",
                ))
            }
        };
        let eps = match source {
            PorositySource::Direct(e) => e,
            PorositySource::Cells {
                n_cells,
                cell_volume_m3,
            } => porosity(sphere_volume(r_s * MICRON), n_cells, cell_volume_m3)
                .map_err(|e| Error::config("n_cells", e.to_string()))?,
        };
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::config(
                "porosity",
                format!("must lie in (0, 1], got {eps}"),
            ));
        }

        let run = RunSettings {
            n_particles: self.n_particles.unwrap_or(100_000),
            dt: self.dt_s.unwrap_or(0.5),
            t_end: self.t_end_s.unwrap_or(3600.0),
            snapshot_times: self
                .snapshot_times_s
                .unwrap_or_else(|| vec![96.0, 498.0, 1500.0, 3000.0]),
            seed: self.seed.unwrap_or(1),
            workers: self.workers.and_then(Workers::get),
            max_crossings: self.max_crossings.unwrap_or(DEFAULT_MAX_CROSSINGS),
        };
        run.schedule()?;
        if let Some(Workers::Count(0)) = self.workers {
            return Err(Error::config("workers", "must be at least 1 or \"auto\""));
        }

        let grid = GridSpec::new(
            self.grid_extent_um
                .unwrap_or([-1000.0, 1000.0, -1000.0, 1000.0]),
            self.pixel_um.unwrap_or(10.0),
        )
        .map_err(|e| match e {
            Error::Config { reason, .. } => Error::config("grid_extent_um", reason),
            other => other,
        })?;

        let defaults = OutputOptions::default();
        let config = SimConfig {
            scenario,
            params: ScenarioParams {
                distance: d * MICRON,
                spheroid_radius: r_s * MICRON,
                porosity: eps,
                k_f,
                d_bulk,
                ring_inner: r_in * MICRON,
                ring_outer: r_out * MICRON,
            },
            porosity_source: source,
            run,
            grid,
            output: OutputOptions {
                dir: self.output_dir.unwrap_or(defaults.dir),
                emit_csv: self.emit_csv.unwrap_or(defaults.emit_csv),
                emit_ppm: self.emit_ppm.unwrap_or(defaults.emit_ppm),
                emit_diagnostics: self.emit_diagnostics.unwrap_or(defaults.emit_diagnostics),
                color_scale: self.color_scale.unwrap_or(defaults.color_scale),
            },
        };
        config.scene()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    const MINIMAL: &str = r#"{"porosity": 0.1349}"#;

    #[test]
    fn reference_defaults() {
        let c = SimConfig::reference(ScenarioKind::Four);
        assert_eq!(c.run.n_particles, 100_000);
        assert_eq!(c.run.schedule().unwrap().n_steps, 7200);
        let d = c.derived();
        assert!((d.porosity - 0.13492412840352955).abs() < 1e-15);
        assert!((d.d_eff_m2_per_s / 5e-11 - 1.0).abs() < 0.01);
        assert_eq!(
            d.d_eff_m2_per_s,
            effective_diffusion(1e-9, d.porosity).unwrap()
        );
        assert_eq!(c.grid, GridSpec::default());
    }

    #[test]
    fn every_preset_builds_from_defaults() {
        for kind in ScenarioKind::ALL {
            SimConfig::reference(kind).scene().unwrap();
        }
    }

    #[test]
    fn full_scale_file() {
        let text = r#"{
            "scenario": "one", "n_particles": 10000000, "dt_s": 0.5, "t_end_s": 3600,
            "d_bulk_m2_per_s": 1e-9, "n_cells": 24000, "cell_volume_m3": 3.14e-15,
            "spheroid_radius_um": 275, "workers": 4
        }"#;
        let c = SimConfig::from_json(text).unwrap();
        assert_eq!(c.run.n_particles, FULL_SCALE_PARTICLES);
        assert_eq!(c.run.workers, Some(4));
        assert!((c.derived().d_eff_m2_per_s / 5e-11 - 1.0).abs() < 0.01);
    }

    #[test]
    fn raw_form_round_trips() {
        for text in [
            MINIMAL,
            r#"{"n_cells": 20000, "cell_volume_m3": 3.14e-15, "workers": "auto"}"#,
        ] {
            let c = SimConfig::from_json(text).unwrap();
            let json = serde_json::to_string(&c.to_raw()).unwrap();
            assert_eq!(SimConfig::from_json(&json).unwrap(), c);
        }
    }

    #[test]
    fn rejections_name_the_field() {
        let cases = [
            (
                r#"{"porosity": 0.2, "snapshot_times_s": [97.3]}"#,
                "snapshot_times_s",
            ),
            (
                r#"{"porosity": 0.2, "snapshot_times_s": [100, 50]}"#,
                "snapshot_times_s",
            ),
            (r#"{"porosity": 0.2, "n_particles": 0}"#, "n_particles"),
            (r#"{"porosity": 0.2, "dt_s": 0}"#, "dt_s"),
            (r#"{"porosity": 0.2, "t_end_s": 0.25}"#, "t_end_s"),
            (r#"{}"#, "porosity"),
            (r#"{"porosity": 0.2, "n_cells": 10}"#, "porosity"),
            (r#"{"n_cells": 10}"#, "n_cells"),
            (
                r#"{"n_cells": 100000, "cell_volume_m3": 3.14e-15}"#,
                "n_cells",
            ),
            (r#"{"porosity": 1.5}"#, "porosity"),
            (r#"{"porosity": 0.2, "k_f_per_s": -1}"#, "k_f_per_s"),
            (r#"{"porosity": 0.2, "pixel_um": 30}"#, "grid_extent_um"),
            (r#"{"porosity": 0.2, "workers": 0}"#, "workers"),
            (
                r#"{"porosity": 0.2, "ring_inner_um": 800}"#,
                "ring_outer_um",
            ),
        ];
        for (text, field) in cases {
            let err = SimConfig::from_json(text).unwrap_err();
            assert_eq!(field_of(err), field, "{text}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = SimConfig::from_json(r#"{"porosity": 0.2, "n_particle": 5}"#).unwrap_err();
        assert!(err.to_string().contains("n_particle"), "{err}");
        assert!(SimConfig::from_json(r#"{"porosity": 0.2, "workers": "many"}"#).is_err());
        assert!(SimConfig::from_json(r#"{"porosity": 0.2, "scenario": "five"}"#).is_err());
    }

    #[test]
    fn crowded_geometry_is_rejected() {
        let text = r#"{"porosity": 0.2, "scenario": "four", "spheroid_radius_um": 400}"#;
        assert!(matches!(
            SimConfig::from_json(text),
            Err(Error::InvalidGeometry(_))
        ));
    }
}
