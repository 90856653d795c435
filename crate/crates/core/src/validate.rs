//! Validation suites.
//!
//! Each check runs a small simulation or oracle comparison and returns a
//! [`CheckResult`] with the measured value, the threshold it is held to and
//! the verdict. Thresholds are the constants below; nothing is tuned per run.
//!
//! | suite            | checks                                              |
//! |------------------|-----------------------------------------------------|
//! | `analytic`       | porosity, `D_eff`, heat kernel, MSD, uptake decay   |
//! | `fd-cross-check` | particle grid vs finite-volume field                |
//! | `properties`     | mass, symmetry, ring trapping, uptake gradient, determinism |

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use crate::cli;
use crate::config::{SimConfig, REFERENCE_CELL_COUNT, REFERENCE_CELL_VOLUME};
use crate::geometry::Vec2;
use crate::histogram::{radial_profile_by, GridSpec, SnapshotGrid};
use crate::oracle::{
    compare_fields_masked, fd_solve, free_green_2d, max_stable_dt, ConcentrationField, FdSettings,
    InterfaceModel, Norm,
};
use crate::scene::{
    build_scenario, effective_diffusion, porosity, sphere_volume, PorousMedium, Region,
    ScenarioKind, ScenarioParams, Scene, Spheroid,
};
use crate::stepper::{run_simulation, RunSettings, Snapshot, Species};
use crate::{Error, Result, MICRON};

pub const POROSITY_ABS_TOL: f64 = 1e-3;
pub const D_EFF_REL_TOL: f64 = 0.005;
pub const FREE_PROFILE_REL_TOL: f64 = 0.03;
pub const FREE_PROFILE_MIN_EXPECTED: f64 = 100.0;
pub const FREE_PROFILE_BIN_UM: f64 = 100.0;
pub const MSD_REL_TOL: f64 = 0.03;
pub const MSD_STEPS: u64 = 100;
pub const UPTAKE_SIGMAS: f64 = 3.0;
pub const SYMMETRY_NOISE_FACTOR: f64 = 5.0;
pub const FD_L2_TOL: f64 = 0.10;
pub const FD_PIXEL_UM: f64 = 40.0;
/// Pixels kept in the comparison must expect at least this many molecules.
pub const FD_NOISE_FLOOR_COUNT: f64 = 1.0;
pub const FD_BAND_PIXELS: f64 = 2.0;
pub const FD_TIME_S: f64 = 1500.0;
pub const RING_SIGMAS: f64 = 5.0;
pub const GRADIENT_SIGMAS: f64 = 3.0;

/// Reference porosities quoted to four places.
pub const REFERENCE_POROSITY_24K: f64 = 0.1349;
pub const REFERENCE_POROSITY_20K: f64 = 0.2791;
pub const REFERENCE_D_EFF: f64 = 5e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Analytic,
    FdCrossCheck,
    Properties,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub measured: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(id: u8, name: &'static str, measured: f64, bound: Bound, threshold: f64) -> Self {
        let passed = match bound {
            Bound::AtMost => measured <= threshold,
            Bound::AtLeast => measured >= threshold,
        };
        Self {
            id,
            name,
            measured,
            bound,
            threshold,
            passed,
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = detail;
        self
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{} [{:>2}] {}: measured {:.6} (require {op} {}){}{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold,
            if self.detail.is_empty() { "" } else { "; " },
            self.detail
        )
    }
}

/// Particle counts and seed used by the simulation-backed checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Scale {
    /// Heat-kernel comparison.
    pub n_free: usize,
    /// MSD, uptake, symmetry, cross-check, ring and gradient checks.
    pub n: usize,
    /// Per-preset mass bookkeeping.
    pub n_mass: usize,
    /// Byte-identity runs.
    pub n_determinism: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Scale {
    /// The sizes the acceptance criteria are stated at.
    pub fn desk() -> Self {
        Self {
            n_free: 1_000_000,
            n: 100_000,
            n_mass: 2_000,
            n_determinism: 5_000,
            seed: 20_240_601,
            workers: None,
        }
    }
}

fn simulate(
    scene: &Scene,
    n: usize,
    times: &[f64],
    seed: u64,
    scale: &Scale,
) -> Result<Vec<Snapshot>> {
    let settings = RunSettings {
        n_particles: n,
        t_end: *times.last().expect("at least one snapshot"),
        snapshot_times: times.to_vec(),
        seed,
        workers: scale.workers,
        ..RunSettings::default()
    };
    Ok(run_simulation(scene, &settings)?.snapshots)
}

fn reference_medium(k_f: f64) -> Result<PorousMedium> {
    PorousMedium::new(1e-9, reference_porosity(REFERENCE_CELL_COUNT)?, k_f)
}

fn reference_porosity(n_cells: u64) -> Result<f64> {
    porosity(
        sphere_volume(275.0 * MICRON),
        n_cells,
        REFERENCE_CELL_VOLUME,
    )
}

/// One region so large that no molecule leaves it during a check; the
/// transmitter sits at its center.
pub fn enclosing_scene(k_f: f64) -> Result<Scene> {
    let spheroid = Spheroid::new(Vec2::ZERO, 1.0, reference_medium(k_f)?)?;
    Scene::new(1e-9, Vec2::ZERO, vec![Region::Spheroid(spheroid)])
}

fn preset(kind: ScenarioKind, k_f: f64) -> Result<Scene> {
    let params = ScenarioParams {
        porosity: reference_porosity(REFERENCE_CELL_COUNT)?,
        k_f,
        ..ScenarioParams::reference()
    };
    build_scenario(kind, &params)
}

pub fn check_porosity() -> Result<CheckResult> {
    let e24 = reference_porosity(24_000)?;
    let e20 = reference_porosity(20_000)?;
    let worst = (e24 - REFERENCE_POROSITY_24K)
        .abs()
        .max((e20 - REFERENCE_POROSITY_20K).abs());
    Ok(CheckResult::new(
        1,
        "porosity from cell census",
        worst,
        Bound::AtMost,
        POROSITY_ABS_TOL,
    )
    .with_detail(format!("N_c=24000 -> {e24:.6}, N_c=20000 -> {e20:.6}")))
}

pub fn check_effective_diffusion() -> Result<CheckResult> {
    let d = effective_diffusion(1e-9, REFERENCE_POROSITY_24K)?;
    let rel = (d / REFERENCE_D_EFF - 1.0).abs();
    Ok(CheckResult::new(
        2,
        "effective diffusion coefficient",
        rel,
        Bound::AtMost,
        D_EFF_REL_TOL,
    )
    .with_detail(format!(
        "D_eff(0.1349) = {d:.6e} m^2/s vs {REFERENCE_D_EFF:e}"
    )))
}

pub fn check_free_diffusion(scale: &Scale) -> Result<CheckResult> {
    let t = 100.0;
    let scene = preset(ScenarioKind::Transparent, 0.0)?;
    let snaps = simulate(&scene, scale.n_free, &[t], scale.seed, scale)?;
    let spec = GridSpec::default();
    let grid = SnapshotGrid::from_particles(&snaps[0].particles, Species::A, t, &spec);
    let observed = grid.radial_profile(Vec2::ZERO, FREE_PROFILE_BIN_UM)?;
    let area = spec.pixel_area_m2();
    let n = scale.n_free as f64;
    let expected = radial_profile_by(&spec, Vec2::ZERO, FREE_PROFILE_BIN_UM, |ix, iy| {
        let r = spec.pixel_center(ix, iy).norm() * MICRON;
        free_green_2d(r, t, n, 1e-9).expect("t > 0") * area
    })?;
    let mut worst: f64 = 0.0;
    let mut used = 0;
    let mut worst_at = 0.0;
    for (o, e) in observed.iter().zip(&expected) {
        if e.complete && e.total >= FREE_PROFILE_MIN_EXPECTED {
            used += 1;
            let rel = (o.total - e.total).abs() / e.total;
            if rel > worst {
                worst = rel;
                worst_at = e.radius();
            }
        }
    }
    if used == 0 {
        return Err(Error::Domain(
            "no radial bin reached the expected-count floor".into(),
        ));
    }
    Ok(CheckResult::new(
        3,
        "free diffusion vs heat kernel",
        worst,
        Bound::AtMost,
        FREE_PROFILE_REL_TOL,
    )
    .with_detail(format!(
        "N={}, t={t} s, {used} complete {FREE_PROFILE_BIN_UM} um annuli, worst at r={worst_at} um",
        scale.n_free
    )))
}

fn mean_squared_displacement(snap: &Snapshot, origin: Vec2) -> f64 {
    let sum: f64 = snap
        .particles
        .iter()
        .map(|p| (p.position - origin).norm_sq())
        .sum();
    sum / snap.particles.len() as f64
}

pub fn check_msd(scale: &Scale) -> Result<CheckResult> {
    let dt = RunSettings::default().dt;
    let t = MSD_STEPS as f64 * dt;
    let bulk = preset(ScenarioKind::Transparent, 0.0)?;
    let interior = enclosing_scene(0.0)?;
    let d_eff = interior.diffusion_in(crate::scene::RegionId::Region(0));
    let mut rels = Vec::new();
    for (scene, d, seed) in [
        (&bulk, 1e-9, scale.seed),
        (&interior, d_eff, scale.seed + 1),
    ] {
        let snap = &simulate(scene, scale.n, &[t], seed, scale)?[0];
        rels.push(mean_squared_displacement(snap, Vec2::ZERO) / (4.0 * d * t) - 1.0);
    }
    let worst = rels.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(CheckResult::new(
        4,
        "mean squared displacement laws",
        worst,
        Bound::AtMost,
        MSD_REL_TOL,
    )
    .with_detail(format!(
        "N={}, {MSD_STEPS} steps: bulk {:+.4}, interior {:+.4} relative to 4Dt",
        scale.n, rels[0], rels[1]
    )))
}

pub fn check_uptake_decay(scale: &Scale) -> Result<CheckResult> {
    let k_f = 0.01;
    let times = [100.0, 500.0, 1000.0];
    let snaps = simulate(&enclosing_scene(k_f)?, scale.n, &times, scale.seed, scale)?;
    let n = scale.n as f64;
    let mut zs = Vec::new();
    for snap in &snaps {
        let p = (-k_f * snap.time).exp();
        let survivors = snap.count(Species::A) as f64;
        zs.push((survivors - n * p) / (n * p * (1.0 - p)).sqrt());
    }
    let worst = zs.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    Ok(CheckResult::new(
        5,
        "uptake decay in a confining region",
        worst,
        Bound::AtMost,
        UPTAKE_SIGMAS,
    )
    .with_detail(format!(
        "N={}, z at t=100/500/1000 s: {:+.2} {:+.2} {:+.2}",
        scale.n, zs[0], zs[1], zs[2]
    )))
}

pub fn check_mass_conservation(scale: &Scale) -> Result<CheckResult> {
    let times = RunSettings::default().snapshot_times;
    let spec = GridSpec::default();
    let mut violations = 0u64;
    let mut checked = 0u64;
    for kind in ScenarioKind::ALL {
        for k_f in [0.0, 0.01] {
            let snaps = simulate(&preset(kind, k_f)?, scale.n_mass, &times, scale.seed, scale)?;
            for snap in &snaps {
                let (a, e) = (snap.count(Species::A), snap.count(Species::E));
                checked += 1;
                violations += u64::from(a + e != scale.n_mass);
                violations += u64::from(k_f == 0.0 && e != 0);
                for (sp, count) in [(Species::A, a), (Species::E, e)] {
                    let grid = SnapshotGrid::from_particles(&snap.particles, sp, snap.time, &spec);
                    violations += u64::from(grid.total() != count as u64);
                }
            }
        }
    }
    Ok(CheckResult::new(
        6,
        "mass conservation",
        violations as f64,
        Bound::AtMost,
        0.0,
    )
    .with_detail(format!(
        "{checked} snapshots over 6 presets x k_f in {{0, 0.01}}, N={}",
        scale.n_mass
    )))
}

/// `‖g − T(g)‖₂ / ‖g‖₂` and the noise bound `5/√(mean count per occupied pixel)`.
pub fn symmetry_discrepancy(grid: &SnapshotGrid, transformed: &SnapshotGrid) -> (f64, f64) {
    let (mut diff, mut norm) = (0.0, 0.0);
    for (&a, &b) in grid.counts.iter().zip(&transformed.counts) {
        diff += (a as f64 - b as f64).powi(2);
        norm += (a as f64).powi(2);
    }
    let occupied = grid.counts.iter().filter(|&&c| c > 0).count().max(1);
    let mean = grid.in_extent() as f64 / occupied as f64;
    let l2 = if norm > 0.0 {
        (diff / norm).sqrt()
    } else {
        0.0
    };
    (l2, SYMMETRY_NOISE_FACTOR / mean.sqrt())
}

pub fn check_symmetry(scale: &Scale) -> Result<CheckResult> {
    let times = [96.0, 498.0, 1500.0];
    let spec = GridSpec::default();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (kind, seed) in [
        (ScenarioKind::Two, scale.seed),
        (ScenarioKind::Four, scale.seed + 1),
    ] {
        let snaps = simulate(&preset(kind, 0.0)?, scale.n, &times, seed, scale)?;
        for snap in &snaps {
            let grid = SnapshotGrid::from_particles(&snap.particles, Species::A, snap.time, &spec);
            let moved = match kind {
                ScenarioKind::Two => grid.mirrored_x()?,
                _ => grid.rotated_quarter()?,
            };
            let (l2, bound) = symmetry_discrepancy(&grid, &moved);
            worst = worst.max(l2 / bound);
            parts.push(format!("{kind}@{}s {l2:.4}/{bound:.4}", snap.time));
        }
    }
    Ok(CheckResult::new(
        7,
        "preset symmetry (L2 / noise bound)",
        worst,
        Bound::AtMost,
        1.0,
    )
    .with_detail(format!("N={}: {}", scale.n, parts.join(", "))))
}

/// Particle grid vs finite-volume field on the `one` preset, for both
/// interface models.
#[derive(Debug, Clone, PartialEq)]
pub struct FdCrossCheck {
    pub pixels: usize,
    pub l2_continuous: f64,
    pub l2_partitioned: f64,
    /// L2-relative discrepancy that Poisson noise alone produces on average.
    pub poisson_floor: f64,
    /// L2-relative discrepancy left after removing the expected Poisson part.
    pub bias_continuous: f64,
    pub bias_partitioned: f64,
    /// Particle concentration just inside the spheroid over just outside.
    pub amplification: f64,
    /// The same ratio in the partitioned field.
    pub amplification_partitioned: f64,
    pub max_edge_fraction: f64,
}

fn band_ratio(values: &[f64], spec: &GridSpec, center: Vec2, radius_um: f64) -> f64 {
    let (mut inside, mut n_in, mut outside, mut n_out) = (0.0, 0, 0.0, 0);
    for (ix, iy, c) in spec.pixel_centers() {
        let s = (c - center).norm() - radius_um;
        let v = values[spec.index(ix, iy)];
        if (-3.0 * spec.pixel..-spec.pixel).contains(&s) {
            inside += v;
            n_in += 1;
        } else if (spec.pixel..3.0 * spec.pixel).contains(&s) {
            outside += v;
            n_out += 1;
        }
    }
    (inside / n_in as f64) / (outside / n_out as f64)
}

pub fn fd_cross_check(scale: &Scale) -> Result<FdCrossCheck> {
    let scene = preset(ScenarioKind::One, 0.0)?;
    let spec = GridSpec::centered(8020.0, FD_PIXEL_UM)?;
    let snaps = simulate(&scene, scale.n, &[FD_TIME_S], scale.seed, scale)?;
    let grid = SnapshotGrid::from_particles(&snaps[0].particles, Species::A, FD_TIME_S, &spec);
    let pbs = ConcentrationField::from_counts(&grid);
    let Region::Spheroid(sph) = &scene.regions[0] else {
        unreachable!("preset one holds a spheroid")
    };
    let (center_um, radius_um) = (sph.center * (1.0 / MICRON), sph.radius / MICRON);

    let solve = |model| {
        let settings = FdSettings {
            dt: max_stable_dt(&spec, scene.max_diffusion()),
            snapshot_times: vec![FD_TIME_S],
            n_molecules: scale.n as f64,
            interface: model,
        };
        fd_solve(&scene, &spec, &settings)
    };
    let continuous = solve(InterfaceModel::Continuous)?;
    let partitioned = solve(InterfaceModel::Partitioned)?;
    let fc = &continuous.snapshots[0].a;
    let fp = &partitioned.snapshots[0].a;

    let in_band = |i: usize| {
        let c = spec.pixel_center(i % spec.nx(), i / spec.nx());
        ((c - center_um).norm() - radius_um).abs() <= FD_BAND_PIXELS * FD_PIXEL_UM
    };
    let measure = |field: &ConcentrationField| -> Result<(f64, f64, f64, usize)> {
        let lam = field.expected_counts();
        let keep = |i: usize| lam[i] >= FD_NOISE_FLOOR_COUNT && !in_band(i);
        let l2 = compare_fields_masked(field, &pbs, Norm::L2Relative, keep)?;
        let (mut s1, mut s2, mut d2, mut k) = (0.0, 0.0, 0.0, 0);
        for (i, &l) in lam.iter().enumerate().filter(|&(i, _)| keep(i)) {
            s1 += l;
            s2 += l * l;
            d2 += (grid.counts[i] as f64 - l).powi(2);
            k += 1;
        }
        Ok((l2, (s1 / s2).sqrt(), ((d2 - s1).max(0.0) / s2).sqrt(), k))
    };
    let (l2_continuous, _, bias_continuous, pixels) = measure(fc)?;
    let (l2_partitioned, poisson_floor, bias_partitioned, _) = measure(fp)?;
    Ok(FdCrossCheck {
        pixels,
        l2_continuous,
        l2_partitioned,
        poisson_floor,
        bias_continuous,
        bias_partitioned,
        amplification: band_ratio(&pbs.values, &spec, center_um, radius_um),
        amplification_partitioned: band_ratio(&fp.values, &spec, center_um, radius_um),
        max_edge_fraction: continuous
            .max_edge_fraction
            .max(partitioned.max_edge_fraction),
    })
}

pub fn check_fd_cross_check(scale: &Scale) -> Result<(CheckResult, FdCrossCheck)> {
    let r = fd_cross_check(scale)?;
    let check = CheckResult::new(8, "particle vs finite-volume field", r.l2_continuous, Bound::AtMost, FD_L2_TOL)
        .with_detail(format!(
            "N={}, t={FD_TIME_S} s, {} pixels; Poisson floor {:.4}; partitioned model L2 {:.4}; \
             noise-corrected bias continuous {:.4}, partitioned {:.4}; boundary amplification {:.3} \
             (partitioned field {:.3})",
            scale.n,
            r.pixels,
            r.poisson_floor,
            r.l2_partitioned,
            r.bias_continuous,
            r.bias_partitioned,
            r.amplification,
            r.amplification_partitioned
        ));
    Ok((check, r))
}

fn fraction_within(snap: &Snapshot, radius: f64) -> f64 {
    let inside = snap
        .particles
        .iter()
        .filter(|p| p.position.norm() <= radius)
        .count();
    inside as f64 / snap.particles.len() as f64
}

pub fn check_ring_trapping(scale: &Scale) -> Result<CheckResult> {
    let t = 3000.0;
    let radius = 775.0 * MICRON;
    let ring = &simulate(
        &preset(ScenarioKind::RingCenter, 0.0)?,
        scale.n,
        &[t],
        scale.seed,
        scale,
    )?[0];
    let free = &simulate(
        &preset(ScenarioKind::Transparent, 0.0)?,
        scale.n,
        &[t],
        scale.seed + 1,
        scale,
    )?[0];
    let (p1, p2) = (fraction_within(ring, radius), fraction_within(free, radius));
    let n = scale.n as f64;
    let z = (p1 - p2) / (p1 * (1.0 - p1) / n + p2 * (1.0 - p2) / n).sqrt();
    Ok(
        CheckResult::new(9, "ring trapping (sigmas)", z, Bound::AtLeast, RING_SIGMAS).with_detail(
            format!(
                "N={}, fraction within 775 um: ring {p1:.4}, transparent {p2:.4}",
                scale.n
            ),
        ),
    )
}

pub fn check_uptake_gradient(scale: &Scale) -> Result<CheckResult> {
    let t = 3000.0;
    let scene = preset(ScenarioKind::Two, 0.01)?;
    let snap = &simulate(&scene, scale.n, &[t], scale.seed, scale)?[0];
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for region in &scene.regions {
        let Region::Spheroid(s) = region else {
            continue;
        };
        let toward = (scene.tx_position - s.center).x.signum();
        let (mut near, mut far) = (0u64, 0u64);
        for p in snap
            .positions(Species::E)
            .filter(|&p| s.boundary().contains(p))
        {
            if (p.x - s.center.x) * toward > 0.0 {
                near += 1;
            } else {
                far += 1;
            }
        }
        let z = (near as f64 - far as f64) / ((near + far) as f64).sqrt().max(1.0);
        worst = worst.min(z);
        parts.push(format!(
            "x={:.0} um near {near} far {far} ({z:.1} sigma)",
            s.center.x / MICRON
        ));
    }
    Ok(CheckResult::new(
        10,
        "uptake gradient toward transmitter (sigmas)",
        worst,
        Bound::AtLeast,
        GRADIENT_SIGMAS,
    )
    .with_detail(format!("N={}, t={t} s: {}", scale.n, parts.join(", "))))
}

fn grid_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs the `one` preset with uptake on 1 and 8 workers under `work_dir`
/// and counts grid files that differ.
pub fn check_determinism(scale: &Scale, work_dir: &Path) -> Result<CheckResult> {
    let mut dirs = Vec::new();
    for workers in [1, 8] {
        let mut cfg = SimConfig::reference(ScenarioKind::One);
        cfg.params.k_f = 0.01;
        cfg.run.n_particles = scale.n_determinism;
        cfg.run.t_end = 100.0;
        cfg.run.snapshot_times = vec![50.0, 100.0];
        cfg.run.seed = scale.seed;
        cfg.run.workers = Some(workers);
        cfg.output.dir = work_dir.join(format!("workers-{workers}"));
        cfg.output.emit_ppm = false;
        dirs.push(cli::run(&cfg)?.dir);
    }
    let (a, b) = (grid_files(&dirs[0])?, grid_files(&dirs[1])?);
    let names = |v: &[PathBuf]| {
        v.iter()
            .map(|p| p.file_name().map(|n| n.to_owned()))
            .collect::<Vec<_>>()
    };
    let mut differing = 0usize;
    if names(&a) != names(&b) || a.is_empty() {
        differing += a.len().max(b.len()).max(1);
    } else {
        for (x, y) in a.iter().zip(&b) {
            let bx = std::fs::read(x).map_err(|e| Error::io(x, e))?;
            let by = std::fs::read(y).map_err(|e| Error::io(y, e))?;
            differing += usize::from(bx != by);
        }
    }
    Ok(CheckResult::new(
        11,
        "determinism across worker counts",
        differing as f64,
        Bound::AtMost,
        0.0,
    )
    .with_detail(format!(
        "{} grid files compared, N={}",
        a.len(),
        scale.n_determinism
    )))
}

fn scratch_dir() -> Result<PathBuf> {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    let dir = std::env::temp_dir().join(format!(
        "spheroid-sim-validate-{}-{stamp}",
        std::process::id()
    ));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Runs a suite, reporting each result through `report` as soon as it is
/// known.
pub fn run_suite<F: FnMut(&CheckResult)>(
    suite: Suite,
    scale: &Scale,
    mut report: F,
) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut push = |r: CheckResult| {
        report(&r);
        out.push(r);
    };
    if matches!(suite, Suite::Analytic | Suite::All) {
        push(check_porosity()?);
        push(check_effective_diffusion()?);
        push(check_free_diffusion(scale)?);
        push(check_msd(scale)?);
        push(check_uptake_decay(scale)?);
    }
    if matches!(suite, Suite::Properties | Suite::All) {
        push(check_mass_conservation(scale)?);
        push(check_symmetry(scale)?);
    }
    if matches!(suite, Suite::FdCrossCheck | Suite::All) {
        push(check_fd_cross_check(scale)?.0);
    }
    if matches!(suite, Suite::Properties | Suite::All) {
        push(check_ring_trapping(scale)?);
        push(check_uptake_gradient(scale)?);
        let dir = scratch_dir()?;
        let result = check_determinism(scale, &dir);
        let _ = std::fs::remove_dir_all(&dir);
        push(result?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::accumulate;

    #[test]
    fn instant_checks() {
        let p = check_porosity().unwrap();
        assert!(p.passed, "{p}");
        let d = check_effective_diffusion().unwrap();
        assert!((d.measured - 0.00906).abs() < 1e-4, "{d}");
    }

    #[test]
    fn symmetric_grid_has_no_discrepancy() {
        let pts = [Vec2::new(105.0, 5.0), Vec2::new(-105.0, 5.0)];
        let grid = accumulate(pts, &GridSpec::default());
        let (l2, bound) = symmetry_discrepancy(&grid, &grid.mirrored_x().unwrap());
        assert_eq!(l2, 0.0);
        assert!((bound - 5.0).abs() < 1e-12);
        let lopsided = accumulate([Vec2::new(100.0, 5.0)], &GridSpec::default());
        let (l2, _) = symmetry_discrepancy(&lopsided, &lopsided.mirrored_x().unwrap());
        assert!((l2 - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn result_line_format() {
        let r = CheckResult::new(3, "demo", 0.01, Bound::AtMost, 0.03);
        assert_eq!(
            r.to_string(),
            "PASS [ 3] demo: measured 0.010000 (require <= 0.03)"
        );
        let r = CheckResult::new(9, "demo", 4.0, Bound::AtLeast, 5.0).with_detail("x".into());
        assert!(r.to_string().starts_with("FAIL") && r.to_string().ends_with("; x"));
    }
}
