//! Reference solutions used to validate the particle simulator.
//!
//! [`free_green_2d`] is the free-space heat kernel. [`fd_solve`] integrates
//! the mean-field reaction–diffusion system
//!
//! ```text
//! ∂c_A/∂t = ∇·(D(x)∇c_A) − k_f(x)·c_A
//! ∂c_E/∂t = k_f(x)·c_A
//! ```
//!
//! with an explicit finite-volume scheme on a [`GridSpec`]. Pixels belong to
//! the region containing their center.

use std::f64::consts::PI;

use serde::Serialize;

use crate::geometry::Vec2;
use crate::histogram::{read_grid_csv, write_grid_csv, GridHeader, GridSpec, SnapshotGrid};
use crate::scene::{RegionId, Scene};
use crate::stepper::Species;
use crate::{Error, Result, MICRON};

/// Free 2-D diffusion from an impulsive point release, molecules/m².
pub fn free_green_2d(r: f64, t: f64, n: f64, d: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if !(d > 0.0) {
        return Err(Error::Domain(format!(
            "diffusion coefficient must be positive, got {d}"
        )));
    }
    let four_dt = 4.0 * d * t;
    Ok(n / (PI * four_dt) * (-r * r / four_dt).exp())
}

/// A field of molecules per m² on a pixel grid, row-major, row 0 lowest `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationField {
    pub spec: GridSpec,
    pub species: Species,
    pub time: f64,
    pub values: Vec<f64>,
}

impl ConcentrationField {
    pub fn zeros(spec: GridSpec, species: Species, time: f64) -> Self {
        Self {
            spec,
            species,
            time,
            values: vec![0.0; spec.len()],
        }
    }

    /// Counts divided by pixel area.
    pub fn from_counts(grid: &SnapshotGrid) -> Self {
        let area = grid.spec.pixel_area_m2();
        Self {
            spec: grid.spec,
            species: grid.species,
            time: grid.time,
            values: grid.counts.iter().map(|&c| c as f64 / area).collect(),
        }
    }

    /// Evaluates `f(pixel center in m)` at every pixel.
    pub fn from_fn<F: Fn(Vec2) -> f64>(spec: GridSpec, species: Species, time: f64, f: F) -> Self {
        let values = spec
            .pixel_centers()
            .map(|(_, _, c)| f(c * MICRON))
            .collect();
        Self {
            spec,
            species,
            time,
            values,
        }
    }

    /// The free-space kernel sampled at pixel centers.
    pub fn free_green(spec: GridSpec, source: Vec2, time: f64, n: f64, d: f64) -> Result<Self> {
        free_green_2d(0.0, time, n, d)?;
        Ok(Self::from_fn(spec, Species::A, time, |p| {
            free_green_2d((p - source).norm(), time, n, d).expect("checked above")
        }))
    }

    pub fn value_at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.spec.index(ix, iy)]
    }

    /// Expected molecules per pixel.
    pub fn expected_counts(&self) -> Vec<f64> {
        let area = self.spec.pixel_area_m2();
        self.values.iter().map(|v| v * area).collect()
    }

    /// Molecules inside the grid.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.pixel_area_m2()
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            time: self.time,
            species: self.species,
            spec: self.spec,
            out_of_extent: 0,
        }
    }

    pub fn to_csv(&self) -> String {
        let cells: Vec<String> = self.values.iter().map(|v| format!("{v:e}")).collect();
        let mut out = Vec::new();
        write_grid_csv(&mut out, &self.header(), &cells).expect("writing to memory");
        String::from_utf8(out).expect("csv is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (header, values) = read_grid_csv(text)?;
        Ok(Self {
            spec: header.spec,
            species: header.species,
            time: header.time,
            values,
        })
    }
}

/// How the solver couples concentrations across a change in diffusivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterfaceModel {
    /// Concentration is continuous; face diffusivity is the harmonic mean.
    #[default]
    Continuous,
    /// Concentration jumps by `K = √(D_bulk/D_local)` into a region, the
    /// steady-state ratio produced by the particle scaling rule. The solver
    /// evolves `u = c/K`, which is continuous, with face conductance equal to
    /// the harmonic mean of `D·K` on either side.
    Partitioned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSettings {
    pub dt: f64,
    pub snapshot_times: Vec<f64>,
    /// Molecules released at the transmitter.
    pub n_molecules: f64,
    pub interface: InterfaceModel,
}

/// Largest stable step allowed, half the explicit limit `h²/(4·D_max)`.
pub fn max_stable_dt(spec: &GridSpec, d_max: f64) -> f64 {
    let h = spec.pixel * MICRON;
    0.5 * h * h / (4.0 * d_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSnapshot {
    pub time: f64,
    pub a: ConcentrationField,
    pub e: ConcentrationField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub snapshots: Vec<FdSnapshot>,
    pub steps: u64,
    /// Largest fraction of the released mass ever found in the outermost
    /// pixel ring; small values mean the reflecting edge is immaterial.
    pub max_edge_fraction: f64,
}

struct Stencil {
    nx: usize,
    ny: usize,
    /// `1/K` per pixel.
    inv_k: Vec<f64>,
    k_f: Vec<f64>,
    /// Conductance of the face between pixel `i` and `i + 1`; zero on the
    /// right edge.
    gx: Vec<f64>,
    /// Conductance of the face between pixel `i` and `i + nx`; zero on the
    /// top edge.
    gy: Vec<f64>,
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

impl Stencil {
    fn new(scene: &Scene, spec: &GridSpec, model: InterfaceModel) -> Self {
        let (nx, ny) = (spec.nx(), spec.ny());
        let mut d = Vec::with_capacity(spec.len());
        let mut k = Vec::with_capacity(spec.len());
        let mut k_f = Vec::with_capacity(spec.len());
        for (_, _, c) in spec.pixel_centers() {
            let id: RegionId = scene.region_at(c * MICRON);
            let local = scene.diffusion_in(id);
            d.push(local);
            k_f.push(scene.uptake_rate_in(id));
            k.push(match model {
                InterfaceModel::Continuous => 1.0,
                InterfaceModel::Partitioned => (scene.d_bulk / local).sqrt(),
            });
        }
        let mut gx = vec![0.0; spec.len()];
        let mut gy = vec![0.0; spec.len()];
        for iy in 0..ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                if ix + 1 < nx {
                    gx[i] = harmonic(d[i] * k[i], d[i + 1] * k[i + 1]);
                }
                if iy + 1 < ny {
                    gy[i] = harmonic(d[i] * k[i], d[i + nx] * k[i + nx]);
                }
            }
        }
        Self {
            nx,
            ny,
            inv_k: k.iter().map(|k| 1.0 / k).collect(),
            k_f,
            gx,
            gy,
        }
    }

    /// Largest diagonal coefficient `Σ G / K` over pixels, in m²/s.
    fn max_rate(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nx * self.ny {
            let west = if i % self.nx > 0 { self.gx[i - 1] } else { 0.0 };
            let south = if i >= self.nx {
                self.gy[i - self.nx]
            } else {
                0.0
            };
            worst = worst.max((self.gx[i] + west + self.gy[i] + south) * self.inv_k[i]);
        }
        worst
    }

    /// One explicit step of length `tau`; `r = tau/h²`.
    fn step(
        &self,
        c: &mut [f64],
        e: &mut [f64],
        u: &mut [f64],
        next: &mut [f64],
        r: f64,
        tau: f64,
    ) {
        let nx = self.nx;
        for ((u, c), ik) in u.iter_mut().zip(c.iter()).zip(&self.inv_k) {
            *u = c * ik;
        }
        for iy in 0..self.ny {
            for ix in 0..nx {
                let i = iy * nx + ix;
                let ui = u[i];
                let left = if ix > 0 {
                    self.gx[i - 1] * (u[i - 1] - ui)
                } else {
                    0.0
                };
                let right = self.gx[i] * (if ix + 1 < nx { u[i + 1] } else { ui } - ui);
                let down = if iy > 0 {
                    self.gy[i - nx] * (u[i - nx] - ui)
                } else {
                    0.0
                };
                let up = self.gy[i] * (if iy + 1 < self.ny { u[i + nx] } else { ui } - ui);
                next[i] = c[i] + r * ((left + right) + (down + up));
            }
        }
        for i in 0..c.len() {
            let kf = self.k_f[i];
            if kf > 0.0 {
                let survive = (-kf * tau).exp();
                e[i] += next[i] * (1.0 - survive);
                next[i] *= survive;
            }
        }
        c.copy_from_slice(next);
    }

    fn edge_fraction(&self, c: &[f64], total: f64) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let mut edge = 0.0;
        for iy in 0..ny {
            for ix in 0..nx {
                if ix == 0 || iy == 0 || ix + 1 == nx || iy + 1 == ny {
                    edge += c[iy * nx + ix];
                }
            }
        }
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }
}

/// Integrates from an impulsive release of `n_molecules` in the pixel holding
/// the transmitter. Edges are reflecting. Steps shorten where needed so each
/// snapshot lands exactly on its time.
pub fn fd_solve(scene: &Scene, spec: &GridSpec, settings: &FdSettings) -> Result<FdSolution> {
    let dt = settings.dt;
    let limit = max_stable_dt(spec, scene.max_diffusion());
    if !(dt > 0.0) || dt > limit {
        return Err(Error::config(
            "dt_fd",
            format!("{dt} s exceeds the stable limit {limit:.6e} s for this grid"),
        ));
    }
    let times = &settings.snapshot_times;
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite())
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::config(
            "snapshot_times",
            "must be finite, non-negative and strictly increasing",
        ));
    }
    let tx = scene.tx_position * (1.0 / MICRON);
    let (ix, iy) = spec
        .pixel_of(tx)
        .ok_or_else(|| Error::config("grid", "transmitter lies outside the grid"))?;

    let stencil = Stencil::new(scene, spec, settings.interface);
    let h = spec.pixel * MICRON;
    let area = h * h;
    if stencil.max_rate() * dt / area > 0.5 {
        return Err(Error::config(
            "dt_fd",
            "explicit update would not be positive",
        ));
    }

    let n = spec.len();
    let mut c = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut next = vec![0.0; n];
    c[spec.index(ix, iy)] = settings.n_molecules / area;

    let mut t = 0.0;
    let mut steps = 0u64;
    let mut max_edge: f64 = 0.0;
    let mut snapshots = Vec::with_capacity(times.len());
    for &target in times {
        loop {
            let remaining = target - t;
            if remaining <= 1e-9 * dt {
                break;
            }
            let tau = remaining.min(dt);
            stencil.step(&mut c, &mut e, &mut u, &mut next, tau / area, tau);
            steps += 1;
            t = if tau == remaining { target } else { t + tau };
            if steps.is_multiple_of(64) {
                max_edge = max_edge.max(stencil.edge_fraction(&c, settings.n_molecules / area));
            }
        }
        max_edge = max_edge.max(stencil.edge_fraction(&c, settings.n_molecules / area));
        snapshots.push(FdSnapshot {
            time: target,
            a: ConcentrationField {
                spec: *spec,
                species: Species::A,
                time: target,
                values: c.clone(),
            },
            e: ConcentrationField {
                spec: *spec,
                species: Species::E,
                time: target,
                values: e.clone(),
            },
        });
    }
    Ok(FdSolution {
        snapshots,
        steps,
        max_edge_fraction: max_edge,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// `‖a − b‖₂ / ‖a‖₂`.
    L2Relative,
    /// Largest `|a − b| / max(|a|, floor)` over pixels where either field
    /// reaches `floor`.
    MaxRelativeOverThreshold { floor: f64 },
}

/// Discrepancy of `b` from the reference `a`.
pub fn compare_fields(a: &ConcentrationField, b: &ConcentrationField, norm: Norm) -> Result<f64> {
    compare_fields_masked(a, b, norm, |_| true)
}

/// As [`compare_fields`], restricted to pixels whose index passes `keep`.
pub fn compare_fields_masked<F>(
    a: &ConcentrationField,
    b: &ConcentrationField,
    norm: Norm,
    keep: F,
) -> Result<f64>
where
    F: Fn(usize) -> bool,
{
    if !a.spec.same_as(&b.spec) {
        return Err(Error::GridMismatch(format!(
            "extent {:?} pixel {} vs extent {:?} pixel {}",
            a.spec.extent(),
            a.spec.pixel,
            b.spec.extent(),
            b.spec.pixel
        )));
    }
    let pairs = a
        .values
        .iter()
        .zip(&b.values)
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (&x, &y))| (x, y));
    match norm {
        Norm::L2Relative => {
            let (mut diff, mut reference) = (0.0, 0.0);
            for (x, y) in pairs {
                diff += (x - y) * (x - y);
                reference += x * x;
            }
            if reference == 0.0 {
                return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
            }
            Ok((diff / reference).sqrt())
        }
        Norm::MaxRelativeOverThreshold { floor } => Ok(pairs
            .filter(|(x, y)| x.abs() >= floor || y.abs() >= floor)
            .map(|(x, y)| (x - y).abs() / x.abs().max(floor))
            .fold(0.0, f64::max)),
    }
}
