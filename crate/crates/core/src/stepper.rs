//! Brownian-dynamics engine.
//!
//! Each step samples a Gaussian displacement with the diffusion coefficient of
//! the particle's current region, walks the displacement through any region
//! boundaries it meets (rescaling the remainder by `√(D_dest/D_src)` at each
//! one), and finally tests first-order uptake at the end position.

use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::rng::StreamRng;
use crate::scene::{RegionId, Scene};
use crate::{Error, Result};

pub const DEFAULT_MAX_CROSSINGS: u32 = 8;

/// Relative slack when deciding that a time is a whole number of steps.
const STEP_GRID_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    /// Diffusing signalling molecule.
    A,
    /// Converted molecule, immobile.
    E,
}

impl Species {
    pub fn label(self) -> &'static str {
        match self {
            Species::A => "A",
            Species::E => "E",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Particle {
    /// Meters.
    pub position: Vec2,
    pub species: Species,
    /// Simulated time of the `A → E` conversion; `Some` iff the species is `E`.
    pub conversion_time: Option<f64>,
}

impl Particle {
    pub fn released_at(position: Vec2) -> Self {
        Self {
            position,
            species: Species::A,
            conversion_time: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub end: Vec2,
    pub crossings: u32,
    /// The crossing cap was hit and the particle was left on the last boundary.
    pub clamped: bool,
    pub converted: bool,
    /// Region of the end position.
    pub region: RegionId,
}

/// Zero-mean Gaussian step with variance `2·D·Δt` on each axis.
pub fn sample_displacement<R: Rng + ?Sized>(d_local: f64, dt: f64, rng: &mut R) -> Vec2 {
    if d_local == 0.0 {
        return Vec2::ZERO;
    }
    let sigma = (2.0 * d_local * dt).sqrt();
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Vec2::new(sigma * x, sigma * y)
}

/// Chance that an `A` molecule inside a region with rate `k_f` converts
/// during one step: `1 − exp(−k_f·Δt)`.
pub fn conversion_probability(k_f: f64, dt: f64) -> f64 {
    -(-k_f * dt).exp_m1()
}

/// Result of walking one displacement through the scene's boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagation {
    pub end: Vec2,
    /// Region the walk finished in, as tracked across crossings.
    pub region: RegionId,
    pub crossings: u32,
    pub clamped: bool,
}

/// Applies the boundary scaling rule to a displacement starting at `start`.
///
/// A boundary only counts as crossed when the walk leaves the region it is
/// currently in, so the crossing point itself (which may round to either
/// side of the circle) is never re-detected.
pub fn propagate(
    scene: &Scene,
    start: Vec2,
    start_region: RegionId,
    displacement: Vec2,
    max_crossings: u32,
) -> Propagation {
    let mut pos = start;
    let mut remaining = displacement;
    let mut region = start_region;
    let mut crossings = 0;
    loop {
        let mut next: Option<(f64, RegionId)> = None;
        for boundary in scene.boundaries() {
            let entering = region == boundary.outside;
            if !entering && region != boundary.inside {
                continue;
            }
            let Some(roots) = boundary.circle.line_roots(pos, remaining) else {
                continue;
            };
            let (lambda, dest) = if entering {
                (roots.entry, boundary.inside)
            } else {
                (roots.exit, boundary.outside)
            };
            if lambda > 0.0 && lambda <= 1.0 && next.is_none_or(|(best, _)| lambda < best) {
                next = Some((lambda, dest));
            }
        }
        let Some((lambda, dest)) = next else {
            return Propagation {
                end: pos + remaining,
                region,
                crossings,
                clamped: false,
            };
        };
        crossings += 1;
        let hit = pos + remaining * lambda;
        let scale = (scene.diffusion_in(dest) / scene.diffusion_in(region)).sqrt();
        region = dest;
        if crossings >= max_crossings {
            return Propagation {
                end: hit,
                region,
                crossings,
                clamped: true,
            };
        }
        remaining = remaining * ((1.0 - lambda) * scale);
        pos = hit;
    }
}

/// Per-step update rule bound to one scene and time step.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    scene: &'a Scene,
    dt: f64,
    max_crossings: u32,
    uptake: bool,
    conversion: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(scene: &'a Scene, dt: f64, max_crossings: u32) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config(
                "dt_s",
                format!("time step must be positive, got {dt}"),
            ));
        }
        if max_crossings == 0 {
            return Err(Error::config("max_crossings", "must be at least 1"));
        }
        let conversion = scene
            .regions
            .iter()
            .map(|r| conversion_probability(r.medium().k_f, dt))
            .collect();
        Ok(Self {
            scene,
            dt,
            max_crossings,
            uptake: scene.has_uptake(),
            conversion,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances an `A` particle by one step ending at simulated time `time_after`.
    pub fn advance<R: Rng + ?Sized>(
        &self,
        particle: &mut Particle,
        time_after: f64,
        rng: &mut R,
    ) -> Result<StepOutcome> {
        if particle.species != Species::A {
            return Err(Error::Domain(
                "only diffusing A particles can be advanced".into(),
            ));
        }
        let start_region = self.scene.region_at(particle.position);
        let disp = sample_displacement(self.scene.diffusion_in(start_region), self.dt, rng);
        let walk = propagate(
            self.scene,
            particle.position,
            start_region,
            disp,
            self.max_crossings,
        );
        if !walk.end.is_finite() {
            return Err(Error::CorruptedState(format!(
                "non-finite position ({}, {}) after a step from ({}, {})",
                walk.end.x, walk.end.y, particle.position.x, particle.position.y
            )));
        }
        particle.position = walk.end;

        let mut region = walk.region;
        let mut converted = false;
        if self.uptake {
            region = self.scene.region_at(walk.end);
            if let RegionId::Region(i) = region {
                let p = self.conversion[i];
                if p > 0.0 && rng.random::<f64>() < p {
                    particle.species = Species::E;
                    particle.conversion_time = Some(time_after);
                    converted = true;
                }
            }
        }
        Ok(StepOutcome {
            end: walk.end,
            crossings: walk.crossings,
            clamped: walk.clamped,
            converted,
            region,
        })
    }
}

/// One step of an `A` particle with the default crossing cap.
pub fn advance_particle<R: Rng + ?Sized>(
    particle: &mut Particle,
    scene: &Scene,
    dt: f64,
    time_after: f64,
    rng: &mut R,
) -> Result<StepOutcome> {
    Stepper::new(scene, dt, DEFAULT_MAX_CROSSINGS)?.advance(particle, time_after, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub n_particles: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Seconds; each must be a whole number of steps in `[0, t_end]`.
    pub snapshot_times: Vec<f64>,
    pub seed: u64,
    /// Worker threads; `None` lets the pool pick.
    pub workers: Option<usize>,
    pub max_crossings: u32,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            n_particles: 100_000,
            dt: 0.5,
            t_end: 3600.0,
            snapshot_times: vec![96.0, 498.0, 1500.0, 3000.0],
            seed: 1,
            workers: None,
            max_crossings: DEFAULT_MAX_CROSSINGS,
        }
    }
}

/// Whole number of steps `t` spans, if it lies on the step grid.
pub fn steps_for(t: f64, dt: f64) -> Option<u64> {
    let k = t / dt;
    let rounded = k.round();
    ((k - rounded).abs() <= STEP_GRID_TOLERANCE * rounded.max(1.0) && rounded >= 0.0)
        .then_some(rounded as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub n_steps: u64,
    pub snapshot_steps: Vec<u64>,
}

impl RunSettings {
    pub fn schedule(&self) -> Result<Schedule> {
        if self.n_particles == 0 {
            return Err(Error::config("n_particles", "must be at least 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::config(
                "dt_s",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::config(
                "t_end_s",
                format!("must be at least one time step, got {}", self.t_end),
            ));
        }
        if self.max_crossings == 0 {
            return Err(Error::config("max_crossings", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        let n_steps = (self.t_end / self.dt * (1.0 + STEP_GRID_TOLERANCE)).floor() as u64;
        let mut snapshot_steps = Vec::with_capacity(self.snapshot_times.len());
        for &t in &self.snapshot_times {
            if !(t >= 0.0 && t <= self.t_end) {
                return Err(Error::config(
                    "snapshot_times_s",
                    format!("{t} s lies outside [0, {}] s", self.t_end),
                ));
            }
            let step = steps_for(t, self.dt).ok_or_else(|| {
                Error::config(
                    "snapshot_times_s",
                    format!("{t} s is not a multiple of the {} s time step", self.dt),
                )
            })?;
            if snapshot_steps.last().is_some_and(|&prev| step <= prev) {
                return Err(Error::config(
                    "snapshot_times_s",
                    "snapshot times must be strictly increasing",
                ));
            }
            snapshot_steps.push(step);
        }
        Ok(Schedule {
            n_steps,
            snapshot_steps,
        })
    }
}

/// Borrowed view of all particles at one snapshot time.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotView<'a> {
    pub index: usize,
    pub step: u64,
    pub time: f64,
    pub particles: &'a [Particle],
}

impl SnapshotView<'_> {
    pub fn count(&self, species: Species) -> usize {
        self.particles
            .iter()
            .filter(|p| p.species == species)
            .count()
    }

    pub fn to_owned(&self) -> Snapshot {
        Snapshot {
            step: self.step,
            time: self.time,
            particles: self.particles.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub time: f64,
    pub particles: Vec<Particle>,
}

impl Snapshot {
    pub fn count(&self, species: Species) -> usize {
        self.particles
            .iter()
            .filter(|p| p.species == species)
            .count()
    }

    /// Positions of one species, in meters.
    pub fn positions(&self, species: Species) -> impl Iterator<Item = Vec2> + '_ {
        self.particles
            .iter()
            .filter(move |p| p.species == species)
            .map(|p| p.position)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunDiagnostics {
    pub steps: u64,
    pub particle_steps: u64,
    pub crossings: u64,
    /// Steps that hit the crossing cap.
    pub clamp_events: u64,
    pub conversions_per_region: Vec<u64>,
    pub wall_clock_s: f64,
    pub mean_step_wall_clock_s: f64,
    pub max_step_wall_clock_s: f64,
    pub workers: usize,
}

#[derive(Debug, Clone)]
struct Tally {
    particle_steps: u64,
    crossings: u64,
    clamps: u64,
    conversions: Vec<u64>,
}

impl Tally {
    fn new(regions: usize) -> Self {
        Self {
            particle_steps: 0,
            crossings: 0,
            clamps: 0,
            conversions: vec![0; regions],
        }
    }

    fn record(&mut self, outcome: &StepOutcome) {
        self.particle_steps += 1;
        self.crossings += u64::from(outcome.crossings);
        self.clamps += u64::from(outcome.clamped);
        if outcome.converted {
            if let RegionId::Region(i) = outcome.region {
                self.conversions[i] += 1;
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.particle_steps += other.particle_steps;
        self.crossings += other.crossings;
        self.clamps += other.clamps;
        for (a, b) in self.conversions.iter_mut().zip(other.conversions) {
            *a += b;
        }
        self
    }
}

/// Runs the simulation, handing each scheduled snapshot to `on_snapshot`.
///
/// All particles start as `A` at the transmitter at `t = 0`. Particle `i`
/// in step `k` draws from the stream keyed by `(seed, i, k)`, so results do
/// not depend on the worker count.
pub fn run_simulation_with<F>(
    scene: &Scene,
    settings: &RunSettings,
    mut on_snapshot: F,
) -> Result<RunDiagnostics>
where
    F: FnMut(SnapshotView<'_>) -> Result<()>,
{
    let schedule = settings.schedule()?;
    let stepper = Stepper::new(scene, settings.dt, settings.max_crossings)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = settings.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;

    let started = Instant::now();
    let mut particles = vec![Particle::released_at(scene.tx_position); settings.n_particles];
    let mut totals = Tally::new(scene.regions.len());
    let mut max_step_s: f64 = 0.0;
    let mut pending = schedule
        .snapshot_steps
        .iter()
        .copied()
        .enumerate()
        .peekable();

    let mut emit = |step: u64, particles: &[Particle], pending: &mut std::iter::Peekable<_>| {
        while let Some(&(index, at)) = pending.peek() {
            if at != step {
                break;
            }
            pending.next();
            check_finite(particles, step)?;
            on_snapshot(SnapshotView {
                index,
                step,
                time: step as f64 * settings.dt,
                particles,
            })?;
        }
        Ok::<(), Error>(())
    };

    emit(0, &particles, &mut pending)?;
    for step in 1..=schedule.n_steps {
        let step_started = Instant::now();
        let time_after = step as f64 * settings.dt;
        let n_regions = scene.regions.len();
        let tally = pool.install(|| {
            particles
                .par_iter_mut()
                .enumerate()
                .with_min_len(4096)
                .try_fold(
                    || Tally::new(n_regions),
                    |mut acc, (i, particle)| {
                        if particle.species == Species::E {
                            return Ok(acc);
                        }
                        let mut rng = StreamRng::new(settings.seed, i as u64, step);
                        let outcome = stepper.advance(particle, time_after, &mut rng).map_err(
                            |e| match e {
                                Error::CorruptedState(msg) => Error::CorruptedState(format!(
                                    "particle {i} at step {step}: {msg}"
                                )),
                                other => other,
                            },
                        )?;
                        acc.record(&outcome);
                        Ok::<_, Error>(acc)
                    },
                )
                .try_reduce(|| Tally::new(n_regions), |a, b| Ok(a.merge(b)))
        })?;
        totals = totals.merge(tally);
        max_step_s = max_step_s.max(step_started.elapsed().as_secs_f64());
        emit(step, &particles, &mut pending)?;
    }

    let wall_clock_s = started.elapsed().as_secs_f64();
    Ok(RunDiagnostics {
        steps: schedule.n_steps,
        particle_steps: totals.particle_steps,
        crossings: totals.crossings,
        clamp_events: totals.clamps,
        conversions_per_region: totals.conversions,
        wall_clock_s,
        mean_step_wall_clock_s: wall_clock_s / schedule.n_steps as f64,
        max_step_wall_clock_s: max_step_s,
        workers: pool.current_num_threads(),
    })
}

fn check_finite(particles: &[Particle], step: u64) -> Result<()> {
    match particles.iter().position(|p| !p.position.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::CorruptedState(format!(
            "particle {i} has a non-finite position at step {step}"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: RunDiagnostics,
}

/// Runs the simulation and keeps a full copy of every snapshot.
pub fn run_simulation(scene: &Scene, settings: &RunSettings) -> Result<SimulationRun> {
    let mut snapshots = Vec::with_capacity(settings.snapshot_times.len());
    let diagnostics = run_simulation_with(scene, settings, |view| {
        snapshots.push(view.to_owned());
        Ok(())
    })?;
    Ok(SimulationRun {
        snapshots,
        diagnostics,
    })
}
