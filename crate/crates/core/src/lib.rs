//! Particle-based simulation of molecules released from a point transmitter
//! into a 2-D fluid that contains porous spheroid receivers.
//!
//! Molecules take Gaussian steps with the local diffusion coefficient: the
//! bulk value `D` outside the receivers and the reduced effective value
//! `D_eff = ε^1.5 · D` inside them. When a step crosses a receiver boundary,
//! the part of the step on the far side is rescaled by `√(D_dest / D_src)`.
//! Inside a receiver, diffusing `A` molecules may be taken up by cells
//! (first order `A → E`), after which they stop moving.
//!
//! The crate is organized as:
//!
//! - [`scene`]: receiver geometry, porosity and effective diffusion, and the
//!   six built-in scenario presets.
//! - [`stepper`]: the Brownian-dynamics engine and the parallel run loop.
//! - [`histogram`]: per-pixel molecule counts, grid CSV files and PPM heatmaps.
//! - [`oracle`]: the free-space heat kernel and a finite-volume solver used to
//!   check the particle engine.
//! - [`config`], [`cli`] and [`validate`]: configuration files, run
//!   orchestration with manifests, and the validation suites.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod histogram;
pub mod oracle;
pub mod rng;
pub mod scene;
pub mod stepper;
pub mod validate;

pub use error::{Error, Result};
pub use geometry::{Circle, Vec2};
pub use scene::{
    effective_diffusion, porosity, sphere_volume, PorousMedium, Region, RegionId, RingRegion,
    ScenarioKind, ScenarioParams, Scene, Spheroid,
};
pub use stepper::{Particle, RunSettings, Species};

/// Meters per micrometer. Lengths are stored in meters and exchanged in µm.
pub const MICRON: f64 = 1e-6;
