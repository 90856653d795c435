//! Receiver geometry and the porous-medium diffusion model.
//!
//! All lengths are meters and diffusion coefficients m²/s. Scenario presets
//! are placed relative to a transmitter at the origin with a receiver distance
//! `d`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{Circle, Vec2};
use crate::{Error, Result, MICRON};

/// Volume of a 3-D sphere of the given radius.
pub fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
}

/// Fraction of a spheroid's volume not occupied by its cells.
///
/// `spheroid_volume` and `cell_volume` share any volume unit.
pub fn porosity(spheroid_volume: f64, cell_count: u64, cell_volume: f64) -> Result<f64> {
    if !(spheroid_volume > 0.0) || !spheroid_volume.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "spheroid volume must be positive, got {spheroid_volume}"
        )));
    }
    if !(cell_volume >= 0.0) || !cell_volume.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "cell volume must be non-negative, got {cell_volume}"
        )));
    }
    let occupied = cell_count as f64 * cell_volume;
    if occupied > spheroid_volume {
        return Err(Error::InvalidGeometry(format!(
            "{cell_count} cells of volume {cell_volume:e} occupy {occupied:e}, \
             more than the spheroid volume {spheroid_volume:e}"
        )));
    }
    Ok((spheroid_volume - occupied) / spheroid_volume)
}

fn check_porosity(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "porosity must lie in (0, 1], got {eps}"
        )))
    }
}

/// Tortuosity of the extracellular space, `ε^(-1/2)`.
pub fn tortuosity(eps: f64) -> Result<f64> {
    check_porosity(eps)?;
    Ok(eps.powf(-0.5))
}

/// Effective diffusion coefficient `(ε/τ)·D = ε^1.5·D` inside a porous region.
pub fn effective_diffusion(d_bulk: f64, eps: f64) -> Result<f64> {
    if !(d_bulk > 0.0) || !d_bulk.is_finite() {
        return Err(Error::Domain(format!(
            "bulk diffusion coefficient must be positive, got {d_bulk}"
        )));
    }
    Ok(eps / tortuosity(eps)? * d_bulk)
}

/// Transport and uptake properties shared by every kind of porous region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PorousMedium {
    pub porosity: f64,
    pub tortuosity: f64,
    pub d_eff: f64,
    /// First-order uptake rate `A → E`, 1/s.
    pub k_f: f64,
}

impl PorousMedium {
    pub fn new(d_bulk: f64, porosity: f64, k_f: f64) -> Result<Self> {
        if !(k_f >= 0.0) || !k_f.is_finite() {
            return Err(Error::Domain(format!(
                "conversion rate must be finite and >= 0, got {k_f}"
            )));
        }
        Ok(Self {
            porosity,
            tortuosity: tortuosity(porosity)?,
            d_eff: effective_diffusion(d_bulk, porosity)?,
            k_f,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spheroid {
    pub center: Vec2,
    pub radius: f64,
    pub medium: PorousMedium,
}

impl Spheroid {
    pub fn new(center: Vec2, radius: f64, medium: PorousMedium) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "spheroid radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            center,
            radius,
            medium,
        })
    }

    pub fn boundary(&self) -> Circle {
        Circle::new(self.center, self.radius)
    }
}

/// Annulus `r_in ≤ |p − center| ≤ r_out` standing in for a dense crowd of
/// spheroids around the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingRegion {
    pub center: Vec2,
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub medium: PorousMedium,
}

impl RingRegion {
    pub fn new(
        center: Vec2,
        inner_radius: f64,
        outer_radius: f64,
        medium: PorousMedium,
    ) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius < outer_radius) || !outer_radius.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "ring needs 0 < r_in < r_out, got r_in = {inner_radius}, r_out = {outer_radius}"
            )));
        }
        Ok(Self {
            center,
            inner_radius,
            outer_radius,
            medium,
        })
    }

    pub fn inner(&self) -> Circle {
        Circle::new(self.center, self.inner_radius)
    }

    pub fn outer(&self) -> Circle {
        Circle::new(self.center, self.outer_radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Spheroid(Spheroid),
    Ring(RingRegion),
}

impl Region {
    pub fn medium(&self) -> &PorousMedium {
        match self {
            Region::Spheroid(s) => &s.medium,
            Region::Ring(r) => &r.medium,
        }
    }

    /// Closed-region membership; boundary points belong to the region.
    pub fn contains(&self, p: Vec2) -> bool {
        match self {
            Region::Spheroid(s) => s.boundary().contains(p),
            Region::Ring(r) => {
                let d2 = (p - r.center).norm_sq();
                d2 >= r.inner_radius * r.inner_radius && d2 <= r.outer_radius * r.outer_radius
            }
        }
    }
}

/// Where a point lies: the bulk fluid or one region, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionId {
    Bulk,
    Region(usize),
}

/// One circular interface with the regions on either side of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub circle: Circle,
    pub inside: RegionId,
    pub outside: RegionId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scene {
    pub d_bulk: f64,
    pub tx_position: Vec2,
    pub regions: Vec<Region>,
    #[serde(skip)]
    boundaries: Vec<Boundary>,
}

impl Scene {
    pub fn new(d_bulk: f64, tx_position: Vec2, regions: Vec<Region>) -> Result<Self> {
        if !(d_bulk > 0.0) || !d_bulk.is_finite() {
            return Err(Error::Domain(format!(
                "bulk diffusion coefficient must be positive, got {d_bulk}"
            )));
        }
        if !tx_position.is_finite() {
            return Err(Error::InvalidGeometry(
                "transmitter position is not finite".into(),
            ));
        }
        for (i, a) in regions.iter().enumerate() {
            for (j, b) in regions.iter().enumerate().skip(i + 1) {
                if regions_overlap(a, b) {
                    return Err(Error::InvalidGeometry(format!(
                        "regions {i} and {j} overlap"
                    )));
                }
            }
        }
        let boundaries = regions
            .iter()
            .enumerate()
            .flat_map(|(i, region)| match region {
                Region::Spheroid(s) => vec![Boundary {
                    circle: s.boundary(),
                    inside: RegionId::Region(i),
                    outside: RegionId::Bulk,
                }],
                Region::Ring(r) => vec![
                    Boundary {
                        circle: r.outer(),
                        inside: RegionId::Region(i),
                        outside: RegionId::Bulk,
                    },
                    Boundary {
                        circle: r.inner(),
                        inside: RegionId::Bulk,
                        outside: RegionId::Region(i),
                    },
                ],
            })
            .collect();
        Ok(Self {
            d_bulk,
            tx_position,
            regions,
            boundaries,
        })
    }

    pub fn region_at(&self, p: Vec2) -> RegionId {
        self.regions
            .iter()
            .position(|r| r.contains(p))
            .map_or(RegionId::Bulk, RegionId::Region)
    }

    pub fn diffusion_in(&self, id: RegionId) -> f64 {
        match id {
            RegionId::Bulk => self.d_bulk,
            RegionId::Region(i) => self.regions[i].medium().d_eff,
        }
    }

    pub fn uptake_rate_in(&self, id: RegionId) -> f64 {
        match id {
            RegionId::Bulk => 0.0,
            RegionId::Region(i) => self.regions[i].medium().k_f,
        }
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn has_uptake(&self) -> bool {
        self.regions.iter().any(|r| r.medium().k_f > 0.0)
    }

    pub fn max_diffusion(&self) -> f64 {
        self.regions
            .iter()
            .map(|r| r.medium().d_eff)
            .fold(self.d_bulk, f64::max)
    }
}

fn regions_overlap(a: &Region, b: &Region) -> bool {
    match (a, b) {
        (Region::Spheroid(s), Region::Spheroid(t)) => {
            (s.center - t.center).norm() <= s.radius + t.radius
        }
        (Region::Spheroid(s), Region::Ring(r)) | (Region::Ring(r), Region::Spheroid(s)) => {
            let dist = (s.center - r.center).norm();
            let in_hole = dist + s.radius < r.inner_radius;
            let beyond = dist - s.radius > r.outer_radius;
            !(in_hole || beyond)
        }
        (Region::Ring(p), Region::Ring(q)) => {
            let dist = (p.center - q.center).norm();
            let apart = dist > p.outer_radius + q.outer_radius;
            let q_in_p_hole = dist + q.outer_radius < p.inner_radius;
            let p_in_q_hole = dist + p.outer_radius < q.inner_radius;
            !(apart || q_in_p_hole || p_in_q_hole)
        }
    }
}

/// The six receiver layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// No receiver, `D` everywhere.
    Transparent,
    /// One spheroid at `(d, 0)`.
    One,
    /// Spheroids at `(±d, 0)`.
    Two,
    /// Spheroids at `(±d, 0)` and `(0, ±d)`.
    Four,
    /// Ring around the origin, transmitter at the origin.
    RingCenter,
    /// Same ring, transmitter at `(2d, 0)`.
    RingOutside,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::Transparent,
        ScenarioKind::One,
        ScenarioKind::Two,
        ScenarioKind::Four,
        ScenarioKind::RingCenter,
        ScenarioKind::RingOutside,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Transparent => "transparent",
            ScenarioKind::One => "one",
            ScenarioKind::Two => "two",
            ScenarioKind::Four => "four",
            ScenarioKind::RingCenter => "ring-center",
            ScenarioKind::RingOutside => "ring-outside",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "scenario",
                    format!(
                        "unknown preset `{s}`; expected one of transparent, one, two, four, \
                         ring-center, ring-outside"
                    ),
                )
            })
    }
}

/// Geometry and physics for [`build_scenario`]. Lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub distance: f64,
    pub spheroid_radius: f64,
    pub porosity: f64,
    pub k_f: f64,
    pub d_bulk: f64,
    pub ring_inner: f64,
    pub ring_outer: f64,
}

impl ScenarioParams {
    /// Spheroid radius 275 µm, distance 500 µm, `D = 10⁻⁹ m²/s`, porosity
    /// 0.1349 and no uptake. The ring spans `d ∓ r_s`.
    pub fn reference() -> Self {
        let distance = 500.0 * MICRON;
        let spheroid_radius = 275.0 * MICRON;
        Self {
            distance,
            spheroid_radius,
            porosity: 0.1349,
            k_f: 0.0,
            d_bulk: 1e-9,
            ring_inner: distance - spheroid_radius,
            ring_outer: distance + spheroid_radius,
        }
    }

    pub fn medium(&self) -> Result<PorousMedium> {
        PorousMedium::new(self.d_bulk, self.porosity, self.k_f)
    }
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self::reference()
    }
}

pub fn build_scenario(kind: ScenarioKind, params: &ScenarioParams) -> Result<Scene> {
    let d = params.distance;
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "receiver distance must be positive, got {d}"
        )));
    }
    let medium = params.medium()?;
    let spheroid = |x: f64, y: f64| {
        Spheroid::new(Vec2::new(x, y), params.spheroid_radius, medium).map(Region::Spheroid)
    };
    let ring = || {
        RingRegion::new(Vec2::ZERO, params.ring_inner, params.ring_outer, medium).map(Region::Ring)
    };
    let (tx, regions) = match kind {
        ScenarioKind::Transparent => (Vec2::ZERO, vec![]),
        ScenarioKind::One => (Vec2::ZERO, vec![spheroid(d, 0.0)?]),
        ScenarioKind::Two => (Vec2::ZERO, vec![spheroid(d, 0.0)?, spheroid(-d, 0.0)?]),
        ScenarioKind::Four => (
            Vec2::ZERO,
            vec![
                spheroid(d, 0.0)?,
                spheroid(-d, 0.0)?,
                spheroid(0.0, d)?,
                spheroid(0.0, -d)?,
            ],
        ),
        ScenarioKind::RingCenter => (Vec2::ZERO, vec![ring()?]),
        ScenarioKind::RingOutside => (Vec2::new(2.0 * d, 0.0), vec![ring()?]),
    };
    Scene::new(params.d_bulk, tx, regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn um(x: f64, y: f64) -> Vec2 {
        Vec2::new(x * MICRON, y * MICRON)
    }

    fn reference_spheroid_volume() -> f64 {
        sphere_volume(275.0 * MICRON)
    }

    #[test]
    fn porosity_reproduces_reference_values() {
        let vs = reference_spheroid_volume();
        assert!((vs - 8.711374629016699e-11).abs() / vs < 1e-12);
        let dense = porosity(vs, 24_000, 3.14e-15).unwrap();
        let sparse = porosity(vs, 20_000, 3.14e-15).unwrap();
        assert!((dense - 0.1349).abs() < 1e-3, "{dense}");
        assert!((sparse - 0.2791).abs() < 1e-3, "{sparse}");
        // independent arithmetic
        assert!((dense - 0.13492412840352955).abs() < 1e-12);
        assert!((sparse - 0.27910344033627454).abs() < 1e-12);
    }

    #[test]
    fn empty_spheroid_is_fully_porous() {
        assert_eq!(porosity(1.0, 0, 123.0).unwrap(), 1.0);
        assert_eq!(porosity(5e-11, 0, 3.14e-15).unwrap(), 1.0);
    }

    #[test]
    fn overfull_spheroid_is_rejected() {
        let err = porosity(1e-12, 1000, 3.14e-15).unwrap_err();
        assert!(matches!(err, Error::InvalidGeometry(_)));
    }

    #[test]
    fn effective_diffusion_values() {
        let dense = effective_diffusion(1e-9, 0.1349).unwrap();
        // ε^1.5·D by scalar arithmetic: 4.9547e-11, which rounds to the
        // tabulated 5e-11 at one significant figure.
        assert!((dense - 4.954706397961438e-11).abs() / dense < 1e-12);
        assert!((dense - 5e-11).abs() / 5e-11 < 0.01);
        let sparse = effective_diffusion(1e-9, 0.2791).unwrap();
        assert!((sparse - 1.4744829490706227e-10).abs() / sparse < 1e-12);
        assert_eq!(effective_diffusion(2.5e-9, 1.0).unwrap(), 2.5e-9);
    }

    #[test]
    fn effective_diffusion_domain_errors() {
        for eps in [0.0, -0.1, 1.0001, f64::NAN] {
            assert!(matches!(
                effective_diffusion(1e-9, eps),
                Err(Error::Domain(_))
            ));
        }
        assert!(effective_diffusion(0.0, 0.5).is_err());
    }

    #[test]
    fn medium_ratio_is_eps_to_three_halves() {
        for eps in [0.01, 0.1349, 0.2791, 0.5, 0.99, 1.0] {
            let m = PorousMedium::new(1e-9, eps, 0.0).unwrap();
            assert!(m.tortuosity >= 1.0);
            assert!(m.d_eff <= 1e-9);
            let ratio = m.d_eff / 1e-9;
            assert!((ratio - eps.powf(1.5)).abs() <= 4.0 * f64::EPSILON * ratio);
        }
    }

    #[test]
    fn four_spheroids_fit_at_reference_geometry() {
        let scene = build_scenario(ScenarioKind::Four, &ScenarioParams::reference()).unwrap();
        assert_eq!(scene.regions.len(), 4);
        let centers: Vec<Vec2> = scene
            .regions
            .iter()
            .map(|r| match r {
                Region::Spheroid(s) => s.center,
                Region::Ring(_) => unreachable!(),
            })
            .collect();
        let expect = [
            um(500.0, 0.0),
            um(-500.0, 0.0),
            um(0.0, 500.0),
            um(0.0, -500.0),
        ];
        for (c, e) in centers.iter().zip(expect) {
            assert!((*c - e).norm() < 1e-15);
        }
        let nearest = (centers[0] - centers[2]).norm();
        assert!((nearest / MICRON - 707.1067811865476).abs() < 1e-9);
        assert!(nearest > 2.0 * 275.0 * MICRON);
    }

    #[test]
    fn crowded_four_is_rejected() {
        let params = ScenarioParams {
            spheroid_radius: 360.0 * MICRON,
            ..ScenarioParams::reference()
        };
        let err = build_scenario(ScenarioKind::Four, &params).unwrap_err();
        assert!(matches!(err, Error::InvalidGeometry(_)));
        // 360 µm still fits for two spheroids 1000 µm apart
        assert!(build_scenario(ScenarioKind::Two, &params).is_ok());
    }

    #[test]
    fn transparent_has_no_regions() {
        let scene =
            build_scenario(ScenarioKind::Transparent, &ScenarioParams::reference()).unwrap();
        assert!(scene.regions.is_empty());
        assert_eq!(scene.region_at(Vec2::ZERO), RegionId::Bulk);
    }

    #[test]
    fn ring_outside_moves_transmitter() {
        let scene =
            build_scenario(ScenarioKind::RingOutside, &ScenarioParams::reference()).unwrap();
        assert!((scene.tx_position - um(1000.0, 0.0)).norm() < 1e-15);
        assert_eq!(scene.region_at(scene.tx_position), RegionId::Bulk);
        let centered =
            build_scenario(ScenarioKind::RingCenter, &ScenarioParams::reference()).unwrap();
        assert_eq!(centered.tx_position, Vec2::ZERO);
        assert_eq!(centered.region_at(Vec2::ZERO), RegionId::Bulk);
        assert_eq!(centered.region_at(um(0.0, 500.0)), RegionId::Region(0));
        assert_eq!(centered.region_at(um(0.0, 780.0)), RegionId::Bulk);
    }

    #[test]
    fn region_at_one_spheroid() {
        let scene = build_scenario(ScenarioKind::One, &ScenarioParams::reference()).unwrap();
        assert_eq!(scene.region_at(um(500.0, 0.0)), RegionId::Region(0));
        assert_eq!(scene.region_at(um(0.0, 0.0)), RegionId::Bulk);
        assert_eq!(scene.region_at(um(224.9, 0.0)), RegionId::Bulk);
        assert_eq!(scene.region_at(um(225.1, 0.0)), RegionId::Region(0));
        // exact boundary point belongs to the interior
        let s = Spheroid::new(Vec2::new(2.0, 0.0), 1.0, *scene.regions[0].medium()).unwrap();
        let exact = Scene::new(1e-9, Vec2::ZERO, vec![Region::Spheroid(s)]).unwrap();
        assert_eq!(exact.region_at(Vec2::new(1.0, 0.0)), RegionId::Region(0));
    }

    #[test]
    fn ring_overlapping_spheroid_is_rejected() {
        let params = ScenarioParams::reference();
        let medium = params.medium().unwrap();
        let ring =
            RingRegion::new(Vec2::ZERO, params.ring_inner, params.ring_outer, medium).unwrap();
        let sph = Spheroid::new(um(500.0, 0.0), 100.0 * MICRON, medium).unwrap();
        assert!(Scene::new(
            1e-9,
            Vec2::ZERO,
            vec![Region::Ring(ring), Region::Spheroid(sph)]
        )
        .is_err());
        let inside_hole = Spheroid::new(Vec2::ZERO, 100.0 * MICRON, medium).unwrap();
        assert!(Scene::new(
            1e-9,
            Vec2::ZERO,
            vec![Region::Ring(ring), Region::Spheroid(inside_hole)]
        )
        .is_ok());
    }

    #[test]
    fn preset_names_round_trip() {
        for kind in ScenarioKind::ALL {
            assert_eq!(kind.name().parse::<ScenarioKind>().unwrap(), kind);
            assert!(build_scenario(kind, &ScenarioParams::reference()).is_ok());
        }
        assert!("five".parse::<ScenarioKind>().is_err());
    }

    fn region_set(scene: &Scene, map: impl Fn(Vec2) -> Vec2) -> bool {
        scene.regions.iter().all(|r| {
            let Region::Spheroid(s) = r else { return false };
            let image = map(s.center);
            scene.regions.iter().any(|q| match q {
                Region::Spheroid(t) => (t.center - image).norm() < 1e-15 && t.radius == s.radius,
                Region::Ring(_) => false,
            })
        })
    }

    #[test]
    fn presets_are_symmetric() {
        let p = ScenarioParams::reference();
        let two = build_scenario(ScenarioKind::Two, &p).unwrap();
        assert!(region_set(&two, |v| Vec2::new(-v.x, v.y)));
        let four = build_scenario(ScenarioKind::Four, &p).unwrap();
        assert!(region_set(&four, |v| Vec2::new(-v.y, v.x)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn region_at_is_a_partition(x in -1200.0f64..1200.0, y in -1200.0f64..1200.0) {
                let p = um(x, y);
                for kind in ScenarioKind::ALL {
                    let scene = build_scenario(kind, &ScenarioParams::reference()).unwrap();
                    let claims = scene.regions.iter().filter(|r| r.contains(p)).count();
                    prop_assert!(claims <= 1);
                    match scene.region_at(p) {
                        RegionId::Bulk => prop_assert_eq!(claims, 0),
                        RegionId::Region(i) => {
                            prop_assert_eq!(claims, 1);
                            prop_assert!(scene.regions[i].contains(p));
                        }
                    }
                }
            }
        }
    }
}
