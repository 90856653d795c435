//! Pixel grids of molecule counts.
//!
//! Grids are laid out in micrometers. Pixel `(ix, iy)` covers
//! `[x_min + ix·h, x_min + (ix+1)·h)` × `[y_min + iy·h, y_min + (iy+1)·h)`;
//! the last column and row are closed so that the extent's upper edges still
//! land in the grid. Counts are stored row-major with row 0 at the lowest `y`.

mod csv;
mod render;

use serde::Serialize;

pub use self::csv::{read_grid_csv, write_grid_csv, GridHeader};
pub use self::render::{
    colormap, render_heatmap, render_values, sidecar_path, write_heatmap, ColorScale, Heatmap,
    MaxCount, ScaleRecord, COLORMAP_NAME,
};

use crate::geometry::Vec2;
use crate::stepper::{Particle, Species};
use crate::{Error, Result, MICRON};

/// Upper bound on `nx·ny` for any grid.
pub const MAX_PIXELS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Pixel edge length, µm.
    pub pixel: f64,
    nx: usize,
    ny: usize,
}

fn whole_pixels(width: f64, pixel: f64, axis: &str) -> Result<usize> {
    let n = width / pixel;
    let rounded = n.round();
    if !(rounded >= 1.0) || (n - rounded).abs() > 1e-9 * rounded {
        return Err(Error::config(
            "grid",
            format!("{axis} extent {width} µm is not a whole number of {pixel} µm pixels"),
        ));
    }
    Ok(rounded as usize)
}

impl GridSpec {
    /// `extent` is `[x_min, x_max, y_min, y_max]` in µm.
    pub fn new(extent: [f64; 4], pixel: f64) -> Result<Self> {
        let [x_min, x_max, y_min, y_max] = extent;
        if extent.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("grid", "extent must be finite"));
        }
        if !(pixel > 0.0) || !pixel.is_finite() {
            return Err(Error::config(
                "grid",
                format!("pixel size must be positive, got {pixel}"),
            ));
        }
        let nx = whole_pixels(x_max - x_min, pixel, "x")?;
        let ny = whole_pixels(y_max - y_min, pixel, "y")?;
        if nx.saturating_mul(ny) > MAX_PIXELS {
            return Err(Error::config(
                "grid",
                format!("{nx}×{ny} pixels exceeds the cap of {MAX_PIXELS}"),
            ));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
            pixel,
            nx,
            ny,
        })
    }

    /// Square extent `[-half, half]²`.
    pub fn centered(half_width: f64, pixel: f64) -> Result<Self> {
        Self::new([-half_width, half_width, -half_width, half_width], pixel)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> [f64; 4] {
        [self.x_min, self.x_max, self.y_min, self.y_max]
    }

    pub fn pixel_area_m2(&self) -> f64 {
        (self.pixel * MICRON).powi(2)
    }

    fn axis_index(v: f64, lo: f64, hi: f64, pixel: f64, n: usize) -> Option<usize> {
        if !(v >= lo && v <= hi) {
            return None;
        }
        Some((((v - lo) / pixel) as usize).min(n - 1))
    }

    /// Pixel containing a point given in µm.
    pub fn pixel_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let ix = Self::axis_index(p.x, self.x_min, self.x_max, self.pixel, self.nx)?;
        let iy = Self::axis_index(p.y, self.y_min, self.y_max, self.pixel, self.ny)?;
        Some((ix, iy))
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Pixel center in µm.
    pub fn pixel_center(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.x_min + (ix as f64 + 0.5) * self.pixel,
            self.y_min + (iy as f64 + 0.5) * self.pixel,
        )
    }

    pub fn pixel_centers(&self) -> impl Iterator<Item = (usize, usize, Vec2)> + '_ {
        (0..self.ny)
            .flat_map(move |iy| (0..self.nx).map(move |ix| (ix, iy, self.pixel_center(ix, iy))))
    }

    /// Same extent and pixel size, compared exactly.
    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }
}

impl Default for GridSpec {
    /// `[-1000, 1000]²` µm with 10 µm pixels.
    fn default() -> Self {
        Self::centered(1000.0, 10.0).expect("default grid is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotGrid {
    pub spec: GridSpec,
    pub species: Species,
    pub time: f64,
    pub counts: Vec<u64>,
    pub out_of_extent: u64,
}

/// Bins positions (µm) into a fresh grid labelled species `A` at `t = 0`.
pub fn accumulate<I>(positions: I, spec: &GridSpec) -> SnapshotGrid
where
    I: IntoIterator<Item = Vec2>,
{
    let mut grid = SnapshotGrid::empty(*spec, Species::A, 0.0);
    for p in positions {
        grid.add(p);
    }
    grid
}

impl SnapshotGrid {
    pub fn empty(spec: GridSpec, species: Species, time: f64) -> Self {
        Self {
            spec,
            species,
            time,
            counts: vec![0; spec.len()],
            out_of_extent: 0,
        }
    }

    pub fn labeled(mut self, species: Species, time: f64) -> Self {
        self.species = species;
        self.time = time;
        self
    }

    /// Adds one molecule at a position in µm.
    pub fn add(&mut self, p: Vec2) {
        match self.spec.pixel_of(p) {
            Some((ix, iy)) => self.counts[self.spec.index(ix, iy)] += 1,
            None => self.out_of_extent += 1,
        }
    }

    /// Bins one species from a particle set (positions in meters).
    pub fn from_particles(
        particles: &[Particle],
        species: Species,
        time: f64,
        spec: &GridSpec,
    ) -> Self {
        let mut grid = Self::empty(*spec, species, time);
        for p in particles.iter().filter(|p| p.species == species) {
            grid.add(p.position * (1.0 / MICRON));
        }
        grid
    }

    /// Elementwise sum of two shards of the same snapshot.
    pub fn merge(&mut self, other: &SnapshotGrid) -> Result<()> {
        if !self.spec.same_as(&other.spec) {
            return Err(Error::GridMismatch(
                "cannot merge grids with different specs".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.out_of_extent += other.out_of_extent;
        Ok(())
    }

    pub fn count_at(&self, ix: usize, iy: usize) -> u64 {
        self.counts[self.spec.index(ix, iy)]
    }

    pub fn in_extent(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.in_extent() + self.out_of_extent
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn radial_profile(&self, center: Vec2, bin_width: f64) -> Result<Vec<RadialBin>> {
        radial_profile_by(&self.spec, center, bin_width, |ix, iy| {
            self.count_at(ix, iy) as f64
        })
    }

    fn require_centered(&self, square: bool) -> Result<()> {
        let s = &self.spec;
        let centered = s.x_min == -s.x_max && s.y_min == -s.y_max;
        if !centered || (square && (s.x_max != s.y_max)) {
            return Err(Error::GridMismatch(format!(
                "transform needs a {} extent centered on the origin, got {:?}",
                if square { "square" } else { "symmetric" },
                s.extent()
            )));
        }
        Ok(())
    }

    /// The grid seen through the reflection `x → −x`.
    pub fn mirrored_x(&self) -> Result<SnapshotGrid> {
        self.require_centered(false)?;
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let mut out = self.clone();
        for iy in 0..ny {
            for ix in 0..nx {
                out.counts[iy * nx + (nx - 1 - ix)] = self.counts[iy * nx + ix];
            }
        }
        Ok(out)
    }

    /// The grid after a quarter turn `(x, y) → (−y, x)` about the origin.
    pub fn rotated_quarter(&self) -> Result<SnapshotGrid> {
        self.require_centered(true)?;
        let n = self.spec.nx;
        let mut out = self.clone();
        for iy in 0..n {
            for ix in 0..n {
                out.counts[ix * n + (n - 1 - iy)] = self.counts[iy * n + ix];
            }
        }
        Ok(out)
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            time: self.time,
            species: self.species,
            spec: self.spec,
            out_of_extent: self.out_of_extent,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        write_grid_csv(&mut out, &self.header(), &self.counts).expect("writing to memory");
        String::from_utf8(out).expect("csv is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (header, values) = read_grid_csv(text)?;
        let counts = values
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as u64)
                } else {
                    Err(Error::GridFormat(format!("{v} is not a molecule count")))
                }
            })
            .collect::<Result<Vec<u64>>>()?;
        Ok(Self {
            spec: header.spec,
            species: header.species,
            time: header.time,
            counts,
            out_of_extent: header.out_of_extent,
        })
    }
}

/// One annulus of a radial profile. Radii in µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialBin {
    pub r_min: f64,
    pub r_max: f64,
    /// Pixels whose centers fall in `[r_min, r_max)`.
    pub pixels: usize,
    pub total: f64,
    /// The whole annulus lies inside the grid extent.
    pub complete: bool,
}

impl RadialBin {
    pub fn radius(&self) -> f64 {
        0.5 * (self.r_min + self.r_max)
    }

    /// Mean value per pixel; zero for a bin without pixels.
    pub fn mean(&self) -> f64 {
        if self.pixels == 0 {
            0.0
        } else {
            self.total / self.pixels as f64
        }
    }
}

/// Groups pixels into annuli around `center` (µm) by pixel-center distance.
pub fn radial_profile_by<F>(
    spec: &GridSpec,
    center: Vec2,
    bin_width: f64,
    value: F,
) -> Result<Vec<RadialBin>>
where
    F: Fn(usize, usize) -> f64,
{
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(Error::Domain(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let corners = [
        Vec2::new(spec.x_min, spec.y_min),
        Vec2::new(spec.x_min, spec.y_max),
        Vec2::new(spec.x_max, spec.y_min),
        Vec2::new(spec.x_max, spec.y_max),
    ];
    let reach = corners
        .iter()
        .map(|&c| (c - center).norm())
        .fold(0.0, f64::max);
    let n_bins = (reach / bin_width).floor() as usize + 1;
    let inscribed = [
        center.x - spec.x_min,
        spec.x_max - center.x,
        center.y - spec.y_min,
        spec.y_max - center.y,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);

    let mut bins: Vec<RadialBin> = (0..n_bins)
        .map(|k| {
            let r_min = k as f64 * bin_width;
            let r_max = r_min + bin_width;
            RadialBin {
                r_min,
                r_max,
                pixels: 0,
                total: 0.0,
                complete: r_max <= inscribed,
            }
        })
        .collect();
    for (ix, iy, c) in spec.pixel_centers() {
        let k = ((c - center).norm() / bin_width) as usize;
        if let Some(bin) = bins.get_mut(k) {
            bin.pixels += 1;
            bin.total += value(ix, iy);
        }
    }
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn default_grid_is_200_square() {
        let spec = GridSpec::default();
        assert_eq!((spec.nx(), spec.ny()), (200, 200));
        assert!((spec.pixel_area_m2() - 1e-10).abs() < 1e-24);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(GridSpec::new([-1000.0, 1000.0, -1000.0, 1000.0], 0.0).is_err());
        assert!(GridSpec::new([-1000.0, 1000.0, -1000.0, 1000.0], 30.0).is_err());
        assert!(GridSpec::new([0.0, 0.0, 0.0, 10.0], 10.0).is_err());
        assert!(GridSpec::centered(1e6, 0.01).is_err());
    }

    #[test]
    fn origin_lands_in_one_pixel() {
        let spec = GridSpec::default();
        let grid = accumulate([Vec2::ZERO], &spec);
        assert_eq!(grid.in_extent(), 1);
        assert_eq!(grid.count_at(100, 100), 1);
        assert_eq!(grid.out_of_extent, 0);
    }

    #[test]
    fn empty_input_gives_zero_grid() {
        let grid = accumulate(std::iter::empty(), &GridSpec::default());
        assert!(grid.counts.iter().all(|&c| c == 0));
        assert_eq!(grid.total(), 0);
    }

    #[test]
    fn edges_are_half_open_except_the_last() {
        let spec = GridSpec::centered(1000.0, 10.0).unwrap();
        assert_eq!(spec.pixel_of(Vec2::new(-1000.0, -1000.0)), Some((0, 0)));
        assert_eq!(spec.pixel_of(Vec2::new(1000.0, 1000.0)), Some((199, 199)));
        assert_eq!(spec.pixel_of(Vec2::new(-990.0, 0.0)), Some((1, 100)));
        assert_eq!(spec.pixel_of(Vec2::new(1000.0001, 0.0)), None);
        assert_eq!(spec.pixel_of(Vec2::new(f64::NAN, 0.0)), None);
    }

    #[test]
    fn uniform_points_pass_chi_square() {
        let spec = GridSpec::default();
        let n = 10_000u64;
        let mut rng = StreamRng::new(3, 0, 0);
        let grid = accumulate(
            (0..n).map(|_| {
                Vec2::new(
                    rng.random_range(-1000.0..1000.0),
                    rng.random_range(-1000.0..1000.0),
                )
            }),
            &spec,
        );
        assert_eq!(grid.total(), n);
        // Coarsen to 20×20 super-pixels (25 expected each) for a valid test.
        let mut coarse = [0u64; 400];
        for iy in 0..200 {
            for ix in 0..200 {
                coarse[(iy / 10) * 20 + ix / 10] += grid.count_at(ix, iy);
            }
        }
        let expected = n as f64 / 400.0;
        let chi2: f64 = coarse
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 399 dof, 0.99 quantile ≈ 466.9
        assert!(chi2 < 466.9, "chi2 = {chi2}");
        // mean per fine pixel is 0.25
        assert!((grid.in_extent() as f64 / spec.len() as f64 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn radial_profile_of_zero_grid_is_zero() {
        let grid = accumulate(std::iter::empty(), &GridSpec::default());
        let prof = grid.radial_profile(Vec2::ZERO, 10.0).unwrap();
        assert!(prof.iter().all(|b| b.mean() == 0.0));
        assert!(grid.radial_profile(Vec2::ZERO, 0.0).is_err());
    }

    #[test]
    fn radial_profile_of_single_count() {
        let grid = accumulate([Vec2::new(1.0, 1.0)], &GridSpec::default());
        let prof = grid.radial_profile(Vec2::ZERO, 10.0).unwrap();
        assert!(prof[0].mean() > 0.0);
        assert_eq!(prof[0].pixels, 4);
        assert!(prof[1..].iter().all(|b| b.total == 0.0));
        let n_pixels: usize = prof.iter().map(|b| b.pixels).sum();
        assert_eq!(n_pixels, 200 * 200);
        assert!(prof[99].complete && !prof[100].complete);
    }

    #[test]
    fn mirror_and_rotation_move_points() {
        let spec = GridSpec::default();
        let p = Vec2::new(123.0, -456.0);
        let grid = accumulate([p], &spec);
        assert_eq!(
            grid.mirrored_x().unwrap(),
            accumulate([Vec2::new(-123.0, -456.0)], &spec)
        );
        let turned = grid.rotated_quarter().unwrap();
        assert_eq!(turned, accumulate([Vec2::new(456.0, 123.0)], &spec));
        let full = turned
            .rotated_quarter()
            .unwrap()
            .rotated_quarter()
            .unwrap()
            .rotated_quarter();
        assert_eq!(full.unwrap(), grid);
        let offset = accumulate(
            [p],
            &GridSpec::new([0.0, 100.0, -50.0, 50.0], 10.0).unwrap(),
        );
        assert!(offset.mirrored_x().is_err());
        let wide = accumulate(
            [p],
            &GridSpec::new([-100.0, 100.0, -50.0, 50.0], 10.0).unwrap(),
        );
        assert!(wide.mirrored_x().is_ok() && wide.rotated_quarter().is_err());
    }

    #[test]
    fn merge_requires_matching_specs() {
        let mut a = accumulate([Vec2::ZERO], &GridSpec::default());
        let b = accumulate([Vec2::ZERO], &GridSpec::centered(500.0, 10.0).unwrap());
        assert!(a.merge(&b).is_err());
    }

    proptest! {
        #[test]
        fn counts_are_conserved_and_order_free(
            pts in proptest::collection::vec((-1500.0f64..1500.0, -1500.0f64..1500.0), 0..200),
            split in 0usize..200,
        ) {
            let spec = GridSpec::default();
            let pts: Vec<Vec2> = pts.into_iter().map(|(x, y)| Vec2::new(x, y)).collect();
            let grid = accumulate(pts.iter().copied(), &spec);
            prop_assert_eq!(grid.total(), pts.len() as u64);
            let rev = accumulate(pts.iter().rev().copied(), &spec);
            prop_assert_eq!(&grid, &rev);
            let cut = split.min(pts.len());
            let mut left = accumulate(pts[..cut].iter().copied(), &spec);
            left.merge(&accumulate(pts[cut..].iter().copied(), &spec)).unwrap();
            prop_assert_eq!(&grid, &left);
        }

        #[test]
        fn csv_round_trips(
            pts in proptest::collection::vec((-30.0f64..30.0, -30.0f64..30.0), 0..100),
            t in 0u32..10_000,
        ) {
            let spec = GridSpec::centered(20.0, 5.0).unwrap();
            let grid = accumulate(pts.into_iter().map(|(x, y)| Vec2::new(x, y)), &spec)
                .labeled(Species::E, t as f64 * 0.5);
            let back = SnapshotGrid::from_csv(&grid.to_csv()).unwrap();
            prop_assert_eq!(grid, back);
        }
    }
}
