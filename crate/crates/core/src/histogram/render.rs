//! Heatmap rendering to binary PPM (P6).
//!
//! Values map onto a fixed 256-entry colormap (viridis, dark to bright).
//! Linear scale: `index = round(255 · v / max)`. Log scale:
//! `index = round(255 · ln(1 + v) / ln(1 + max))`. Values above `max`
//! saturate. Image row 0 is the grid's highest `y` so the picture reads with
//! `y` pointing up.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::{GridSpec, SnapshotGrid};
use crate::{Error, Result};

pub const COLORMAP_NAME: &str = "viridis-v1";

static COLORMAP: LazyLock<[[u8; 3]; 256]> = LazyLock::new(|| {
    let mut table = [[0u8; 3]; 256];
    let mut seen = 0;
    for line in include_str!("../../data/viridis_v1.txt").lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v: Vec<u16> = line
            .split_whitespace()
            .map(|s| s.parse().expect("colormap entries are integers"))
            .collect();
        table[v[0] as usize] = [v[1] as u8, v[2] as u8, v[3] as u8];
        seen += 1;
    }
    assert_eq!(seen, 256, "colormap must have 256 entries");
    table
});

pub fn colormap() -> &'static [[u8; 3]; 256] {
    &COLORMAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorScale {
    #[default]
    Linear,
    Log,
}

impl fmt::Display for ColorScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorScale::Linear => "linear",
            ColorScale::Log => "log",
        })
    }
}

impl FromStr for ColorScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ColorScale::Linear),
            "log" => Ok(ColorScale::Log),
            _ => Err(Error::config(
                "color_scale",
                format!("expected linear or log, got `{s}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MaxCount {
    /// Largest value in the grid.
    #[default]
    Auto,
    Fixed(f64),
}

/// The colorbar: what the darkest and brightest colors stand for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleRecord {
    pub colormap: &'static str,
    pub scale: ColorScale,
    pub min: f64,
    pub max: f64,
    pub data_min: f64,
    pub data_max: f64,
}

impl ScaleRecord {
    pub fn to_sidecar(&self) -> String {
        format!(
            "colormap={}\nscale={}\nmin={}\nmax={}\ndata_min={}\ndata_max={}\n",
            self.colormap, self.scale, self.min, self.max, self.data_min, self.data_max
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub width: usize,
    pub height: usize,
    pub ppm: Vec<u8>,
    pub scale: ScaleRecord,
}

fn color_index(v: f64, max: f64, scale: ColorScale) -> usize {
    if !(max > 0.0) || !(v > 0.0) {
        return 0;
    }
    let t = match scale {
        ColorScale::Linear => v / max,
        ColorScale::Log => v.ln_1p() / max.ln_1p(),
    };
    (t.min(1.0) * 255.0).round() as usize
}

/// Renders any non-negative field laid out on `spec`.
pub fn render_values(spec: &GridSpec, values: &[f64], scale: ColorScale, max: MaxCount) -> Heatmap {
    let (nx, ny) = (spec.nx(), spec.ny());
    let data_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let data_max = values.iter().copied().fold(0.0, f64::max);
    let top = match max {
        MaxCount::Auto => data_max,
        MaxCount::Fixed(m) => m,
    };
    let lut = colormap();
    let mut ppm = format!("P6\n{nx} {ny}\n255\n").into_bytes();
    ppm.reserve(nx * ny * 3);
    for iy in (0..ny).rev() {
        for &v in &values[iy * nx..(iy + 1) * nx] {
            ppm.extend_from_slice(&lut[color_index(v, top, scale)]);
        }
    }
    Heatmap {
        width: nx,
        height: ny,
        ppm,
        scale: ScaleRecord {
            colormap: COLORMAP_NAME,
            scale,
            min: 0.0,
            max: top,
            data_min: if values.is_empty() { 0.0 } else { data_min },
            data_max,
        },
    }
}

pub fn render_heatmap(grid: &SnapshotGrid, scale: ColorScale, max: MaxCount) -> Heatmap {
    let values: Vec<f64> = grid.counts.iter().map(|&c| c as f64).collect();
    render_values(&grid.spec, &values, scale, max)
}

/// Sidecar path for an image: `name.ppm` → `name.scale.txt`.
pub fn sidecar_path(image: &Path) -> PathBuf {
    image.with_extension("scale.txt")
}

/// Writes the image and its `.scale.txt` sidecar.
pub fn write_heatmap(image: &Path, heatmap: &Heatmap) -> Result<()> {
    std::fs::write(image, &heatmap.ppm).map_err(|e| Error::io(image, e))?;
    let side = sidecar_path(image);
    std::fs::write(&side, heatmap.scale.to_sidecar()).map_err(|e| Error::io(&side, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::accumulate;
    use crate::Vec2;

    fn pixels(h: &Heatmap) -> Vec<[u8; 3]> {
        let header = format!("P6\n{} {}\n255\n", h.width, h.height).len();
        h.ppm[header..]
            .chunks(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect()
    }

    #[test]
    fn colormap_runs_dark_to_bright() {
        let lut = colormap();
        let luma = |c: [u8; 3]| 0.2126 * c[0] as f64 + 0.7152 * c[1] as f64 + 0.0722 * c[2] as f64;
        assert!(luma(lut[255]) > luma(lut[128]) && luma(lut[128]) > luma(lut[0]));
        assert_eq!(lut[0], [68, 1, 84]);
    }

    #[test]
    fn zero_grid_is_uniform_lowest_color() {
        let grid = accumulate(std::iter::empty(), &GridSpec::default());
        let h = render_heatmap(&grid, ColorScale::Linear, MaxCount::Auto);
        assert_eq!((h.width, h.height), (200, 200));
        assert!(h.ppm.starts_with(b"P6\n200 200\n255\n"));
        let px = pixels(&h);
        assert_eq!(px.len(), 200 * 200);
        assert!(px.iter().all(|&p| p == colormap()[0]));
        assert_eq!(h.scale.max, 0.0);
    }

    #[test]
    fn single_hot_pixel_at_fixed_max() {
        let spec = GridSpec::default();
        let grid = accumulate([Vec2::new(505.0, 995.0); 7], &spec);
        for scale in [ColorScale::Linear, ColorScale::Log] {
            let h = render_heatmap(&grid, scale, MaxCount::Fixed(7.0));
            let px = pixels(&h);
            let hot: Vec<usize> = (0..px.len())
                .filter(|&i| px[i] == colormap()[255])
                .collect();
            // highest-y row is image row 0
            assert_eq!(hot, vec![150]);
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let grid = accumulate(
            (0..500).map(|i| Vec2::new((i % 37) as f64 * 20.0 - 300.0, (i % 11) as f64 * 15.0)),
            &GridSpec::default(),
        );
        let a = render_heatmap(&grid, ColorScale::Log, MaxCount::Auto);
        let b = render_heatmap(&grid, ColorScale::Log, MaxCount::Auto);
        assert_eq!(a, b);
        assert!(a.scale.to_sidecar().contains("scale=log\n"));
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            sidecar_path(Path::new("out/one/A_t96.ppm")),
            PathBuf::from("out/one/A_t96.scale.txt")
        );
    }
}
