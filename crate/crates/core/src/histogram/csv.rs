//! Grid text files.
//!
//! ```text
//! # t=96 species=A extent=-1000,1000,-1000,1000µm pixel=10 out_of_extent=0
//! 0,0,1,...
//! ```
//!
//! One header line, then `ny` rows of `nx` comma-separated values; row 0 is
//! the lowest `y`. Count grids hold integers; concentration fields hold
//! decimals.

use std::fmt::Display;
use std::io::Write;

use super::GridSpec;
use crate::stepper::Species;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridHeader {
    pub time: f64,
    pub species: Species,
    pub spec: GridSpec,
    pub out_of_extent: u64,
}

impl GridHeader {
    pub fn line(&self) -> String {
        let s = &self.spec;
        format!(
            "# t={} species={} extent={},{},{},{}µm pixel={} out_of_extent={}",
            self.time,
            self.species.label(),
            s.x_min,
            s.x_max,
            s.y_min,
            s.y_max,
            s.pixel,
            self.out_of_extent
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| Error::GridFormat("header must start with `#`".into()))?;
        let (mut time, mut species, mut extent, mut pixel, mut out) =
            (None, None, None, None, None);
        for field in body.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::GridFormat(format!("bad header field `{field}`")))?;
            let number = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| Error::GridFormat(format!("`{key}` has bad value `{v}`")))
            };
            match key {
                "t" => time = Some(number(value)?),
                "species" => {
                    species = Some(match value {
                        "A" => Species::A,
                        "E" => Species::E,
                        _ => return Err(Error::GridFormat(format!("unknown species `{value}`"))),
                    })
                }
                "extent" => {
                    let v = value.strip_suffix("µm").unwrap_or(value);
                    let parts = v.split(',').map(number).collect::<Result<Vec<f64>>>()?;
                    let arr: [f64; 4] = parts.try_into().map_err(|_| {
                        Error::GridFormat("extent needs four comma-separated numbers".into())
                    })?;
                    extent = Some(arr);
                }
                "pixel" => pixel = Some(number(value)?),
                "out_of_extent" => {
                    out =
                        Some(value.parse::<u64>().map_err(|_| {
                            Error::GridFormat(format!("bad out_of_extent `{value}`"))
                        })?)
                }
                _ => return Err(Error::GridFormat(format!("unknown header key `{key}`"))),
            }
        }
        let missing = |k: &str| Error::GridFormat(format!("header is missing `{k}`"));
        let spec = GridSpec::new(
            extent.ok_or_else(|| missing("extent"))?,
            pixel.ok_or_else(|| missing("pixel"))?,
        )
        .map_err(|e| Error::GridFormat(e.to_string()))?;
        Ok(Self {
            time: time.ok_or_else(|| missing("t"))?,
            species: species.ok_or_else(|| missing("species"))?,
            spec,
            out_of_extent: out.ok_or_else(|| missing("out_of_extent"))?,
        })
    }
}

pub fn write_grid_csv<W: Write, T: Display>(
    mut out: W,
    header: &GridHeader,
    values: &[T],
) -> std::io::Result<()> {
    let nx = header.spec.nx();
    writeln!(out, "{}", header.line())?;
    for row in values.chunks(nx) {
        let mut first = true;
        for v in row {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            write!(out, "{v}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_grid_csv(text: &str) -> Result<(GridHeader, Vec<f64>)> {
    let mut lines = text.lines();
    let header = GridHeader::parse(
        lines
            .next()
            .ok_or_else(|| Error::GridFormat("empty grid file".into()))?,
    )?;
    let (nx, ny) = (header.spec.nx(), header.spec.ny());
    let mut values = Vec::with_capacity(nx * ny);
    let mut rows = 0;
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let before = values.len();
        for cell in line.split(',') {
            let v = cell
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::GridFormat(format!("row {row}: `{cell}` is not a number")))?;
            values.push(v);
        }
        if values.len() - before != nx {
            return Err(Error::GridFormat(format!(
                "row {row} has {} values, expected {nx}",
                values.len() - before
            )));
        }
        rows += 1;
    }
    if rows != ny {
        return Err(Error::GridFormat(format!(
            "found {rows} rows, expected {ny}"
        )));
    }
    Ok((header, values))
}
