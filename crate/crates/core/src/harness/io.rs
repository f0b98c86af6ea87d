//! Plain-text formats for grid functions and spectral functions.
//!
//! Grid function:
//!
//! ```text
//! # params {"q":0.5,"z_minus":-1.0,...}
//! # window -40 60
//! + 3 0.5e0 -2.5e-1
//! - 0 1e0 0e0
//! ```
//!
//! One `sign k re im` record per nonzero value; points without a record are
//! zero. Both header lines are optional. Without a `window` line the window
//! is the smallest one containing every record.
//!
//! Spectral function:
//!
//! ```text
//! # params {...}
//! circle <psi> <re1> <im1> <re2> <im2>
//! point <family> <k> <gamma> <re> <im>
//! ```

use std::fmt::Write as _;

use crate::grid::{Branch, Grid, GridFunction, Params};
use crate::spectral::{Family, GammaPoint};
use crate::transform::{SpectralFunction, Transform};
use crate::{c64, Error, Result, C64};

/// A grid function with the parameters it was written for, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFile {
    pub params: Option<Params>,
    pub function: GridFunction,
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Parse(format!("line {line}: {s:?} is not a number")))
}

fn parse_i64(s: &str, line: usize) -> Result<i64> {
    s.parse::<i64>().map_err(|_| Error::Parse(format!("line {line}: {s:?} is not an integer")))
}

fn header_params(rest: &str, line: usize) -> Result<Params> {
    let p: Params = serde_json::from_str(rest).map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
    p.validate()?;
    Ok(p)
}

/// Parses the grid-function format.
pub fn parse_grid_function(text: &str) -> Result<GridFile> {
    let mut params = None;
    let mut window = None;
    let mut records: Vec<(Branch, i64, C64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            let h = h.trim();
            if let Some(rest) = h.strip_prefix("params") {
                params = Some(header_params(rest.trim(), n)?);
            } else if let Some(rest) = h.strip_prefix("window") {
                let t: Vec<&str> = rest.split_whitespace().collect();
                if t.len() != 2 {
                    return Err(Error::Parse(format!("line {n}: expected `# window k_min k_max`")));
                }
                window = Some(Grid::new(parse_i64(t[0], n)?, parse_i64(t[1], n)?)?);
            }
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 4 {
            return Err(Error::Parse(format!("line {n}: expected `sign k re im`, got {line:?}")));
        }
        let br = Branch::from_symbol(t[0]).ok_or_else(|| Error::Parse(format!("line {n}: sign must be + or -, got {:?}", t[0])))?;
        records.push((br, parse_i64(t[1], n)?, c64(parse_f64(t[2], n)?, parse_f64(t[3], n)?)));
    }
    let grid = match window {
        Some(g) => g,
        None => {
            let lo = records.iter().map(|r| r.1).min().ok_or_else(|| Error::Parse("no records and no window".into()))?;
            let hi = records.iter().map(|r| r.1).max().unwrap_or(lo);
            Grid::new(lo.min(-1), hi.max(1))?
        }
    };
    let mut f = GridFunction::zeros(grid);
    for (br, k, v) in records {
        if !grid.contains(k) {
            return Err(Error::Parse(format!("record {}{k} lies outside the window [{}, {}]", br.symbol(), grid.k_min, grid.k_max)));
        }
        f.set(br, k, v);
    }
    Ok(GridFile { params, function: f })
}

/// Writes the grid-function format. Zero values are omitted.
pub fn write_grid_function(f: &GridFunction, params: Option<&Params>) -> String {
    let mut out = String::new();
    if let Some(p) = params {
        writeln!(out, "# params {}", serde_json::to_string(p).expect("serialisable")).unwrap();
    }
    writeln!(out, "# window {} {}", f.grid.k_min, f.grid.k_max).unwrap();
    for (br, k) in f.support() {
        let v = f.get(br, k);
        writeln!(out, "{} {} {:e} {:e}", br.symbol(), k, v.re, v.im).unwrap();
    }
    out
}

/// Writes a spectral function on the nodes and points of `t`.
pub fn write_spectral_function(t: &Transform, g: &SpectralFunction) -> String {
    let mut out = String::new();
    writeln!(out, "# params {}", serde_json::to_string(&t.params).expect("serialisable")).unwrap();
    for (i, v) in g.circle.iter().enumerate() {
        writeln!(out, "circle {:e} {:e} {:e} {:e} {:e}", t.quad.nodes[i], v[0].re, v[0].im, v[1].re, v[1].im).unwrap();
    }
    for (pt, v) in t.gammas.iter().zip(&g.points) {
        writeln!(out, "point {} {} {:e} {:e} {:e}", pt.family.label(), pt.k, pt.gamma, v.re, v.im).unwrap();
    }
    out
}

/// A spectral function read back from text.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFile {
    pub params: Option<Params>,
    /// Circle nodes `ψ`.
    pub nodes: Vec<f64>,
    pub points: Vec<GammaPoint>,
    pub function: SpectralFunction,
}

/// Parses the output of [`write_spectral_function`].
pub fn parse_spectral_function(text: &str) -> Result<SpectralFile> {
    let mut params = None;
    let (mut nodes, mut circle, mut points, mut values) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some(rest) = h.trim().strip_prefix("params") {
                params = Some(header_params(rest.trim(), n)?);
            }
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        match (t.first().copied(), t.len()) {
            (Some("circle"), 6) => {
                nodes.push(parse_f64(t[1], n)?);
                circle.push([c64(parse_f64(t[2], n)?, parse_f64(t[3], n)?), c64(parse_f64(t[4], n)?, parse_f64(t[5], n)?)]);
            }
            (Some("point"), 6) => {
                let family = Family::from_label(t[1]).ok_or_else(|| Error::Parse(format!("line {n}: unknown family {:?}", t[1])))?;
                points.push(GammaPoint { gamma: parse_f64(t[3], n)?, family, k: parse_i64(t[2], n)? });
                values.push(c64(parse_f64(t[4], n)?, parse_f64(t[5], n)?));
            }
            _ => return Err(Error::Parse(format!("line {n}: unrecognised record {line:?}"))),
        }
    }
    Ok(SpectralFile { params, nodes, points, function: SpectralFunction::new(circle, values) })
}
