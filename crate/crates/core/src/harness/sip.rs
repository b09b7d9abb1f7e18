//! Shape-inclusion probability fields and their raster form.

use std::path::Path;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Shape;

/// Weighted summarizing shapes; a query sums the weights of shapes that
/// contain the point.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedShapes {
    shapes: Vec<Shape>,
    weights: Vec<f64>,
    exact: Option<Vec<BigRational>>,
    tol: f64,
}

impl WeightedShapes {
    pub fn exact(shapes: Vec<Shape>, weights: Vec<BigRational>, tol: f64) -> Self {
        WeightedShapes {
            weights: weights.iter().map(|w| w.to_f64().unwrap_or(0.0)).collect(),
            shapes,
            exact: Some(weights),
            tol,
        }
    }

    /// Weight `1/m` per shape.
    pub fn uniform(shapes: Vec<Shape>, tol: f64) -> Self {
        let w = 1.0 / shapes.len().max(1) as f64;
        WeightedShapes {
            weights: vec![w; shapes.len()],
            shapes,
            exact: None,
            tol,
        }
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_weights(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn query(&self, q: [f64; 2]) -> f64 {
        if self.exact.is_none() && !self.shapes.is_empty() {
            // Uniform weights: count hits so a full cover reads exactly 1.
            let hits = self.shapes.iter().filter(|s| s.contains(q, self.tol)).count();
            return hits as f64 / self.shapes.len() as f64;
        }
        let s: f64 = self
            .shapes
            .iter()
            .zip(&self.weights)
            .filter(|(s, _)| s.contains(q, self.tol))
            .map(|(_, w)| w)
            .sum();
        s.clamp(0.0, 1.0)
    }

    /// Exact probability, for fields built by the exact engine.
    pub fn query_exact(&self, q: [f64; 2]) -> Option<BigRational> {
        let w = self.exact.as_ref()?;
        Some(
            self.shapes
                .iter()
                .zip(w)
                .filter(|(s, _)| s.contains(q, self.tol))
                .fold(BigRational::zero(), |acc, (_, w)| acc + w),
        )
    }
}

/// Axis-aligned query window `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Bounds {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        let b = Bounds { x0, y0, x1, y1 };
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) || x0 >= x1 || y0 >= y1 {
            return Err(Error::param("bounds", format!("need x0 < x1 and y0 < y1, got {x0},{y0},{x1},{y1}")));
        }
        Ok(b)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// Row-major grid of cell-center values; row 0 is the top (largest `y`).
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub bounds: Bounds,
    pub values: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, bounds: Bounds, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("grid", "width and height must be positive"));
        }
        if values.len() != width * height {
            return Err(Error::param("grid", "value count does not match the grid"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::param("grid", "raster values must lie in [0, 1]"));
        }
        Ok(Raster {
            width,
            height,
            bounds,
            values,
        })
    }

    /// Center of cell `(col, row)`.
    pub fn cell_center(&self, col: usize, row: usize) -> [f64; 2] {
        cell_center(&self.bounds, self.width, self.height, col, row)
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Value of the cell containing `q`; `0` outside the bounds.
    pub fn query(&self, q: [f64; 2]) -> f64 {
        let b = &self.bounds;
        if q[0] < b.x0 || q[0] > b.x1 || q[1] < b.y0 || q[1] > b.y1 {
            return 0.0;
        }
        let col = (((q[0] - b.x0) / b.width() * self.width as f64) as usize).min(self.width - 1);
        let row = (((b.y1 - q[1]) / b.height() * self.height as f64) as usize).min(self.height - 1);
        self.get(col, row)
    }
}

pub(crate) fn cell_center(b: &Bounds, width: usize, height: usize, col: usize, row: usize) -> [f64; 2] {
    [
        b.x0 + (col as f64 + 0.5) * b.width() / width as f64,
        b.y1 - (row as f64 + 0.5) * b.height() / height as f64,
    ]
}

/// Shape inclusion probability field.
#[derive(Clone, Debug, PartialEq)]
pub enum SipField {
    Shapes(WeightedShapes),
    Raster(Raster),
}

impl SipField {
    pub fn query(&self, q: [f64; 2]) -> f64 {
        match self {
            SipField::Shapes(s) => s.query(q),
            SipField::Raster(r) => r.query(q),
        }
    }

    pub fn as_raster(&self) -> Option<&Raster> {
        match self {
            SipField::Raster(r) => Some(r),
            SipField::Shapes(_) => None,
        }
    }

    pub fn as_shapes(&self) -> Option<&WeightedShapes> {
        match self {
            SipField::Shapes(s) => Some(s),
            SipField::Raster(_) => None,
        }
    }
}

/// Evaluates a shape-backed field at every cell center.
pub fn rasterize_sip(field: &SipField, width: usize, height: usize, bounds: Bounds) -> Result<SipField> {
    let SipField::Shapes(shapes) = field else {
        return Err(Error::param("field", "rasterization needs a shape-backed field"));
    };
    if width == 0 || height == 0 {
        return Err(Error::param("grid", "width and height must be positive"));
    }
    let values: Vec<f64> = (0..width * height)
        .into_par_iter()
        .map(|i| shapes.query(cell_center(&bounds, width, height, i % width, i / width)))
        .collect();
    Ok(SipField::Raster(Raster::new(width, height, bounds, values)?))
}

const MAXVAL: u16 = u16::MAX;

#[derive(Serialize, Deserialize)]
struct Sidecar {
    width: usize,
    height: usize,
    bounds: [f64; 4],
    maxval: u16,
    row_order: String,
}

/// Binary 16-bit PGM (`P5`, big-endian samples).
pub fn encode_pgm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", r.width, r.height, MAXVAL).into_bytes();
    for v in &r.values {
        let q = (v * MAXVAL as f64).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// Parses a 16-bit `P5` image into `(width, height, samples)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>)> {
    let bad = |m: &str| Error::Format(format!("PGM: {m}"));
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not ASCII"))?);
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(bad("expected magic P5"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != MAXVAL as usize {
        return Err(bad("expected 16-bit samples (maxval 65535)"));
    }
    let data = bytes.get(pos..).ok_or_else(|| bad("missing samples"))?;
    if data.len() != 2 * w * h {
        return Err(bad("sample count does not match the header"));
    }
    Ok((w, h, data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Writes `path` (PGM) and `path.json` (grid and bounds).
pub fn save_raster(r: &Raster, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pgm(r))?;
    let side = Sidecar {
        width: r.width,
        height: r.height,
        bounds: [r.bounds.x0, r.bounds.y0, r.bounds.x1, r.bounds.y1],
        maxval: MAXVAL,
        row_order: "top_to_bottom".into(),
    };
    let mut json = serde_json::to_vec_pretty(&side)?;
    json.push(b'\n');
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn load_raster(path: &Path) -> Result<Raster> {
    let (w, h, samples) = decode_pgm(&std::fs::read(path)?)?;
    let side: Sidecar = serde_json::from_slice(&std::fs::read(sidecar_path(path))?)?;
    if side.width != w || side.height != h {
        return Err(Error::Format("sidecar grid does not match the PGM header".into()));
    }
    let [x0, y0, x1, y1] = side.bounds;
    let values = samples.iter().map(|&s| s as f64 / MAXVAL as f64).collect();
    Raster::new(w, h, Bounds::new(x0, y0, x1, y1)?, values)
}
