//! Binary occupancy rasters and PPM output.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::RenderError;
use crate::pointset::PointSet;

/// Occupancy grid with the origin at the bottom-left pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    // Row-major, row 0 at the bottom.
    bits: Vec<bool>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Result<Self, RenderError> {
        if width == 0 || height == 0 {
            return Err(RenderError::Size { width, height });
        }
        Ok(Raster { width, height, bits: vec![false; width * height] })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixel at column `x`, row `y` counted upward from the bottom.
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize) {
        self.bits[y * self.width + x] = true;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// PPM `P6` bytes: rows top to bottom, set pixels black.
    pub fn to_ppm(&self) -> Vec<u8> {
        let header = format!("P6\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + 3 * self.bits.len());
        out.extend_from_slice(header.as_bytes());
        for y in (0..self.height).rev() {
            for x in 0..self.width {
                let v = if self.get(x, y) { 0u8 } else { 255u8 };
                out.extend_from_slice(&[v, v, v]);
            }
        }
        out
    }
}

#[inline]
fn pixel(v: f64, side: f64, size: usize) -> usize {
    let p = (v / side * size as f64).floor();
    if p <= 0.0 {
        0
    } else {
        (p as usize).min(size - 1)
    }
}

/// Projects `points` onto the axis pair `(i, j)` and marks each hit pixel.
/// One-dimensional sets ignore `j` and fill a strip on row 0.
pub fn rasterize(
    points: &PointSet,
    width: usize,
    height: usize,
    axes: (usize, usize),
) -> Result<Raster, RenderError> {
    let mut raster = Raster::new(width, height)?;
    let dim = points.dim();
    let (i, j) = axes;
    for a in [i, j] {
        if a >= dim && !(dim == 1 && a == j) {
            return Err(RenderError::Axis { axis: a, dim });
        }
    }
    let side = points.side();
    let hits: Vec<usize> = points
        .coords()
        .par_chunks_exact(dim)
        .map(|p| {
            let x = pixel(p[i], side, width);
            let y = if dim == 1 { 0 } else { pixel(p[j], side, height) };
            y * width + x
        })
        .collect();
    for h in hits {
        raster.bits[h] = true;
    }
    Ok(raster)
}

pub fn write_ppm(raster: &Raster, path: &Path) -> Result<(), RenderError> {
    fs::write(path, raster.to_ppm()).map_err(|source| RenderError::Io { path: path.to_path_buf(), source })
}
