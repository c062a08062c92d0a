//! Raster containers shared by every stage of the pipeline.
//!
//! All rasters are row-major with row 0 at the top. Pixel `(x, y)` is
//! column `x`, row `y`, and its center sits at continuous coordinate
//! `(x as f64, y as f64)`.

mod contour;
mod io;
mod morph;

pub use contour::{rasterize_contours, trace_contours, Contour};
pub use io::{
    encode_image, load_heightfield, load_image, load_mask, parse_heightfield, parse_image, save_heightfield,
    save_image, save_mask, write_heightfield,
};
pub use morph::{dilate, dilate_mask, erode};

use crate::error::{Error, Result};

/// Default nodata sentinel for newly created heightfields.
pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub width: usize,
    pub height: usize,
}

impl Dims {
    pub fn new(width: usize, height: usize) -> Self {
        Dims { width, height }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub x: usize,
    pub y: usize,
}

impl PixelCoord {
    pub fn new(x: usize, y: usize) -> Self {
        PixelCoord { x, y }
    }

    /// Chebyshev adjacency, excluding the pixel itself.
    pub fn is_neighbor(&self, other: &PixelCoord) -> bool {
        let dx = self.x.abs_diff(other.x);
        let dy = self.y.abs_diff(other.y);
        dx <= 1 && dy <= 1 && (dx, dy) != (0, 0)
    }
}

/// Single-band elevation raster (a DSM or a ground truth surface).
#[derive(Debug, Clone, PartialEq)]
pub struct Heightfield {
    dims: Dims,
    /// Meters per pixel.
    pub cell_size: f64,
    /// World coordinates of the lower-left corner.
    pub origin: (f64, f64),
    pub nodata: f64,
    cells: Vec<f64>,
}

impl Heightfield {
    pub fn new(dims: Dims, cell_size: f64, origin: (f64, f64), nodata: f64, cells: Vec<f64>) -> Result<Self> {
        if dims.width == 0 || dims.height == 0 {
            return Err(Error::InvalidParam(format!(
                "heightfield dimensions must be positive, got {}x{}",
                dims.width, dims.height
            )));
        }
        if cells.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {}x{} grid",
                cells.len(),
                dims.width,
                dims.height
            )));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidParam(format!("cell size must be positive, got {cell_size}")));
        }
        if let Some(v) = cells.iter().find(|&&v| v != nodata && !v.is_finite()) {
            return Err(Error::InvalidParam(format!("non-finite elevation {v}")));
        }
        Ok(Heightfield {
            dims,
            cell_size,
            origin,
            nodata,
            cells,
        })
    }

    /// Unit cell size, origin at zero, default nodata sentinel.
    pub fn from_cells(dims: Dims, cells: Vec<f64>) -> Result<Self> {
        Self::new(dims, 1.0, (0.0, 0.0), DEFAULT_NODATA, cells)
    }

    pub fn filled(dims: Dims, value: f64) -> Result<Self> {
        Self::from_cells(dims, vec![value; dims.len()])
    }

    /// Builds a field by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut cells = Vec::with_capacity(dims.len());
        for y in 0..dims.height {
            for x in 0..dims.width {
                cells.push(f(x, y));
            }
        }
        Self::from_cells(dims, cells)
    }

    /// Same georeferencing, new cells.
    pub fn with_cells(&self, cells: Vec<f64>) -> Result<Self> {
        Self::new(self.dims, self.cell_size, self.origin, self.nodata, cells)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cells[self.dims.index(x, y)]
    }

    /// Elevation at `(x, y)`, or `None` for nodata.
    #[inline]
    pub fn value(&self, x: usize, y: usize) -> Option<f64> {
        let v = self.get(x, y);
        (!self.is_nodata(v)).then_some(v)
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata
    }

    /// Sets a cell. Non-finite values are stored as nodata.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        let i = self.dims.index(x, y);
        self.cells[i] = if v.is_finite() { v } else { self.nodata };
    }

    /// Extent in world coordinates: `(xmin, ymin, xmax, ymax)`.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        let (x0, y0) = self.origin;
        (
            x0,
            y0,
            x0 + self.dims.width as f64 * self.cell_size,
            y0 + self.dims.height as f64 * self.cell_size,
        )
    }

    /// Bilinear sample at continuous pixel coordinates, clamped to the
    /// border. Returns `None` if a support cell with non-zero weight is
    /// nodata.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let maxx = (self.dims.width - 1) as f64;
        let maxy = (self.dims.height - 1) as f64;
        let x = x.clamp(0.0, maxx);
        let y = y.clamp(0.0, maxy);
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as usize, y0 as usize);
        let x1 = (x0 + 1).min(self.dims.width - 1);
        let y1 = (y0 + 1).min(self.dims.height - 1);
        let taps = [
            (x0, y0, (1.0 - fx) * (1.0 - fy)),
            (x1, y0, fx * (1.0 - fy)),
            (x0, y1, (1.0 - fx) * fy),
            (x1, y1, fx * fy),
        ];
        let mut acc = 0.0;
        for (tx, ty, w) in taps {
            if w == 0.0 {
                continue;
            }
            acc += w * self.value(tx, ty)?;
        }
        Some(acc)
    }

    /// Minimum over non-nodata cells.
    pub fn min_value(&self) -> Option<f64> {
        self.cells
            .iter()
            .copied()
            .filter(|&v| !self.is_nodata(v))
            .reduce(f64::min)
    }
}

/// 8-bit intensity raster with 1 or 3 interleaved bands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    dims: Dims,
    bands: usize,
    samples: Vec<u8>,
}

impl RasterImage {
    pub fn new(dims: Dims, bands: usize, samples: Vec<u8>) -> Result<Self> {
        if bands != 1 && bands != 3 {
            return Err(Error::UnsupportedBands(bands));
        }
        if samples.len() != dims.len() * bands {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {}x{}x{} image",
                samples.len(),
                dims.width,
                dims.height,
                bands
            )));
        }
        Ok(RasterImage { dims, bands, samples })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize, band: usize) -> u8 {
        self.samples[self.dims.index(x, y) * self.bands + band]
    }
}

/// Converts to one band by rounding the equal-weight mean of the bands.
pub fn grayscale(image: &RasterImage) -> Result<RasterImage> {
    match image.bands {
        1 => Ok(image.clone()),
        3 => {
            let samples = image
                .samples
                .chunks_exact(3)
                .map(|px| {
                    let sum: u32 = px.iter().map(|&v| v as u32).sum();
                    // round(sum / 3) without floats
                    ((sum + 1) / 3) as u8
                })
                .collect();
            RasterImage::new(image.dims, 1, samples)
        }
        b => Err(Error::UnsupportedBands(b)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(dims: Dims) -> Self {
        BinaryMask {
            dims,
            bits: vec![false; dims.len()],
        }
    }

    pub fn from_bits(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} bits for a {}x{} mask",
                bits.len(),
                dims.width,
                dims.height
            )));
        }
        Ok(BinaryMask { dims, bits })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(dims.len());
        for y in 0..dims.height {
            for x in 0..dims.width {
                bits.push(f(x, y));
            }
        }
        BinaryMask { dims, bits }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[self.dims.index(x, y)]
    }

    /// Out-of-raster positions read as unset.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        self.dims.contains(x, y) && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        let i = self.dims.index(x, y);
        self.bits[i] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        assert_eq!(self.dims, other.dims, "mask dimensions differ");
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims == other.dims && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        let w = self.dims.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| PixelCoord::new(i % w, i / w))
    }
}

/// Integer pixels visited by a Bresenham walk between two pixels, inclusive.
pub fn bresenham(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let (mut x, mut y) = (x0, y0);
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x, y));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}
