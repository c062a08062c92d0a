//! Boundary adjustment by per-side plane fitting.
//!
//! For every filtered segment the DSM pixels in a rectangle around it are
//! split by the side of the line they fall on. Each side is replaced by
//! its least-squares plane `h = a·x + b·y + c`, which turns a smeared
//! edge back into a step exactly at the line. A final feathering pass
//! softens the seam where the adjusted area meets untouched pixels.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linedet::LineSegment;
use crate::raster::{BinaryMask, Heightfield};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PlaneParams {
    pub fn constant(c: f64) -> Self {
        PlaneParams { a: 0.0, b: 0.0, c }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c
    }
}

/// Side of the directed line `p1 → p2`. `Left` is a positive cross
/// product `(p2 − p1) × (q − p1)` in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SideSample {
    pub side: Side,
    /// `(x, y, h)` of every valid pixel on this side.
    pub pixels: Vec<(usize, usize, f64)>,
}

impl SideSample {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub width_multiplier: usize,
    /// Upper bound on the buffer half-width, in pixels.
    pub buffer_cap: usize,
    pub min_points: usize,
    pub feather_band: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            width_multiplier: 3,
            buffer_cap: 30,
            min_points: 3,
            feather_band: 2,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width_multiplier == 0 || self.buffer_cap == 0 {
            return Err(Error::InvalidParam("width_multiplier and buffer_cap must be positive".into()));
        }
        if self.min_points < 3 {
            return Err(Error::InvalidParam(format!("min_points must be at least 3, got {}", self.min_points)));
        }
        Ok(())
    }
}

pub fn buffer_half_width(width_index: u32, config: &FitConfig) -> usize {
    (config.width_multiplier * width_index as usize).min(config.buffer_cap)
}

/// Pixels whose centre lies within `half_width` of the segment, measured
/// perpendicular to it, and whose projection falls between the endpoints.
/// Pixels on the line itself and nodata cells belong to neither side.
pub fn collect_side_pixels(dsm: &Heightfield, segment: &LineSegment, half_width: usize) -> (SideSample, SideSample) {
    let mut left = SideSample { side: Side::Left, pixels: Vec::new() };
    let mut right = SideSample { side: Side::Right, pixels: Vec::new() };
    let (p1, p2) = (segment.p1, segment.p2);
    let (dx, dy) = (p2.x - p1.x, p2.y - p1.y);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return (left, right);
    }
    let hw = half_width as f64;
    let dims = dsm.dims();
    let clamp_lo = |v: f64| (v.floor().max(0.0)) as usize;
    let x0 = clamp_lo(p1.x.min(p2.x) - hw);
    let y0 = clamp_lo(p1.y.min(p2.y) - hw);
    let x1 = ((p1.x.max(p2.x) + hw).ceil()).min(dims.width as f64 - 1.0);
    let y1 = ((p1.y.max(p2.y) + hw).ceil()).min(dims.height as f64 - 1.0);
    if x1 < 0.0 || y1 < 0.0 {
        return (left, right);
    }
    // slack for coordinates that sit exactly on the rectangle border
    let eps = 1e-9 * len;
    for y in y0..=y1 as usize {
        for x in x0..=x1 as usize {
            let (qx, qy) = (x as f64 - p1.x, y as f64 - p1.y);
            let along = qx * dx + qy * dy;
            if along < -eps * len || along > len * len + eps * len {
                continue;
            }
            let cross = dx * qy - dy * qx;
            if cross == 0.0 || cross.abs() > hw * len + eps {
                continue;
            }
            let Some(h) = dsm.value(x, y) else { continue };
            if cross > 0.0 {
                left.pixels.push((x, y, h));
            } else {
                right.pixels.push((x, y, h));
            }
        }
    }
    (left, right)
}

/// Least-squares plane through the sample. Coordinates are centred first,
/// which decouples `c` and leaves a 2×2 system for the slopes.
pub fn fit_plane(sample: &SideSample, min_points: usize) -> Result<PlaneParams> {
    let n = sample.pixels.len();
    if n < min_points.max(3) {
        return Err(Error::InsufficientSupport {
            found: n,
            needed: min_points.max(3),
        });
    }
    let nf = n as f64;
    let (mut mx, mut my, mut mh) = (0.0, 0.0, 0.0);
    for &(x, y, h) in &sample.pixels {
        mx += x as f64;
        my += y as f64;
        mh += h;
    }
    mx /= nf;
    my /= nf;
    mh /= nf;
    let (mut sxx, mut sxy, mut syy, mut sxh, mut syh) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, h) in &sample.pixels {
        let (u, v, w) = (x as f64 - mx, y as f64 - my, h - mh);
        sxx += u * u;
        sxy += u * v;
        syy += v * v;
        sxh += u * w;
        syh += v * w;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det > 1e-12 * (sxx * syy).max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateGeometry);
    }
    let a = (sxh * syy - syh * sxy) / det;
    let b = (syh * sxx - sxh * sxy) / det;
    Ok(PlaneParams { a, b, c: mh - a * mx - b * my })
}

pub fn apply_plane(dsm: &Heightfield, sample: &SideSample, plane: &PlaneParams) -> Heightfield {
    let mut out = dsm.clone();
    apply_in_place(&mut out, sample, plane);
    out
}

fn apply_in_place(dsm: &mut Heightfield, sample: &SideSample, plane: &PlaneParams) {
    for &(x, y, _) in &sample.pixels {
        dsm.set(x, y, plane.eval(x as f64, y as f64));
    }
}

/// Blends a ring of `band` pixels around `region` toward the region.
///
/// Each ring pixel at Chebyshev distance `d` gets an extension value, the
/// mean of its valid neighbours at distance `d − 1` (region pixels at
/// `d − 1 = 0` contribute their own height). The output is
/// `w·extension + (1 − w)·original` with `w = 1 − d / (band + 1)`.
pub fn feather(dsm: &Heightfield, region: &BinaryMask, band: usize) -> Result<Heightfield> {
    let dims = dsm.dims();
    if region.dims() != dims {
        return Err(Error::DimensionMismatch("feather region and DSM differ in size".into()));
    }
    if band == 0 || region.is_empty() {
        return Ok(dsm.clone());
    }
    let mut dist = vec![usize::MAX; dims.len()];
    let mut queue = VecDeque::new();
    for p in region.iter_set() {
        let i = dims.index(p.x, p.y);
        dist[i] = 0;
        queue.push_back((p.x, p.y));
    }
    let mut ring: Vec<(usize, usize)> = Vec::new();
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[dims.index(x, y)];
        if d == band {
            continue;
        }
        for (nx, ny) in neighbors(dims.width, dims.height, x, y) {
            let j = dims.index(nx, ny);
            if dist[j] == usize::MAX {
                dist[j] = d + 1;
                ring.push((nx, ny));
                queue.push_back((nx, ny));
            }
        }
    }
    // BFS order is non-decreasing in distance
    let mut ext: Vec<Option<f64>> = vec![None; dims.len()];
    for p in region.iter_set() {
        ext[dims.index(p.x, p.y)] = dsm.value(p.x, p.y);
    }
    let mut out = dsm.clone();
    for &(x, y) in &ring {
        let i = dims.index(x, y);
        let d = dist[i];
        let (mut sum, mut n) = (0.0, 0usize);
        for (nx, ny) in neighbors(dims.width, dims.height, x, y) {
            let j = dims.index(nx, ny);
            if dist[j] == d - 1 {
                if let Some(v) = ext[j] {
                    sum += v;
                    n += 1;
                }
            }
        }
        if n == 0 {
            continue;
        }
        let e = sum / n as f64;
        ext[i] = Some(e);
        if let Some(orig) = dsm.value(x, y) {
            let w = 1.0 - d as f64 / (band + 1) as f64;
            out.set(x, y, w * e + (1.0 - w) * orig);
        }
    }
    Ok(out)
}

fn neighbors(w: usize, h: usize, x: usize, y: usize) -> impl Iterator<Item = (usize, usize)> {
    (-1i64..=1)
        .flat_map(|dy| (-1i64..=1).map(move |dx| (dx, dy)))
        .filter(|&d| d != (0, 0))
        .filter_map(move |(dx, dy)| {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then_some((nx as usize, ny as usize))
        })
}

/// One fitted side, as written to the planes dump.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneRecord {
    pub segment: LineSegment,
    pub side: Side,
    pub plane: PlaneParams,
    pub n_points: usize,
}

pub fn adjust_all(dsm: &Heightfield, segments: &[LineSegment], config: &FitConfig) -> Result<Heightfield> {
    Ok(adjust_all_with_report(dsm, segments, config)?.0)
}

/// Segments are processed in order on one working copy, so later planes
/// overwrite earlier ones where buffers overlap. Sides that cannot be
/// fitted are skipped; collinear support falls back to the mean height.
pub fn adjust_all_with_report(
    dsm: &Heightfield,
    segments: &[LineSegment],
    config: &FitConfig,
) -> Result<(Heightfield, Vec<PlaneRecord>)> {
    config.validate()?;
    let mut work = dsm.clone();
    let mut region = BinaryMask::new(dsm.dims());
    let mut records = Vec::new();
    for (k, seg) in segments.iter().enumerate() {
        let Some(width) = seg.width_index else {
            log::warn!("segment {k} has no width index, skipped");
            continue;
        };
        let hw = buffer_half_width(width, config);
        let (left, right) = collect_side_pixels(&work, seg, hw);
        for sample in [left, right] {
            let plane = match fit_plane(&sample, config.min_points) {
                Ok(p) => p,
                Err(Error::DegenerateGeometry) => {
                    PlaneParams::constant(sample.pixels.iter().map(|p| p.2).sum::<f64>() / sample.len() as f64)
                }
                Err(e) => {
                    log::debug!("segment {k} {} side skipped: {e}", sample.side.as_str());
                    continue;
                }
            };
            apply_in_place(&mut work, &sample, &plane);
            for &(x, y, _) in &sample.pixels {
                region.set(x, y, true);
            }
            records.push(PlaneRecord {
                segment: *seg,
                side: sample.side,
                plane,
                n_points: sample.len(),
            });
        }
    }
    let out = feather(&work, &region, config.feather_band)?;
    Ok((out, records))
}

/// Planes dump: `x1,y1,x2,y2,side,a,b,c,n_points`.
pub fn write_planes(records: &[PlaneRecord]) -> String {
    let mut s = String::from("x1,y1,x2,y2,side,a,b,c,n_points\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.segment.p1.x,
            r.segment.p1.y,
            r.segment.p2.x,
            r.segment.p2.y,
            r.side.as_str(),
            r.plane.a,
            r.plane.b,
            r.plane.c,
            r.n_points
        );
    }
    s
}
