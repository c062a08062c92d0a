//! Dense offset field from labeled boundary pixels, and the DSM warp.

use rayon::prelude::*;

use super::problem::{ContourProblem, Labeling};
use crate::error::{Error, Result};
use crate::raster::{dilate_mask, BinaryMask, Dims, Heightfield};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationParams {
    /// Pixels at Chebyshev distance >= this from the boundary are pinned to
    /// a zero offset.
    pub far_distance: usize,
    pub neighbors: usize,
    pub power: f64,
}

impl Default for InterpolationParams {
    fn default() -> Self {
        InterpolationParams {
            far_distance: 20,
            neighbors: 8,
            power: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetField {
    dims: Dims,
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

impl OffsetField {
    pub fn zeros(dims: Dims) -> Self {
        OffsetField {
            dims,
            dx: vec![0.0; dims.len()],
            dy: vec![0.0; dims.len()],
        }
    }

    pub fn constant(dims: Dims, dx: f64, dy: f64) -> Self {
        OffsetField {
            dims,
            dx: vec![dx; dims.len()],
            dy: vec![dy; dims.len()],
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = self.dims.index(x, y);
        (self.dx[i], self.dy[i])
    }

    pub fn is_zero(&self) -> bool {
        self.dx.iter().chain(&self.dy).all(|&v| v == 0.0)
    }

    /// The two components as heightfields sharing `like`'s georeference.
    pub fn to_heightfields(&self, like: &Heightfield) -> Result<(Heightfield, Heightfield)> {
        Ok((like.with_cells(self.dx.clone())?, like.with_cells(self.dy.clone())?))
    }
}

/// A known offset at a pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub x: usize,
    pub y: usize,
    pub dx: f64,
    pub dy: f64,
}

/// Inverse-distance-weighted estimate at `probe` from the `k` nearest
/// anchors. An anchor at the probe position is returned exactly.
pub fn idw_estimate(anchors: &[Anchor], probe: (usize, usize), k: usize, power: f64) -> (f64, f64) {
    let mut near: Vec<(u64, usize, usize, &Anchor)> = anchors
        .iter()
        .map(|a| {
            let d2 = (a.x.abs_diff(probe.0).pow(2) + a.y.abs_diff(probe.1).pow(2)) as u64;
            (d2, a.y, a.x, a)
        })
        .collect();
    near.sort_by_key(|&(d2, y, x, _)| (d2, y, x));
    near.truncate(k);
    weighted(near.iter().map(|&(d2, _, _, a)| (d2, a.dx, a.dy)), power)
}

fn weighted(items: impl Iterator<Item = (u64, f64, f64)>, power: f64) -> (f64, f64) {
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (d2, dx, dy) in items {
        if d2 == 0 {
            return (dx, dy);
        }
        let w = (d2 as f64).powf(-power / 2.0);
        sw += w;
        sx += w * dx;
        sy += w * dy;
    }
    if sw == 0.0 {
        (0.0, 0.0)
    } else {
        (sx / sw, sy / sw)
    }
}

/// Anchors: every problem point carries its label (first occurrence wins),
/// and every pixel far from `boundary_mask` carries a zero offset. All other
/// pixels are filled by [`idw_estimate`]-style interpolation over the
/// nearest anchors, found by expanding square rings.
pub fn interpolate_offsets(
    problem: &ContourProblem,
    labeling: &Labeling,
    boundary_mask: &BinaryMask,
    dims: Dims,
    params: &InterpolationParams,
) -> Result<OffsetField> {
    if labeling.labels.len() != problem.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} points",
            labeling.labels.len(),
            problem.len()
        )));
    }
    if boundary_mask.dims() != dims || problem.dims() != dims {
        return Err(Error::DimensionMismatch("offset field dimensions differ from inputs".into()));
    }
    if params.neighbors == 0 || params.far_distance == 0 {
        return Err(Error::InvalidParam("neighbors and far_distance must be positive".into()));
    }

    let mut anchor: Vec<Option<(f64, f64)>> = vec![None; dims.len()];
    for (p, l) in problem.points.iter().zip(&labeling.labels) {
        let i = dims.index(p.x, p.y);
        if anchor[i].is_none() {
            anchor[i] = Some((l.dx as f64, l.dy as f64));
        }
    }
    let near_boundary = dilate_mask(boundary_mask, params.far_distance - 1);
    for (i, slot) in anchor.iter_mut().enumerate() {
        if slot.is_none() && !near_boundary.bits()[i] {
            *slot = Some((0.0, 0.0));
        }
    }
    if anchor.iter().all(Option::is_none) {
        return Ok(OffsetField::zeros(dims));
    }

    let k = params.neighbors;
    let max_radius = dims.width.max(dims.height) as i64;
    let rows: Vec<Vec<(f64, f64)>> = (0..dims.height)
        .into_par_iter()
        .map(|y| {
            let mut found: Vec<(u64, usize, usize, f64, f64)> = Vec::new();
            (0..dims.width)
                .map(|x| {
                    if let Some(v) = anchor[dims.index(x, y)] {
                        return v;
                    }
                    found.clear();
                    let (cx, cy) = (x as i64, y as i64);
                    for r in 1..=max_radius {
                        for (px, py) in ring(cx, cy, r) {
                            if !dims.contains(px, py) {
                                continue;
                            }
                            if let Some((dx, dy)) = anchor[dims.index(px as usize, py as usize)] {
                                let d2 = ((px - cx).pow(2) + (py - cy).pow(2)) as u64;
                                found.push((d2, py as usize, px as usize, dx, dy));
                            }
                        }
                        if found.len() >= k {
                            found.sort_by_key(|&(d2, y, x, _, _)| (d2, y, x));
                            // anchors beyond this ring are at least r + 1 away
                            if found[k - 1].0 <= ((r + 1) * (r + 1)) as u64 {
                                break;
                            }
                        }
                    }
                    found.sort_by_key(|&(d2, y, x, _, _)| (d2, y, x));
                    weighted(found.iter().take(k).map(|&(d2, _, _, dx, dy)| (d2, dx, dy)), params.power)
                })
                .collect()
        })
        .collect();

    let mut field = OffsetField::zeros(dims);
    for (y, row) in rows.into_iter().enumerate() {
        for (x, (dx, dy)) in row.into_iter().enumerate() {
            let i = dims.index(x, y);
            field.dx[i] = dx;
            field.dy[i] = dy;
        }
    }
    Ok(field)
}

/// Pixels at Chebyshev distance exactly `r` from `(cx, cy)`.
fn ring(cx: i64, cy: i64, r: i64) -> impl Iterator<Item = (i64, i64)> {
    let top = (-r..=r).map(move |d| (cx + d, cy - r));
    let bottom = (-r..=r).map(move |d| (cx + d, cy + r));
    let left = (-r + 1..r).map(move |d| (cx - r, cy + d));
    let right = (-r + 1..r).map(move |d| (cx + r, cy + d));
    top.chain(bottom).chain(left).chain(right)
}

/// Backward warp: `out(x, y) = dsm(x − dx, y − dy)` with bilinear sampling
/// clamped to the border.
pub fn warp_dsm(dsm: &Heightfield, field: &OffsetField) -> Result<Heightfield> {
    let dims = dsm.dims();
    if field.dims() != dims {
        return Err(Error::DimensionMismatch("offset field and DSM differ in size".into()));
    }
    let mut out = dsm.clone();
    for y in 0..dims.height {
        for x in 0..dims.width {
            let (dx, dy) = field.at(x, y);
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            let v = dsm
                .sample_bilinear(x as f64 - dx, y as f64 - dy)
                .unwrap_or(dsm.nodata);
            out.set(x, y, v);
        }
    }
    Ok(out)
}
