use std::ops::Range;

use crate::error::{Error, Result};
use crate::linedet::{rasterize_segments, LineSegment};
use crate::raster::{dilate_mask, BinaryMask, Contour, Dims, PixelCoord};

/// Integer 2-D shift assigned to a boundary pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct OffsetLabel {
    pub dx: i32,
    pub dy: i32,
}

impl OffsetLabel {
    pub const ZERO: OffsetLabel = OffsetLabel { dx: 0, dy: 0 };

    pub fn new(dx: i32, dy: i32) -> Self {
        OffsetLabel { dx, dy }
    }
}

/// All offsets with `|dx|, |dy| <= radius`, row-major (`dy` outer).
pub fn label_set(radius: i32) -> Vec<OffsetLabel> {
    (-radius..=radius)
        .flat_map(|dy| (-radius..=radius).map(move |dx| OffsetLabel::new(dx, dy)))
        .collect()
}

/// Constants of the boundary energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub data_cost_hit: i64,
    pub data_cost_miss: i64,
    pub smooth_cost_near: i64,
    pub smooth_cost_far: i64,
    /// Label pairs strictly closer than this pay the near cost.
    pub smooth_radius: f64,
    /// Each point is paired with the next `neighbor_reach` contour points.
    pub neighbor_reach: usize,
    /// Labels span `[-label_radius, label_radius]²`.
    pub label_radius: i32,
    /// Dilation applied to rasterized segments to form the line buffer.
    pub line_buffer_radius: usize,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            data_cost_hit: 0,
            data_cost_miss: 10,
            smooth_cost_near: 2,
            smooth_cost_far: 100,
            smooth_radius: 5.0,
            neighbor_reach: 8,
            label_radius: 5,
            line_buffer_radius: 2,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        if self.data_cost_hit < 0 || self.smooth_cost_near < 0 {
            return Err(Error::InvalidParam("costs must be non-negative".into()));
        }
        if self.data_cost_hit >= self.data_cost_miss {
            return Err(Error::InvalidParam("data_cost_hit must be below data_cost_miss".into()));
        }
        if self.smooth_cost_near >= self.smooth_cost_far {
            return Err(Error::InvalidParam("smooth_cost_near must be below smooth_cost_far".into()));
        }
        if !(self.smooth_radius > 0.0) || self.label_radius < 0 {
            return Err(Error::InvalidParam("smooth_radius and label_radius must be positive".into()));
        }
        Ok(())
    }

    pub fn smooth_cost(&self, lp: OffsetLabel, lq: OffsetLabel) -> i64 {
        let ddx = (lp.dx - lq.dx) as f64;
        let ddy = (lp.dy - lq.dy) as f64;
        if ddx.hypot(ddy) < self.smooth_radius {
            self.smooth_cost_near
        } else {
            self.smooth_cost_far
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContourSpan {
    pub range: Range<usize>,
    pub closed: bool,
}

/// Boundary pixels to relabel, the line buffer they are attracted to and
/// the energy constants.
#[derive(Debug, Clone)]
pub struct ContourProblem {
    pub points: Vec<PixelCoord>,
    pub contour_spans: Vec<ContourSpan>,
    pub line_buffer: BinaryMask,
    pub costs: CostModel,
    labels: Vec<OffsetLabel>,
    pairs: Vec<(usize, usize)>,
}

/// Unordered neighbour pairs: each point with the next `reach` points of
/// its span, wrapping on closed spans, each pair once.
fn neighbor_pairs(spans: &[ContourSpan], reach: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for span in spans {
        let n = span.range.len();
        let start = span.range.start;
        let mut local = Vec::new();
        for i in 0..n {
            for k in 1..=reach.min(n.saturating_sub(1)) {
                let j = i + k;
                if j < n {
                    local.push((i, j));
                } else if span.closed {
                    let j = j % n;
                    local.push((i.min(j), i.max(j)));
                }
            }
        }
        local.sort_unstable();
        local.dedup();
        pairs.extend(local.into_iter().map(|(a, b)| (start + a, start + b)));
    }
    pairs
}

impl ContourProblem {
    pub fn new(points: Vec<PixelCoord>, contour_spans: Vec<ContourSpan>, line_buffer: BinaryMask, costs: CostModel) -> Result<Self> {
        costs.validate()?;
        if points.is_empty() {
            return Err(Error::NothingToAdjust);
        }
        let dims = line_buffer.dims();
        if let Some(p) = points.iter().find(|p| p.x >= dims.width || p.y >= dims.height) {
            return Err(Error::InvalidParam(format!("point ({}, {}) lies outside the raster", p.x, p.y)));
        }
        let mut expected = 0;
        for span in &contour_spans {
            if span.range.start != expected || span.range.end < span.range.start {
                return Err(Error::InvalidParam("contour spans must partition the points".into()));
            }
            expected = span.range.end;
        }
        if expected != points.len() {
            return Err(Error::InvalidParam("contour spans must partition the points".into()));
        }
        let pairs = neighbor_pairs(&contour_spans, costs.neighbor_reach);
        Ok(ContourProblem {
            points,
            contour_spans,
            line_buffer,
            labels: label_set(costs.label_radius),
            costs,
            pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dims(&self) -> Dims {
        self.line_buffer.dims()
    }

    /// Candidate labels in sweep order.
    pub fn labels(&self) -> &[OffsetLabel] {
        &self.labels
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Shifted positions off the raster count as misses.
    pub fn data_cost(&self, point_index: usize, label: OffsetLabel) -> i64 {
        let p = self.points[point_index];
        if self.line_buffer.get_signed(p.x as i64 + label.dx as i64, p.y as i64 + label.dy as i64) {
            self.costs.data_cost_hit
        } else {
            self.costs.data_cost_miss
        }
    }

    pub fn smooth_cost(&self, lp: OffsetLabel, lq: OffsetLabel) -> i64 {
        self.costs.smooth_cost(lp, lq)
    }

    pub fn energy(&self, labeling: &Labeling) -> Result<i64> {
        if labeling.labels.len() != self.points.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} points",
                labeling.labels.len(),
                self.points.len()
            )));
        }
        let l = &labeling.labels;
        let data: i64 = l.iter().enumerate().map(|(i, &lab)| self.data_cost(i, lab)).sum();
        let smooth: i64 = self.pairs.iter().map(|&(i, j)| self.smooth_cost(l[i], l[j])).sum();
        Ok(data + smooth)
    }

    pub fn zero_labeling(&self) -> Labeling {
        Labeling {
            labels: vec![OffsetLabel::ZERO; self.points.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    pub labels: Vec<OffsetLabel>,
}

/// Data points are the contour pixels in traversal order; the line buffer
/// is the segments' Bresenham rasterization dilated by the model's radius.
pub fn build_problem(contours: &[Contour], segments: &[LineSegment], dims: Dims) -> Result<ContourProblem> {
    build_problem_with(contours, segments, dims, CostModel::default())
}

pub fn build_problem_with(contours: &[Contour], segments: &[LineSegment], dims: Dims, costs: CostModel) -> Result<ContourProblem> {
    if contours.iter().all(Contour::is_empty) {
        return Err(Error::NothingToAdjust);
    }
    let mut points = Vec::new();
    let mut spans = Vec::new();
    for c in contours.iter().filter(|c| !c.is_empty()) {
        let start = points.len();
        points.extend_from_slice(&c.points);
        spans.push(ContourSpan {
            range: start..points.len(),
            closed: c.closed,
        });
    }
    let line_buffer = dilate_mask(&rasterize_segments(segments, dims), costs.line_buffer_radius);
    ContourProblem::new(points, spans, line_buffer, costs)
}

pub fn data_cost(problem: &ContourProblem, point_index: usize, label: OffsetLabel) -> i64 {
    problem.data_cost(point_index, label)
}

pub fn smooth_cost(l_p: OffsetLabel, l_q: OffsetLabel) -> i64 {
    CostModel::default().smooth_cost(l_p, l_q)
}

pub fn energy(problem: &ContourProblem, labeling: &Labeling) -> Result<i64> {
    problem.energy(labeling)
}
