//! Straight line segments from the orthophoto, filtered to DSM building
//! boundaries and tagged with a building-width index.

mod detect;
mod filter;
mod io;

pub use detect::{detect_segments, DetectorParams};
pub use filter::{
    assign_widths, coverage_count, estimate_width, filter_segments, rasterize_segments, DEFAULT_BUFFER_RADIUS,
    DEFAULT_OVERLAP_RADIUS,
};
pub use io::{load_segments, parse_segments, save_segments, write_segments};

use crate::raster::bresenham;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A segment in continuous pixel coordinates (pixel centers at integers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSegment {
    pub p1: Point,
    pub p2: Point,
    /// 1-based tophat scale index at which the segment first meets a
    /// building contour.
    pub width_index: Option<u32>,
}

impl LineSegment {
    pub fn new(p1: Point, p2: Point) -> Self {
        LineSegment {
            p1,
            p2,
            width_index: None,
        }
    }

    pub fn length(&self) -> f64 {
        self.p1.distance(&self.p2)
    }

    /// Swaps endpoints so that `p1` is lexicographically smaller.
    pub fn normalized(mut self) -> Self {
        if (self.p2.x, self.p2.y) < (self.p1.x, self.p1.y) {
            std::mem::swap(&mut self.p1, &mut self.p2);
        }
        self
    }

    /// Pixels visited by a Bresenham walk between the rounded endpoints.
    pub fn raster_pixels(&self) -> Vec<(i64, i64)> {
        bresenham(
            self.p1.x.round() as i64,
            self.p1.y.round() as i64,
            self.p2.x.round() as i64,
            self.p2.y.round() as i64,
        )
    }

    /// Euclidean distance from `p` to the closed segment.
    pub fn distance_to(&self, p: &Point) -> f64 {
        let (dx, dy) = (self.p2.x - self.p1.x, self.p2.y - self.p1.y);
        let len2 = dx * dx + dy * dy;
        if len2 == 0.0 {
            return self.p1.distance(p);
        }
        let t = (((p.x - self.p1.x) * dx + (p.y - self.p1.y) * dy) / len2).clamp(0.0, 1.0);
        p.distance(&Point::new(self.p1.x + t * dx, self.p1.y + t * dy))
    }

    /// Direction angle in degrees, folded into `[0, 180)`.
    pub fn orientation_deg(&self) -> f64 {
        let a = (self.p2.y - self.p1.y).atan2(self.p2.x - self.p1.x).to_degrees();
        a.rem_euclid(180.0)
    }
}
