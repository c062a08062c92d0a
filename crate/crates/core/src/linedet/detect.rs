//! Gradient-orientation region growing in the style of LSD, without the
//! a-contrario validation step.

use std::f64::consts::PI;

use super::{LineSegment, Point};
use crate::error::{Error, Result};
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    /// Minimum gradient magnitude (intensity units per pixel).
    pub gradient_threshold: f64,
    /// Maximum level-line angle deviation inside a region, in degrees.
    pub angle_tolerance: f64,
    pub min_length: f64,
    pub min_region_pixels: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            gradient_threshold: 5.0,
            angle_tolerance: 22.5,
            min_length: 15.0,
            min_region_pixels: 20,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_threshold > 0.0) || !(self.min_length > 0.0) || self.min_region_pixels == 0 {
            return Err(Error::InvalidParam("detector parameters must be positive".into()));
        }
        if !(self.angle_tolerance > 0.0 && self.angle_tolerance < 90.0) {
            return Err(Error::InvalidParam(format!(
                "angle_tolerance must lie in (0, 90), got {}",
                self.angle_tolerance
            )));
        }
        Ok(())
    }
}

/// Near-duplicate suppression distance, in pixels.
const DUPLICATE_DISTANCE: f64 = 2.0;

fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    while d <= -PI {
        d += 2.0 * PI;
    }
    while d > PI {
        d -= 2.0 * PI;
    }
    d.abs()
}

struct Gradient {
    width: usize,
    height: usize,
    magnitude: Vec<f64>,
    angle: Vec<f64>,
}

/// 2×2 differences; sample `(x, y)` sits at continuous `(x + 0.5, y + 0.5)`.
fn gradient(gray: &RasterImage) -> Gradient {
    let dims = gray.dims();
    let width = dims.width.saturating_sub(1);
    let height = dims.height.saturating_sub(1);
    let mut magnitude = vec![0.0; width * height];
    let mut angle = vec![0.0; width * height];
    let px = |x: usize, y: usize| gray.get(x, y, 0) as f64;
    for y in 0..height {
        for x in 0..width {
            let (a, b, c, d) = (px(x, y), px(x + 1, y), px(x, y + 1), px(x + 1, y + 1));
            let gx = (b + d - a - c) / 2.0;
            let gy = (c + d - a - b) / 2.0;
            let i = y * width + x;
            magnitude[i] = gx.hypot(gy);
            // level-line direction, perpendicular to the gradient
            angle[i] = gx.atan2(-gy);
        }
    }
    Gradient {
        width,
        height,
        magnitude,
        angle,
    }
}

fn fit_segment(grad: &Gradient, region: &[usize], region_angle: f64, tolerance: f64) -> LineSegment {
    let mut sw = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for &i in region {
        let w = grad.magnitude[i];
        cx += w * (i % grad.width) as f64;
        cy += w * (i / grad.width) as f64;
        sw += w;
    }
    cx /= sw;
    cy /= sw;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &i in region {
        let w = grad.magnitude[i];
        let dx = (i % grad.width) as f64 - cx;
        let dy = (i / grad.width) as f64 - cy;
        sxx += w * dx * dx;
        syy += w * dy * dy;
        sxy += w * dx * dy;
    }
    let mut theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    // Blobs have no reliable principal axis; trust the level-line angle.
    let folded = angle_diff(theta, region_angle).min(angle_diff(theta + PI, region_angle));
    if folded > tolerance {
        theta = region_angle;
    }
    let (ux, uy) = (theta.cos(), theta.sin());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in region {
        let t = ((i % grad.width) as f64 - cx) * ux + ((i / grad.width) as f64 - cy) * uy;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let p1 = Point::new(cx + lo * ux + 0.5, cy + lo * uy + 0.5);
    let p2 = Point::new(cx + hi * ux + 0.5, cy + hi * uy + 0.5);
    LineSegment::new(p1, p2).normalized()
}

fn suppress_duplicates(segments: Vec<LineSegment>) -> Vec<LineSegment> {
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&a, &b| segments[b].length().total_cmp(&segments[a].length()).then(a.cmp(&b)));
    let mut keep = vec![false; segments.len()];
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let s = &segments[i];
        let duplicate = kept.iter().any(|&k| {
            let longer = &segments[k];
            longer.distance_to(&s.p1) <= DUPLICATE_DISTANCE && longer.distance_to(&s.p2) <= DUPLICATE_DISTANCE
        });
        if !duplicate {
            keep[i] = true;
            kept.push(i);
        }
    }
    segments
        .into_iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then_some(s))
        .collect()
}

/// Detects straight segments on a single-band image. The output is
/// deterministic and ordered by seed strength.
pub fn detect_segments(gray: &RasterImage, params: &DetectorParams) -> Result<Vec<LineSegment>> {
    params.validate()?;
    if gray.bands() != 1 {
        return Err(Error::UnsupportedBands(gray.bands()));
    }
    let grad = gradient(gray);
    let (w, h) = (grad.width, grad.height);
    if w == 0 || h == 0 {
        return Ok(Vec::new());
    }
    let tolerance = params.angle_tolerance.to_radians();

    let mut seeds: Vec<usize> = (0..w * h)
        .filter(|&i| grad.magnitude[i] > params.gradient_threshold)
        .collect();
    seeds.sort_by(|&a, &b| grad.magnitude[b].total_cmp(&grad.magnitude[a]).then(a.cmp(&b)));

    let mut used = vec![false; w * h];
    let mut segments = Vec::new();
    let mut region = Vec::new();
    for seed in seeds {
        if used[seed] {
            continue;
        }
        region.clear();
        region.push(seed);
        used[seed] = true;
        let mut region_angle = grad.angle[seed];
        let (mut sum_cos, mut sum_sin) = (region_angle.cos(), region_angle.sin());
        let mut head = 0;
        while head < region.len() {
            let (x, y) = ((region[head] % w) as i64, (region[head] / w) as i64);
            head += 1;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if used[j]
                        || grad.magnitude[j] <= params.gradient_threshold
                        || angle_diff(grad.angle[j], region_angle) > tolerance
                    {
                        continue;
                    }
                    used[j] = true;
                    region.push(j);
                    sum_cos += grad.angle[j].cos();
                    sum_sin += grad.angle[j].sin();
                    region_angle = sum_sin.atan2(sum_cos);
                }
            }
        }
        if region.len() < params.min_region_pixels {
            continue;
        }
        let seg = fit_segment(&grad, &region, region_angle, tolerance);
        if seg.length() >= params.min_length {
            segments.push(seg);
        }
    }
    Ok(suppress_duplicates(segments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Dims;

    fn image(dims: Dims, f: impl Fn(usize, usize) -> u8) -> RasterImage {
        let mut samples = Vec::with_capacity(dims.len());
        for y in 0..dims.height {
            for x in 0..dims.width {
                samples.push(f(x, y));
            }
        }
        RasterImage::new(dims, 1, samples).unwrap()
    }

    #[test]
    fn constant_image_has_no_segments() {
        let img = image(Dims::new(64, 64), |_, _| 77);
        assert!(detect_segments(&img, &DetectorParams::default()).unwrap().is_empty());
    }

    #[test]
    fn vertical_step_edge() {
        let img = image(Dims::new(128, 128), |x, _| if x < 64 { 0 } else { 255 });
        let segs = detect_segments(&img, &DetectorParams::default()).unwrap();
        assert_eq!(segs.len(), 1, "{segs:?}");
        let s = segs[0];
        assert!(s.length() >= 100.0);
        assert!((s.orientation_deg() - 90.0).abs() <= 2.0);
        // the step lies between columns 63 and 64
        assert!((s.p1.x - 63.5).abs() < 0.5 && (s.p2.x - 63.5).abs() < 0.5);
    }

    #[test]
    fn square_gives_four_sides() {
        // bright square spanning pixels 44..84 in both directions
        let img = image(Dims::new(128, 128), |x, y| {
            if (44..84).contains(&x) && (44..84).contains(&y) {
                200
            } else {
                30
            }
        });
        let segs = detect_segments(&img, &DetectorParams::default()).unwrap();
        assert_eq!(segs.len(), 4, "{segs:?}");
        // true edges sit half a pixel outside the outermost bright pixels
        let edges = [43.5, 83.5];
        for s in &segs {
            let vertical = (s.orientation_deg() - 90.0).abs() < 2.0;
            let horizontal = s.orientation_deg() < 2.0 || s.orientation_deg() > 178.0;
            assert!(vertical || horizontal, "{s:?}");
            let (a, b) = if vertical { (s.p1.x, s.p2.x) } else { (s.p1.y, s.p2.y) };
            assert!(edges.iter().any(|&e| (a - e).abs() <= 2.0 && (b - e).abs() <= 2.0), "{s:?}");
        }
    }

    #[test]
    fn endpoints_are_ordered() {
        let img = image(Dims::new(80, 80), |x, y| if x + y < 80 { 20 } else { 220 });
        for s in detect_segments(&img, &DetectorParams::default()).unwrap() {
            assert!((s.p1.x, s.p1.y) <= (s.p2.x, s.p2.y));
        }
    }

    #[test]
    fn rotation_by_half_turn_is_equivariant() {
        let dims = Dims::new(100, 90);
        let scene = |x: usize, y: usize| -> u8 {
            if (10..45).contains(&x) && (12..70).contains(&y) {
                180
            } else if (55..92).contains(&x) && (30..52).contains(&y) {
                110
            } else {
                20
            }
        };
        let img = image(dims, scene);
        let rot = image(dims, |x, y| scene(dims.width - 1 - x, dims.height - 1 - y));
        let params = DetectorParams::default();
        let a = detect_segments(&img, &params).unwrap();
        let b = detect_segments(&rot, &params).unwrap();
        assert_eq!(a.len(), b.len());
        let turn = |p: Point| Point::new((dims.width - 1) as f64 - p.x, (dims.height - 1) as f64 - p.y);
        for s in &a {
            let r = LineSegment::new(turn(s.p1), turn(s.p2)).normalized();
            let matched = b.iter().any(|t| t.p1.distance(&r.p1) <= 1.0 && t.p2.distance(&r.p2) <= 1.0);
            assert!(matched, "no rotated counterpart for {s:?}");
        }
    }

    #[test]
    fn near_duplicates_are_suppressed() {
        let long = LineSegment::new(Point::new(0.0, 0.0), Point::new(50.0, 0.0));
        let dup = LineSegment::new(Point::new(10.0, 1.0), Point::new(30.0, 1.5));
        let apart = LineSegment::new(Point::new(10.0, 5.0), Point::new(30.0, 5.0));
        let out = suppress_duplicates(vec![dup, long, apart]);
        assert_eq!(out, vec![long, apart]);
    }

    #[test]
    fn rejects_multiband_input() {
        let img = RasterImage::new(Dims::new(2, 2), 3, vec![0; 12]).unwrap();
        assert!(detect_segments(&img, &DetectorParams::default()).is_err());
    }
}
