//! Multi-scale white-tophat building extraction.
//!
//! Each scale's tophat response is thresholded to a mask; masks accumulate
//! by union in ascending scale order. The contours of every cumulative
//! mask are kept as a stack of contour images, which later serves as a
//! building-width proxy for line segments.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{dilate, erode, rasterize_contours, trace_contours, BinaryMask, Contour, Heightfield};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TophatParams {
    /// Smallest structuring element, in pixels.
    pub scale_min: usize,
    pub scale_max: usize,
    pub scale_step: usize,
    /// Tophat responses above this height (meters) count as buildings.
    pub height_threshold: f64,
}

impl Default for TophatParams {
    fn default() -> Self {
        TophatParams {
            scale_min: 10,
            scale_max: 400,
            scale_step: 10,
            height_threshold: 2.5,
        }
    }
}

impl TophatParams {
    pub fn validate(&self) -> Result<()> {
        if self.scale_min == 0 || self.scale_min > self.scale_max {
            return Err(Error::InvalidParam(format!(
                "need 0 < scale_min <= scale_max, got {}..{}",
                self.scale_min, self.scale_max
            )));
        }
        if self.scale_step == 0 {
            return Err(Error::InvalidParam("scale_step must be positive".into()));
        }
        if !(self.height_threshold > 0.0) {
            return Err(Error::InvalidParam("height_threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn scales(&self) -> Vec<usize> {
        (self.scale_min..=self.scale_max).step_by(self.scale_step).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TophatStack {
    pub scales: Vec<usize>,
    pub cumulative_masks: Vec<BinaryMask>,
    pub contour_images: Vec<BinaryMask>,
    final_contours: Vec<Contour>,
}

/// `dsm − opening(dsm)` with a square element of side `se_size`
/// (half-width `se_size / 2`).
pub fn white_tophat(dsm: &Heightfield, se_size: usize) -> Heightfield {
    let half = se_size / 2;
    let opened = dilate(&erode(dsm, half), half);
    let cells = dsm
        .cells()
        .iter()
        .zip(opened.cells())
        .map(|(&v, &o)| if dsm.is_nodata(v) || dsm.is_nodata(o) { dsm.nodata } else { v - o })
        .collect();
    dsm.with_cells(cells).expect("same dimensions")
}

fn threshold(response: &Heightfield, level: f64) -> BinaryMask {
    let bits = response
        .cells()
        .iter()
        .map(|&v| !response.is_nodata(v) && v > level)
        .collect();
    BinaryMask::from_bits(response.dims(), bits).expect("same dimensions")
}

pub fn build_stack(dsm: &Heightfield, params: &TophatParams) -> Result<TophatStack> {
    params.validate()?;
    let scales = params.scales();
    let per_scale: Vec<BinaryMask> = scales
        .par_iter()
        .map(|&s| threshold(&white_tophat(dsm, s), params.height_threshold))
        .collect();

    let mut cumulative_masks = Vec::with_capacity(scales.len());
    let mut acc = BinaryMask::new(dsm.dims());
    for mask in &per_scale {
        acc.union_with(mask);
        cumulative_masks.push(acc.clone());
    }

    let traced: Vec<Vec<Contour>> = cumulative_masks.par_iter().map(trace_contours).collect();
    let contour_images = traced
        .iter()
        .map(|cs| rasterize_contours(cs, dsm.dims()))
        .collect();
    let final_contours = traced.into_iter().last().unwrap_or_default();

    Ok(TophatStack {
        scales,
        cumulative_masks,
        contour_images,
        final_contours,
    })
}

impl TophatStack {
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn building_mask(&self) -> &BinaryMask {
        self.cumulative_masks.last().expect("stack has at least one scale")
    }

    /// Contours of the final building mask.
    pub fn boundary_contours(&self) -> &[Contour] {
        &self.final_contours
    }

    /// Rasterized contours of the final building mask.
    pub fn boundary_image(&self) -> &BinaryMask {
        self.contour_images.last().expect("stack has at least one scale")
    }
}

pub fn building_mask(stack: &TophatStack) -> BinaryMask {
    stack.building_mask().clone()
}

pub fn boundary_contours(stack: &TophatStack) -> Vec<Contour> {
    stack.boundary_contours().to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Dims;

    fn block_scene(dims: Dims, blocks: &[(usize, usize, usize, usize, f64)]) -> Heightfield {
        Heightfield::from_fn(dims, |x, y| {
            blocks
                .iter()
                .find(|&&(x0, y0, w, h, _)| x >= x0 && x < x0 + w && y >= y0 && y < y0 + h)
                .map_or(0.0, |b| b.4)
        })
        .unwrap()
    }

    /// Opening computed by scanning every window that covers each pixel.
    fn brute_tophat(f: &Heightfield, se_size: usize) -> Vec<f64> {
        let dims = f.dims();
        let h = (se_size / 2) as i64;
        let win_min = |cx: i64, cy: i64| {
            let mut m = f64::INFINITY;
            for y in (cy - h)..=(cy + h) {
                for x in (cx - h)..=(cx + h) {
                    if dims.contains(x, y) {
                        m = m.min(f.get(x as usize, y as usize));
                    }
                }
            }
            m
        };
        let mut out = Vec::new();
        for y in 0..dims.height as i64 {
            for x in 0..dims.width as i64 {
                let mut open = f64::NEG_INFINITY;
                for cy in (y - h)..=(y + h) {
                    for cx in (x - h)..=(x + h) {
                        if dims.contains(cx, cy) {
                            open = open.max(win_min(cx, cy));
                        }
                    }
                }
                out.push(f.get(x as usize, y as usize) - open);
            }
        }
        out
    }

    #[test]
    fn constant_field_has_zero_response() {
        let f = Heightfield::filled(Dims::new(30, 20), 12.0).unwrap();
        assert!(white_tophat(&f, 11).cells().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn small_block_matches_brute_force() {
        let dims = Dims::new(40, 40);
        let f = block_scene(dims, &[(10, 12, 8, 8, 10.0)]);
        for se in [21, 5] {
            let fast = white_tophat(&f, se);
            assert_eq!(fast.cells(), brute_tophat(&f, se).as_slice(), "se={se}");
        }
        let big = white_tophat(&f, 21);
        let small = white_tophat(&f, 5);
        for y in 0..40 {
            for x in 0..40 {
                let inside = (10..18).contains(&x) && (12..20).contains(&y);
                assert_eq!(big.get(x, y), if inside { 10.0 } else { 0.0 });
                if inside {
                    assert_eq!(small.get(x, y), 0.0);
                }
            }
        }
    }

    #[test]
    fn response_is_non_negative_and_bounded() {
        let dims = Dims::new(32, 24);
        let f = Heightfield::from_fn(dims, |x, y| ((x * 7 + y * 13) % 11) as f64 * 0.7 - 2.0).unwrap();
        let lo = f.min_value().unwrap();
        for se in [3, 8, 20] {
            let r = white_tophat(&f, se);
            for (i, &v) in r.cells().iter().enumerate() {
                assert!(v >= -1e-9);
                assert!(v <= f.cells()[i] - lo + 1e-9);
            }
        }
    }

    #[test]
    fn default_stack_has_forty_scales() {
        let p = TophatParams::default();
        let s = p.scales();
        assert_eq!(s.len(), 40);
        assert_eq!((s[0], s[39]), (10, 400));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn flat_field_gives_empty_stack() {
        let f = Heightfield::filled(Dims::new(64, 64), 3.0).unwrap();
        let stack = build_stack(&f, &TophatParams::default()).unwrap();
        assert_eq!(stack.len(), 40);
        assert!(stack.cumulative_masks.iter().all(BinaryMask::is_empty));
        assert!(stack.contour_images.iter().all(BinaryMask::is_empty));
        assert!(building_mask(&stack).is_empty());
        assert!(boundary_contours(&stack).is_empty());
    }

    #[test]
    fn blocks_appear_at_their_scale() {
        let dims = Dims::new(512, 512);
        let f = block_scene(dims, &[(40, 40, 8, 8, 10.0), (250, 250, 100, 100, 10.0)]);
        let stack = build_stack(&f, &TophatParams::default()).unwrap();
        let small_in = |m: &BinaryMask| m.get(44, 44);
        let large_in = |m: &BinaryMask| m.get(300, 300);
        for (i, (&s, m)) in stack.scales.iter().zip(&stack.cumulative_masks).enumerate() {
            // scale s uses a (2*(s/2)+1)-wide window
            let window = 2 * (s / 2) + 1;
            assert!(small_in(m), "small block missing at scale {s}");
            assert_eq!(large_in(m), window > 100, "large block at scale {s}");
            if i > 0 {
                assert!(stack.cumulative_masks[i - 1].is_subset_of(m));
            }
            assert!(stack.contour_images[i].is_subset_of(m));
        }
        // footprint recovered exactly
        let expect = BinaryMask::from_fn(dims, |x, y| {
            ((40..48).contains(&x) && (40..48).contains(&y)) || ((250..350).contains(&x) && (250..350).contains(&y))
        });
        assert_eq!(building_mask(&stack), expect);
        let contours = boundary_contours(&stack);
        assert_eq!(contours.len(), 2);
        assert_eq!(contours[0].len(), 28);
        assert_eq!(contours[1].len(), 396);
    }

    #[test]
    fn single_scale_stack_is_thresholded_tophat() {
        let dims = Dims::new(48, 48);
        let f = block_scene(dims, &[(5, 5, 6, 6, 4.0), (20, 20, 15, 10, 1.0)]);
        let params = TophatParams {
            scale_min: 20,
            scale_max: 20,
            scale_step: 10,
            height_threshold: 2.5,
        };
        let stack = build_stack(&f, &params).unwrap();
        assert_eq!(stack.len(), 1);
        let expect = threshold(&white_tophat(&f, 20), 2.5);
        assert_eq!(stack.building_mask(), &expect);
    }

    #[test]
    fn invalid_params_rejected() {
        let f = Heightfield::filled(Dims::new(4, 4), 0.0).unwrap();
        let bad = TophatParams {
            scale_min: 0,
            ..Default::default()
        };
        assert!(build_stack(&f, &bad).is_err());
        let bad = TophatParams {
            height_threshold: 0.0,
            ..Default::default()
        };
        assert!(build_stack(&f, &bad).is_err());
    }
}
