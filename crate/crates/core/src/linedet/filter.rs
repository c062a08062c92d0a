use log::warn;

use super::LineSegment;
use crate::error::{Error, Result};
use crate::raster::{dilate_mask, BinaryMask, Dims};
use crate::tophat::TophatStack;

/// Buffer radius around DSM boundaries for segment filtering.
pub const DEFAULT_BUFFER_RADIUS: usize = 5;
/// Buffer radius around contour images for width estimation.
pub const DEFAULT_OVERLAP_RADIUS: usize = 2;

/// `(covered, total)` raster pixels of the segment on `buffer`.
/// Off-raster pixels count toward the total only.
pub fn coverage_count(segment: &LineSegment, buffer: &BinaryMask) -> (usize, usize) {
    let pixels = segment.raster_pixels();
    let covered = pixels.iter().filter(|&&(x, y)| buffer.get_signed(x, y)).count();
    (covered, pixels.len())
}

/// Strictly more than half of the raster pixels lie on the buffer.
fn mostly_covered(segment: &LineSegment, buffer: &BinaryMask) -> bool {
    let (covered, total) = coverage_count(segment, buffer);
    2 * covered > total
}

/// Keeps segments with more than half of their pixels inside the
/// `buffer_radius` buffer around `boundary_mask`. Input order is preserved.
pub fn filter_segments(segments: &[LineSegment], boundary_mask: &BinaryMask, buffer_radius: usize) -> Vec<LineSegment> {
    let buffer = dilate_mask(boundary_mask, buffer_radius);
    segments
        .iter()
        .filter(|s| mostly_covered(s, &buffer))
        .copied()
        .collect()
}

/// 1-based index of the first contour image whose buffer covers the segment.
pub fn estimate_width(segment: &LineSegment, stack: &TophatStack, overlap_radius: usize) -> Result<u32> {
    stack
        .contour_images
        .iter()
        .position(|img| mostly_covered(segment, &dilate_mask(img, overlap_radius)))
        .map(|i| i as u32 + 1)
        .ok_or(Error::UnmatchedSegment)
}

/// Sets `width_index` on every segment, dropping unmatched ones with a
/// warning. Contour buffers are computed once for the whole batch.
pub fn assign_widths(segments: &[LineSegment], stack: &TophatStack, overlap_radius: usize) -> Vec<LineSegment> {
    let buffers: Vec<BinaryMask> = stack
        .contour_images
        .iter()
        .map(|img| dilate_mask(img, overlap_radius))
        .collect();
    segments
        .iter()
        .filter_map(|s| match buffers.iter().position(|b| mostly_covered(s, b)) {
            Some(i) => Some(LineSegment {
                width_index: Some(i as u32 + 1),
                ..*s
            }),
            None => {
                warn!(
                    "dropping segment ({:.1},{:.1})-({:.1},{:.1}): no contour image overlaps it",
                    s.p1.x, s.p1.y, s.p2.x, s.p2.y
                );
                None
            }
        })
        .collect()
}

/// Bresenham rasterization of every segment, clipped to the raster.
pub fn rasterize_segments(segments: &[LineSegment], dims: Dims) -> BinaryMask {
    let mut mask = BinaryMask::new(dims);
    for s in segments {
        for (x, y) in s.raster_pixels() {
            if dims.contains(x, y) {
                mask.set(x as usize, y as usize, true);
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linedet::Point;
    use crate::raster::{Dims, Heightfield};
    use crate::tophat::{build_stack, TophatParams};
    use proptest::prelude::*;

    fn seg(x1: f64, y1: f64, x2: f64, y2: f64) -> LineSegment {
        LineSegment::new(Point::new(x1, y1), Point::new(x2, y2))
    }

    #[test]
    fn segment_inside_buffer_is_kept() {
        let dims = Dims::new(30, 30);
        let mut boundary = BinaryMask::new(dims);
        for x in 0..30 {
            boundary.set(x, 10, true);
        }
        let s = seg(2.0, 12.0, 25.0, 12.0);
        assert_eq!(filter_segments(&[s], &boundary, 5), vec![s]);
        assert!(filter_segments(&[seg(2.0, 20.0, 25.0, 20.0)], &boundary, 5).is_empty());
    }

    #[test]
    fn exactly_half_is_removed() {
        let dims = Dims::new(20, 5);
        // buffer covers columns 0..5 of row 2; segment walks columns 0..10
        let boundary = BinaryMask::from_fn(dims, |x, y| y == 2 && x < 5);
        let s = seg(0.0, 2.0, 9.0, 2.0);
        assert_eq!(coverage_count(&s, &boundary), (5, 10));
        assert!(filter_segments(&[s], &boundary, 0).is_empty());
        // one more pixel tips it over
        let boundary = BinaryMask::from_fn(dims, |x, y| y == 2 && x < 6);
        assert_eq!(filter_segments(&[s], &boundary, 0), vec![s]);
    }

    proptest! {
        #[test]
        fn filter_matches_pixel_recount(
            bits in proptest::collection::vec(prop::bool::weighted(0.1), 32 * 32),
            coords in proptest::collection::vec((0.0f64..31.0, 0.0f64..31.0, 0.0f64..31.0, 0.0f64..31.0), 1..12),
            radius in 0usize..4,
        ) {
            let dims = Dims::new(32, 32);
            let boundary = BinaryMask::from_bits(dims, bits).unwrap();
            let segs: Vec<LineSegment> = coords.iter().map(|&(a, b, c, d)| seg(a, b, c, d)).collect();
            let kept = filter_segments(&segs, &boundary, radius);
            // brute-force: per pixel, search the Chebyshev neighbourhood directly
            let near = |x: i64, y: i64| {
                (-(radius as i64)..=radius as i64).any(|dy| {
                    (-(radius as i64)..=radius as i64).any(|dx| boundary.get_signed(x + dx, y + dy))
                })
            };
            let expect: Vec<LineSegment> = segs.iter().filter(|s| {
                let px = s.raster_pixels();
                let n = px.iter().filter(|&&(x, y)| near(x, y)).count();
                n * 2 > px.len()
            }).copied().collect();
            prop_assert_eq!(&kept, &expect);
            let wider = filter_segments(&segs, &boundary, radius + 1);
            for s in &kept {
                prop_assert!(wider.contains(s));
            }
        }
    }

    fn two_building_stack() -> TophatStack {
        let dims = Dims::new(160, 100);
        let f = Heightfield::from_fn(dims, |x, y| {
            if (10..16).contains(&x) && (10..40).contains(&y) {
                8.0
            } else if (40..140).contains(&x) && (5..95).contains(&y) {
                6.0
            } else {
                0.0
            }
        })
        .unwrap();
        // scales 7, 17, ..., 397 -> window of 7 px at index 1
        build_stack(
            &f,
            &TophatParams {
                scale_min: 7,
                scale_max: 397,
                scale_step: 10,
                height_threshold: 2.5,
            },
        )
        .unwrap()
    }

    #[test]
    fn width_index_tracks_building_size() {
        let stack = two_building_stack();
        assert_eq!(stack.len(), 40);
        // left edge of the 6-px-wide building lies on contour image 1
        let thin = seg(10.0, 12.0, 10.0, 37.0);
        assert_eq!(estimate_width(&thin, &stack, 2).unwrap(), 1);
        // the 90x100 building first appears once the window exceeds 90 px
        let wide = seg(40.0, 20.0, 40.0, 80.0);
        let idx = estimate_width(&wide, &stack, 2).unwrap();
        let window = |s: usize| 2 * (s / 2) + 1;
        assert!(window(stack.scales[idx as usize - 1]) > 90);
        assert!(window(stack.scales[idx as usize - 2]) <= 90);
        // every later cumulative region also covers it
        for m in &stack.cumulative_masks[idx as usize - 1..] {
            assert!(mostly_covered(&wide, &dilate_mask(m, 2)));
        }
        let far = seg(150.0, 98.0, 159.0, 98.0);
        assert!(matches!(estimate_width(&far, &stack, 2), Err(Error::UnmatchedSegment)));
        let tagged = assign_widths(&[thin, far, wide], &stack, 2);
        assert_eq!(tagged.len(), 2);
        assert_eq!(tagged[0].width_index, Some(1));
        assert_eq!(tagged[1].width_index, Some(idx));
    }

    #[test]
    fn last_contour_image_gives_index_forty() {
        // a 390x390 building is only removed by the last, 397-px element
        let dims = Dims::new(420, 420);
        let f = Heightfield::from_fn(dims, |x, y| {
            if (15..405).contains(&x) && (15..405).contains(&y) {
                5.0
            } else {
                0.0
            }
        })
        .unwrap();
        let params = TophatParams {
            scale_min: 7,
            scale_max: 397,
            scale_step: 10,
            height_threshold: 2.5,
        };
        let stack = build_stack(&f, &params).unwrap();
        let s = seg(15.0, 50.0, 15.0, 300.0);
        assert_eq!(estimate_width(&s, &stack, 2).unwrap(), 40);
    }
}
