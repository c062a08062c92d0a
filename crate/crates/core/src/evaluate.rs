//! Accuracy of a DSM against a reference surface: whole-image and
//! boundary-buffer RMSE, RMSE as a function of buffer width, and elevation
//! profiles along a line.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linedet::LineSegment;
use crate::raster::{dilate_mask, BinaryMask, Heightfield};

pub const DEFAULT_WIDTHS: [usize; 3] = [5, 10, 20];

/// Resamples `moving` onto `reference`'s grid by bilinear interpolation.
/// Cells whose centre falls outside `moving` become nodata.
pub fn resample_to(reference: &Heightfield, moving: &Heightfield) -> Result<Heightfield> {
    let (rx0, ry0, rx1, ry1) = reference.extent();
    let (mx0, my0, mx1, my1) = moving.extent();
    if rx0 >= mx1 || mx0 >= rx1 || ry0 >= my1 || my0 >= ry1 {
        return Err(Error::DisjointExtents);
    }
    if reference.dims() == moving.dims() && reference.cell_size == moving.cell_size && reference.origin == moving.origin {
        let cells = moving
            .cells()
            .iter()
            .map(|&v| if moving.is_nodata(v) { reference.nodata } else { v })
            .collect();
        return reference.with_cells(cells);
    }
    let dims = reference.dims();
    let (w, h) = (moving.width() as f64, moving.height() as f64);
    let mut cells = Vec::with_capacity(dims.len());
    for row in 0..dims.height {
        let wy = ry1 - (row as f64 + 0.5) * reference.cell_size;
        let py = (my1 - wy) / moving.cell_size - 0.5;
        for col in 0..dims.width {
            let wx = rx0 + (col as f64 + 0.5) * reference.cell_size;
            let px = (wx - mx0) / moving.cell_size - 0.5;
            let inside = px >= -0.5 && px < w - 0.5 && py >= -0.5 && py < h - 0.5;
            let v = if inside { moving.sample_bilinear(px, py) } else { None };
            cells.push(v.unwrap_or(reference.nodata));
        }
    }
    reference.with_cells(cells)
}

fn check_same_grid(a: &Heightfield, b: &Heightfield) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Root mean squared difference over cells in `scope` (all cells when
/// `None`) where both fields have data.
pub fn rmse(computed: &Heightfield, truth: &Heightfield, scope: Option<&BinaryMask>) -> Result<f64> {
    Ok(rmse_count(computed, truth, scope)?.0)
}

fn rmse_count(computed: &Heightfield, truth: &Heightfield, scope: Option<&BinaryMask>) -> Result<(f64, usize)> {
    check_same_grid(computed, truth)?;
    if let Some(s) = scope {
        if s.dims() != computed.dims() {
            return Err(Error::DimensionMismatch("scope mask differs from the grid".into()));
        }
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, (&c, &t)) in computed.cells().iter().zip(truth.cells()).enumerate() {
        if scope.is_some_and(|s| !s.bits()[i]) || computed.is_nodata(c) || truth.is_nodata(t) {
            continue;
        }
        sum += (c - t) * (c - t);
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyScope);
    }
    Ok(((sum / n as f64).sqrt(), n))
}

/// Two-sided Chebyshev buffers around the boundary, one per width.
pub fn boundary_scopes(boundary_mask: &BinaryMask, widths: &[usize]) -> BTreeMap<usize, BinaryMask> {
    widths.iter().map(|&w| (w, dilate_mask(boundary_mask, w))).collect()
}

/// RMSE inside the boundary buffer of every width `1..=max_width`.
pub fn sweep(computed: &Heightfield, truth: &Heightfield, boundary_mask: &BinaryMask, max_width: usize) -> Result<Vec<(usize, f64)>> {
    if max_width == 0 {
        return Err(Error::InvalidParam("max_width must be at least 1".into()));
    }
    (1..=max_width)
        .map(|w| Ok((w, rmse(computed, truth, Some(&dilate_mask(boundary_mask, w)))?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub whole_image: f64,
    pub per_buffer: BTreeMap<usize, f64>,
    /// Counted cells per scope: `"whole"` and `"buf<w>"`.
    pub pixel_counts: BTreeMap<String, usize>,
}

pub fn rmse_report(computed: &Heightfield, truth: &Heightfield, boundary_mask: &BinaryMask, widths: &[usize]) -> Result<RmseReport> {
    let (whole_image, n) = rmse_count(computed, truth, None)?;
    let mut pixel_counts = BTreeMap::from([("whole".to_string(), n)]);
    let mut per_buffer = BTreeMap::new();
    for (w, scope) in boundary_scopes(boundary_mask, widths) {
        let (r, n) = rmse_count(computed, truth, Some(&scope))?;
        per_buffer.insert(w, r);
        pixel_counts.insert(format!("buf{w}"), n);
    }
    Ok(RmseReport {
        whole_image,
        per_buffer,
        pixel_counts,
    })
}

/// Table with one row per `(region, method, report)`:
/// `region,method,whole,buf5,buf10,buf20` in meters to 3 decimals.
pub fn write_rmse_table(rows: &[(String, String, RmseReport)]) -> String {
    let widths: Vec<usize> = rows
        .first()
        .map(|r| r.2.per_buffer.keys().copied().collect())
        .unwrap_or_else(|| DEFAULT_WIDTHS.to_vec());
    let mut s = String::from("region,method,whole");
    for w in &widths {
        let _ = write!(s, ",buf{w}");
    }
    s.push('\n');
    for (region, method, r) in rows {
        let _ = write!(s, "{region},{method},{:.3}", r.whole_image);
        for w in &widths {
            match r.per_buffer.get(w) {
                Some(v) => {
                    let _ = write!(s, ",{v:.3}");
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

pub fn write_sweep(rows: &[(usize, f64)]) -> String {
    let mut s = String::from("width,rmse\n");
    for (w, r) in rows {
        let _ = writeln!(s, "{w},{r:.6}");
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub anchor: LineSegment,
    pub names: Vec<String>,
    /// `(distance along the anchor, elevation per variant)`; nodata is NaN.
    pub samples: Vec<(f64, Vec<f64>)>,
    /// Per-variant RMSE against the truth variant, when one was named.
    pub rmse: Option<Vec<f64>>,
}

/// Samples every variant at stations `0, step, 2·step, …` along the anchor.
pub fn cross_section(
    variants: &[(&str, &Heightfield)],
    anchor: &LineSegment,
    step: f64,
    truth_index: Option<usize>,
) -> Result<CrossSection> {
    if !(step > 0.0) {
        return Err(Error::InvalidParam(format!("step must be positive, got {step}")));
    }
    let Some(first) = variants.first() else {
        return Err(Error::InvalidParam("no variants to sample".into()));
    };
    let dims = first.1.dims();
    for (_, v) in variants {
        if v.dims() != dims {
            return Err(Error::DimensionMismatch("cross-section variants differ in size".into()));
        }
    }
    if truth_index.is_some_and(|t| t >= variants.len()) {
        return Err(Error::InvalidParam("truth index out of range".into()));
    }
    let inside = |x: f64, y: f64| x >= 0.0 && y >= 0.0 && x <= (dims.width - 1) as f64 && y <= (dims.height - 1) as f64;
    if !inside(anchor.p1.x, anchor.p1.y) || !inside(anchor.p2.x, anchor.p2.y) {
        return Err(Error::AnchorOutsideRaster);
    }
    let len = anchor.length();
    let stations = (len / step).floor() as usize + 1;
    let (ux, uy) = if len > 0.0 {
        ((anchor.p2.x - anchor.p1.x) / len, (anchor.p2.y - anchor.p1.y) / len)
    } else {
        (0.0, 0.0)
    };
    let samples: Vec<(f64, Vec<f64>)> = (0..stations)
        .map(|k| {
            let d = k as f64 * step;
            let (x, y) = (anchor.p1.x + d * ux, anchor.p1.y + d * uy);
            let row = variants
                .iter()
                .map(|(_, v)| v.sample_bilinear(x, y).unwrap_or(f64::NAN))
                .collect();
            (d, row)
        })
        .collect();
    let rmse = truth_index.map(|t| {
        (0..variants.len())
            .map(|j| {
                let (mut sum, mut n) = (0.0, 0usize);
                for (_, row) in &samples {
                    let diff = row[j] - row[t];
                    if diff.is_finite() {
                        sum += diff * diff;
                        n += 1;
                    }
                }
                if n == 0 {
                    f64::NAN
                } else {
                    (sum / n as f64).sqrt()
                }
            })
            .collect()
    });
    Ok(CrossSection {
        anchor: *anchor,
        names: variants.iter().map(|(n, _)| n.to_string()).collect(),
        samples,
        rmse,
    })
}

/// `station,<variant>,...`, nodata as an empty field, followed by an
/// `rmse` row when a truth variant was given.
pub fn write_cross_section(cs: &CrossSection) -> String {
    let mut s = String::from("station");
    for n in &cs.names {
        let _ = write!(s, ",{n}");
    }
    s.push('\n');
    let fmt = |s: &mut String, v: f64| {
        if v.is_finite() {
            let _ = write!(s, ",{v:.4}");
        } else {
            s.push(',');
        }
    };
    for (d, row) in &cs.samples {
        let _ = write!(s, "{d:.2}");
        for &v in row {
            fmt(&mut s, v);
        }
        s.push('\n');
    }
    if let Some(r) = &cs.rmse {
        s.push_str("rmse");
        for &v in r {
            fmt(&mut s, v);
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linedet::Point;
    use crate::raster::{Dims, DEFAULT_NODATA};
    use proptest::prelude::*;

    fn field(w: usize, h: usize, cells: Vec<f64>) -> Heightfield {
        Heightfield::from_cells(Dims::new(w, h), cells).unwrap()
    }

    #[test]
    fn rmse_examples() {
        let t = field(2, 2, vec![0.0; 4]);
        assert_eq!(rmse(&t, &t, None).unwrap(), 0.0);
        let plus = field(2, 2, vec![1.0; 4]);
        assert_eq!(rmse(&plus, &t, None).unwrap(), 1.0);
        let c = field(2, 2, vec![0.0, 1.0, 2.0, 3.0]);
        assert!((rmse(&c, &t, None).unwrap() - (14.0f64 / 4.0).sqrt()).abs() < 1e-12);
        assert!((rmse(&c, &t, None).unwrap() - 1.8708).abs() < 1e-4);
    }

    #[test]
    fn rmse_scope_errors() {
        let t = field(2, 2, vec![0.0; 4]);
        let empty = BinaryMask::new(Dims::new(2, 2));
        assert!(matches!(rmse(&t, &t, Some(&empty)), Err(Error::EmptyScope)));
        let holes = field(2, 2, vec![DEFAULT_NODATA; 4]);
        assert!(matches!(rmse(&holes, &t, None), Err(Error::EmptyScope)));
    }

    #[test]
    fn resample_identity_and_ramp() {
        let fine = Heightfield::new(Dims::new(8, 8), 1.0, (0.0, 0.0), DEFAULT_NODATA, (0..64).map(|i| (i % 8) as f64).collect())
            .unwrap();
        assert_eq!(resample_to(&fine, &fine).unwrap(), fine);
        let coarse = Heightfield::new(Dims::new(4, 4), 2.0, (0.0, 0.0), DEFAULT_NODATA, vec![0.0; 16]).unwrap();
        let r = resample_to(&coarse, &fine).unwrap();
        // coarse centre at world x = 2c + 1 is fine pixel coordinate 2c + 0.5
        for y in 0..4 {
            for c in 0..4 {
                assert!((r.get(c, y) - (2.0 * c as f64 + 0.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resample_nodata_and_disjoint() {
        let mut fine = Heightfield::new(Dims::new(8, 8), 1.0, (0.0, 0.0), DEFAULT_NODATA, vec![1.0; 64]).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                fine.set(x, y, DEFAULT_NODATA);
            }
        }
        let coarse = Heightfield::new(Dims::new(4, 4), 2.0, (0.0, 0.0), DEFAULT_NODATA, vec![0.0; 16]).unwrap();
        let r = resample_to(&coarse, &fine).unwrap();
        // row 0 of the raster is the top, so the hole sits top-left
        assert!(r.value(0, 0).is_none() && r.value(1, 1).is_none());
        assert_eq!(r.value(3, 3), Some(1.0));
        let far = Heightfield::new(Dims::new(4, 4), 1.0, (100.0, 100.0), DEFAULT_NODATA, vec![0.0; 16]).unwrap();
        assert!(matches!(resample_to(&far, &fine), Err(Error::DisjointExtents)));
    }

    #[test]
    fn resample_partial_overlap_is_nodata_outside() {
        let m = Heightfield::new(Dims::new(4, 4), 1.0, (0.0, 0.0), DEFAULT_NODATA, vec![2.0; 16]).unwrap();
        let r = Heightfield::new(Dims::new(4, 4), 1.0, (2.0, 0.0), DEFAULT_NODATA, vec![0.0; 16]).unwrap();
        let out = resample_to(&r, &m).unwrap();
        assert_eq!(out.value(1, 0), Some(2.0));
        assert_eq!(out.value(2, 0), None);
    }

    #[test]
    fn sweep_matches_pointwise_and_decreases() {
        let dims = Dims::new(40, 40);
        let truth = Heightfield::filled(dims, 0.0).unwrap();
        let boundary = BinaryMask::from_fn(dims, |x, y| x == 20 && (5..35).contains(&y));
        // error only within 3 px of the boundary
        let near = dilate_mask(&boundary, 3);
        let computed = Heightfield::from_fn(dims, |x, y| if near.get(x, y) { 1.0 } else { 0.0 }).unwrap();
        let s = sweep(&computed, &truth, &boundary, 20).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(s[0].1, rmse(&computed, &truth, Some(&dilate_mask(&boundary, 1))).unwrap());
        assert!(sweep(&truth, &truth, &boundary, 5).unwrap().iter().all(|r| r.1 == 0.0));
    }

    #[test]
    fn report_table_layout() {
        let dims = Dims::new(30, 30);
        let t = Heightfield::filled(dims, 0.0).unwrap();
        let boundary = BinaryMask::from_fn(dims, |x, y| x == 15 && y == 15);
        let r = rmse_report(&t, &t, &boundary, &DEFAULT_WIDTHS).unwrap();
        assert_eq!(r.pixel_counts["buf5"], 121);
        let text = write_rmse_table(&[("scene".into(), "ori".into(), r)]);
        assert_eq!(text, "region,method,whole,buf5,buf10,buf20\nscene,ori,0.000,0.000,0.000,0.000\n");
    }

    #[test]
    fn cross_section_over_a_step() {
        let dims = Dims::new(20, 5);
        let truth = Heightfield::from_fn(dims, |x, _| if x < 10 { 10.0 } else { 0.0 }).unwrap();
        let blurred = Heightfield::from_fn(dims, |x, _| (10.0 * (12.5 - x as f64) / 6.0).clamp(0.0, 10.0)).unwrap();
        let anchor = LineSegment::new(Point::new(2.0, 2.0), Point::new(17.0, 2.0));
        let cs = cross_section(&[("truth", &truth), ("dsm", &blurred)], &anchor, 0.5, Some(0)).unwrap();
        assert_eq!(cs.samples.len(), 31);
        assert!(cs.samples.windows(2).all(|w| w[1].0 > w[0].0));
        assert!(cs.samples.windows(2).all(|w| w[1].1[1] <= w[0].1[1]));
        assert_eq!(cs.rmse.as_ref().unwrap()[0], 0.0);
        let text = write_cross_section(&cs);
        assert!(text.starts_with("station,truth,dsm\n0.00,10.0000,10.0000\n"));
        assert!(text.lines().last().unwrap().starts_with("rmse,0.0000,"));
        let outside = LineSegment::new(Point::new(-1.0, 2.0), Point::new(5.0, 2.0));
        assert!(matches!(cross_section(&[("t", &truth)], &outside, 0.5, None), Err(Error::AnchorOutsideRaster)));
    }

    proptest! {
        #[test]
        fn scopes_nest(bits in proptest::collection::vec(proptest::bool::weighted(0.05), 24 * 24)) {
            let m = BinaryMask::from_bits(Dims::new(24, 24), bits).unwrap();
            let s = boundary_scopes(&m, &DEFAULT_WIDTHS);
            prop_assert!(s[&5].is_subset_of(&s[&10]) && s[&10].is_subset_of(&s[&20]));
            prop_assert_eq!(s[&5].is_empty(), m.is_empty());
        }

        #[test]
        fn rmse_is_symmetric(a in proptest::collection::vec(-5.0f64..5.0, 16), b in proptest::collection::vec(-5.0f64..5.0, 16)) {
            let (fa, fb) = (field(4, 4, a), field(4, 4, b));
            prop_assert_eq!(rmse(&fa, &fb, None).unwrap(), rmse(&fb, &fa, None).unwrap());
        }
    }
}
