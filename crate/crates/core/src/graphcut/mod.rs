//! Boundary adjustment by offset labeling.
//!
//! Every boundary pixel gets an integer offset from an 11×11 grid. The
//! labeling minimizes a data term (is the shifted pixel on a detected
//! line?) plus a smoothness term over nearby contour pixels. The labels
//! are then spread to a dense offset field and the DSM is warped by it.

mod expansion;
mod field;
mod maxflow;
mod problem;

use std::fmt::Write as _;

pub use expansion::{minimize, minimize_traced, MinimizeReport};
pub use field::{idw_estimate, interpolate_offsets, warp_dsm, Anchor, InterpolationParams, OffsetField};
pub use maxflow::MaxFlow;
pub use problem::{
    build_problem, build_problem_with, data_cost, energy, label_set, smooth_cost, ContourProblem, ContourSpan,
    CostModel, Labeling, OffsetLabel,
};

use crate::error::{Error, Result};
use crate::linedet::LineSegment;
use crate::raster::{rasterize_contours, Contour, Heightfield};

/// Everything produced by [`adjust`].
#[derive(Debug, Clone)]
pub struct Adjustment {
    pub dsm: Heightfield,
    pub problem: Option<ContourProblem>,
    pub report: Option<MinimizeReport>,
    pub field: OffsetField,
}

/// Full graph-cut correction. With no contours the DSM is returned as is.
pub fn adjust(
    dsm: &Heightfield,
    contours: &[Contour],
    segments: &[LineSegment],
    costs: CostModel,
    interp: &InterpolationParams,
) -> Result<Adjustment> {
    let dims = dsm.dims();
    let problem = match build_problem_with(contours, segments, dims, costs) {
        Ok(p) => p,
        Err(Error::NothingToAdjust) => {
            return Ok(Adjustment {
                dsm: dsm.clone(),
                problem: None,
                report: None,
                field: OffsetField::zeros(dims),
            })
        }
        Err(e) => return Err(e),
    };
    let report = minimize_traced(&problem);
    log::debug!(
        "graph cut: {} points, energy {} -> {} in {} sweeps",
        problem.len(),
        report.energy_trace[0],
        report.energy(),
        report.sweeps
    );
    let boundary = rasterize_contours(contours, dims);
    let field = interpolate_offsets(&problem, &report.labeling, &boundary, dims, interp)?;
    let out = warp_dsm(dsm, &field)?;
    Ok(Adjustment {
        dsm: out,
        problem: Some(problem),
        report: Some(report),
        field,
    })
}

/// Labeling dump: `x,y,dx,dy`, one row per boundary point.
pub fn write_labeling(problem: &ContourProblem, labeling: &Labeling) -> String {
    let mut s = String::from("x,y,dx,dy\n");
    for (p, l) in problem.points.iter().zip(&labeling.labels) {
        let _ = writeln!(s, "{},{},{},{}", p.x, p.y, l.dx, l.dy);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linedet::Point;
    use crate::raster::{trace_contours, BinaryMask, Dims};

    #[test]
    fn no_contours_leaves_dsm_untouched() {
        let dsm = Heightfield::filled(Dims::new(10, 10), 3.0).unwrap();
        let a = adjust(&dsm, &[], &[], CostModel::default(), &InterpolationParams::default()).unwrap();
        assert_eq!(a.dsm, dsm);
        assert!(a.problem.is_none());
    }

    #[test]
    fn shifted_boundary_moves_toward_lines() {
        let dims = Dims::new(60, 60);
        // DSM block 20..40, lines at the block moved right by 3
        let dsm = Heightfield::from_fn(dims, |x, y| if (20..40).contains(&x) && (20..40).contains(&y) { 10.0 } else { 0.0 })
            .unwrap();
        let mask = BinaryMask::from_fn(dims, |x, y| dsm.get(x, y) > 5.0);
        let contours = trace_contours(&mask);
        let seg = |a: (f64, f64), b: (f64, f64)| LineSegment::new(Point::new(a.0, a.1), Point::new(b.0, b.1));
        let segments = [
            seg((23.0, 20.0), (42.0, 20.0)),
            seg((42.0, 20.0), (42.0, 39.0)),
            seg((42.0, 39.0), (23.0, 39.0)),
            seg((23.0, 39.0), (23.0, 20.0)),
        ];
        let a = adjust(&dsm, &contours, &segments, CostModel::default(), &InterpolationParams::default()).unwrap();
        let report = a.report.unwrap();
        assert!(report.energy() < report.energy_trace[0]);
        // any dx in 1..=5 puts every point in the buffer, so both
        // vertical edges move right by at least one pixel
        assert!(a.dsm.get(40, 30) > 5.0);
        assert!(a.dsm.get(20, 30) < 5.0);
        let dump = write_labeling(a.problem.as_ref().unwrap(), &report.labeling);
        assert!(dump.starts_with("x,y,dx,dy\n"));
        assert_eq!(dump.lines().count(), contours.iter().map(Contour::len).sum::<usize>() + 1);
    }
}
