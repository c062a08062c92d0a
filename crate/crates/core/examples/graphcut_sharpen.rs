//! Graph-cut correction of a DSM whose building is displaced 4 px from
//! where the orthophoto sees it.

use dsm_sharpen::evaluate::rmse;
use dsm_sharpen::graphcut::{self, CostModel, InterpolationParams};
use dsm_sharpen::linedet::{self, DetectorParams};
use dsm_sharpen::raster::{grayscale, Dims};
use dsm_sharpen::synth::{self, Building, SceneSpec};
use dsm_sharpen::tophat::{self, TophatParams};

fn main() -> dsm_sharpen::Result<()> {
    let base = SceneSpec {
        dims: Dims::new(160, 160),
        boundary_blur_sigma: 1.0,
        ..SceneSpec::default()
    };
    let truth_spec = SceneSpec { buildings: vec![Building::new(40.0, 40.0, 80.0, 70.0, 10.0)], ..base.clone() };
    let shifted = SceneSpec { buildings: vec![Building::new(44.0, 40.0, 80.0, 70.0, 10.0)], ..base };
    let scene = synth::generate(&truth_spec)?;
    let dsm = synth::generate(&shifted)?.smeared;

    let stack = tophat::build_stack(&dsm, &TophatParams::default())?;
    let raw = linedet::detect_segments(&grayscale(&scene.ortho)?, &DetectorParams::default())?;
    let segments = linedet::filter_segments(&raw, stack.boundary_image(), linedet::DEFAULT_BUFFER_RADIUS);

    let adj = graphcut::adjust(&dsm, stack.boundary_contours(), &segments, CostModel::default(), &InterpolationParams::default())?;
    if let Some(report) = &adj.report {
        println!("energy {:?}", report.energy_trace);
    }
    let before = rmse(&dsm, &scene.truth, None)?;
    let after = rmse(&adj.dsm, &scene.truth, None)?;
    println!("{} segments, RMSE {before:.3} m -> {after:.3} m", segments.len());
    Ok(())
}
