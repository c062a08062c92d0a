//! Plane-fit correction of a blurred building using its orthophoto lines.

use dsm_sharpen::evaluate::rmse;
use dsm_sharpen::linedet::{self, DetectorParams};
use dsm_sharpen::planefit::{self, FitConfig};
use dsm_sharpen::raster::{grayscale, Dims};
use dsm_sharpen::synth::{self, Building, SceneSpec};
use dsm_sharpen::tophat::{self, TophatParams};

fn main() -> dsm_sharpen::Result<()> {
    let spec = SceneSpec {
        dims: Dims::new(160, 160),
        buildings: vec![Building::new(40.0, 40.0, 80.0, 70.0, 10.0)],
        boundary_blur_sigma: 2.5,
        ..SceneSpec::default()
    };
    let scene = synth::generate(&spec)?;
    let stack = tophat::build_stack(&scene.smeared, &TophatParams::default())?;
    let raw = linedet::detect_segments(&grayscale(&scene.ortho)?, &DetectorParams::default())?;
    let near = linedet::filter_segments(&raw, stack.boundary_image(), linedet::DEFAULT_BUFFER_RADIUS);
    let segments = linedet::assign_widths(&near, &stack, linedet::DEFAULT_OVERLAP_RADIUS);

    let (out, planes) = planefit::adjust_all_with_report(&scene.smeared, &segments, &FitConfig::default())?;
    print!("{}", planefit::write_planes(&planes));
    let before = rmse(&scene.smeared, &scene.truth, None)?;
    let after = rmse(&out, &scene.truth, None)?;
    println!("RMSE {before:.3} m -> {after:.3} m");
    Ok(())
}
