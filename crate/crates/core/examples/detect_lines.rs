//! Line segments in the orthophoto, kept only near DSM boundaries, with
//! their width indices.

use dsm_sharpen::linedet::{self, DetectorParams};
use dsm_sharpen::raster::{grayscale, Dims};
use dsm_sharpen::synth::{self, Building, SceneSpec};
use dsm_sharpen::tophat::{self, TophatParams};

fn main() -> dsm_sharpen::Result<()> {
    let spec = SceneSpec {
        dims: Dims::new(160, 160),
        buildings: vec![Building::new(40.0, 50.0, 70.0, 50.0, 10.0)],
        ..SceneSpec::default()
    };
    let scene = synth::generate(&spec)?;
    let stack = tophat::build_stack(&scene.smeared, &TophatParams::default())?;

    let raw = linedet::detect_segments(&grayscale(&scene.ortho)?, &DetectorParams::default())?;
    let near = linedet::filter_segments(&raw, stack.boundary_image(), linedet::DEFAULT_BUFFER_RADIUS);
    let kept = linedet::assign_widths(&near, &stack, linedet::DEFAULT_OVERLAP_RADIUS);
    println!("{} detected, {} kept", raw.len(), kept.len());
    print!("{}", linedet::write_segments(&kept)?);
    Ok(())
}
