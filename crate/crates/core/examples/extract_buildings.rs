//! Multi-scale tophat on a smeared DSM: building mask and boundary contours.

use dsm_sharpen::raster::Dims;
use dsm_sharpen::synth::{self, Building, SceneSpec};
use dsm_sharpen::tophat::{self, TophatParams};

fn main() -> dsm_sharpen::Result<()> {
    let spec = SceneSpec {
        dims: Dims::new(200, 200),
        buildings: vec![
            Building::new(20.0, 20.0, 60.0, 40.0, 8.0),
            Building::new(110.0, 90.0, 70.0, 90.0, 15.0),
            Building::new(30.0, 140.0, 8.0, 12.0, 4.0),
        ],
        ..SceneSpec::default()
    };
    let scene = synth::generate(&spec)?;
    let stack = tophat::build_stack(&scene.smeared, &TophatParams::default())?;

    println!("{} scales, {} building pixels", stack.len(), stack.building_mask().count());
    for (k, c) in stack.boundary_contours().iter().enumerate() {
        let first = stack
            .contour_images
            .iter()
            .position(|img| c.points.iter().any(|p| img.get(p.x, p.y)))
            .map_or(0, |i| i + 1);
        println!("contour {k}: {} points, first seen in contour image {first}", c.points.len());
    }
    Ok(())
}
