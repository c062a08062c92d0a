//! RMSE report and buffer-width sweep of a smeared DSM against its truth.

use dsm_sharpen::evaluate::{self, DEFAULT_WIDTHS};
use dsm_sharpen::raster::{rasterize_contours, Dims};
use dsm_sharpen::synth::{self, Building, SceneSpec};
use dsm_sharpen::tophat::{self, TophatParams};

fn main() -> dsm_sharpen::Result<()> {
    let spec = SceneSpec {
        dims: Dims::new(128, 128),
        buildings: vec![Building::new(30.0, 30.0, 60.0, 50.0, 12.0)],
        ..SceneSpec::default()
    };
    let scene = synth::generate(&spec)?;
    let stack = tophat::build_stack(&scene.smeared, &TophatParams::default())?;
    let boundary = rasterize_contours(stack.boundary_contours(), scene.smeared.dims());

    let report = evaluate::rmse_report(&scene.smeared, &scene.truth, &boundary, &DEFAULT_WIDTHS)?;
    print!("{}", evaluate::write_rmse_table(&[("scene".into(), "ori".into(), report)]));
    let rows = evaluate::sweep(&scene.smeared, &scene.truth, &boundary, 10)?;
    print!("{}", evaluate::write_sweep(&rows));
    Ok(())
}
