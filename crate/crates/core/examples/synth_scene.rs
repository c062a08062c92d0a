//! Writes a synthetic scene (truth, smeared DSM, orthophoto) to a directory.
//!
//! `cargo run --example synth_scene -- [out_dir]`

use std::path::PathBuf;

use dsm_sharpen::raster::{self, Dims};
use dsm_sharpen::synth::{self, Building, SceneSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("synth_scene"));
    std::fs::create_dir_all(&out)?;

    let mut tilted = Building::new(150.0, 40.0, 60.0, 40.0, 14.0);
    tilted.rotation_deg = 20.0;
    let spec = SceneSpec {
        dims: Dims::new(256, 256),
        buildings: vec![Building::new(30.0, 120.0, 90.0, 70.0, 9.0), tilted],
        seed: 7,
        ..SceneSpec::default()
    };
    let scene = synth::generate(&spec)?;
    raster::save_heightfield(&scene.truth, out.join("truth.asc"))?;
    raster::save_heightfield(&scene.smeared, out.join("dsm.asc"))?;
    raster::save_image(&scene.ortho, out.join("ortho.pgm"))?;
    println!("scene written to {}", out.display());
    Ok(())
}
