//! The whole pipeline from a scene description, artifacts on disk.
//!
//! `cargo run --example run_all_pipeline -- [out_dir]`

use std::path::PathBuf;

use dsm_sharpen::pipeline::{self, PipelineConfig};

const SCENE: &str = "\
width = 192
height = 192
blur_sigma = 2
seed = 3
building = 30 30 70 50 9
building = 110 100 60 60 14 15
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("run_all"));
    std::fs::create_dir_all(&out)?;
    let scene = out.join("scene.txt");
    std::fs::write(&scene, SCENE)?;

    let cfg = PipelineConfig::from_text(&format!("scene = {}\nout = {}\n", scene.display(), out.display()))?;
    let summary = pipeline::run_all(&cfg)?;
    println!("{} segments kept", summary.lines.filtered.len());
    print!("{}", std::fs::read_to_string(cfg.out_path("rmse.csv")).unwrap_or_default());
    Ok(())
}
