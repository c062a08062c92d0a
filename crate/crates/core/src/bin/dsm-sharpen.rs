use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsm_sharpen::pipeline::{self, Method, PipelineConfig};

#[derive(Parser)]
#[command(name = "dsm-sharpen", version, about = "Sharpen building boundaries in a DSM with orthophoto lines")]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    verbose: bool,
    #[arg(long, global = true)]
    dsm: Option<PathBuf>,
    #[arg(long, global = true)]
    ortho: Option<PathBuf>,
    #[arg(long, global = true)]
    truth: Option<PathBuf>,
    #[arg(long, global = true)]
    segments: Option<PathBuf>,
    #[arg(long, global = true)]
    scene: Option<PathBuf>,
    /// Override any config key, e.g. `--set tophat.scale_max=200`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-scale tophat building mask and boundary image.
    ExtractMask {
        /// Also write every cumulative mask and contour image.
        #[arg(long)]
        stack: bool,
    },
    /// Orthophoto line segments, filtered to DSM boundaries.
    DetectLines,
    /// Sharpen the DSM with the filtered segments.
    Sharpen {
        #[arg(long, value_parser = ["graphcut", "planefit"])]
        method: String,
    },
    /// RMSE of the sharpened DSMs against the truth.
    Evaluate,
    /// Write a synthetic scene (truth, smeared DSM, orthophoto).
    Synth,
    /// Every stage in order.
    RunAll,
}

fn build_config(cli: &Cli) -> dsm_sharpen::Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    for (slot, flag) in [
        (&mut cfg.dsm, &cli.dsm),
        (&mut cfg.ortho, &cli.ortho),
        (&mut cfg.truth, &cli.truth),
        (&mut cfg.segments, &cli.segments),
        (&mut cfg.scene, &cli.scene),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    if let Some(out) = &cli.out {
        cfg.out.clone_from(out);
    }
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    if let Command::ExtractMask { stack: true } = cli.command {
        cfg.write_stack = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> dsm_sharpen::Result<()> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::ExtractMask { .. } => pipeline::extract_mask(&cfg).map(drop),
        Command::DetectLines => pipeline::detect_lines(&cfg).map(drop),
        Command::Sharpen { method } => pipeline::sharpen(&cfg, method.parse::<Method>()?).map(drop),
        Command::Evaluate => {
            let e = pipeline::evaluate(&cfg)?;
            print!("{}", std::fs::read_to_string(cfg.out_path("rmse.csv")).unwrap_or_default());
            drop(e);
            Ok(())
        }
        Command::Synth => pipeline::synth(&cfg).map(drop),
        Command::RunAll => {
            let summary = pipeline::run_all(&cfg)?;
            if summary.evaluation.is_some() {
                print!("{}", std::fs::read_to_string(cfg.out_path("rmse.csv")).unwrap_or_default());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
