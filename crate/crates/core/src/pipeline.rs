//! Stage drivers that read inputs from disk and write every artifact to
//! an output directory.
//!
//! | stage          | writes                                                        |
//! |----------------|---------------------------------------------------------------|
//! | `extract_mask` | `building_mask.pgm`, `boundary.pgm`, optionally `stack/`      |
//! | `detect_lines` | `segments_raw.csv`, `segments_filtered.csv`                   |
//! | `sharpen`      | `dsm_graphcut.asc` + `labeling.csv`, `offset_dx.asc`, `offset_dy.asc`; or `dsm_planefit.asc` + `planes.csv` |
//! | `evaluate`     | `rmse.csv`, `sweep_<method>.csv`, optionally `cross_section.csv` |
//! | `synth`        | `truth.asc`, `dsm.asc`, `ortho.pgm`                           |

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evaluate::{self, RmseReport};
use crate::graphcut::{self, CostModel, InterpolationParams};
use crate::linedet::{self, DetectorParams, LineSegment, Point};
use crate::planefit::{self, FitConfig};
use crate::raster::{self, grayscale, Heightfield};
use crate::synth::{self, SceneSpec};
use crate::tophat::{self, TophatParams, TophatStack};

/// Splits `key = value` lines. `#` starts a comment; blank lines are
/// skipped. Returns `(line number, key, value)`.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config {
                line: i + 1,
                detail: format!("expected key = value, got {line:?}"),
            });
        };
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Graphcut,
    Planefit,
}

impl Method {
    /// Column name in the RMSE report.
    pub fn label(self) -> &'static str {
        match self {
            Method::Graphcut => "gc",
            Method::Planefit => "line",
        }
    }

    pub fn output_name(self) -> &'static str {
        match self {
            Method::Graphcut => "dsm_graphcut.asc",
            Method::Planefit => "dsm_planefit.asc",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graphcut" => Ok(Method::Graphcut),
            "planefit" => Ok(Method::Planefit),
            _ => Err(Error::InvalidParam(format!("unknown method {s:?}, expected graphcut or planefit"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dsm: Option<PathBuf>,
    pub ortho: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    /// Filtered segments for `sharpen`; defaults to the output directory's.
    pub segments: Option<PathBuf>,
    pub scene: Option<PathBuf>,
    pub out: PathBuf,
    pub write_stack: bool,
    pub tophat: TophatParams,
    pub detector: DetectorParams,
    pub buffer_radius: usize,
    pub overlap_radius: usize,
    pub fit: FitConfig,
    pub costs: CostModel,
    pub interp: InterpolationParams,
    pub eval_widths: Vec<usize>,
    pub sweep_max: usize,
    pub region: String,
    /// Cross-section anchor `x1 y1 x2 y2` in pixels.
    pub cross_section: Option<LineSegment>,
    pub cross_step: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            dsm: None,
            ortho: None,
            truth: None,
            segments: None,
            scene: None,
            out: PathBuf::from("out"),
            write_stack: false,
            tophat: TophatParams::default(),
            detector: DetectorParams::default(),
            buffer_radius: linedet::DEFAULT_BUFFER_RADIUS,
            overlap_radius: linedet::DEFAULT_OVERLAP_RADIUS,
            fit: FitConfig::default(),
            costs: CostModel::default(),
            interp: InterpolationParams::default(),
            eval_widths: evaluate::DEFAULT_WIDTHS.to_vec(),
            sweep_max: 20,
            region: "scene".into(),
            cross_section: None,
            cross_step: 0.5,
        }
    }
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        detail: format!("{key}: cannot parse {value:?}"),
    })
}

impl PipelineConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (line, k, v) in parse_key_values(text)? {
            cfg.set(line, &k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Applies one setting. `line` is reported in errors; use 0 for
    /// command-line overrides.
    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let p = PathBuf::from(value);
        match key {
            "dsm" => self.dsm = Some(p),
            "ortho" => self.ortho = Some(p),
            "truth" => self.truth = Some(p),
            "segments" => self.segments = Some(p),
            "scene" => self.scene = Some(p),
            "out" => self.out = p,
            "write_stack" => self.write_stack = parse(line, key, value)?,
            "tophat.scale_min" => self.tophat.scale_min = parse(line, key, value)?,
            "tophat.scale_max" => self.tophat.scale_max = parse(line, key, value)?,
            "tophat.scale_step" => self.tophat.scale_step = parse(line, key, value)?,
            "tophat.height_threshold" => self.tophat.height_threshold = parse(line, key, value)?,
            "lines.gradient_threshold" => self.detector.gradient_threshold = parse(line, key, value)?,
            "lines.angle_tolerance" => self.detector.angle_tolerance = parse(line, key, value)?,
            "lines.min_length" => self.detector.min_length = parse(line, key, value)?,
            "lines.min_region_pixels" => self.detector.min_region_pixels = parse(line, key, value)?,
            "lines.buffer_radius" => self.buffer_radius = parse(line, key, value)?,
            "lines.overlap_radius" => self.overlap_radius = parse(line, key, value)?,
            "planefit.width_multiplier" => self.fit.width_multiplier = parse(line, key, value)?,
            "planefit.buffer_cap" => self.fit.buffer_cap = parse(line, key, value)?,
            "planefit.min_points" => self.fit.min_points = parse(line, key, value)?,
            "planefit.feather_band" => self.fit.feather_band = parse(line, key, value)?,
            "graphcut.data_cost_hit" => self.costs.data_cost_hit = parse(line, key, value)?,
            "graphcut.data_cost_miss" => self.costs.data_cost_miss = parse(line, key, value)?,
            "graphcut.smooth_cost_near" => self.costs.smooth_cost_near = parse(line, key, value)?,
            "graphcut.smooth_cost_far" => self.costs.smooth_cost_far = parse(line, key, value)?,
            "graphcut.smooth_radius" => self.costs.smooth_radius = parse(line, key, value)?,
            "graphcut.neighbor_reach" => self.costs.neighbor_reach = parse(line, key, value)?,
            "graphcut.label_radius" => self.costs.label_radius = parse(line, key, value)?,
            "graphcut.line_buffer_radius" => self.costs.line_buffer_radius = parse(line, key, value)?,
            "graphcut.far_distance" => self.interp.far_distance = parse(line, key, value)?,
            "graphcut.neighbors" => self.interp.neighbors = parse(line, key, value)?,
            "graphcut.power" => self.interp.power = parse(line, key, value)?,
            "eval.widths" => {
                self.eval_widths = value
                    .split(',')
                    .map(|w| parse(line, key, w.trim()))
                    .collect::<Result<_>>()?
            }
            "eval.sweep_max" => self.sweep_max = parse(line, key, value)?,
            "eval.region" => self.region = value.to_string(),
            "eval.cross_section" => {
                let v: Vec<f64> = value
                    .split_whitespace()
                    .map(|t| parse(line, key, t))
                    .collect::<Result<_>>()?;
                if v.len() != 4 {
                    return Err(Error::Config {
                        line,
                        detail: "eval.cross_section needs x1 y1 x2 y2".into(),
                    });
                }
                self.cross_section = Some(LineSegment::new(Point::new(v[0], v[1]), Point::new(v[2], v[3])));
            }
            "eval.cross_step" => self.cross_step = parse(line, key, value)?,
            _ => {
                return Err(Error::Config {
                    line,
                    detail: format!("unknown key {key:?}"),
                })
            }
        }
        Ok(())
    }

    /// `key=value` override from the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| Error::Config {
            line: 0,
            detail: format!("expected key=value, got {assignment:?}"),
        })?;
        self.set(0, k.trim(), v.trim())
    }

    pub fn validate(&self) -> Result<()> {
        self.tophat.validate()?;
        self.detector.validate()?;
        self.fit.validate()?;
        self.costs.validate()?;
        if self.interp.neighbors == 0 || self.interp.far_distance == 0 || !(self.interp.power > 0.0) {
            return Err(Error::InvalidParam("interpolation parameters must be positive".into()));
        }
        if self.eval_widths.is_empty() || self.eval_widths.contains(&0) || self.sweep_max == 0 {
            return Err(Error::InvalidParam("evaluation widths must be positive".into()));
        }
        if !(self.cross_step > 0.0) {
            return Err(Error::InvalidParam("eval.cross_step must be positive".into()));
        }
        Ok(())
    }

    fn required<'a>(&self, path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| Error::InvalidParam(format!("no {what} given (set `{what}` in the config or on the command line)")))
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_out(cfg: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))
}

fn load_dsm(cfg: &PipelineConfig) -> Result<Heightfield> {
    raster::load_heightfield(cfg.required(&cfg.dsm, "dsm")?)
}

/// Builds the tophat stack of the configured DSM and writes the masks.
pub fn extract_mask(cfg: &PipelineConfig) -> Result<TophatStack> {
    let dsm = load_dsm(cfg)?;
    ensure_out(cfg)?;
    let stack = tophat::build_stack(&dsm, &cfg.tophat)?;
    log::info!(
        "{} scales, {} building pixels, {} contours",
        stack.len(),
        stack.building_mask().count(),
        stack.boundary_contours().len()
    );
    raster::save_mask(stack.building_mask(), cfg.out_path("building_mask.pgm"))?;
    raster::save_mask(stack.boundary_image(), cfg.out_path("boundary.pgm"))?;
    if cfg.write_stack {
        let dir = cfg.out_path("stack");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for (i, (mask, contours)) in stack.cumulative_masks.iter().zip(&stack.contour_images).enumerate() {
            raster::save_mask(mask, dir.join(format!("mask_{:02}.pgm", i + 1)))?;
            raster::save_mask(contours, dir.join(format!("contours_{:02}.pgm", i + 1)))?;
        }
    }
    Ok(stack)
}

/// Raw and filtered segments. The DSM's tophat stack supplies the boundary
/// buffer and the width indices.
#[derive(Debug, Clone)]
pub struct LineOutput {
    pub raw: Vec<LineSegment>,
    pub filtered: Vec<LineSegment>,
}

pub fn detect_lines(cfg: &PipelineConfig) -> Result<LineOutput> {
    let dsm = load_dsm(cfg)?;
    let ortho = raster::load_image(cfg.required(&cfg.ortho, "ortho")?)?;
    ensure_out(cfg)?;
    if ortho.dims() != dsm.dims() {
        return Err(Error::DimensionMismatch("orthophoto and DSM differ in size".into()));
    }
    let stack = tophat::build_stack(&dsm, &cfg.tophat)?;
    detect_lines_with(cfg, &ortho, &stack)
}

fn detect_lines_with(cfg: &PipelineConfig, ortho: &raster::RasterImage, stack: &TophatStack) -> Result<LineOutput> {
    let raw = linedet::detect_segments(&grayscale(ortho)?, &cfg.detector)?;
    let near = linedet::filter_segments(&raw, stack.boundary_image(), cfg.buffer_radius);
    let filtered = linedet::assign_widths(&near, stack, cfg.overlap_radius);
    log::info!("{} segments detected, {} kept", raw.len(), filtered.len());
    linedet::save_segments(&raw, cfg.out_path("segments_raw.csv"))?;
    linedet::save_segments(&filtered, cfg.out_path("segments_filtered.csv"))?;
    Ok(LineOutput { raw, filtered })
}

fn load_filtered(cfg: &PipelineConfig) -> Result<Vec<LineSegment>> {
    let path = cfg.segments.clone().unwrap_or_else(|| cfg.out_path("segments_filtered.csv"));
    linedet::load_segments(path)
}

/// Writes the sharpened DSM for `method` and its debug dumps.
pub fn sharpen(cfg: &PipelineConfig, method: Method) -> Result<Heightfield> {
    let dsm = load_dsm(cfg)?;
    let segments = load_filtered(cfg)?;
    ensure_out(cfg)?;
    let stack = match method {
        Method::Graphcut => Some(tophat::build_stack(&dsm, &cfg.tophat)?),
        Method::Planefit => None,
    };
    sharpen_with(cfg, method, &dsm, &segments, stack.as_ref())
}

fn sharpen_with(
    cfg: &PipelineConfig,
    method: Method,
    dsm: &Heightfield,
    segments: &[LineSegment],
    stack: Option<&TophatStack>,
) -> Result<Heightfield> {
    let out = match method {
        Method::Graphcut => {
            let stack = stack.expect("graph cut needs the tophat stack");
            let adj = graphcut::adjust(dsm, stack.boundary_contours(), segments, cfg.costs, &cfg.interp)?;
            let labeling = match (&adj.problem, &adj.report) {
                (Some(p), Some(r)) => graphcut::write_labeling(p, &r.labeling),
                _ => "x,y,dx,dy\n".to_string(),
            };
            write_text(&cfg.out_path("labeling.csv"), &labeling)?;
            let (fx, fy) = adj.field.to_heightfields(dsm)?;
            raster::save_heightfield(&fx, cfg.out_path("offset_dx.asc"))?;
            raster::save_heightfield(&fy, cfg.out_path("offset_dy.asc"))?;
            adj.dsm
        }
        Method::Planefit => {
            let (out, records) = planefit::adjust_all_with_report(dsm, segments, &cfg.fit)?;
            log::info!("{} side planes fitted", records.len());
            write_text(&cfg.out_path("planes.csv"), &planefit::write_planes(&records))?;
            out
        }
    };
    raster::save_heightfield(&out, cfg.out_path(method.output_name()))?;
    Ok(out)
}

/// RMSE rows in `rmse.csv` order.
#[derive(Debug, Clone)]
pub struct EvaluationOutput {
    pub rows: Vec<(String, RmseReport)>,
}

impl EvaluationOutput {
    pub fn get(&self, method: &str) -> Option<&RmseReport> {
        self.rows.iter().find(|r| r.0 == method).map(|r| &r.1)
    }
}

/// Scores the original DSM (`ori`) and every sharpened DSM present in the
/// output directory against the truth. All variants share the buffer of
/// the original DSM's boundary.
pub fn evaluate(cfg: &PipelineConfig) -> Result<EvaluationOutput> {
    let truth = raster::load_heightfield(cfg.required(&cfg.truth, "truth")?)?;
    let dsm = load_dsm(cfg)?;
    let mut variants = vec![("ori".to_string(), dsm.clone())];
    for m in [Method::Planefit, Method::Graphcut] {
        let p = cfg.out_path(m.output_name());
        if p.exists() {
            variants.push((m.label().to_string(), raster::load_heightfield(p)?));
        }
    }
    if variants.len() < 2 {
        return Err(Error::InvalidParam(format!(
            "nothing to compare: no sharpened DSM in {}",
            cfg.out.display()
        )));
    }
    ensure_out(cfg)?;
    let stack = tophat::build_stack(&dsm, &cfg.tophat)?;
    evaluate_with(cfg, &truth, &variants, &stack)
}

fn evaluate_with(
    cfg: &PipelineConfig,
    truth: &Heightfield,
    variants: &[(String, Heightfield)],
    stack: &TophatStack,
) -> Result<EvaluationOutput> {
    let resampled: Vec<(String, Heightfield)> = variants
        .iter()
        .map(|(n, v)| Ok((n.clone(), evaluate::resample_to(truth, v)?)))
        .collect::<Result<_>>()?;
    let boundary = resample_mask(stack.boundary_image(), &variants[0].1, truth);
    let mut rows = Vec::new();
    for (name, v) in &resampled {
        let report = evaluate::rmse_report(v, truth, &boundary, &cfg.eval_widths)?;
        let sweep = evaluate::sweep(v, truth, &boundary, cfg.sweep_max)?;
        write_text(&cfg.out_path(&format!("sweep_{name}.csv")), &evaluate::write_sweep(&sweep))?;
        log::info!("{name}: whole {:.3} m, per buffer {:?}", report.whole_image, report.per_buffer);
        rows.push((name.clone(), report));
    }
    let table: Vec<(String, String, RmseReport)> = rows
        .iter()
        .map(|(n, r)| (cfg.region.clone(), n.clone(), r.clone()))
        .collect();
    write_text(&cfg.out_path("rmse.csv"), &evaluate::write_rmse_table(&table))?;
    if let Some(anchor) = &cfg.cross_section {
        let mut named: Vec<(&str, &Heightfield)> = vec![("truth", truth)];
        named.extend(resampled.iter().map(|(n, v)| (n.as_str(), v)));
        let cs = evaluate::cross_section(&named, anchor, cfg.cross_step, Some(0))?;
        write_text(&cfg.out_path("cross_section.csv"), &evaluate::write_cross_section(&cs))?;
    }
    Ok(EvaluationOutput { rows })
}

/// Carries a mask on `from`'s grid over to `to`'s grid by nearest cell.
fn resample_mask(mask: &raster::BinaryMask, from: &Heightfield, to: &Heightfield) -> raster::BinaryMask {
    if from.dims() == to.dims() && from.cell_size == to.cell_size && from.origin == to.origin {
        return mask.clone();
    }
    let (fx0, _, _, fy1) = from.extent();
    let (tx0, _, _, ty1) = to.extent();
    let fd = from.dims();
    raster::BinaryMask::from_fn(to.dims(), |c, r| {
        let wx = tx0 + (c as f64 + 0.5) * to.cell_size;
        let wy = ty1 - (r as f64 + 0.5) * to.cell_size;
        let (px, py) = (((wx - fx0) / from.cell_size).floor(), ((fy1 - wy) / from.cell_size).floor());
        fd.contains(px as i64, py as i64) && mask.get(px as usize, py as usize)
    })
}

/// Generates the configured scene, or an empty default scene when no scene
/// file is given.
pub fn synth(cfg: &PipelineConfig) -> Result<synth::Scene> {
    let spec = match &cfg.scene {
        Some(p) => synth::load_scene(p)?,
        None => SceneSpec::default(),
    };
    synth_with(cfg, &spec)
}

pub fn synth_with(cfg: &PipelineConfig, spec: &SceneSpec) -> Result<synth::Scene> {
    ensure_out(cfg)?;
    let scene = synth::generate(spec)?;
    raster::save_heightfield(&scene.truth, cfg.out_path("truth.asc"))?;
    raster::save_heightfield(&scene.smeared, cfg.out_path("dsm.asc"))?;
    raster::save_image(&scene.ortho, cfg.out_path("ortho.pgm"))?;
    Ok(scene)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub lines: LineOutput,
    pub evaluation: Option<EvaluationOutput>,
}

/// Every stage in order. With a scene file and no DSM the scene is
/// generated first and its rasters become the inputs. Evaluation runs when
/// a truth surface is available.
pub fn run_all(cfg: &PipelineConfig) -> Result<RunSummary> {
    let mut cfg = cfg.clone();
    if cfg.dsm.is_none() && cfg.scene.is_some() {
        synth(&cfg)?;
        cfg.dsm = Some(cfg.out_path("dsm.asc"));
        cfg.ortho = Some(cfg.out_path("ortho.pgm"));
        cfg.truth = Some(cfg.out_path("truth.asc"));
    }
    let stack = extract_mask(&cfg)?;
    let dsm = load_dsm(&cfg)?;
    let ortho = raster::load_image(cfg.required(&cfg.ortho, "ortho")?)?;
    if ortho.dims() != dsm.dims() {
        return Err(Error::DimensionMismatch("orthophoto and DSM differ in size".into()));
    }
    let lines = detect_lines_with(&cfg, &ortho, &stack)?;
    let mut variants = vec![("ori".to_string(), dsm.clone())];
    for m in [Method::Planefit, Method::Graphcut] {
        let out = sharpen_with(&cfg, m, &dsm, &lines.filtered, Some(&stack))?;
        variants.push((m.label().to_string(), out));
    }
    let evaluation = match &cfg.truth {
        Some(p) => Some(evaluate_with(&cfg, &raster::load_heightfield(p)?, &variants, &stack)?),
        None => None,
    };
    Ok(RunSummary { lines, evaluation })
}
