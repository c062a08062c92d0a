//! Synthetic scenes with known ground truth.
//!
//! Buildings are flat-roofed prisms on a flat ground. The DSM under test is
//! the truth blurred by a Gaussian, which mimics the edge smearing of
//! dense matching, plus seeded Gaussian noise. The orthophoto keeps crisp
//! edges.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::pipeline::parse_key_values;
use crate::raster::{Dims, Heightfield, RasterImage};

pub const GROUND_INTENSITY: u8 = 50;
const ROOF_INTENSITIES: [u8; 5] = [200, 160, 230, 130, 180];

/// Axis-aligned rectangle `[x, x + width) × [y, y + height)` in pixel
/// units, rotated by `rotation_deg` about its centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Building {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    /// Meters above ground.
    pub elevation: f64,
    pub rotation_deg: f64,
}

impl Building {
    pub fn new(x: f64, y: f64, width: f64, height: f64, elevation: f64) -> Self {
        Building {
            x,
            y,
            width,
            height,
            elevation,
            rotation_deg: 0.0,
        }
    }

    /// Whether the point `(px, py)` in continuous pixel coordinates lies in
    /// the footprint. Pixel `(i, j)` has its centre at `(i + 0.5, j + 0.5)`.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        let (cx, cy) = (self.x + self.width / 2.0, self.y + self.height / 2.0);
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let (dx, dy) = (px - cx, py - cy);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u >= -self.width / 2.0 && u < self.width / 2.0 && v >= -self.height / 2.0 && v < self.height / 2.0
    }

    fn corners(&self) -> [(f64, f64); 4] {
        let (cx, cy) = (self.x + self.width / 2.0, self.y + self.height / 2.0);
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let (hw, hh) = (self.width / 2.0, self.height / 2.0);
        [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)].map(|(u, v)| (cx + c * u - s * v, cy + s * u + c * v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub dims: Dims,
    pub ground_height: f64,
    pub buildings: Vec<Building>,
    pub boundary_blur_sigma: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            dims: Dims::new(256, 256),
            ground_height: 0.0,
            buildings: Vec::new(),
            boundary_blur_sigma: 2.0,
            noise_sigma: 0.05,
            seed: 1,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidParam("scene dimensions must be positive".into()));
        }
        if !(self.boundary_blur_sigma >= 0.0) || !(self.noise_sigma >= 0.0) || !self.ground_height.is_finite() {
            return Err(Error::InvalidParam("sigmas must be non-negative and ground finite".into()));
        }
        let (w, h) = (self.dims.width as f64, self.dims.height as f64);
        for (k, b) in self.buildings.iter().enumerate() {
            if !(b.elevation > 0.0 && b.elevation.is_finite()) || !(b.width > 0.0) || !(b.height > 0.0) {
                return Err(Error::InvalidParam(format!("building {k} needs positive size and elevation")));
            }
            let eps = 1e-9;
            if b.corners().iter().any(|&(x, y)| x < -eps || y < -eps || x > w + eps || y > h + eps) {
                return Err(Error::InvalidParam(format!("building {k} extends beyond the scene")));
            }
        }
        Ok(())
    }
}

/// Ground truth, smeared DSM and orthophoto.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub truth: Heightfield,
    pub smeared: Heightfield,
    pub ortho: RasterImage,
}

pub fn generate(spec: &SceneSpec) -> Result<Scene> {
    spec.validate()?;
    let dims = spec.dims;
    // index of the covering building per pixel
    let mut owner: Vec<Option<usize>> = vec![None; dims.len()];
    for y in 0..dims.height {
        for x in 0..dims.width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let i = dims.index(x, y);
            for (k, b) in spec.buildings.iter().enumerate() {
                if !b.contains(px, py) {
                    continue;
                }
                match owner[i] {
                    Some(j) if spec.buildings[j].elevation != b.elevation => return Err(Error::AmbiguousTruth(j, k)),
                    Some(_) => {}
                    None => owner[i] = Some(k),
                }
            }
        }
    }
    let truth_cells: Vec<f64> = owner
        .iter()
        .map(|o| spec.ground_height + o.map_or(0.0, |k| spec.buildings[k].elevation))
        .collect();
    let truth = Heightfield::from_cells(dims, truth_cells)?;

    let mut smeared = gaussian_blur(&truth, spec.boundary_blur_sigma)?;
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidParam(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let cells: Vec<f64> = smeared.cells().iter().map(|&v| v + normal.sample(&mut rng)).collect();
        smeared = smeared.with_cells(cells)?;
    }

    let samples = owner
        .iter()
        .map(|o| o.map_or(GROUND_INTENSITY, |k| ROOF_INTENSITIES[k % ROOF_INTENSITIES.len()]))
        .collect();
    let ortho = RasterImage::new(dims, 1, samples)?;
    Ok(Scene { truth, smeared, ortho })
}

/// Separable Gaussian, kernel truncated at `ceil(3σ)` and renormalized,
/// borders clamped. `σ = 0` is the identity.
pub fn gaussian_blur(field: &Heightfield, sigma: f64) -> Result<Heightfield> {
    if sigma == 0.0 {
        return Ok(field.clone());
    }
    let r = (3.0 * sigma).ceil() as i64;
    let mut kernel: Vec<f64> = (-r..=r).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= sum);
    let dims = field.dims();
    let (w, h) = (dims.width as i64, dims.height as i64);
    let src = field.cells();
    let mut tmp = vec![0.0; dims.len()];
    for y in 0..h {
        for x in 0..w {
            tmp[(y * w + x) as usize] = (-r..=r)
                .map(|d| kernel[(d + r) as usize] * src[(y * w + (x + d).clamp(0, w - 1)) as usize])
                .sum();
        }
    }
    let mut out = vec![0.0; dims.len()];
    for y in 0..h {
        for x in 0..w {
            out[(y * w + x) as usize] = (-r..=r)
                .map(|d| kernel[(d + r) as usize] * tmp[((y + d).clamp(0, h - 1) * w + x) as usize])
                .sum();
        }
    }
    field.with_cells(out)
}

/// Scene file: `key = value` lines with `width`, `height`,
/// `ground_height`, `blur_sigma`, `noise_sigma`, `seed` and any number of
/// `building = x y width height elevation [rotation_deg]`.
pub fn parse_scene(text: &str) -> Result<SceneSpec> {
    let mut spec = SceneSpec::default();
    let (mut width, mut height) = (spec.dims.width, spec.dims.height);
    for (line, key, value) in parse_key_values(text)? {
        let bad = |detail: String| Error::Config { line, detail };
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("{key}: not a number: {v}")));
        match key.as_str() {
            "width" => width = value.parse().map_err(|_| bad(format!("width: {value}")))?,
            "height" => height = value.parse().map_err(|_| bad(format!("height: {value}")))?,
            "ground_height" => spec.ground_height = num(&value)?,
            "blur_sigma" => spec.boundary_blur_sigma = num(&value)?,
            "noise_sigma" => spec.noise_sigma = num(&value)?,
            "seed" => spec.seed = value.parse().map_err(|_| bad(format!("seed: {value}")))?,
            "building" => {
                let v: Vec<f64> = value.split_whitespace().map(num).collect::<Result<_>>()?;
                if !(5..=6).contains(&v.len()) {
                    return Err(bad("building needs x y width height elevation [rotation]".into()));
                }
                spec.buildings.push(Building {
                    x: v[0],
                    y: v[1],
                    width: v[2],
                    height: v[3],
                    elevation: v[4],
                    rotation_deg: v.get(5).copied().unwrap_or(0.0),
                });
            }
            _ => return Err(bad(format!("unknown key {key}"))),
        }
    }
    spec.dims = Dims::new(width, height);
    spec.validate()?;
    Ok(spec)
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_block(size: f64, sigma: f64, noise: f64) -> SceneSpec {
        SceneSpec {
            dims: Dims::new(100, 100),
            ground_height: 0.0,
            buildings: vec![Building::new(30.0, 30.0, size, size, 10.0)],
            boundary_blur_sigma: sigma,
            noise_sigma: noise,
            seed: 4,
        }
    }

    #[test]
    fn empty_scene_is_flat() {
        let s = generate(&SceneSpec { buildings: vec![], noise_sigma: 0.0, ..one_block(1.0, 2.0, 0.0) }).unwrap();
        assert!(s.truth.cells().iter().all(|&v| v == 0.0));
        assert_eq!(s.smeared, s.truth);
        assert!(s.ortho.samples().iter().all(|&v| v == GROUND_INTENSITY));
    }

    #[test]
    fn no_blur_no_noise_is_exact() {
        let s = generate(&one_block(40.0, 0.0, 0.0)).unwrap();
        assert_eq!(s.smeared, s.truth);
        assert_eq!(s.truth.cells().iter().filter(|&&v| v == 10.0).count(), 1600);
        assert!(s.truth.cells().iter().all(|&v| v == 0.0 || v == 10.0));
    }

    #[test]
    fn blurred_edge_is_monotone() {
        let s = generate(&one_block(40.0, 2.0, 0.0)).unwrap();
        // edge between columns 29 and 30 on row 50
        let row: Vec<f64> = (23..=36).map(|x| s.smeared.get(x, 50)).collect();
        assert!(row.windows(2).all(|w| w[1] > w[0]), "{row:?}");
        // Gaussian-convolved step: symmetric about the edge, half height there
        let (a, b) = (s.smeared.get(29, 50), s.smeared.get(30, 50));
        assert!((a + b - 10.0).abs() < 1e-9);
        // analytic value of the truncated kernel's cumulative sum
        let k: Vec<f64> = (-6i32..=6).map(|d| (-(d * d) as f64 / 8.0).exp()).collect();
        let total: f64 = k.iter().sum();
        let inside: f64 = k[6..].iter().sum::<f64>() / total;
        assert!((b - 10.0 * inside).abs() < 1e-9);
    }

    #[test]
    fn ortho_edges_match_truth() {
        let s = generate(&one_block(40.0, 2.0, 0.05)).unwrap();
        for (i, &t) in s.truth.cells().iter().enumerate() {
            assert_eq!(t > 5.0, s.ortho.samples()[i] != GROUND_INTENSITY);
        }
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let spec = one_block(20.0, 1.0, 0.5);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SceneSpec { seed: 5, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap().smeared, generate(&other).unwrap().smeared);
    }

    #[test]
    fn overlapping_heights_are_ambiguous() {
        let mut spec = one_block(20.0, 0.0, 0.0);
        spec.buildings.push(Building::new(40.0, 40.0, 20.0, 20.0, 6.0));
        assert!(matches!(generate(&spec), Err(Error::AmbiguousTruth(0, 1))));
        spec.buildings[1].elevation = 10.0;
        assert!(generate(&spec).is_ok());
    }

    #[test]
    fn rotated_building_covers_its_area() {
        let mut spec = one_block(40.0, 0.0, 0.0);
        spec.buildings[0].rotation_deg = 30.0;
        let s = generate(&spec).unwrap();
        let n = s.truth.cells().iter().filter(|&&v| v > 0.0).count() as f64;
        assert!((n - 1600.0).abs() < 80.0, "{n}");
    }

    #[test]
    fn invalid_specs() {
        let mut spec = one_block(40.0, 0.0, 0.0);
        spec.buildings[0].x = 90.0;
        assert!(spec.validate().is_err());
        assert!(SceneSpec { noise_sigma: -1.0, ..one_block(4.0, 0.0, 0.0) }.validate().is_err());
    }

    #[test]
    fn scene_file() {
        let spec = parse_scene(
            "# test scene\nwidth = 64\nheight = 48\nblur_sigma = 1.5\nnoise_sigma = 0\nseed = 9\n\
             building = 10 10 20 20 8\nbuilding = 40 5 10 30 4 15\n",
        )
        .unwrap();
        assert_eq!(spec.dims, Dims::new(64, 48));
        assert_eq!(spec.buildings.len(), 2);
        assert_eq!(spec.buildings[1].rotation_deg, 15.0);
        assert!(matches!(parse_scene("colour = red\n"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(parse_scene("seed = 1\nbuilding = 1 2\n"), Err(Error::Config { line: 2, .. })));
    }
}
