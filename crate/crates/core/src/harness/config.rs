//! Grid configuration: the TOML document and its validated form.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gray::GrayImage;
use crate::orderings::Strategy;
use crate::sampling::measurement_count;
use crate::tv::SolverConfig;

use super::imageio::load_and_normalize;
use super::scenes::Scene;

pub const DEFAULT_SIDE: usize = 128;
pub const DEFAULT_RUNS: usize = 5;
pub const DEFAULT_OUTPUT_DIR: &str = "spi-bench-out";

pub fn default_strategies() -> Vec<Strategy> {
    vec![
        Strategy::CakeCutting,
        Strategy::TotalGradient,
        Strategy::AscendingScale,
        Strategy::AscendingInertia,
    ]
}

/// 0.01 to 0.10 in steps of 0.01, then 0.2, 0.3 and 0.5.
pub fn default_sampling_ratios() -> Vec<f64> {
    let mut v: Vec<f64> = (1..=10).map(|i| i as f64 / 100.0).collect();
    v.extend([0.2, 0.3, 0.5]);
    v
}

pub fn default_noise_levels() -> Vec<f64> {
    vec![0.0, 0.1, 0.5]
}

/// The on-disk grid document. Relative paths are resolved against the
/// directory containing the document.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Image files or directories (scanned for `.png` / `.pgm`, sorted by name).
    pub images: Vec<PathBuf>,
    /// Names of built-in scenes (`cameraman`, `astronaut`).
    pub bundled_images: Vec<String>,
    pub side: usize,
    pub strategies: Vec<Strategy>,
    pub sampling_ratios: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub runs: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `0` uses every available core.
    pub workers: usize,
    pub write_images: bool,
    pub write_traces: bool,
    pub solver: SolverConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            images: Vec::new(),
            bundled_images: Vec::new(),
            side: DEFAULT_SIDE,
            strategies: default_strategies(),
            sampling_ratios: default_sampling_ratios(),
            noise_levels: default_noise_levels(),
            runs: DEFAULT_RUNS,
            base_seed: 0,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            workers: 0,
            write_images: true,
            write_traces: false,
            solver: SolverConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Resolves image sources and paths against `base_dir` and validates the grid.
    pub fn resolve(&self, base_dir: &Path) -> Result<(ExperimentGrid, OutputOptions)> {
        let mut images = Vec::new();
        for entry in &self.images {
            let path = base_dir.join(entry);
            let meta = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?;
            if meta.is_dir() {
                images.extend(scan_dir(&path)?.into_iter().map(ImageSource::File));
            } else {
                images.push(ImageSource::File(path));
            }
        }
        for name in &self.bundled_images {
            let scene = Scene::from_id(name).ok_or_else(|| {
                Error::Config(format!(
                    "unknown bundled image {name:?} (known: cameraman, astronaut)"
                ))
            })?;
            images.push(ImageSource::Bundled(scene));
        }
        let grid = ExperimentGrid {
            images,
            side: self.side,
            strategies: self.strategies.clone(),
            sampling_ratios: self.sampling_ratios.clone(),
            noise_levels: self.noise_levels.clone(),
            runs: self.runs,
            base_seed: self.base_seed,
            solver: self.solver,
        };
        grid.validate()?;
        let output = OutputOptions {
            output_dir: base_dir.join(&self.output_dir),
            workers: self.workers,
            write_images: self.write_images,
            write_traces: self.write_traces,
        };
        Ok((grid, output))
    }
}

fn scan_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("png" | "pgm")) {
            found.push(path);
        }
    }
    found.sort();
    Ok(found)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImageSource {
    File(PathBuf),
    Bundled(Scene),
}

impl ImageSource {
    /// File stem, or the scene name for bundled images.
    pub fn id(&self) -> String {
        match self {
            ImageSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            ImageSource::Bundled(s) => s.id().to_string(),
        }
    }

    pub fn load(&self, side: usize) -> Result<GrayImage> {
        match self {
            ImageSource::File(p) => load_and_normalize(p, side),
            ImageSource::Bundled(s) => s.load(side),
        }
    }
}

/// A validated experiment: every combination of image, strategy, sampling
/// ratio, noise level and run is one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub images: Vec<ImageSource>,
    pub side: usize,
    pub strategies: Vec<Strategy>,
    pub sampling_ratios: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub runs: usize,
    pub base_seed: u64,
    pub solver: SolverConfig,
}

impl ExperimentGrid {
    /// The full protocol on the two bundled scenes.
    pub fn bundled_default() -> Self {
        Self {
            images: Scene::ALL
                .iter()
                .map(|&s| ImageSource::Bundled(s))
                .collect(),
            side: DEFAULT_SIDE,
            strategies: default_strategies(),
            sampling_ratios: default_sampling_ratios(),
            noise_levels: default_noise_levels(),
            runs: DEFAULT_RUNS,
            base_seed: 0,
            solver: SolverConfig::default(),
        }
    }

    /// Shrinks the grid for quick runs: 64x64 images, three sampling ratios, three runs.
    pub fn desk(mut self) -> Self {
        self.side = 64;
        self.sampling_ratios = vec![0.05, 0.1, 0.2];
        self.runs = 3;
        self
    }

    pub fn cell_count(&self) -> usize {
        self.images.len()
            * self.strategies.len()
            * self.sampling_ratios.len()
            * self.noise_levels.len()
            * self.runs
    }

    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::Config("the grid needs at least one image".into()));
        }
        let mut ids = HashSet::new();
        for img in &self.images {
            if !ids.insert(img.id()) {
                return Err(Error::Config(format!("duplicate image id {:?}", img.id())));
            }
        }
        if self.side < 2 || !self.side.is_power_of_two() {
            return Err(Error::Config(format!(
                "image side must be a power of two >= 2, got {}",
                self.side
            )));
        }
        if self.side > 1 << 12 {
            return Err(Error::Config(format!(
                "image side {} is too large",
                self.side
            )));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("the grid needs at least one strategy".into()));
        }
        let unique: HashSet<_> = self.strategies.iter().collect();
        if unique.len() != self.strategies.len() {
            return Err(Error::Config("strategies must not repeat".into()));
        }
        if self.sampling_ratios.is_empty() || self.noise_levels.is_empty() {
            return Err(Error::Config(
                "sampling_ratios and noise_levels must not be empty".into(),
            ));
        }
        for &sr in &self.sampling_ratios {
            measurement_count(self.side * self.side, sr)?;
        }
        for &c in &self.noise_levels {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Config(format!(
                    "noise level must be finite and non-negative, got {c}"
                )));
            }
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub output_dir: PathBuf,
    pub workers: usize,
    /// Write one reconstructed PNG per cell plus the normalized references.
    pub write_images: bool,
    /// Write a per-cell solver trace CSV.
    pub write_traces: bool,
}

impl OutputOptions {
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            output_dir: output_dir.into(),
            workers: 0,
            write_images: true,
            write_traces: false,
        }
    }
}
