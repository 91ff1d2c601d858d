//! The full curve-completion pipeline: local Gaussian blur, histogram
//! thresholding, adaptive dilation, thinning, pruning and selection of the
//! dominant component.

use std::path::{Path, PathBuf};

use crate::binarize::{binarize, fit_threshold, histogram, ThresholdMethod, ThresholdModel};
use crate::blur::{local_gaussian_blur, BlurParams};
use crate::config::{parse_bool, read_entries, Entry};
use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage};
use crate::io::write_image;
use crate::morph::{adaptive_dilate_iter, Gate, MorphParams};
use crate::skeleton::{largest_component, prune, thin, PruneParams};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub blur_radius: u32,
    pub threshold_method: ThresholdMethod,
    pub invert: bool,
    pub morph_radius: u32,
    pub alpha: f64,
    pub gate: Gate,
    pub morph_iterations: u32,
    pub prune_length: usize,
    pub emit_intermediates: bool,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            blur_radius: 15,
            threshold_method: ThresholdMethod::Cec,
            invert: false,
            morph_radius: 25,
            alpha: 0.25,
            gate: Gate::SqrtRatio,
            morph_iterations: 1,
            prune_length: 10,
            emit_intermediates: false,
            output_dir: PathBuf::from("."),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.blur_radius == 0 || self.morph_radius == 0 {
            return Err(Error::Parameter("radii must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Parameter(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if self.morph_iterations == 0 {
            return Err(Error::Parameter("morph_iterations must be >= 1".into()));
        }
        Ok(())
    }

    /// Overrides fields from `key = value` entries; keys match field names.
    pub fn apply_entries(&mut self, entries: &[Entry]) -> Result<()> {
        for e in entries {
            match e.key.as_str() {
                "blur_radius" => self.blur_radius = e.parse()?,
                "threshold_method" | "method" => {
                    self.threshold_method = e
                        .value
                        .parse()
                        .map_err(|err: Error| e.error(err.to_string()))?
                }
                "invert" => self.invert = parse_bool(e)?,
                "morph_radius" => self.morph_radius = e.parse()?,
                "alpha" => self.alpha = e.parse()?,
                "gate" => {
                    self.gate = e
                        .value
                        .parse()
                        .map_err(|err: Error| e.error(err.to_string()))?
                }
                "morph_iterations" | "iterations" => self.morph_iterations = e.parse()?,
                "prune_length" => self.prune_length = e.parse()?,
                "emit_intermediates" => self.emit_intermediates = parse_bool(e)?,
                "output_dir" => self.output_dir = PathBuf::from(&e.value),
                other => return Err(e.error(format!("unknown key `{other}`"))),
            }
        }
        self.validate()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_entries(&read_entries(path.as_ref())?)?;
        Ok(cfg)
    }

    pub fn blur_params(&self) -> BlurParams {
        BlurParams::new(self.blur_radius)
    }

    pub fn morph_params(&self) -> MorphParams {
        MorphParams {
            gate: self.gate,
            ..MorphParams::new(self.morph_radius, self.alpha)
        }
    }
}

/// Every stage's output, in pipeline order.
#[derive(Debug, Clone, PartialEq)]
pub struct Intermediates {
    pub blur: GrayImage,
    pub threshold: ThresholdModel,
    pub binary: BinaryImage,
    pub morph: BinaryImage,
    pub thin: BinaryImage,
    pub pruned: BinaryImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub final_skeleton: BinaryImage,
    /// The input with the final skeleton drawn at full intensity.
    pub overlay: GrayImage,
    pub intermediates: Intermediates,
}

/// File stems of the emitted stage images.
pub const STAGE_NAMES: [&str; 6] = [
    "01_blur",
    "02_binary",
    "03_morph",
    "04_thin",
    "05_prune",
    "06_final",
];

/// Runs every stage in memory.
///
/// An input whose blurred histogram has a single populated bin has nothing
/// to separate; it yields an empty binary image instead of an error.
pub fn run_pipeline(img: &GrayImage, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let blur = local_gaussian_blur(img, &cfg.blur_params()).map_err(|e| e.in_stage("blur"))?;

    let hist = histogram(&blur).map_err(|e| e.in_stage("threshold"))?;
    let (threshold, binary) = match fit_threshold(&hist, cfg.threshold_method) {
        Ok(model) => {
            let binary = binarize(&blur, &model, cfg.invert);
            (model, binary)
        }
        Err(Error::DegenerateHistogram) => {
            let model = ThresholdModel {
                threshold: 1.0,
                cut_bin: 255,
                method: cfg.threshold_method,
                cluster_stats: None,
            };
            (model, BinaryImage::zeros(img.width(), img.height()))
        }
        Err(e) => return Err(e.in_stage("threshold")),
    };

    let morph = adaptive_dilate_iter(&binary, &cfg.morph_params(), cfg.morph_iterations)
        .map_err(|e| e.in_stage("morph"))?;
    let thinned = thin(&morph);
    let pruned = prune(
        &thinned,
        &PruneParams {
            max_spur_length: cfg.prune_length,
        },
    );
    let final_skeleton = largest_component(&pruned);
    let overlay = img
        .overlay(&final_skeleton, 1.0)
        .map_err(|e| e.in_stage("overlay"))?;

    Ok(PipelineOutput {
        final_skeleton,
        overlay,
        intermediates: Intermediates {
            blur,
            threshold,
            binary,
            morph,
            thin: thinned,
            pruned,
        },
    })
}

/// Writes `06_final.pgm` and `overlay.pgm` into `cfg.output_dir`, plus the
/// other stage images when `cfg.emit_intermediates` is set.
pub fn write_outputs(out: &PipelineOutput, cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = |stem: &str| dir.join(format!("{stem}.pgm"));
    let mut written = Vec::new();
    if cfg.emit_intermediates {
        let stages = &out.intermediates;
        write_image(&stages.blur, path(STAGE_NAMES[0]))?;
        write_image(&stages.binary, path(STAGE_NAMES[1]))?;
        write_image(&stages.morph, path(STAGE_NAMES[2]))?;
        write_image(&stages.thin, path(STAGE_NAMES[3]))?;
        write_image(&stages.pruned, path(STAGE_NAMES[4]))?;
        written.extend(STAGE_NAMES[..5].iter().map(|s| path(s)));
    }
    write_image(&out.final_skeleton, path(STAGE_NAMES[5]))?;
    write_image(&out.overlay, path("overlay"))?;
    written.push(path(STAGE_NAMES[5]));
    written.push(path("overlay"));
    Ok(written)
}
