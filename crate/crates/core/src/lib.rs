//! Completion of partially discontinuous curve-type structures in grayscale
//! images.
//!
//! The pipeline blurs each pixel with a Gaussian shaped by the local weighted
//! covariance of the image, binarizes the result by cross-entropy clustering
//! of the histogram, closes remaining gaps with an adaptive dilation whose
//! elliptical structural elements follow the local curve direction, and
//! finally thins and prunes the result to a one-pixel-wide curve.

pub mod binarize;
pub mod blur;
pub mod config;
pub mod error;
pub mod image;
pub mod io;
pub mod morph;
pub mod pipeline;
pub mod skeleton;
pub mod stats;
pub mod synth;

pub use binarize::{
    apply_threshold, cec_threshold_1d, histogram, otsu_threshold, Histogram256, ThresholdMethod,
    ThresholdModel,
};
pub use blur::{classical_gaussian_blur, convolve_at, local_gaussian_blur, BlurParams};
pub use error::{Error, Result};
pub use image::{BinaryImage, GrayImage, PixelCoord};
pub use io::{read_binary_image, read_image, write_image};
pub use morph::{
    adaptive_dilate, classical_dilate, ellipse_element, Gate, MorphParams, StructuralElement,
};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use skeleton::{find_endpoints, largest_component, prune, thin, PruneParams};
pub use stats::{
    axis_ratio, eigen_sym2, gaussian_density, mahalanobis_sq, weighted_covariance, CovMatrix2,
    EigenPair, NeighborhoodMask,
};
pub use synth::{synthesize, Background, Stroke, SynthSpec};
