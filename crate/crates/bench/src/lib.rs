//! Inputs shared by the benchmarks.

use curvefill::{synthesize, Background, BinaryImage, GrayImage, Stroke, SynthSpec};

/// A noisy dashed diagonal on a `size` x `size` canvas.
pub fn dashed_diagonal(size: usize) -> GrayImage {
    let s = size as f64;
    let spec = SynthSpec {
        width: size,
        height: size,
        strokes: vec![Stroke::Segment {
            start: (0.1 * s, 0.2 * s),
            end: (0.9 * s, 0.7 * s),
            thickness: 3.0,
        }],
        gap_pattern: Some((20.0, 8.0)),
        foreground: 0.9,
        background: Background::Flat(0.1),
        noise_sigma: 0.02,
        seed: 1,
    };
    synthesize(&spec).expect("valid synth spec")
}

/// The same diagonal, binarized at mid gray.
pub fn dashed_diagonal_mask(size: usize) -> BinaryImage {
    let img = dashed_diagonal(size);
    BinaryImage::from_fn(size, size, |x, y| img.get(x, y) > 0.5)
}
