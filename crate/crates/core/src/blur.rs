//! Gaussian blur with a per-pixel covariance estimated from the image itself,
//! and the classical fixed-covariance blur it is compared against.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{clamp_unit, GrayImage, Intensity, PixelCoord};
use crate::stats::{
    weighted_covariance_with, CovMatrix2, CovScratch, InverseCov, NeighborhoodMask, DEFAULT_EPSILON,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlurParams {
    /// Radius of both the covariance neighborhood and the convolution window.
    pub radius: u32,
    /// Divide by the kernel mass over the in-domain part of the window.
    pub normalize: bool,
    /// Added to singular covariances.
    pub epsilon: f64,
}

impl BlurParams {
    pub fn new(radius: u32) -> Self {
        Self {
            radius,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius == 0 {
            return Err(Error::Parameter("blur radius must be >= 1".into()));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Parameter("epsilon must be positive".into()));
        }
        Ok(())
    }
}

impl Default for BlurParams {
    fn default() -> Self {
        Self {
            radius: 15,
            normalize: true,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Masked convolution of `img` with the zero-mean Gaussian of covariance
/// `sigma`, evaluated at `center`.
///
/// With `normalize`, taps outside the image are skipped and the result is the
/// kernel-weighted mean of the in-domain taps. Without it, the raw masked sum
/// over the zero-extended image is returned. The result is clamped to
/// `[0, 1]`.
pub fn convolve_at(
    img: &GrayImage,
    center: PixelCoord,
    sigma: &CovMatrix2,
    mask: &NeighborhoodMask,
    normalize: bool,
) -> Result<f64> {
    let inv = sigma.inverse()?;
    Ok(convolve_inv(
        img,
        center,
        &inv,
        mask,
        normalize,
        &mut ConvScratch::default(),
    ))
}

#[derive(Debug, Default)]
struct ConvScratch {
    kernel: Vec<f64>,
    terms: Vec<f64>,
}

fn convolve_inv(
    img: &GrayImage,
    center: PixelCoord,
    inv: &InverseCov,
    mask: &NeighborhoodMask,
    normalize: bool,
    scratch: &mut ConvScratch,
) -> f64 {
    let offsets = mask.offsets();
    let ConvScratch { kernel, terms } = scratch;
    if !normalize {
        terms.clear();
        terms.extend(offsets.iter().map(|&(i, j)| {
            let v = img.intensity(center.x + i as i64, center.y + j as i64);
            inv.density(f64::from(i), f64::from(j)) * v
        }));
        return clamp_unit(mask.sym_sum(terms));
    }

    // deviations from the center value: a constant window reproduces the
    // center exactly
    let base = img.intensity(center.x, center.y);
    kernel.clear();
    terms.clear();
    for &(i, j) in offsets {
        let (x, y) = (center.x + i as i64, center.y + j as i64);
        if img.contains(x, y) {
            let g = inv.density(f64::from(i), f64::from(j));
            kernel.push(g);
            terms.push(g * (img.intensity(x, y) - base));
        } else {
            kernel.push(0.0);
            terms.push(0.0);
        }
    }
    let mass = mask.sym_sum(kernel);
    if mass.is_nan() || mass <= 0.0 {
        return clamp_unit(base);
    }
    clamp_unit(base + mask.sym_sum(terms) / mass)
}

/// Blurs every pixel with the Gaussian whose covariance is the local weighted
/// covariance of the input at that pixel. Covariances always come from the
/// unmodified input.
pub fn local_gaussian_blur(img: &GrayImage, params: &BlurParams) -> Result<GrayImage> {
    params.validate()?;
    let mask = NeighborhoodMask::new(params.radius)?;
    let width = img.width();
    let mut data = vec![0.0; width * img.height()];
    if width == 0 {
        return GrayImage::new(width, img.height(), data);
    }
    data.par_chunks_mut(width).enumerate().for_each_init(
        || (CovScratch::default(), ConvScratch::default()),
        |(scratch, conv), (y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                let p = PixelCoord::new(x as i64, y as i64);
                let sigma = weighted_covariance_with(img, p, &mask, scratch)
                    .unwrap_or(CovMatrix2::ZERO)
                    .regularized(params.epsilon);
                // regularized covariances are never singular
                let inv = sigma.inverse().expect("regularized covariance");
                *out = convolve_inv(img, p, &inv, &mask, params.normalize, conv);
            }
        },
    );
    GrayImage::new(width, img.height(), data)
}

/// Normalized blur with the fixed covariance `s * I` over the radius-`r` disk.
pub fn classical_gaussian_blur(img: &GrayImage, s: f64, r: u32) -> Result<GrayImage> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::Parameter("blur variance must be positive".into()));
    }
    let mask = NeighborhoodMask::new(r)?;
    let inv = CovMatrix2::isotropic(s).inverse()?;
    let width = img.width();
    let mut data = vec![0.0; width * img.height()];
    if width == 0 {
        return GrayImage::new(width, img.height(), data);
    }
    data.par_chunks_mut(width)
        .enumerate()
        .for_each_init(ConvScratch::default, |conv, (y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                let p = PixelCoord::new(x as i64, y as i64);
                *out = convolve_inv(img, p, &inv, &mask, true, conv);
            }
        });
    GrayImage::new(width, img.height(), data)
}
