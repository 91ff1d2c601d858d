//! Adaptive dilation with elliptical structural elements shaped by the local
//! covariance, plus classical disk dilation.
//!
//! At each foreground pixel the weighted covariance of the neighborhood is
//! computed from the input. If its eigenvalues are clearly different the
//! pixel sits on an elongated piece of curve, and the ellipse
//! `{ x : x^T S^-1 x < 4 }` (semi-axes `2 sqrt(lambda)`) is stamped into the
//! output. Near-isotropic neighborhoods are left alone.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, PixelCoord};
use crate::stats::{
    axis_ratio, eigen_ratio, eigen_sym2, weighted_covariance_with, CovMatrix2, CovScratch,
    NeighborhoodMask, DEFAULT_EPSILON,
};

/// Which eigenvalue ratio is compared against `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gate {
    /// `sqrt(lambda2 / lambda1) <= alpha`
    #[default]
    SqrtRatio,
    /// `lambda2 / lambda1 <= alpha`
    SquaredRatio,
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::SqrtRatio => "sqrt",
            Gate::SquaredRatio => "squared",
        })
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sqrt" | "sqrt_ratio" => Ok(Gate::SqrtRatio),
            "squared" | "squared_ratio" => Ok(Gate::SquaredRatio),
            other => Err(Error::Parameter(format!(
                "unknown gate `{other}` (expected sqrt or squared)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorphParams {
    pub radius: u32,
    pub alpha: f64,
    pub gate: Gate,
    pub epsilon: f64,
}

impl MorphParams {
    pub fn new(radius: u32, alpha: f64) -> Self {
        Self {
            radius,
            alpha,
            gate: Gate::default(),
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius == 0 {
            return Err(Error::Parameter("morphology radius must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Parameter(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::Parameter("epsilon must be positive".into()));
        }
        Ok(())
    }
}

impl Default for MorphParams {
    fn default() -> Self {
        Self::new(25, 0.25)
    }
}

/// Offsets covered by a structural element centered at the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralElement {
    offsets: Vec<(i32, i32)>,
}

impl StructuralElement {
    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Closed disk `i^2 + j^2 <= r^2`.
    pub fn disk(r: u32) -> Self {
        let r = r as i32;
        let mut offsets = Vec::new();
        for j in -r..=r {
            for i in -r..=r {
                if i * i + j * j <= r * r {
                    offsets.push((i, j));
                }
            }
        }
        Self { offsets }
    }
}

/// Lattice points of `[-r_clip, r_clip]^2` with Mahalanobis norm below 4,
/// i.e. inside the ellipse with semi-axes `2 sqrt(lambda1)` and
/// `2 sqrt(lambda2)` along the eigenvectors.
pub fn ellipse_element(sigma: &CovMatrix2, r_clip: u32) -> Result<StructuralElement> {
    let inv = sigma.inverse()?;
    let r = r_clip as i32;
    let mut offsets = Vec::new();
    for j in -r..=r {
        for i in -r..=r {
            if inv.mahalanobis_sq(f64::from(i), f64::from(j)) < 4.0 {
                offsets.push((i, j));
            }
        }
    }
    Ok(StructuralElement { offsets })
}

/// Stamps `element` at every foreground pixel.
pub fn dilate_with_element(img: &BinaryImage, element: &StructuralElement) -> BinaryImage {
    let mut out = img.clone();
    for p in img.ones() {
        stamp(&mut out, p, element);
    }
    out
}

fn stamp(out: &mut BinaryImage, p: PixelCoord, element: &StructuralElement) {
    for &(i, j) in element.offsets() {
        out.set_if_inside(p.x + i64::from(i), p.y + i64::from(j));
    }
}

/// Dilation by the closed disk of radius `r`.
pub fn classical_dilate(img: &BinaryImage, r: u32) -> Result<BinaryImage> {
    if r == 0 {
        return Err(Error::Parameter("dilation radius must be >= 1".into()));
    }
    Ok(dilate_with_element(img, &StructuralElement::disk(r)))
}

/// Gate decision and element for one foreground pixel, if it passes.
///
/// The eigenvalues are taken from the regularized covariance, so a singular
/// neighborhood is judged by the same matrix that would shape its element.
/// An empty neighborhood regularizes to `epsilon * I` and never passes.
pub fn element_at(
    img: &BinaryImage,
    p: PixelCoord,
    mask: &NeighborhoodMask,
    params: &MorphParams,
) -> Option<StructuralElement> {
    element_with(img, p, mask, params, &mut CovScratch::default())
}

fn element_with(
    img: &BinaryImage,
    p: PixelCoord,
    mask: &NeighborhoodMask,
    params: &MorphParams,
    scratch: &mut CovScratch,
) -> Option<StructuralElement> {
    let sigma = weighted_covariance_with(img, p, mask, scratch)?.regularized(params.epsilon);
    let eig = eigen_sym2(&sigma);
    let ratio = match params.gate {
        Gate::SqrtRatio => axis_ratio(&eig),
        Gate::SquaredRatio => eigen_ratio(&eig),
    };
    if ratio <= params.alpha {
        ellipse_element(&sigma, params.radius).ok()
    } else {
        None
    }
}

/// Order in which gated elements are written to the output. The result does
/// not depend on it; it exists so that can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    #[default]
    Forward,
    Reverse,
}

/// One pass of adaptive dilation. All gating reads the input; all writes go
/// to a copy of it.
pub fn adaptive_dilate(img: &BinaryImage, params: &MorphParams) -> Result<BinaryImage> {
    adaptive_dilate_ordered(img, params, ScanOrder::Forward)
}

pub fn adaptive_dilate_ordered(
    img: &BinaryImage,
    params: &MorphParams,
    order: ScanOrder,
) -> Result<BinaryImage> {
    params.validate()?;
    let mask = NeighborhoodMask::new(params.radius)?;
    let seeds: Vec<PixelCoord> = img.ones().collect();
    let gathered: Vec<(PixelCoord, StructuralElement)> = seeds
        .par_iter()
        .map_init(CovScratch::default, |scratch, &p| {
            element_with(img, p, &mask, params, scratch).map(|e| (p, e))
        })
        .flatten()
        .collect();

    let mut out = img.clone();
    match order {
        ScanOrder::Forward => gathered.iter().for_each(|(p, e)| stamp(&mut out, *p, e)),
        ScanOrder::Reverse => gathered
            .iter()
            .rev()
            .for_each(|(p, e)| stamp(&mut out, *p, e)),
    }
    Ok(out)
}

/// Applies [`adaptive_dilate`] `iterations` times.
pub fn adaptive_dilate_iter(
    img: &BinaryImage,
    params: &MorphParams,
    iterations: u32,
) -> Result<BinaryImage> {
    let mut out = img.clone();
    for _ in 0..iterations {
        out = adaptive_dilate(&out, params)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn set(e: &StructuralElement) -> BTreeSet<(i32, i32)> {
        e.offsets().iter().copied().collect()
    }

    #[test]
    fn ellipse_matches_axis_form() {
        // a = 4, b = 2
        let e = ellipse_element(&CovMatrix2::new(4.0, 0.0, 1.0), 8).unwrap();
        let mut brute = BTreeSet::new();
        for i in -8i32..=8 {
            for j in -8i32..=8 {
                if f64::from(i * i) / 16.0 + f64::from(j * j) / 4.0 < 1.0 {
                    brute.insert((i, j));
                }
            }
        }
        assert_eq!(brute.len(), 21);
        assert_eq!(set(&e), brute);
    }

    #[test]
    fn small_ellipses() {
        let e = ellipse_element(&CovMatrix2::isotropic(0.25), 3).unwrap();
        assert_eq!(set(&e), BTreeSet::from([(0, 0)]));

        // i^2 + j^2 < 4 on the lattice is the full 3x3 block
        let e = ellipse_element(&CovMatrix2::isotropic(1.0), 3).unwrap();
        let block: BTreeSet<_> = (-1..=1)
            .flat_map(|i| (-1..=1).map(move |j| (i, j)))
            .collect();
        assert_eq!(set(&e), block);

        assert!(ellipse_element(&CovMatrix2::ZERO, 3).is_err());
    }

    #[test]
    fn ellipse_is_clipped_and_symmetric() {
        let e = ellipse_element(&CovMatrix2::new(30.0, 12.0, 8.0), 5).unwrap();
        let s = set(&e);
        assert!(s.contains(&(0, 0)));
        for &(i, j) in &s {
            assert!(i.abs() <= 5 && j.abs() <= 5);
            assert!(s.contains(&(-i, -j)));
        }
    }

    #[test]
    fn classical_dilation_examples() {
        let mut img = BinaryImage::zeros(7, 7);
        img.set(3, 3, true);
        let out = classical_dilate(&img, 1).unwrap();
        let got: BTreeSet<_> = out.ones().map(|p| (p.x, p.y)).collect();
        assert_eq!(
            got,
            BTreeSet::from([(3, 3), (2, 3), (4, 3), (3, 2), (3, 4)])
        );

        assert!(classical_dilate(&BinaryImage::zeros(5, 5), 2)
            .unwrap()
            .is_empty());
        assert!(classical_dilate(&img, 0).is_err());
    }

    #[test]
    fn gate_parsing() {
        assert_eq!("sqrt".parse::<Gate>().unwrap(), Gate::SqrtRatio);
        assert_eq!("squared_ratio".parse::<Gate>().unwrap(), Gate::SquaredRatio);
        assert!("cubic".parse::<Gate>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MorphParams::new(0, 0.5).validate().is_err());
        assert!(MorphParams::new(3, 1.5).validate().is_err());
        assert!(MorphParams::new(3, -0.1).validate().is_err());
        assert!(MorphParams::new(3, 0.0).validate().is_ok());
    }

    #[test]
    fn isolated_pixel_is_never_dilated() {
        let mut img = BinaryImage::zeros(9, 9);
        img.set(4, 4, true);
        let out = adaptive_dilate(&img, &MorphParams::new(3, 1.0)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn line_end_extends_along_line() {
        // horizontal 1-px segment; its right end should grow to the right only
        let img = BinaryImage::from_fn(30, 9, |x, y| y == 4 && (5..15).contains(&x));
        let out = adaptive_dilate(&img, &MorphParams::new(4, 0.5)).unwrap();
        assert!(out.get(16, 4));
        assert!((0..30).all(|x| !out.get(x, 2) && !out.get(x, 6)));
    }
}
