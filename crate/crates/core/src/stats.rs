//! Local statistics shared by the blur and morphology stages: circular
//! neighborhoods, background-subtracted weights, the weighted covariance of
//! neighborhood offsets, Mahalanobis norms and a closed-form 2x2 symmetric
//! eigensolver.
//!
//! Every neighborhood sum is accumulated in a fixed order that pairs each
//! offset `(i, j)` with its transpose `(j, i)`. Floating-point addition is
//! commutative, so transposing an image transposes every result bit for bit.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::{Intensity, PixelCoord};

/// Determinant below which a covariance is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Default isotropic regularization added to singular covariances.
pub const DEFAULT_EPSILON: f64 = 0.25;

/// Total weight at or below which a neighborhood carries no structure.
const EMPTY_WEIGHT: f64 = 1e-12;

/// Lattice points of the closed disk of radius `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborhoodMask {
    radius: u32,
    /// Diagonal offsets (`i == j`) first, then transpose pairs stored
    /// adjacently as `(i, j), (j, i)` with `i < j`.
    offsets: Vec<(i32, i32)>,
    diagonal: usize,
}

impl NeighborhoodMask {
    pub fn new(radius: u32) -> Result<Self> {
        if radius == 0 {
            return Err(Error::Parameter("neighborhood radius must be >= 1".into()));
        }
        let r = radius as i32;
        let inside = |i: i32, j: i32| i * i + j * j <= r * r;
        let mut offsets: Vec<(i32, i32)> =
            (-r..=r).filter(|&i| inside(i, i)).map(|i| (i, i)).collect();
        let diagonal = offsets.len();
        for i in -r..=r {
            for j in (i + 1)..=r {
                if inside(i, j) {
                    offsets.push((i, j));
                    offsets.push((j, i));
                }
            }
        }
        Ok(Self {
            radius,
            offsets,
            diagonal,
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Offsets in accumulation order (not sorted).
    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    /// Sums per-offset terms (indexed like [`offsets`](Self::offsets)) in the
    /// transpose-symmetric order.
    #[inline]
    pub(crate) fn sym_sum(&self, terms: &[f64]) -> f64 {
        debug_assert_eq!(terms.len(), self.offsets.len());
        let (diag, pairs) = terms.split_at(self.diagonal);
        let mut acc = 0.0;
        for &t in diag {
            acc += t;
        }
        for p in pairs.chunks_exact(2) {
            acc += p[0] + p[1];
        }
        acc
    }
}

/// Symmetric 2x2 matrix `[[sxx, sxy], [sxy, syy]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix2 {
    pub sxx: f64,
    pub sxy: f64,
    pub syy: f64,
}

impl CovMatrix2 {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(sxx: f64, sxy: f64, syy: f64) -> Self {
        Self { sxx, sxy, syy }
    }

    pub const fn isotropic(s: f64) -> Self {
        Self::new(s, 0.0, s)
    }

    pub fn det(&self) -> f64 {
        self.sxx * self.syy - self.sxy * self.sxy
    }

    pub fn trace(&self) -> f64 {
        self.sxx + self.syy
    }

    pub fn transpose_axes(&self) -> Self {
        Self::new(self.syy, self.sxy, self.sxx)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.sxx >= -tol && self.syy >= -tol && self.det() >= -tol
    }

    pub fn is_singular(&self) -> bool {
        self.det() <= SINGULAR_DET
    }

    /// Adds `epsilon * I` when the matrix is singular; otherwise returns it
    /// unchanged.
    pub fn regularized(&self, epsilon: f64) -> Self {
        if self.is_singular() {
            Self::new(self.sxx + epsilon, self.sxy, self.syy + epsilon)
        } else {
            *self
        }
    }

    /// Precomputes the inverse for repeated norm evaluations.
    pub fn inverse(&self) -> Result<InverseCov> {
        let det = self.det();
        if det.is_nan() || det <= SINGULAR_DET {
            return Err(Error::Singular { det });
        }
        Ok(InverseCov {
            cov: *self,
            det,
            two_sxy: 2.0 * self.sxy,
        })
    }
}

/// A nonsingular covariance with its determinant, ready for norm and
/// density evaluation.
#[derive(Debug, Clone, Copy)]
pub struct InverseCov {
    cov: CovMatrix2,
    det: f64,
    two_sxy: f64,
}

impl InverseCov {
    pub fn det(&self) -> f64 {
        self.det
    }

    /// `x^T S^-1 x`.
    #[inline]
    pub fn mahalanobis_sq(&self, x: f64, y: f64) -> f64 {
        // symmetric under (x, y, sxx, syy) -> (y, x, syy, sxx)
        (self.cov.syy * (x * x) + self.cov.sxx * (y * y) - self.two_sxy * (x * y)) / self.det
    }

    /// Zero-mean bivariate normal density.
    #[inline]
    pub fn density(&self, x: f64, y: f64) -> f64 {
        (-0.5 * self.mahalanobis_sq(x, y)).exp() / (2.0 * PI * self.det.sqrt())
    }
}

pub fn mahalanobis_sq(sigma: &CovMatrix2, x: [f64; 2]) -> Result<f64> {
    Ok(sigma.inverse()?.mahalanobis_sq(x[0], x[1]))
}

pub fn gaussian_density(sigma: &CovMatrix2, x: [f64; 2]) -> Result<f64> {
    Ok(sigma.inverse()?.density(x[0], x[1]))
}

/// Eigenvalues `lambda1 >= lambda2` with unit eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

/// Closed-form eigendecomposition of a symmetric 2x2 matrix.
///
/// Eigenvalues are `m +- sqrt(d^2 + sxy^2)` with `m` the mean and `d` the
/// half-difference of the diagonal. Negative eigenvalues within `1e-12` of
/// zero are clamped to zero. Each eigenvector's first nonzero component is
/// positive.
pub fn eigen_sym2(sigma: &CovMatrix2) -> EigenPair {
    let m = 0.5 * (sigma.sxx + sigma.syy);
    let d = 0.5 * (sigma.sxx - sigma.syy);
    let h = (d * d + sigma.sxy * sigma.sxy).sqrt();
    let lambda1 = m + h;
    let mut lambda2 = m - h;
    if lambda2 < 0.0 && lambda2 > -SINGULAR_DET {
        lambda2 = 0.0;
    }

    let v1 = if sigma.sxy == 0.0 {
        if sigma.sxx >= sigma.syy {
            [1.0, 0.0]
        } else {
            [0.0, 1.0]
        }
    } else {
        // two candidate rows of (S - lambda1 I) give the same direction;
        // take the longer one for accuracy
        let a = [sigma.sxy, lambda1 - sigma.sxx];
        let b = [lambda1 - sigma.syy, sigma.sxy];
        let pick = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) {
            a
        } else {
            b
        };
        normalize(pick)
    };
    let v1 = canonical_sign(v1);
    let v2 = canonical_sign([-v1[1], v1[0]]);
    EigenPair {
        lambda1,
        lambda2,
        v1,
        v2,
    }
}

fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

fn canonical_sign(v: [f64; 2]) -> [f64; 2] {
    let first = if v[0] != 0.0 { v[0] } else { v[1] };
    if first < 0.0 {
        [-v[0] + 0.0, -v[1] + 0.0]
    } else {
        [v[0] + 0.0, v[1] + 0.0]
    }
}

/// `sqrt(lambda2) / sqrt(lambda1)`, or 1 when `lambda1` is zero.
pub fn axis_ratio(e: &EigenPair) -> f64 {
    if e.lambda1 > 0.0 {
        (e.lambda2.max(0.0) / e.lambda1).sqrt()
    } else {
        1.0
    }
}

/// `lambda2 / lambda1`, or 1 when `lambda1` is zero.
pub fn eigen_ratio(e: &EigenPair) -> f64 {
    if e.lambda1 > 0.0 {
        e.lambda2.max(0.0) / e.lambda1
    } else {
        1.0
    }
}

/// Background-subtracted weights `max(0, J(c + o) - mean)` for each mask
/// offset `o`, where `mean` averages `J` over the whole neighborhood.
/// Written into `out` in mask order.
pub fn local_weights_into<I: Intensity + ?Sized>(
    img: &I,
    center: PixelCoord,
    mask: &NeighborhoodMask,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.extend(
        mask.offsets()
            .iter()
            .map(|&(i, j)| img.intensity(center.x + i as i64, center.y + j as i64)),
    );
    let mean = mask.sym_sum(out) / mask.len() as f64;
    for w in out.iter_mut() {
        *w = (*w - mean).max(0.0);
    }
}

pub fn local_weights<I: Intensity + ?Sized>(
    img: &I,
    center: PixelCoord,
    mask: &NeighborhoodMask,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(mask.len());
    local_weights_into(img, center, mask, &mut out);
    out
}

/// Scratch buffers for repeated covariance evaluation.
#[derive(Debug, Default)]
pub(crate) struct CovScratch {
    weights: Vec<f64>,
    terms: Vec<f64>,
}

/// Weighted second moment of neighborhood offsets about the center, with
/// background-subtracted intensities as weights. Returns `None` when the
/// neighborhood carries no weight (for example a constant region).
///
/// Taking the moment about the center rather than the weighted centroid is
/// the same as adding every offset's point reflection with equal weight.
pub fn weighted_covariance<I: Intensity + ?Sized>(
    img: &I,
    center: PixelCoord,
    mask: &NeighborhoodMask,
) -> Option<CovMatrix2> {
    weighted_covariance_with(img, center, mask, &mut CovScratch::default())
}

pub(crate) fn weighted_covariance_with<I: Intensity + ?Sized>(
    img: &I,
    center: PixelCoord,
    mask: &NeighborhoodMask,
    scratch: &mut CovScratch,
) -> Option<CovMatrix2> {
    local_weights_into(img, center, mask, &mut scratch.weights);
    covariance_from_weights(mask, &scratch.weights, &mut scratch.terms)
}

pub(crate) fn covariance_from_weights(
    mask: &NeighborhoodMask,
    weights: &[f64],
    terms: &mut Vec<f64>,
) -> Option<CovMatrix2> {
    let total = mask.sym_sum(weights);
    if total <= EMPTY_WEIGHT {
        return None;
    }
    let mut moment = |f: fn(f64, f64) -> f64| {
        terms.clear();
        terms.extend(
            mask.offsets()
                .iter()
                .zip(weights)
                .map(|(&(i, j), &w)| w * f(f64::from(i), f64::from(j))),
        );
        mask.sym_sum(terms) / total
    };
    let sxx = moment(|i, _| i * i);
    let syy = moment(|_, j| j * j);
    let sxy = moment(|i, j| i * j);
    Some(CovMatrix2::new(sxx, sxy, syy))
}
