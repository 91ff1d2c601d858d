//! Image containers shared by every stage.
//!
//! Both containers are row-major with `x` the column and `y` the row. Reads
//! outside the image domain return zero, so neighborhood code never has to
//! special-case the border.

use crate::error::{Error, Result};

/// Signed pixel coordinate. `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub x: i64,
    pub y: i64,
}

impl PixelCoord {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub const fn offset(self, dx: i64, dy: i64) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
        }
    }
}

/// Zero-extended intensity access, implemented by both image kinds.
pub trait Intensity: Sync {
    fn dims(&self) -> (usize, usize);

    /// Intensity at `(x, y)`, or 0 outside the domain.
    fn intensity(&self, x: i64, y: i64) -> f64;

    fn contains(&self, x: i64, y: i64) -> bool {
        let (w, h) = self.dims();
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h
    }
}

/// Grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major data, rejecting out-of-range or
    /// non-finite intensities.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape {
                expected: (width, height),
                found: (data.len(), 1),
            });
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parameter(format!("intensity {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!((0.0..=1.0).contains(&value), "intensity outside [0, 1]");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(x, y)` per pixel; results are clamped
    /// to `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(clamp_unit(f(x, y)));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = clamp_unit(value);
    }

    /// Reads `p` with zero extension outside the domain.
    pub fn sample_zero_ext(&self, p: PixelCoord) -> f64 {
        self.intensity(p.x, p.y)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    /// Pixels where `mask` is set are replaced by `color`; the rest are copied.
    pub fn overlay(&self, mask: &BinaryImage, color: f64) -> Result<Self> {
        if mask.dims() != self.dims() {
            return Err(Error::Shape {
                expected: self.dims(),
                found: mask.dims(),
            });
        }
        let color = clamp_unit(color);
        let data = self
            .data
            .iter()
            .zip(mask.data())
            .map(|(&v, &m)| if m == 1 { color } else { v })
            .collect();
        Ok(Self {
            width: self.width,
            height: self.height,
            data,
        })
    }
}

impl Intensity for GrayImage {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    fn intensity(&self, x: i64, y: i64) -> f64 {
        if self.contains(x, y) {
            self.data[y as usize * self.width + x as usize]
        } else {
            0.0
        }
    }
}

/// Binary image holding values in `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Shape {
                expected: (width, height),
                found: (data.len(), 1),
            });
        }
        if let Some(v) = data.iter().find(|&&v| v > 1) {
            return Err(Error::Parameter(format!("binary value {v} is not 0 or 1")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(f(x, y)));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] == 1
    }

    /// Zero-extended read.
    #[inline]
    pub fn at(&self, x: i64, y: i64) -> bool {
        self.contains(x, y) && self.data[y as usize * self.width + x as usize] == 1
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = u8::from(value);
    }

    /// Sets `(x, y)` if it lies inside the domain; silently ignores the rest.
    pub fn set_if_inside(&mut self, x: i64, y: i64) {
        if self.contains(x, y) {
            self.data[y as usize * self.width + x as usize] = 1;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Iterates the coordinates of set pixels in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == 1)
            .map(move |(k, _)| PixelCoord::new((k % self.width) as i64, (k / self.width) as i64))
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.dims() == other.dims() && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

impl Intensity for BinaryImage {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    fn intensity(&self, x: i64, y: i64) -> f64 {
        if self.at(x, y) {
            1.0
        } else {
            0.0
        }
    }
}

pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

/// Quantizes an intensity to a byte with round-half-up.
pub fn quantize(v: f64) -> u8 {
    (clamp_unit(v) * 255.0 + 0.5).floor() as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_extension() {
        let img = GrayImage::filled(2, 2, 1.0);
        assert_eq!(img.sample_zero_ext(PixelCoord::new(0, 0)), 1.0);
        assert_eq!(img.sample_zero_ext(PixelCoord::new(-1, 0)), 0.0);
        assert_eq!(img.sample_zero_ext(PixelCoord::new(5, 5)), 0.0);
        assert_eq!(img.sample_zero_ext(PixelCoord::new(1, 2)), 0.0);
    }

    #[test]
    fn rejects_out_of_range_intensity() {
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(GrayImage::new(2, 1, vec![0.5]).is_err());
        assert!(BinaryImage::new(1, 1, vec![2]).is_err());
    }

    #[test]
    fn overlay_rules() {
        let base = GrayImage::new(2, 1, vec![0.2, 0.3]).unwrap();
        let empty = BinaryImage::zeros(2, 1);
        assert_eq!(base.overlay(&empty, 1.0).unwrap(), base);

        let full = BinaryImage::new(2, 1, vec![1, 1]).unwrap();
        assert_eq!(base.overlay(&full, 1.0).unwrap().data(), &[1.0, 1.0]);

        let mask = BinaryImage::new(2, 1, vec![1, 0]).unwrap();
        assert_eq!(base.overlay(&mask, 1.0).unwrap().data(), &[1.0, 0.3]);

        let wrong = BinaryImage::zeros(1, 2);
        assert!(matches!(
            base.overlay(&wrong, 1.0),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn quantize_rounds_half_up() {
        assert_eq!(quantize(0.5), 128);
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(1.0), 255);
        assert_eq!(quantize(128.0 / 255.0), 128);
    }

    #[test]
    fn transpose_swaps_axes() {
        let img = BinaryImage::from_fn(3, 2, |x, y| x == 2 && y == 0);
        let t = img.transpose();
        assert_eq!((t.width(), t.height()), (2, 3));
        assert!(t.get(0, 2));
        assert_eq!(t.count_ones(), 1);
    }
}
