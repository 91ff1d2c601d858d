//! PGM (P5) and PNG reading and writing.
//!
//! Intensities map linearly between bytes and `[0, 1]` as `v / 255`. Binary
//! images are stored as `{0, 255}`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{quantize, BinaryImage, GrayImage};

/// Images that can be written as 8-bit grayscale.
pub trait ToGrayBytes {
    fn dims(&self) -> (usize, usize);
    fn gray_bytes(&self) -> Vec<u8>;
}

impl ToGrayBytes for GrayImage {
    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn gray_bytes(&self) -> Vec<u8> {
        self.data().iter().map(|&v| quantize(v)).collect()
    }
}

impl ToGrayBytes for BinaryImage {
    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn gray_bytes(&self) -> Vec<u8> {
        self.data()
            .iter()
            .map(|&v| if v == 1 { 255 } else { 0 })
            .collect()
    }
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Reads an 8-bit grayscale PGM (P5) or PNG. Color PNGs are reduced to the
/// average of their RGB channels.
pub fn read_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (width, height, pixels) = if bytes.starts_with(b"P5") {
        decode_pgm(path, &bytes)?
    } else if bytes.starts_with(b"\x89PNG") {
        decode_png(path, &bytes)?
    } else {
        return Err(Error::format(path, "not a PGM (P5) or PNG file"));
    };
    let data = pixels.iter().map(|&b| f64::from(b) / 255.0).collect();
    GrayImage::new(width, height, data)
}

/// Reads an image and interprets every byte above 127 as foreground.
pub fn read_binary_image(path: impl AsRef<Path>) -> Result<BinaryImage> {
    let gray = read_image(path)?;
    Ok(BinaryImage::from_fn(gray.width(), gray.height(), |x, y| {
        gray.get(x, y) > 0.5
    }))
}

/// Writes an 8-bit grayscale image; the format follows the extension
/// (`.png` for PNG, PGM otherwise).
pub fn write_image(img: &impl ToGrayBytes, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (width, height) = img.dims();
    let pixels = img.gray_bytes();
    let encoded = if is_png(path) {
        encode_png(path, width, height, pixels)?
    } else {
        let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
        out.extend_from_slice(&pixels);
        out
    };
    fs::write(path, encoded).map_err(|e| Error::io(path, e))
}

fn decode_pgm(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in header.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or_default();
        *field = text
            .parse()
            .map_err(|_| Error::format(path, "malformed PGM header"))?;
    }
    let [width, height, maxval] = header;
    if maxval == 0 {
        return Err(Error::format(path, "PGM maxval must be positive"));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedBitDepth {
            path: path.into(),
            depth: 16,
        });
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(path, "malformed PGM header"));
    }
    pos += 1;
    let n = width * height;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| Error::format(path, format!("truncated PGM raster, expected {n} bytes")))?;
    let pixels = if maxval == 255 {
        raster.to_vec()
    } else {
        raster
            .iter()
            .map(|&b| {
                ((u32::from(b.min(maxval as u8)) * 255 + maxval as u32 / 2) / maxval as u32) as u8
            })
            .collect()
    };
    Ok((width, height, pixels))
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    use image::{ColorType, DynamicImage};

    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let color = decoded.color();
    let depth = u32::from(color.bits_per_pixel()) / u32::from(color.channel_count());
    if depth != 8 {
        return Err(Error::UnsupportedBitDepth {
            path: path.into(),
            depth,
        });
    }
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels = match (color, decoded) {
        (ColorType::L8, DynamicImage::ImageLuma8(img)) => img.into_raw(),
        (ColorType::La8, DynamicImage::ImageLumaA8(img)) => img.pixels().map(|p| p.0[0]).collect(),
        (_, other) => other
            .to_rgb8()
            .pixels()
            .map(|p| {
                let sum: u32 = p.0.iter().map(|&c| u32::from(c)).sum();
                ((sum + 1) / 3) as u8
            })
            .collect(),
    };
    Ok((width, height, pixels))
}

fn encode_png(path: &Path, width: usize, height: usize, pixels: Vec<u8>) -> Result<Vec<u8>> {
    let buffer = image::GrayImage::from_raw(width as u32, height as u32, pixels)
        .ok_or_else(|| Error::format(path, "raster size does not match dimensions"))?;
    let mut out = std::io::Cursor::new(Vec::new());
    buffer
        .write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(out.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pgm(width: usize, height: usize, maxval: u32, raster: &[u8]) -> Vec<u8> {
        let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
        out.extend_from_slice(raster);
        out
    }

    #[test]
    fn reads_pgm_extremes_and_linear_map() {
        let dir = tempfile::tempdir().unwrap();
        let cases: [(&[u8], &[f64]); 3] = [
            (&[255], &[1.0]),
            (&[0], &[0.0]),
            (&[128, 64], &[128.0 / 255.0, 64.0 / 255.0]),
        ];
        for (k, (raster, expected)) in cases.iter().enumerate() {
            let path = dir.path().join(format!("{k}.pgm"));
            fs::write(&path, pgm(raster.len(), 1, 255, raster)).unwrap();
            let img = read_image(&path).unwrap();
            assert_eq!(img.width(), raster.len());
            assert_eq!(img.height(), 1);
            assert_eq!(img.data(), *expected);
        }
        let img = read_image(dir.path().join("2.pgm")).unwrap();
        assert!((img.get(0, 0) - 0.50196).abs() < 1e-5);
        assert!((img.get(1, 0) - 0.25098).abs() < 1e-5);
    }

    #[test]
    fn pgm_comments_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let mut bytes = b"P5\n# made by hand\n1 1\n255\n".to_vec();
        bytes.push(51);
        fs::write(&path, bytes).unwrap();
        assert_eq!(read_image(&path).unwrap().data(), &[0.2]);
    }

    #[test]
    fn sixteen_bit_pgm_is_rejected_with_depth() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("deep.pgm");
        fs::write(&path, pgm(1, 1, 65535, &[0, 0])).unwrap();
        match read_image(&path) {
            Err(Error::UnsupportedBitDepth { depth, .. }) => assert_eq!(depth, 16),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            read_image("/nonexistent/definitely/missing.pgm"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn writes_binary_as_255_and_gray_rounded() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.pgm");
        write_image(&BinaryImage::new(1, 1, vec![1]).unwrap(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(*bytes.last().unwrap(), 255);

        write_image(&GrayImage::filled(1, 1, 0.5), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(*bytes.last().unwrap(), 128);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        let img = GrayImage::from_fn(7, 5, |x, y| (x * 5 + y) as f64 / 40.0);
        write_image(&img, &path).unwrap();
        let back = read_image(&path).unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            assert!((a - b).abs() <= 0.004);
        }
    }

    #[test]
    fn color_png_is_channel_average() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let rgb = image::RgbImage::from_raw(1, 1, vec![30, 60, 90]).unwrap();
        rgb.save(&path).unwrap();
        assert_eq!(read_image(&path).unwrap().data(), &[60.0 / 255.0]);
    }
}
