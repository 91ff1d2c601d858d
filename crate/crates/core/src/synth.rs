//! Synthetic test imagery: dashed curve strokes over a flat or speckled
//! background with additive Gaussian noise.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{read_entries, Entry};
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// A stroke centerline. Coordinates are pixel centers; strokes may leave the
/// canvas and are clipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stroke {
    Segment {
        start: (f64, f64),
        end: (f64, f64),
        thickness: f64,
    },
    /// Circular arc from `start_deg` to `end_deg` (counterclockwise in image
    /// coordinates, i.e. with y pointing down).
    Arc {
        center: (f64, f64),
        radius: f64,
        start_deg: f64,
        end_deg: f64,
        thickness: f64,
    },
}

impl Stroke {
    /// Arc-length position of the closest centerline point and the distance
    /// to it, or `None` if the projection falls outside the stroke.
    fn project(&self, px: f64, py: f64) -> Option<(f64, f64)> {
        match *self {
            Stroke::Segment { start, end, .. } => {
                let (dx, dy) = (end.0 - start.0, end.1 - start.1);
                let len = dx.hypot(dy);
                if len == 0.0 {
                    let d = (px - start.0).hypot(py - start.1);
                    return Some((0.0, d));
                }
                let (ux, uy) = (dx / len, dy / len);
                let (rx, ry) = (px - start.0, py - start.1);
                let s = rx * ux + ry * uy;
                if !(0.0..=len).contains(&s) {
                    return None;
                }
                Some((s, (rx * uy - ry * ux).abs()))
            }
            Stroke::Arc {
                center,
                radius,
                start_deg,
                end_deg,
                ..
            } => {
                let (rx, ry) = (px - center.0, py - center.1);
                let (lo, hi) = (start_deg.min(end_deg), start_deg.max(end_deg));
                let mut theta = ry.atan2(rx).to_degrees();
                while theta < lo {
                    theta += 360.0;
                }
                if theta > hi {
                    return None;
                }
                let s = (theta - start_deg).abs() * PI / 180.0 * radius;
                Some((s, (rx.hypot(ry) - radius).abs()))
            }
        }
    }

    fn thickness(&self) -> f64 {
        match *self {
            Stroke::Segment { thickness, .. } | Stroke::Arc { thickness, .. } => thickness,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    Flat(f64),
    /// Isolated bright dots: each pixel is lit to `amplitude` with
    /// probability `density`.
    Speckle {
        density: f64,
        amplitude: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub strokes: Vec<Stroke>,
    /// `(dash, gap)` lengths along each stroke; solid when `None`.
    pub gap_pattern: Option<(f64, f64)>,
    pub foreground: f64,
    pub background: Background,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            strokes: Vec::new(),
            gap_pattern: None,
            foreground: 1.0,
            background: Background::Flat(0.0),
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, what: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Parameter(format!("{what} {v} outside [0, 1]")))
            }
        };
        unit(self.foreground, "foreground level")?;
        match self.background {
            Background::Flat(level) => unit(level, "background level")?,
            Background::Speckle {
                density, amplitude, ..
            } => {
                unit(density, "speckle density")?;
                unit(amplitude, "speckle amplitude")?;
            }
        }
        if let Some((dash, gap)) = self.gap_pattern {
            if !(dash >= 1.0 && gap >= 1.0) {
                return Err(Error::Parameter("dash and gap lengths must be >= 1".into()));
            }
        }
        if self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(Error::Parameter("noise sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// Reads a spec from `key = value` lines. Recognized keys: `width`,
    /// `height`, `foreground`, `background` (`flat <level>` or
    /// `speckle <density> <amplitude> <seed>`), `dash` (`<on> <off>`),
    /// `noise_sigma`, `seed`, and repeatable `segment`
    /// (`x0 y0 x1 y1 thickness`) and `arc`
    /// (`cx cy radius start_deg end_deg thickness`).
    pub fn from_entries(entries: &[Entry]) -> Result<Self> {
        let mut spec = SynthSpec::default();
        for e in entries {
            match e.key.as_str() {
                "width" => spec.width = e.parse()?,
                "height" => spec.height = e.parse()?,
                "foreground" => spec.foreground = e.parse()?,
                "noise_sigma" => spec.noise_sigma = e.parse()?,
                "seed" => spec.seed = e.parse()?,
                "dash" => {
                    let f: Vec<f64> = e.fields()?;
                    let [dash, gap] = f[..] else {
                        return Err(e.error("dash expects `<on> <off>`"));
                    };
                    spec.gap_pattern = Some((dash, gap));
                }
                "background" => {
                    let mut parts = e.value.split_whitespace();
                    let kind = parts.next().unwrap_or("");
                    let rest = Entry {
                        value: parts.collect::<Vec<_>>().join(" "),
                        ..e.clone()
                    };
                    spec.background = match kind {
                        "flat" => Background::Flat(rest.parse()?),
                        "speckle" => {
                            let f: Vec<f64> = rest.fields()?;
                            let [density, amplitude, seed] = f[..] else {
                                return Err(
                                    e.error("speckle expects `<density> <amplitude> <seed>`")
                                );
                            };
                            Background::Speckle {
                                density,
                                amplitude,
                                seed: seed as u64,
                            }
                        }
                        other => return Err(e.error(format!("unknown background `{other}`"))),
                    };
                }
                "segment" => {
                    let f: Vec<f64> = e.fields()?;
                    let [x0, y0, x1, y1, thickness] = f[..] else {
                        return Err(e.error("segment expects `x0 y0 x1 y1 thickness`"));
                    };
                    spec.strokes.push(Stroke::Segment {
                        start: (x0, y0),
                        end: (x1, y1),
                        thickness,
                    });
                }
                "arc" => {
                    let f: Vec<f64> = e.fields()?;
                    let [cx, cy, radius, start_deg, end_deg, thickness] = f[..] else {
                        return Err(
                            e.error("arc expects `cx cy radius start_deg end_deg thickness`")
                        );
                    };
                    spec.strokes.push(Stroke::Arc {
                        center: (cx, cy),
                        radius,
                        start_deg,
                        end_deg,
                        thickness,
                    });
                }
                other => return Err(e.error(format!("unknown key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_entries(&read_entries(path.as_ref())?)
    }

    /// Whether the noise-free foreground covers pixel `(x, y)`.
    pub fn covers(&self, x: usize, y: usize) -> bool {
        let (px, py) = (x as f64, y as f64);
        self.strokes.iter().any(|stroke| {
            let Some((s, d)) = stroke.project(px, py) else {
                return false;
            };
            if d > stroke.thickness() / 2.0 {
                return false;
            }
            match self.gap_pattern {
                Some((dash, gap)) => s.rem_euclid(dash + gap) < dash,
                None => true,
            }
        })
    }
}

/// Renders the spec. Deterministic in the spec, including its seeds.
pub fn synthesize(spec: &SynthSpec) -> Result<GrayImage> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut base: Vec<f64> = match spec.background {
        Background::Flat(level) => vec![level; w * h],
        Background::Speckle {
            density,
            amplitude,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..w * h)
                .map(|_| {
                    if rng.random::<f64>() < density {
                        amplitude
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    };
    for y in 0..h {
        for x in 0..w {
            if spec.covers(x, y) {
                base[y * w + x] = spec.foreground;
            }
        }
    }
    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal =
            Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Parameter(e.to_string()))?;
        for v in base.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok(GrayImage::from_fn(w, h, |x, y| base[y * w + x]))
}
