//! Histogram thresholding.
//!
//! Both thresholders scan the 255 cut points between adjacent byte bins. A
//! cut after bin `t` maps to the intensity threshold `(t + 0.5) / 255`, so
//! thresholding a quantized copy of an image gives the same result as
//! thresholding the original.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::{quantize, BinaryImage, GrayImage};

/// Variance floor for a cluster with no spread: uniform quantization noise
/// of one byte step.
pub const CEC_VARIANCE_FLOOR: f64 = 1.0 / (255.0 * 255.0 * 12.0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
    total: u64,
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Result<Self> {
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::Parameter("histogram is empty".into()));
        }
        Ok(Self { counts, total })
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn populated_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Counts pixels per byte bin (`round(v * 255)`, half up).
pub fn histogram(img: &GrayImage) -> Result<Histogram256> {
    let mut counts = [0u64; 256];
    for &v in img.data() {
        counts[quantize(v) as usize] += 1;
    }
    Histogram256::from_counts(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMethod {
    #[default]
    Cec,
    Otsu,
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMethod::Cec => "cec",
            ThresholdMethod::Otsu => "otsu",
        })
    }
}

impl FromStr for ThresholdMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cec" => Ok(ThresholdMethod::Cec),
            "otsu" => Ok(ThresholdMethod::Otsu),
            other => Err(Error::Parameter(format!(
                "unknown threshold method `{other}` (expected cec or otsu)"
            ))),
        }
    }
}

/// Weight, mean and variance of one side of a cut, in intensity units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterStats {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdModel {
    pub threshold: f64,
    /// Last bin of the lower class.
    pub cut_bin: u8,
    pub method: ThresholdMethod,
    /// Lower and upper cluster of the winning CEC partition.
    pub cluster_stats: Option<[ClusterStats; 2]>,
}

/// Prefix sums of count, bin-weighted count and squared-bin-weighted count.
/// Integer valued, so scaling every count by the same factor scales each
/// entry exactly.
struct Moments {
    n: [f64; 257],
    s1: [f64; 257],
    s2: [f64; 257],
}

impl Moments {
    fn new(h: &Histogram256) -> Self {
        let mut m = Moments {
            n: [0.0; 257],
            s1: [0.0; 257],
            s2: [0.0; 257],
        };
        for (b, &c) in h.counts.iter().enumerate() {
            let c = c as f64;
            let b = b as f64;
            m.n[b as usize + 1] = m.n[b as usize] + c;
            m.s1[b as usize + 1] = m.s1[b as usize] + c * b;
            m.s2[b as usize + 1] = m.s2[b as usize] + c * b * b;
        }
        m
    }

    /// Stats over bins `lo..hi` in intensity units, or `None` if empty.
    fn range(&self, lo: usize, hi: usize, total: f64) -> Option<ClusterStats> {
        let n = self.n[hi] - self.n[lo];
        if n <= 0.0 {
            return None;
        }
        let mean_bin = (self.s1[hi] - self.s1[lo]) / n;
        let var_bin = ((self.s2[hi] - self.s2[lo]) / n - mean_bin * mean_bin).max(0.0);
        Some(ClusterStats {
            weight: n / total,
            mean: mean_bin / 255.0,
            variance: var_bin / (255.0 * 255.0),
        })
    }

    /// Lower (`0..=t`) and upper (`t+1..=255`) cluster for every cut with
    /// both sides populated.
    fn cuts(&self, total: f64) -> impl Iterator<Item = (u8, ClusterStats, ClusterStats)> + '_ {
        (0..255usize).filter_map(move |t| {
            let lo = self.range(0, t + 1, total)?;
            let hi = self.range(t + 1, 256, total)?;
            Some((t as u8, lo, hi))
        })
    }
}

fn require_two_bins(h: &Histogram256) -> Result<()> {
    if h.total < 2 || h.populated_bins() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    Ok(())
}

fn threshold_of(cut: u8) -> f64 {
    (f64::from(cut) + 0.5) / 255.0
}

/// Otsu's threshold: maximizes the between-class variance; ties go to the
/// smallest cut.
pub fn otsu_threshold(h: &Histogram256) -> Result<ThresholdModel> {
    require_two_bins(h)?;
    let m = Moments::new(h);
    let mut best: Option<(u8, f64)> = None;
    for (t, lo, hi) in m.cuts(h.total as f64) {
        let d = lo.mean - hi.mean;
        let score = lo.weight * hi.weight * d * d;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((t, score));
        }
    }
    let (cut, _) = best.ok_or(Error::DegenerateHistogram)?;
    Ok(ThresholdModel {
        threshold: threshold_of(cut),
        cut_bin: cut,
        method: ThresholdMethod::Otsu,
        cluster_stats: None,
    })
}

/// Cross-entropy clustering cost of a two-cluster split:
/// `sum p * (-ln p + ln(2 pi e var) / 2)`.
pub fn cec_cost(clusters: &[ClusterStats]) -> f64 {
    clusters
        .iter()
        .map(|c| {
            let var = c.variance.max(CEC_VARIANCE_FLOOR);
            c.weight * (-c.weight.ln() + 0.5 * (2.0 * PI * E * var).ln())
        })
        .sum()
}

/// Two-cluster one-dimensional cross-entropy clustering of the histogram.
///
/// Optimal hard two-cluster partitions of a line are intervals, so every cut
/// is scored and the cheapest kept (ties to the smallest cut).
pub fn cec_threshold_1d(h: &Histogram256) -> Result<ThresholdModel> {
    require_two_bins(h)?;
    let m = Moments::new(h);
    let mut best: Option<(u8, f64, [ClusterStats; 2])> = None;
    for (t, lo, hi) in m.cuts(h.total as f64) {
        let cost = cec_cost(&[lo, hi]);
        if best.as_ref().is_none_or(|&(_, c, _)| cost < c) {
            best = Some((t, cost, [lo, hi]));
        }
    }
    let (cut, _, stats) = best.ok_or(Error::DegenerateHistogram)?;
    Ok(ThresholdModel {
        threshold: threshold_of(cut),
        cut_bin: cut,
        method: ThresholdMethod::Cec,
        cluster_stats: Some(stats),
    })
}

pub fn fit_threshold(h: &Histogram256, method: ThresholdMethod) -> Result<ThresholdModel> {
    match method {
        ThresholdMethod::Cec => cec_threshold_1d(h),
        ThresholdMethod::Otsu => otsu_threshold(h),
    }
}

/// Foreground is strictly brighter than the threshold.
pub fn apply_threshold(img: &GrayImage, model: &ThresholdModel) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        img.get(x, y) > model.threshold
    })
}

/// Like [`apply_threshold`], with the dark side as foreground when `invert`.
pub fn binarize(img: &GrayImage, model: &ThresholdModel, invert: bool) -> BinaryImage {
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        (img.get(x, y) > model.threshold) != invert
    })
}
