use std::fmt::Write as _;

use super::Trajectory;
use crate::error::{invalid, Result};
use crate::stats::{chi_square_gof, ChiSquareTest};

/// Differences smaller than this are treated as flat in [`stability_metrics`].
pub const PLATEAU_TOL: f64 = 1e-12;

/// Equal-width histogram with densities normalized to unit area.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    densities: Vec<f64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("cannot histogram an empty sample"));
        }
        if bins == 0 {
            return Err(invalid("histogram needs at least one bin"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("histogram values must be finite"));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // A single repeated value sits in the middle of a unit-wide span.
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins)
            .map(|i| if i == bins { hi } else { lo + width * i as f64 })
            .collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let i = (((v - lo) / width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
        let n = values.len() as f64;
        let densities = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 / (n * (edges[i + 1] - edges[i])))
            .collect();
        Ok(Self {
            edges,
            counts,
            densities,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `Σ density·width`; one for every histogram this type constructs.
    pub fn area(&self) -> f64 {
        (0..self.bins())
            .map(|i| self.densities[i] * self.bin_width(i))
            .sum()
    }

    /// Pearson χ² against a continuous distribution given by its CDF. The
    /// outer bins absorb the probability mass beyond the histogram range.
    pub fn chi_square(&self, cdf: impl Fn(f64) -> f64, min_expected: f64) -> Result<ChiSquareTest> {
        let k = self.bins();
        let probs: Vec<f64> = (0..k)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { cdf(self.edges[i]) };
                let hi = if i + 1 == k { 1.0 } else { cdf(self.edges[i + 1]) };
                hi - lo
            })
            .collect();
        chi_square_gof(&self.counts, &probs, min_expected)
    }

    /// `bin_left,bin_right,count,density` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,count,density\n");
        for i in 0..self.bins() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.edges[i],
                self.edges[i + 1],
                self.counts[i],
                self.densities[i]
            );
        }
        out
    }

    pub fn to_svg(&self, title: &str) -> String {
        crate::svg::bar_chart(&self.edges, &self.densities, title)
    }
}

pub fn make_histogram(traj: &Trajectory, bins: usize) -> Result<Histogram> {
    Histogram::from_values(traj.values(), bins)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityMetrics {
    /// Midpoint of the highest-density bin (lowest index on ties).
    pub mode_center: f64,
    /// Density-weighted standard deviation of the bin centers.
    pub spread: f64,
    /// Densities never rise again after they start to fall.
    pub unimodal: bool,
}

pub fn stability_metrics(hist: &Histogram) -> StabilityMetrics {
    let centers = hist.centers();
    let d = hist.densities();
    let mut mode = 0;
    for i in 1..d.len() {
        if d[i] > d[mode] {
            mode = i;
        }
    }
    let weights: Vec<f64> = (0..d.len()).map(|i| d[i] * hist.bin_width(i)).collect();
    let total: f64 = weights.iter().sum();
    let mean = centers.iter().zip(&weights).map(|(c, w)| c * w).sum::<f64>() / total;
    let var = centers
        .iter()
        .zip(&weights)
        .map(|(c, w)| w * (c - mean) * (c - mean))
        .sum::<f64>()
        / total;

    let mut falling = false;
    let mut unimodal = true;
    for w in d.windows(2) {
        let diff = w[1] - w[0];
        if diff < -PLATEAU_TOL {
            falling = true;
        } else if diff > PLATEAU_TOL && falling {
            unimodal = false;
            break;
        }
    }
    StabilityMetrics {
        mode_center: centers[mode],
        spread: var.sqrt(),
        unimodal,
    }
}
