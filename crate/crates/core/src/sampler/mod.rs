//! Classical stochastic simulations: a one-dimensional ideal gas under a
//! slowly moving wall, a thermostatted piston, position histograms, and
//! equilibrium entropy traces along a length schedule.

mod entropy;
mod gas;
mod histogram;
mod piston;

pub use entropy::entropy_trace;
pub use gas::{init_gas, partition_particles, quasistatic_compress, Compression, ParticleState};
pub use histogram::{make_histogram, stability_metrics, Histogram, StabilityMetrics};
pub use piston::{sample_piston, summarize_piston, PistonModel, PistonSummary, SUMMARY_BATCHES};

use std::fmt::Write as _;

use crate::error::{invalid, Result};

/// Time series of a scalar (piston position, entropy, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    label: String,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid(format!(
                "trajectory has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("trajectory times must be strictly increasing"));
        }
        Ok(Self {
            times,
            values,
            label: label.into(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Every `stride`-th sample, starting with the first.
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        Self {
            times: self.times.iter().copied().step_by(stride).collect(),
            values: self.values.iter().copied().step_by(stride).collect(),
            label: self.label.clone(),
        }
    }

    /// `t,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{v}");
        }
        out
    }

    pub fn to_svg(&self) -> String {
        crate::svg::line_chart(&self.times, &self.values, &self.label)
    }
}
