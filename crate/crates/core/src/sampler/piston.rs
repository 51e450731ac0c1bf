use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Histogram, StabilityMetrics, Trajectory};
use crate::error::{invalid, Result};
use crate::spectrum::UnitSystem;
use crate::stats::{self, ChiSquareTest};

/// Number of batches used for the batch-means standard errors.
pub const SUMMARY_BATCHES: usize = 100;

/// Overdamped piston in a harmonic well `κq²/2`, coupled to a bath at `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PistonModel {
    pub stiffness: f64,
    pub temperature: f64,
    pub friction: f64,
    pub time_step: f64,
    pub burn_in: usize,
    pub steps: usize,
}

impl PistonModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stiffness", self.stiffness),
            ("temperature", self.temperature),
            ("friction", self.friction),
            ("time_step", self.time_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let ratio = self.relaxation_per_step();
        if ratio >= 2.0 {
            return Err(invalid(format!(
                "unstable integration: stiffness·time_step/friction = {ratio} (must be < 2)"
            )));
        }
        Ok(())
    }

    /// `κΔt/γ`, the fraction of the displacement relaxed per step.
    pub fn relaxation_per_step(&self) -> f64 {
        self.stiffness * self.time_step / self.friction
    }

    /// Stationary variance `k_B T/κ` of the continuous-time process.
    pub fn stationary_variance(&self, units: &UnitSystem) -> f64 {
        units.k_boltzmann() * self.temperature / self.stiffness
    }

    /// Step stride spanning five relaxation times `γ/κ`; samples this far
    /// apart are close to independent.
    pub fn decorrelation_stride(&self) -> usize {
        (5.0 / self.relaxation_per_step()).ceil() as usize
    }
}

/// Euler–Maruyama integration of `dq = −(κq/γ)dt + √(2k_BT/γ) dW` from `q = 0`.
/// The first `burn_in` positions are discarded and the next `steps` are returned
/// with time stamps `0, Δt, 2Δt, …`.
pub fn sample_piston(model: &PistonModel, units: &UnitSystem, seed: u64) -> Result<Trajectory> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drift = model.relaxation_per_step();
    let noise = (2.0 * units.k_boltzmann() * model.temperature * model.time_step / model.friction)
        .sqrt();
    let mut q = 0.0f64;
    let mut step = |rng: &mut ChaCha8Rng| {
        let xi: f64 = StandardNormal.sample(rng);
        q = q - drift * q + noise * xi;
        q
    };
    for _ in 0..model.burn_in {
        step(&mut rng);
    }
    let values: Vec<f64> = (0..model.steps).map(|_| step(&mut rng)).collect();
    let times = (0..model.steps).map(|i| i as f64 * model.time_step).collect();
    Trajectory::new(times, values, "piston position")
}

/// Moments of a stationary piston trajectory and a Gaussian goodness of fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PistonSummary {
    pub samples: usize,
    pub mean: f64,
    pub mean_standard_error: f64,
    pub variance: f64,
    pub variance_standard_error: f64,
    pub expected_variance: f64,
    /// Thinned samples entering the χ² test.
    pub chi_square_samples: usize,
    /// `None` when the thinned series is too short to form two bins.
    pub chi_square: Option<ChiSquareTest>,
    pub mode_center: f64,
    pub spread: f64,
    pub unimodal: bool,
}

/// Batch-means errors on the raw series; the χ² test against
/// `N(0, k_BT/κ)` uses the trajectory thinned by
/// [`PistonModel::decorrelation_stride`] so counts are close to independent.
pub fn summarize_piston(
    traj: &Trajectory,
    model: &PistonModel,
    units: &UnitSystem,
    bins: usize,
) -> Result<PistonSummary> {
    let q = traj.values();
    if q.len() < 2 * SUMMARY_BATCHES {
        return Err(invalid(format!(
            "need at least {} samples for a summary, got {}",
            2 * SUMMARY_BATCHES,
            q.len()
        )));
    }
    let mean = stats::mean(q);
    let sq: Vec<f64> = q.iter().map(|v| (v - mean) * (v - mean)).collect();
    let expected_variance = model.stationary_variance(units);
    let thinned = traj.thinned(model.decorrelation_stride());
    let hist = Histogram::from_values(thinned.values(), bins)?;
    let normal = Normal::new(0.0, expected_variance.sqrt())
        .map_err(|e| invalid(format!("stationary distribution: {e}")))?;
    let chi_square = hist.chi_square(|v| normal.cdf(v), 5.0).ok();
    let StabilityMetrics {
        mode_center,
        spread,
        unimodal,
    } = super::stability_metrics(&Histogram::from_values(q, bins)?);
    Ok(PistonSummary {
        samples: q.len(),
        mean,
        mean_standard_error: stats::batch_means_standard_error(q, SUMMARY_BATCHES),
        variance: stats::variance(q),
        variance_standard_error: stats::batch_means_standard_error(&sq, SUMMARY_BATCHES),
        expected_variance,
        chi_square_samples: thinned.len(),
        chi_square,
        mode_center,
        spread,
        unimodal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(steps: usize) -> PistonModel {
        PistonModel {
            stiffness: 1.0,
            temperature: 1.0,
            friction: 1.0,
            time_step: 0.01,
            burn_in: 1_000,
            steps,
        }
    }

    #[test]
    fn rejects_unstable_step() {
        let mut m = model(10);
        m.time_step = 2.0;
        assert!(sample_piston(&m, &UnitSystem::natural(), 0).is_err());
        m.time_step = -0.1;
        assert!(m.validate().is_err());
    }

    #[test]
    fn seeded_trajectory_is_repeatable() {
        let u = UnitSystem::natural();
        assert_eq!(sample_piston(&model(500), &u, 8).unwrap(), sample_piston(&model(500), &u, 8).unwrap());
        assert_ne!(sample_piston(&model(500), &u, 8).unwrap(), sample_piston(&model(500), &u, 9).unwrap());
    }

    #[test]
    fn uniform_time_stamps() {
        let t = sample_piston(&model(4), &UnitSystem::natural(), 1).unwrap();
        assert_eq!(t.times(), &[0.0, 0.01, 0.02, 0.03]);
        assert_eq!(model(4).decorrelation_stride(), 500);
    }

    #[test]
    fn summary_of_a_long_run() {
        let units = UnitSystem::natural();
        let m = model(200_000);
        let tr = sample_piston(&m, &units, 21).unwrap();
        let s = summarize_piston(&tr, &m, &units, 30).unwrap();
        assert!(s.mean.abs() < 4.0 * s.mean_standard_error, "{s:?}");
        assert!((s.variance - 1.0).abs() < 4.0 * s.variance_standard_error, "{s:?}");
        assert_eq!(s.chi_square_samples, 200_000 / 500);
        assert!(s.chi_square.unwrap().p_value > 1e-4);
        assert!(summarize_piston(&sample_piston(&model(50), &units, 0).unwrap(), &m, &units, 10).is_err());
        let short = summarize_piston(&sample_piston(&model(3000), &units, 0).unwrap(), &m, &units, 10).unwrap();
        assert!(short.chi_square.is_none());
    }
}
