//! One Szilard cycle: insert a wall, measure the side, extract work by a
//! quasistatic isothermal withdrawal, erase the one-bit memory.
//!
//! Measurement is ideal and free. Erasure is charged at the generalized
//! Landauer cost `k_B T·H(p)`, which closes the ledger exactly for any wall
//! position. In the quantum regime the particle occupies the split spectrum
//! thermally, and inserting the wall raises the free energy; classically the
//! insertion is free.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectrum::{
    box_thermo, split_spectrum, thermo_summary, BoxGeometry, ThermalState, UnitSystem,
    DEFAULT_REL_TOL,
};

/// Sub-boxes narrower than this fraction of the box are rejected.
pub const MIN_SUBBOX_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Quantum,
    Classical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Quantum => "quantum",
            Regime::Classical => "classical",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "quantum" => Ok(Regime::Quantum),
            "classical" => Ok(Regime::Classical),
            other => Err(format!("unknown regime `{other}` (expected quantum or classical)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub side: Side,
    /// Probability of the realized side.
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleConfig {
    geom: BoxGeometry,
    state: ThermalState,
    units: UnitSystem,
    regime: Regime,
    charge_erasure: bool,
    rel_tol: f64,
}

impl CycleConfig {
    pub fn new(
        geom: BoxGeometry,
        state: ThermalState,
        units: UnitSystem,
        regime: Regime,
        charge_erasure: bool,
    ) -> Result<Self> {
        Self::with_tolerance(geom, state, units, regime, charge_erasure, DEFAULT_REL_TOL)
    }

    pub fn with_tolerance(
        geom: BoxGeometry,
        state: ThermalState,
        units: UnitSystem,
        regime: Regime,
        charge_erasure: bool,
        rel_tol: f64,
    ) -> Result<Self> {
        let x = geom
            .wall_fraction()
            .ok_or_else(|| invalid("cycle geometry needs a wall fraction"))?;
        if x.min(1.0 - x) < MIN_SUBBOX_FRACTION {
            return Err(invalid(format!(
                "wall fraction {x} leaves a sub-box narrower than {MIN_SUBBOX_FRACTION} of the box"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(invalid(format!("rel_tol must be positive, got {rel_tol}")));
        }
        Ok(Self {
            geom,
            state,
            units,
            regime,
            charge_erasure,
            rel_tol,
        })
    }

    /// Natural units, box length 1.
    pub fn natural(wall_fraction: f64, temperature: f64, regime: Regime) -> Result<Self> {
        let units = UnitSystem::natural();
        Self::new(
            BoxGeometry::with_wall(1.0, wall_fraction)?,
            ThermalState::new(temperature, &units)?,
            units,
            regime,
            true,
        )
    }

    pub fn with_erasure_charged(mut self, charge: bool) -> Self {
        self.charge_erasure = charge;
        self
    }

    pub fn wall_fraction(&self) -> f64 {
        self.geom.wall_fraction().expect("validated on construction")
    }

    pub fn geom(&self) -> &BoxGeometry {
        &self.geom
    }

    pub fn state(&self) -> &ThermalState {
        &self.state
    }

    pub fn units(&self) -> &UnitSystem {
        &self.units
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn charge_erasure(&self) -> bool {
        self.charge_erasure
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    fn kt(&self) -> f64 {
        self.units.k_boltzmann() * self.state.temperature()
    }
}

/// Free energies of the whole box, the split box, and each sub-box.
#[derive(Debug, Clone, Copy)]
struct CycleThermo {
    whole: f64,
    split: f64,
    side_a: f64,
    side_b: f64,
    p_a: f64,
    p_b: f64,
}

impl CycleThermo {
    fn compute(config: &CycleConfig) -> Result<Self> {
        let kt = config.kt();
        let (a, b) = config.geom.sub_widths().expect("validated on construction");
        let length = config.geom.length();
        match config.regime {
            Regime::Classical => {
                // F(w) = −k_B T ln(w·c(T)); the constant cancels in every difference.
                let x = config.wall_fraction();
                let f = |w: f64| -kt * w.ln();
                Ok(Self {
                    whole: f(length),
                    split: f(a + b),
                    side_a: f(a),
                    side_b: f(b),
                    p_a: x,
                    p_b: 1.0 - x,
                })
            }
            Regime::Quantum => {
                let (state, units, tol) = (&config.state, &config.units, config.rel_tol);
                let whole = box_thermo(&config.geom.whole(), state, units, tol)?;
                let sub_a = box_thermo(&BoxGeometry::new(a)?, state, units, tol)?;
                let sub_b = box_thermo(&BoxGeometry::new(b)?, state, units, tol)?;
                let split = thermo_summary(&split_spectrum(&config.geom, units, 1)?, state, units, tol)?;
                let gap = sub_b.ln_z - sub_a.ln_z;
                Ok(Self {
                    whole: whole.free_energy,
                    split: split.free_energy,
                    side_a: sub_a.free_energy,
                    side_b: sub_b.free_energy,
                    p_a: 1.0 / (1.0 + gap.exp()),
                    p_b: 1.0 / (1.0 + (-gap).exp()),
                })
            }
        }
    }

    fn side(&self, side: Side) -> f64 {
        match side {
            Side::A => self.side_a,
            Side::B => self.side_b,
        }
    }

    fn work(&self, side: Side) -> f64 {
        self.side(side) - self.whole
    }
}

/// `(p_A, p_B)`: probabilities of finding the particle left or right of the wall.
pub fn side_probabilities(config: &CycleConfig) -> Result<(f64, f64)> {
    let t = CycleThermo::compute(config)?;
    Ok((t.p_a, t.p_b))
}

/// Free-energy increase `F_split − F_whole` from inserting the wall.
pub fn insertion_cost(config: &CycleConfig) -> Result<f64> {
    let t = CycleThermo::compute(config)?;
    Ok(match config.regime {
        Regime::Classical => 0.0,
        Regime::Quantum => t.split - t.whole,
    })
}

/// Quasistatic isothermal work `F(w_side) − F(L)` extracted by letting the
/// measured sub-box expand back to the full box.
pub fn extraction_work(side: Side, config: &CycleConfig) -> Result<f64> {
    Ok(CycleThermo::compute(config)?.work(side))
}

/// Natural-log binary entropy, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Landauer cost `k_B T·H(p)` of resetting a bit whose value is 1 with probability `p`.
pub fn erasure_cost(p: f64, state: &ThermalState, units: &UnitSystem) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(units.k_boltzmann() * state.temperature() * binary_entropy(p))
}

/// Per-phase energy accounting of one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleLedger {
    pub regime: Regime,
    pub wall_fraction: f64,
    pub temperature: f64,
    pub insertion_cost: f64,
    pub measurement_cost: f64,
    pub extraction_work: f64,
    pub erasure_cost: f64,
    pub erasure_charged: bool,
    pub net_work: f64,
    pub record: Option<MeasurementRecord>,
    pub expected: bool,
}

impl CycleLedger {
    fn assemble(
        config: &CycleConfig,
        insertion_cost: f64,
        extraction_work: f64,
        erasure_cost: f64,
        record: Option<MeasurementRecord>,
    ) -> Self {
        let measurement_cost = 0.0;
        let charged = if config.charge_erasure { erasure_cost } else { 0.0 };
        Self {
            regime: config.regime,
            wall_fraction: config.wall_fraction(),
            temperature: config.state.temperature(),
            insertion_cost,
            measurement_cost,
            extraction_work,
            erasure_cost,
            erasure_charged: config.charge_erasure,
            net_work: extraction_work - insertion_cost - measurement_cost - charged,
            record,
            expected: record.is_none(),
        }
    }

    /// Work left after insertion and measurement, before any erasure charge.
    pub fn net_before_erasure(&self) -> f64 {
        self.extraction_work - self.insertion_cost - self.measurement_cost
    }

    /// Entry with the largest magnitude among every stored energy.
    pub fn largest_entry(&self) -> (&'static str, f64) {
        [
            ("insertion_cost", self.insertion_cost),
            ("measurement_cost", self.measurement_cost),
            ("extraction_work", self.extraction_work),
            ("erasure_cost", self.erasure_cost),
            ("net_work", self.net_work),
        ]
        .into_iter()
        .fold(("insertion_cost", self.insertion_cost), |best, e| {
            if e.1.abs() > best.1.abs() {
                e
            } else {
                best
            }
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("ledger serializes")
    }
}

impl Serialize for CycleLedger {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            regime: Regime,
            x: f64,
            #[serde(rename = "T")]
            temperature: f64,
            insertion_cost: f64,
            measurement_cost: f64,
            extraction_work: f64,
            erasure_cost: f64,
            net_work: f64,
            side: Option<Side>,
            expected: bool,
        }
        Wire {
            regime: self.regime,
            x: self.wall_fraction,
            temperature: self.temperature,
            insertion_cost: self.insertion_cost,
            measurement_cost: self.measurement_cost,
            extraction_work: self.extraction_work,
            erasure_cost: self.erasure_cost,
            net_work: self.net_work,
            side: self.record.map(|r| r.side),
            expected: self.expected,
        }
        .serialize(serializer)
    }
}

/// Ensemble-averaged ledger.
pub fn expected_cycle(config: &CycleConfig) -> Result<CycleLedger> {
    Ok(cycle_outcomes(config)?.expected)
}

/// Realization of one stochastic cycle: the measured side is drawn from
/// [`side_probabilities`] with a generator seeded by `seed`.
pub fn run_cycle(config: &CycleConfig, seed: u64) -> Result<CycleLedger> {
    Ok(cycle_outcomes(config)?.draw(seed))
}

/// Both possible single-cycle ledgers together with the expected one, so a
/// configuration can be sampled repeatedly without recomputing the spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOutcomes {
    pub expected: CycleLedger,
    pub side_a: CycleLedger,
    pub side_b: CycleLedger,
}

impl CycleOutcomes {
    /// Same draw as [`run_cycle`] with this `seed`.
    pub fn draw(&self, seed: u64) -> CycleLedger {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: f64 = rng.random();
        let p_a = self.side_a.record.expect("side ledgers carry a record").probability;
        if u < p_a {
            self.side_a
        } else {
            self.side_b
        }
    }
}

pub fn cycle_outcomes(config: &CycleConfig) -> Result<CycleOutcomes> {
    let t = CycleThermo::compute(config)?;
    let insertion = match config.regime {
        Regime::Classical => 0.0,
        Regime::Quantum => t.split - t.whole,
    };
    let erasure = erasure_cost(t.p_a, &config.state, &config.units)?;
    let realized = |side: Side, probability: f64| {
        CycleLedger::assemble(
            config,
            insertion,
            t.work(side),
            erasure,
            Some(MeasurementRecord { side, probability }),
        )
    };
    let extraction = t.p_a * t.work(Side::A) + t.p_b * t.work(Side::B);
    Ok(CycleOutcomes {
        expected: CycleLedger::assemble(config, insertion, extraction, erasure, None),
        side_a: realized(Side::A, t.p_a),
        side_b: realized(Side::B, t.p_b),
    })
}
