use super::Trajectory;
use crate::engine::Regime;
use crate::error::{invalid, Result};
use crate::spectrum::{box_thermo, BoxGeometry, ThermalState, UnitSystem};

/// Equilibrium entropy `S(L(t))` along a `(time, length)` schedule.
///
/// Classically `S = k_B(ln L + ½ln T) + const`, with the constant chosen
/// so that the first point agrees with the quantum entropy of the same box.
pub fn entropy_trace(
    schedule: &[(f64, f64)],
    state: &ThermalState,
    regime: Regime,
    units: &UnitSystem,
    rel_tol: f64,
) -> Result<Trajectory> {
    let (_, first_length) = *schedule
        .first()
        .ok_or_else(|| invalid("entropy schedule is empty"))?;
    if schedule.iter().any(|&(_, l)| !(l > 0.0 && l.is_finite())) {
        return Err(invalid("schedule lengths must be positive"));
    }
    let quantum = |length: f64| -> Result<f64> {
        Ok(box_thermo(&BoxGeometry::new(length)?, state, units, rel_tol)?.entropy)
    };
    let kb = units.k_boltzmann();
    let t = state.temperature();
    let values = match regime {
        Regime::Quantum => schedule
            .iter()
            .map(|&(_, l)| quantum(l))
            .collect::<Result<Vec<_>>>()?,
        Regime::Classical => {
            let ideal = |l: f64| kb * (l.ln() + 0.5 * t.ln());
            let offset = quantum(first_length)? - ideal(first_length);
            schedule.iter().map(|&(_, l)| ideal(l) + offset).collect()
        }
    };
    let times = schedule.iter().map(|&(t, _)| t).collect();
    Trajectory::new(times, values, format!("{} entropy", regime.as_str()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::DEFAULT_REL_TOL;
    use approx::assert_relative_eq;
    use std::f64::consts::{LN_2, PI};

    fn natural(t: f64) -> (ThermalState, UnitSystem) {
        let u = UnitSystem::natural();
        (ThermalState::new(t, &u).unwrap(), u)
    }

    #[test]
    fn constant_schedule_is_flat() {
        let (s, u) = natural(2.0);
        let sched: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 1.3)).collect();
        for regime in [Regime::Quantum, Regime::Classical] {
            let tr = entropy_trace(&sched, &s, regime, &u, DEFAULT_REL_TOL).unwrap();
            assert!(tr.values().iter().all(|&v| v == tr.values()[0]));
        }
    }

    #[test]
    fn classical_doubling_adds_ln2() {
        let (s, u) = natural(3.0);
        let sched = [(0.0, 1.0), (1.0, 1.5), (2.0, 2.0)];
        let tr = entropy_trace(&sched, &s, Regime::Classical, &u, DEFAULT_REL_TOL).unwrap();
        assert_relative_eq!(tr.values()[2] - tr.values()[0], LN_2, max_relative = 1e-12);
    }

    #[test]
    fn cold_quantum_entropy_vanishes() {
        let (s, u) = natural(0.001 * PI * PI / 2.0);
        let sched = [(0.0, 1.0), (1.0, 0.9), (2.0, 0.8)];
        let tr = entropy_trace(&sched, &s, Regime::Quantum, &u, DEFAULT_REL_TOL).unwrap();
        assert!(tr.values().iter().all(|v| v.abs() < 1e-100));
    }

    #[test]
    fn rejects_bad_schedules() {
        let (s, u) = natural(1.0);
        assert!(entropy_trace(&[], &s, Regime::Quantum, &u, DEFAULT_REL_TOL).is_err());
        assert!(entropy_trace(&[(0.0, -1.0)], &s, Regime::Quantum, &u, DEFAULT_REL_TOL).is_err());
        assert!(entropy_trace(&[(1.0, 1.0), (0.5, 1.0)], &s, Regime::Quantum, &u, DEFAULT_REL_TOL).is_err());
    }
}
