//! Equilibrium entropy while the box is squeezed from L = 2 to L = 0.5 and
//! released again, quantum against classical.
//!
//!     cargo run --example entropy_trace

use szilard::engine::Regime;
use szilard::sampler::entropy_trace;
use szilard::spectrum::{ThermalState, UnitSystem, DEFAULT_REL_TOL};

fn main() -> szilard::Result<()> {
    let units = UnitSystem::natural();
    let schedule: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let t = i as f64;
            let length = if i <= 10 { 2.0 - 0.15 * t } else { 0.5 + 0.15 * (t - 10.0) };
            (t, length)
        })
        .collect();
    for temp in [0.5, 20.0] {
        let st = ThermalState::new(temp, &units)?;
        let q = entropy_trace(&schedule, &st, Regime::Quantum, &units, DEFAULT_REL_TOL)?;
        let c = entropy_trace(&schedule, &st, Regime::Classical, &units, DEFAULT_REL_TOL)?;
        println!("T = {temp}");
        for i in (0..schedule.len()).step_by(5) {
            println!(
                "  t={:>4} L={:.2}  S_quantum={:+.5}  S_classical={:+.5}",
                q.times()[i], schedule[i].1, q.values()[i], c.values()[i]
            );
        }
    }
    Ok(())
}
