//! Particle-in-a-box thermodynamics over a temperature grid, next to the
//! printed closed forms.
//!
//!     cargo run --example thermo_table

use szilard::spectrum::{
    box_thermo, closed_form_report, to_joules, BoxGeometry, ThermalState, UnitSystem,
    DEFAULT_REL_TOL,
};

fn main() -> szilard::Result<()> {
    let units = UnitSystem::natural();
    let geom = BoxGeometry::new(1.0)?;
    let temps = [0.5, 1.0, 5.0, 20.0, 100.0, 500.0];

    println!("{:>8} {:>12} {:>12} {:>10} {:>10} {:>7}", "T", "F", "<E>", "S", "C_V", "levels");
    for &t in &temps {
        let s = box_thermo(&geom, &ThermalState::new(t, &units)?, &units, DEFAULT_REL_TOL)?;
        println!(
            "{t:>8} {:>12.6} {:>12.6} {:>10.6} {:>10.6} {:>7}",
            s.free_energy, s.mean_energy, s.entropy, s.heat_capacity, s.levels_used
        );
    }

    let report = closed_form_report(&geom, &units, &temps, DEFAULT_REL_TOL)?;
    println!("\nprinted closed forms against the spectral sums");
    for r in &report.rows {
        println!(
            "T={:<6} <E> printed/exact = {:.4}   C printed/exact = {:.4}",
            r.temperature,
            r.paper_mean_energy / r.exact_mean_energy,
            r.paper_heat_capacity / r.exact_heat_capacity
        );
    }
    for note in &report.notes {
        println!("note: {note}");
    }

    // An electron in a 1 nm box: the natural energy unit in joules.
    let si = UnitSystem::si_electron();
    let nm = BoxGeometry::new(1e-9)?;
    println!("\nE1 for an electron in 1 nm = {:.4e} J", to_joules(std::f64::consts::PI.powi(2) / 2.0, &si, &nm)?);
    Ok(())
}
