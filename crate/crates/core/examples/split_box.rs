//! Inserting a wall: the split spectrum, its degeneracies, and the entropy
//! of the split box as the temperature drops.
//!
//!     cargo run --example split_box

use szilard::spectrum::{
    box_spectrum, split_spectrum, thermo_summary, BoxGeometry, ThermalState, UnitSystem,
    DEFAULT_REL_TOL,
};

fn main() -> szilard::Result<()> {
    let units = UnitSystem::natural();
    for x in [0.5, 0.3] {
        let geom = BoxGeometry::with_wall(1.0, x)?;
        let whole = box_spectrum(&geom, &units, 8)?;
        let split = split_spectrum(&geom, &units, 8)?;
        println!("wall at x = {x}");
        for (w, s) in whole.levels().iter().zip(split.levels()) {
            println!("  whole {:>10.4}   split {:>10.4} (g = {})", w.energy, s.energy, s.degeneracy);
        }
    }

    let geom = BoxGeometry::with_wall(1.0, 0.5)?;
    let spec = split_spectrum(&geom, &units, 1)?;
    let e1 = units.ground_energy(1.0);
    println!("\nentropy of the x = 0.5 split box, in units of ln 2");
    for frac in [10.0, 1.0, 0.1, 0.01] {
        let st = ThermalState::new(frac * e1, &units)?;
        let s = thermo_summary(&spec, &st, &units, DEFAULT_REL_TOL)?;
        println!("  k_BT = {frac:>5} E1   S = {:.6}", s.entropy / std::f64::consts::LN_2);
    }
    Ok(())
}
