//! A one-dimensional gas under a slowly moving wall. With a thermostat the
//! average work to halve the box approaches k_BT ln 2 per particle; without
//! one the gas heats adiabatically.
//!
//!     cargo run --release --example gas_compression

use szilard::sampler::{init_gas, partition_particles, quasistatic_compress};
use szilard::spectrum::{ThermalState, UnitSystem};
use szilard::stats::{mean, standard_error};

fn main() -> szilard::Result<()> {
    let units = UnitSystem::natural();
    let state = ThermalState::new(1.0, &units)?;

    let gas = init_gas(10_000, 1.0, &state, &units, 1)?;
    let (a, b) = partition_particles(&gas, 0.3)?;
    println!(
        "10^4 particles: KE/particle = {:.4} (k_BT/2 = 0.5), left of x=0.3: {} right: {}",
        gas.kinetic_energy(&units) / gas.len() as f64,
        a.len(),
        b.len()
    );

    for thermostatted in [true, false] {
        let works: Vec<f64> = (0..400u64)
            .map(|seed| {
                let one = init_gas(1, 1.0, &state, &units, seed).expect("valid");
                quasistatic_compress(&one, 0.5, 2_000, thermostatted, &state, &units, seed + 7_777)
                    .expect("valid")
                    .work_on_gas
            })
            .collect();
        println!(
            "thermostatted={thermostatted:<5}  <W>/ln2 = {:.4} ± {:.4} over {} runs",
            mean(&works) / std::f64::consts::LN_2,
            standard_error(&works) / std::f64::consts::LN_2,
            works.len()
        );
    }
    Ok(())
}
