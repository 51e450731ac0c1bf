//! Surrogates for S(T): a cubic in ln T by least squares, with its
//! diagnostics, and a (1, 8, 1) tanh network.
//!
//!     cargo run --release --example entropy_fit

use szilard::spectrum::{box_thermo, BoxGeometry, ThermalState, UnitSystem, DEFAULT_REL_TOL};
use szilard::surrogate::{featurize, fit_least_squares, gradient_check, train_net, Dataset};

fn main() -> szilard::Result<()> {
    let units = UnitSystem::natural();
    let geom = BoxGeometry::new(1.0)?;
    let temps: Vec<f64> = (0..20).map(|i| 0.5 + 49.5 * i as f64 / 19.0).collect();
    let entropy = temps
        .iter()
        .map(|&t| Ok(box_thermo(&geom, &ThermalState::new(t, &units)?, &units, DEFAULT_REL_TOL)?.entropy))
        .collect::<szilard::Result<Vec<f64>>>()?;

    let log_t: Vec<f64> = temps.iter().map(|t| t.ln()).collect();
    let ds = Dataset::scalar(&log_t, &entropy)?;
    for degree in 1..=4 {
        let fit = fit_least_squares(&featurize(&ds, degree)?, &entropy)?;
        let d = &fit.diagnostics;
        println!(
            "degree {degree}: R2 = {:.8}  F = {:.4e}  p = {:.2e}  runs z = {:+.2}",
            d.r_squared, d.f_statistic, d.p_value, d.runs_test_z
        );
    }

    let var = szilard::stats::variance(&entropy) * (entropy.len() - 1) as f64 / entropy.len() as f64;
    let net = train_net(&ds, &[1, 8, 1], 5000, 0.05, 3)?;
    println!("network (1,8,1): MSE / var(S) = {:.2e}", net.final_loss / var);
    println!(
        "gradient check on the trained net: {:.2e}",
        gradient_check(&net.model, (&[log_t[7]], entropy[7]), 1e-5)
    );
    Ok(())
}
