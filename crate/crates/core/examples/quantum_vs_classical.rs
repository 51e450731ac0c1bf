//! How the quantum ledger approaches the classical one as the box warms:
//! insertion cost, extraction work and the pre-erasure gain at x = 1/2.
//!
//!     cargo run --example quantum_vs_classical

use std::f64::consts::LN_2;

use szilard::engine::{expected_cycle, CycleConfig, Regime};

fn main() -> szilard::Result<()> {
    let e1 = std::f64::consts::PI.powi(2) / 2.0;
    println!("{:>10} {:>12} {:>12} {:>14} {:>10}", "kT/E1", "W_ins/kT", "W_ext/kT", "gain/(kT ln2)", "C/Q gain");
    for frac in [0.01, 0.05, 0.2, 1.0, 5.0, 20.0, 100.0] {
        let t = frac * e1;
        let q = expected_cycle(&CycleConfig::natural(0.5, t, Regime::Quantum)?)?;
        let c = expected_cycle(&CycleConfig::natural(0.5, t, Regime::Classical)?)?;
        println!(
            "{frac:>10} {:>12.5} {:>12.5} {:>14.9} {:>10.6}",
            q.insertion_cost / t,
            q.extraction_work / t,
            q.net_before_erasure() / (t * LN_2),
            c.net_before_erasure() / q.net_before_erasure()
        );
    }

    println!("\noff-centre wall, kT = E1");
    for x in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let q = expected_cycle(&CycleConfig::natural(x, e1, Regime::Quantum)?)?;
        let c = expected_cycle(&CycleConfig::natural(x, e1, Regime::Classical)?)?;
        println!(
            "  x={x}  quantum gain {:.5}  classical gain {:.5}",
            q.net_before_erasure(),
            c.net_before_erasure()
        );
    }
    Ok(())
}
