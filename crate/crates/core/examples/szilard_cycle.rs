//! One engine cycle: expected ledger and a handful of sampled cycles, in
//! both regimes.
//!
//!     cargo run --example szilard_cycle -- 0.3 2.0

use szilard::engine::{expected_cycle, run_cycle, side_probabilities, CycleConfig, Regime};

fn main() -> szilard::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let x = args.next().unwrap_or(0.5);
    let t = args.next().unwrap_or(1.0);

    for regime in [Regime::Quantum, Regime::Classical] {
        let cfg = CycleConfig::natural(x, t, regime)?;
        let (pa, pb) = side_probabilities(&cfg)?;
        let l = expected_cycle(&cfg)?;
        println!("{} x={x} T={t}  p_A={pa:.6} p_B={pb:.6}", regime.as_str());
        println!(
            "  insertion {:.6}  extraction {:.6}  erasure {:.6}  net {:.3e}",
            l.insertion_cost, l.extraction_work, l.erasure_cost, l.net_work
        );
        let sampled: Vec<String> = (0..6)
            .map(|seed| {
                let r = run_cycle(&cfg, seed).map(|r| (r.record.unwrap().side, r.net_work));
                let (side, net) = r.expect("valid config");
                format!("{side:?}:{net:+.3}")
            })
            .collect();
        println!("  sampled net work  {}", sampled.join(" "));
        println!("  ledger json  {}", l.to_json());
    }
    Ok(())
}
