//! Learning where to put the wall. Prints the per-action expected reward,
//! the learned values, and a coarse learning curve.
//!
//!     cargo run --release --example bandit_optimize -- quantum 2.0

use szilard::engine::Regime;
use szilard::optimizer::{
    default_grid, evaluate, train, CycleTemplate, EnvSpec, Environment, RewardMode, TrainConfig,
};

fn main() -> szilard::Result<()> {
    let mut args = std::env::args().skip(1);
    let regime: Regime = args.next().as_deref().unwrap_or("classical").parse().expect("regime");
    let t: f64 = args.next().map_or(1.0, |a| a.parse().expect("temperature"));

    let spec = EnvSpec::new(default_grid(), CycleTemplate::natural(t, regime)?, RewardMode::ExtractionOnly, true)?;
    let exact = Environment::new(&spec)?.expected_rewards();
    let (policy, curve) = train(&spec, &TrainConfig::defaults(17))?;

    println!("{:>5} {:>12} {:>12} {:>7}", "x", "expected", "learned", "visits");
    for (i, x) in spec.action_grid().iter().enumerate() {
        println!("{x:>5} {:>12.6} {:>12.6} {:>7}", exact[i], policy.values[i], policy.visit_counts[i]);
    }
    for k in [99, 999, 4999, 19_999] {
        println!(
            "episode {:>6}: windowed reward {:.4}, greedy x = {}",
            curve.episode_indices[k], curve.windowed_mean_reward[k], curve.greedy_action_history[k]
        );
    }
    let (mean, se) = evaluate(&policy, &spec, 2000, 99)?;
    println!("greedy policy: mean reward {mean:.5} ± {se:.5} (k_BT ln 2 = {:.5})", t * std::f64::consts::LN_2);
    Ok(())
}
