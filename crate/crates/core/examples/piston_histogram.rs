//! Thermostatted piston: sample, histogram, compare with the stationary
//! Gaussian, and write the data next to an SVG.
//!
//!     cargo run --release --example piston_histogram -- out_dir

use szilard::sampler::{make_histogram, sample_piston, stability_metrics, summarize_piston, PistonModel};
use szilard::spectrum::UnitSystem;

fn main() -> szilard::Result<()> {
    let units = UnitSystem::natural();
    let model = PistonModel {
        stiffness: 2.0,
        temperature: 1.0,
        friction: 1.0,
        time_step: 0.01,
        burn_in: 10_000,
        steps: 400_000,
    };
    let traj = sample_piston(&model, &units, 42)?;
    let summary = summarize_piston(&traj, &model, &units, 40)?;
    println!(
        "mean {:+.4} ± {:.4}, variance {:.4} ± {:.4} (k_BT/kappa = {})",
        summary.mean,
        summary.mean_standard_error,
        summary.variance,
        summary.variance_standard_error,
        summary.expected_variance
    );
    if let Some(chi) = summary.chi_square {
        println!(
            "chi2 = {:.2} on {} dof, p = {:.3} ({} thinned samples)",
            chi.statistic, chi.dof, chi.p_value, summary.chi_square_samples
        );
    }

    let hist = make_histogram(&traj.thinned(model.decorrelation_stride()), 16)?;
    let m = stability_metrics(&hist);
    println!("thinned histogram: mode at {:+.3}, spread {:.3}, unimodal {}", m.mode_center, m.spread, m.unimodal);

    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir).expect("create output dir");
        let dir = std::path::Path::new(&dir);
        std::fs::write(dir.join("piston_histogram.csv"), hist.to_csv()).expect("write csv");
        std::fs::write(dir.join("piston_histogram.svg"), hist.to_svg("piston position")).expect("write svg");
        println!("wrote {}", dir.display());
    }
    Ok(())
}
