//! Driving the command-line layer from code: parse an invocation, execute
//! it, and read back the manifest.
//!
//!     cargo run --example run_manifest

use szilard::cli::{execute, parse_invocation};

fn main() {
    let out = std::env::temp_dir().join("szilard-run-manifest-example");
    let argv = [
        "szilard", "report", "--temperatures", "0.05,5,500", "--fractions", "0.2,0.5", "--output-dir",
        out.to_str().expect("utf-8 temp dir"),
    ];
    let config = parse_invocation(argv).unwrap_or_else(|e| {
        eprint!("{e}");
        std::process::exit(e.exit_code)
    });
    let manifest = execute(&config).expect("report runs");
    for o in &manifest.outputs {
        println!("{}  {}", o.sha256, o.file);
    }
    let table = std::fs::read_to_string(out.join("ledger_comparison.csv")).expect("written");
    print!("{table}");
}
