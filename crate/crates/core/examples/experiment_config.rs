//! Parse a TOML experiment, show the collected errors of a broken one, and
//! run a valid one into a temporary directory.

use sdelab::experiment::{parse_config, run_experiment};
use sdelab::Result;

fn main() -> Result<()> {
    let broken = "kind = \"counterexample\"\nseed = 1\nreplications = 10\np = 1.5\nalpha_ = 0.5\n";
    if let Err(e) = parse_config(broken) {
        println!("{e}");
    }

    let out = std::env::temp_dir().join("sdelab-example");
    let text = format!(
        "kind = \"counterexample\"\nseed = 1\nreplications = 100000\nq = [0.5, 0.9, 0.99]\noutput = {:?}\n",
        out.display().to_string()
    );
    let cfg = parse_config(&text)?;
    let summary = run_experiment(&cfg)?;
    println!(
        "outcome {:?}, exit code {}",
        summary.outcome,
        summary.outcome.exit_code()
    );
    for a in &summary.artifacts {
        println!("wrote {}", a.display());
    }
    print!(
        "{}",
        std::fs::read_to_string(out.join("counterexample.csv")).expect("csv written")
    );
    Ok(())
}
