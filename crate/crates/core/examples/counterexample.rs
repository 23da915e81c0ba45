//! Without predictability of H the Gronwall constant cannot be uniform: a
//! two-point martingale jump makes E[X*^p] grow without bound while E[H^α]
//! stays equal to 1.

use sdelab::gronwall::{counterexample_ensemble, counterexample_stats, evaluate_gronwall, Variant};
use sdelab::Result;

fn main() -> Result<()> {
    println!("{:>7}  {:>10}  {:>10}  {:>10}", "q", "E[S+^p]", "exact", "E[S-^α]");
    for q in [0.5, 0.9, 0.99, 0.999] {
        let s = counterexample_stats(q, 0.5, 0.5, 1_000_000, 1)?;
        println!(
            "{q:>7}  {:>10.4}  {:>10.4}  {:>10.4}",
            s.lhs_mc.mean, s.lhs_exact, s.h_moment_mc.mean
        );
    }
    let ens = counterexample_ensemble(0.99, 0.5, 200_000, 2)?;
    let r = evaluate_gronwall(&ens, Variant::A, 0.5)?;
    println!(
        "predictable-H bound applied anyway at q = 0.99: {:.3} vs {:.3} -> {:?}",
        r.lhs, r.rhs, r.verdict
    );
    Ok(())
}
