//! Monte Carlo check of the stochastic Gronwall bounds on an ensemble derived
//! from the squared Euler approximation of geometric Brownian motion.

use sdelab::gronwall::{gbm_square_ensemble, verify_gronwall, Variant};
use sdelab::{Result, SdeError};

fn main() -> Result<()> {
    let ens = gbm_square_ensemble(0.05, 0.2, 1.0, 64, 1.0, 10_000, 11)?;
    println!(
        "A(T) = {:.4}, {} replications",
        ens.integrator_at_horizon(),
        ens.replications()
    );
    for variant in [Variant::A, Variant::B, Variant::C] {
        for p in [0.3, 0.5, 0.7] {
            match verify_gronwall(&ens, variant, p) {
                Ok(r) => println!(
                    "variant {variant}, p = {p}: E[X*^p] = {:.4} (upper {:.4}) vs bound {:.4}: {:?}",
                    r.lhs, r.lhs_ci[1], r.rhs, r.verdict
                ),
                Err(SdeError::Precondition(why)) => {
                    println!("variant {variant}, p = {p}: not applicable ({why})");
                }
                Err(e) => return Err(e),
            }
        }
    }
    let report = verify_gronwall(&ens, Variant::C, 0.5)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
