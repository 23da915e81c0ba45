//! Coupled resolutions and the remainder process: P(sup |X^(n) - X^(2n)| > ε)
//! on a shared noise realization, and the size of X(κ(n,t)) - X(t).

use sdelab::models::jump_gbm;
use sdelab::noise::MartingaleMeasureSpec;
use sdelab::solver::{euler_solve_sampled, remainder, resolution_gap, sup_remainder};
use sdelab::Result;

fn main() -> Result<()> {
    let model = jump_gbm(0.05, 0.8, 0.2, 1.0)?;
    let spec = MartingaleMeasureSpec::poisson(1, 2.0);
    for n in [8u32, 32, 128] {
        let gap = resolution_gap(&model, &spec, n, 2 * n, 1.0, 0.1, 2_000, 3)?;
        let x = euler_solve_sampled(&model, &spec, n, 1.0, 3, 0)?;
        let p = remainder(&model, &spec, n, 1.0, 3, 0)?;
        println!(
            "n = {n:>3}: P(gap > 0.1) = {:.4} [{:.4}, {:.4}], sup|p| = {:.4} (right-continuous {:.4})",
            gap.estimate,
            gap.lower,
            gap.upper,
            sup_remainder(&x, n)?,
            p.window_sup(0.0, 1.0)?
        );
    }
    Ok(())
}
