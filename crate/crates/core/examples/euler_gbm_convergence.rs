//! Strong convergence of the Euler scheme for geometric Brownian motion,
//! measured against the exact solution driven by the same Brownian path.

use sdelab::models::{gbm, gbm_exact};
use sdelab::noise::MartingaleMeasureSpec;
use sdelab::solver::strong_error_study;
use sdelab::Result;

fn main() -> Result<()> {
    let (mu, sigma, x0) = (0.05, 0.2, 1.0);
    let model = gbm(mu, sigma, x0)?;
    let spec = MartingaleMeasureSpec::wiener(1);
    let resolutions = [8, 16, 32, 64, 128];
    let study = strong_error_study(&model, &spec, &resolutions, 1.0, 10_000, 1, |noise| {
        let w = noise.wiener_at_cell(noise.cells(), 0);
        vec![gbm_exact(x0, mu, sigma, noise.horizon(), w)]
    })?;
    println!("{:>5}  {:>12}  {:>10}", "n", "E|error|", "std err");
    for (n, e) in study.resolutions.iter().zip(&study.errors) {
        println!("{n:>5}  {:>12.3e}  {:>10.2e}", e.mean, e.std_err);
    }
    println!("log-log slope {:.3}", study.slope);
    Ok(())
}
