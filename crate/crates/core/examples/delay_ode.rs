//! The delay equation x'(t) = -x(t - 1) with x = 1 on [-1, 0], solved by the
//! Euler scheme without noise and compared with the method-of-steps solution.

use sdelab::models::{delay_ode, delay_ode_exact};
use sdelab::noise::{MartingaleMeasureSpec, TimeGrid};
use sdelab::solver::{euler_solve, SolveOptions};
use sdelab::Result;

fn main() -> Result<()> {
    let model = delay_ode()?;
    let spec = MartingaleMeasureSpec::wiener(0);
    for n in [4u32, 16, 64, 256] {
        let grid = TimeGrid::uniform(n as usize, 2.0)?;
        let noise = spec.sample(&grid, 0, 0)?;
        let x = euler_solve(&model, &spec, n, &noise, SolveOptions::default())?;
        let err = (0..=2 * n as usize)
            .map(|k| k as f64 / n as f64)
            .map(|t| (x.value_at(t).map(|v| v[0]).unwrap_or(f64::NAN) - delay_ode_exact(t)).abs())
            .fold(0.0, f64::max);
        println!("n = {n:>3}: X(2) = {:+.6}, max grid error {err:.2e}", x.terminal()[0]);
    }
    println!("exact X(2) = {}", delay_ode_exact(2.0));
    Ok(())
}
