//! Statistical falsification of the structural conditions: a linear model
//! survives, a superlinear model with a false coercivity claim is caught.

use sdelab::hypothesis::{check_condition, replay, suggest_rate, Condition, RandomPathSampler};
use sdelab::models::{linear, superlinear};
use sdelab::noise::MartingaleMeasureSpec;
use sdelab::Result;

fn main() -> Result<()> {
    let spec = MartingaleMeasureSpec::poisson(1, 2.0);
    let sampler = RandomPathSampler::new(5.0, 1.0);

    let good = linear(0.5, 3.0, 1.0)?;
    for c in [
        Condition::C1,
        Condition::C2,
        Condition::C3,
        Condition::C4,
        Condition::C5,
    ] {
        let r = check_condition(&good, &spec, c, 5.0, &sampler, 10_000, 1)?;
        println!("linear {c}: {} violations in {} samples", r.violations.len(), r.samples);
    }
    let env = suggest_rate(&good, &spec, Condition::C1, 5.0, &sampler, &[0.25, 0.5, 1.0], 5_000, 1)?;
    // additive noise and drift -x make every ratio nonpositive, so the envelope is 0
    println!("empirical L_R envelope: {:?} (claimed 2)", env.values);

    let bad = superlinear(1.0)?;
    let r = check_condition(&bad, &spec, Condition::C2, 5.0, &sampler, 1_000, 2)?;
    println!(
        "superlinear C2: {} violations in {} samples",
        r.violations.len(),
        r.samples
    );
    if let Some(v) = r.violations.first() {
        let (lhs, rhs) = replay(&bad, &spec, Condition::C2, 5.0, v)?;
        println!(
            "first witness at t = {:.3}: lhs {lhs:.3} > rhs {rhs:.3}, replayed identically",
            v.t
        );
    }
    Ok(())
}
