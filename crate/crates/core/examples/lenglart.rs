//! Tail and moment forms of Lenglart domination for three certified pairs.

use sdelab::gronwall::{c_p, lenglart_moment, lenglart_tail, DominatedPair};
use sdelab::Result;

fn main() -> Result<()> {
    let pairs = [
        ("B(t∧1)², t∧1", DominatedPair::BrownianSquare { steps: 2048 }),
        ("G = X = 1", DominatedPair::Deterministic { level: 1.0 }),
        (
            "N(t), 2t",
            DominatedPair::Counting {
                rate: 2.0,
                horizon: 1.0,
            },
        ),
    ];
    for (name, pair) in pairs {
        let s = pair.sample(20_000, 5)?;
        let tail = lenglart_tail(&s, 2.0, 1.0)?;
        println!(
            "{name}: P(sup X > 2) = {:.4} vs {:.4} ({:?})",
            tail.lhs.mean, tail.rhs.mean, tail.verdict
        );
        for p in [0.25, 0.5, 0.75] {
            let m = lenglart_moment(&s, p)?;
            println!(
                "    p = {p}: E[(sup X)^p] = {:.4} vs c_p E[(sup G)^p] = {:.4} (c_p = {:.4})",
                m.lhs.mean,
                m.rhs.mean,
                c_p(p)?
            );
        }
    }
    Ok(())
}
