//! Build a piecewise-constant path and query values, left limits, window
//! suprema and frozen histories.

use sdelab::{CadlagPath, Result};

fn main() -> Result<()> {
    let x = CadlagPath::scalar(vec![-1.0, 0.0, 0.5, 1.2], vec![1.0, -2.0, 3.0, 0.5], 2.0)?;

    println!("x(0.5)        = {:?}", x.value_at(0.5)?);
    println!("x(0.5-)       = {:?}", x.left_limit(0.5)?);
    println!("sup on [0,1]  = {}", x.window_sup(0.0, 1.0)?);
    println!("sup on [0,.5) = {}", x.window_sup_open(0.0, 0.5)?);

    let frozen = x.history(0.7)?;
    println!(
        "history at 0.7 keeps domain end {} and reads x(2) = {:?}",
        frozen.end(),
        frozen.value_at(2.0)?
    );

    let y = x.map(1, |_, v, out| out[0] = v[0] + 0.25);
    println!("sup |x - y|   = {}", x.sup_distance(&y, -1.0, 2.0)?);

    x.write_csv(std::io::stdout().lock()).expect("stdout");
    Ok(())
}
