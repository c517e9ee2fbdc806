//! Mittag-Leffler values along the negative axis, with the route taken.
//!
//!     cargo run --example ml_eval -- 0.5 1.0

use fracpseudo::mlfunc::{ml_eval_detailed, ml_simon_bounds, MLAccuracy, MLParams};

fn main() -> fracpseudo::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let alpha = args.next().unwrap_or(0.5);
    let beta = args.next().unwrap_or(1.0);
    let params = MLParams::new(alpha, beta)?;
    let acc = MLAccuracy::default();

    println!("{:>10} {:>24} {:>12} {:>14}", "z", "E(z)", "error est.", "route");
    for z in [0.0, -0.1, -1.0, -5.0, -20.0, -100.0, -1e4] {
        let (est, route) = ml_eval_detailed(params, z, &acc)?;
        println!("{z:>10} {:>24.17e} {:>12.1e} {:>14?}", est.value, est.error, route);
    }

    // for β = 1 the value sits between two rational bounds
    if beta == 1.0 {
        let (lo, hi) = ml_simon_bounds(alpha, 3.0)?;
        let (mid, _) = ml_eval_detailed(params, -3.0, &acc)?;
        println!("\n{lo:.6} <= E(-3) = {:.6} <= {hi:.6}", mid.value);
    }
    Ok(())
}
