//! The L1 scheme on a manufactured solution u = t^2: observed order
//! against the predicted 2 - alpha.

use fracpseudo::caputo_oracle::{convergence_order, manufactured_quadratic, Reference};

fn main() -> fracpseudo::Result<()> {
    let steps = [32, 64, 128, 256, 512, 1024];
    for alpha in [0.2, 0.5, 0.8] {
        let (p, exact) = manufactured_quadratic(1.0, 2.0, alpha)?;
        let r = convergence_order(&p, 1.0, &steps, Reference::Exact(&exact))?;
        println!("alpha = {alpha}: predicted {:.2}, observed {:.3}", 2.0 - alpha, r.order);
        for (j, e) in r.steps.iter().zip(&r.errors) {
            println!("  J = {j:>5}  max error {e:.3e}");
        }
    }
    Ok(())
}
