//! Forward solve with a time-dependent source, then a look at the
//! norm-estimate ledger and the per-mode decay.

use std::sync::Arc;

use fracpseudo::direct::{derived_series, solve_direct, Derived, DirectProblem, FractionalOrder, SolverOptions, SourceTrace, TimeGrid};
use fracpseudo::spectral::{SpectralField, SpectrumPair};

fn main() -> fracpseudo::Result<()> {
    let spectrum = Arc::new(SpectrumPair::bilaplacian_pair(12)?);
    let phi = SpectralField::from_fn(spectrum.clone(), |k| 1.0 / (k * k) as f64)?;
    let sources = (1..=12)
        .map(|k| {
            let a = 1.0 / k as f64;
            SourceTrace::analytic_with_derivative(move |t| a * (2.0 * t).sin(), move |t| 2.0 * a * (2.0 * t).cos())
        })
        .collect();
    let alpha = FractionalOrder::new(0.4)?;
    let problem = DirectProblem::new(phi, sources, alpha)?;
    // graded toward t = 0, where the solution has a t^alpha layer
    let grid = TimeGrid::graded(1.0, 40, 2.0)?;
    let report = solve_direct(&problem, &grid, &SolverOptions::default())?;

    println!("representation: {:?}", report.representation);
    println!("quadrature self-estimate: {:.2e}", report.quad_estimate);
    for e in &report.ledger.estimates {
        println!("{:<24} lhs {:>12.5e}  rhs {:>12.5e}  C = {:.4}", e.name, e.lhs, e.rhs, e.constant);
    }
    for (name, v) in &report.ledger.diagnostics {
        println!("{name:<24} {v:.3e}");
    }

    let mu = derived_series(&report, Derived::Mu);
    println!("\n  k     u_k(T)        (Mu)_k(T)");
    for k in [0, 1, 5, 11] {
        println!("{:>3} {:>12.5e} {:>12.5e}", k + 1, report.modal_solutions[k].last().unwrap(), mu[k].last().unwrap());
    }
    Ok(())
}
