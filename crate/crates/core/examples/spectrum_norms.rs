//! The built-in operator pairs and weighted norms of one coefficient field.

use fracpseudo::spectral::{SpectralField, SpectrumPair};
use std::sync::Arc;

fn main() -> fracpseudo::Result<()> {
    for name in ["dirichlet_laplacian_pair", "bilaplacian_pair", "fractional_pair(0.5,1.5)"] {
        let s = Arc::new(SpectrumPair::builtin(name, 64)?);
        println!(
            "{name}: c_L = {}, c_M = {}, kappa = {}, C = {:.4}, gamma = {}",
            s.c_l(),
            s.c_m(),
            s.kappa(),
            s.growth_constant(),
            s.smoothing_index().gamma
        );
        println!("  first eigenvalues: lambda = {:?}", &s.lambda()[..4]);

        // phi_k = k^{-3}: how far up the scale does it stay small?
        let phi = SpectralField::from_fn(s.clone(), |k| (k as f64).powi(-3))?;
        for (l, m) in [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (1.0, 0.0)] {
            println!("  |phi|_({l}, {m}) = {:.6e}", phi.sobolev_norm(l, m)?);
        }
    }
    Ok(())
}
