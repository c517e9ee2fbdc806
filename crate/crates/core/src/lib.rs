//! Direct and inverse source problems for `D^α[u + Lu] + Mu = f` by
//! eigenfunction expansion, with a brute-force L1 time stepper to check
//! the closed forms against.

pub mod caputo_oracle;
pub mod cli;
pub mod direct;
pub mod error;
pub mod gamma;
pub mod inverse;
pub mod ledger;
pub mod mlfunc;
pub mod quad;
pub mod spectral;

pub use error::{Error, Result};
