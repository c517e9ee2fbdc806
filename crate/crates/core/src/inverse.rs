//! Recovering a time-independent source `f` and the state `u` from the
//! initial state `φ` and the final state `ψ = u(T)`.
//!
//! With `D_k(t) = 1 - E_{α,1}(-ρ_k t^α)` every mode has the closed form
//!
//! ```text
//! u_k(t) = φ_k + (ψ_k - φ_k) D_k(t) / D_k(T)
//! f_k    = μ_k φ_k + μ_k (ψ_k - φ_k) / D_k(T)
//! ```
//!
//! and `C_k = (φ_k - ψ_k) / D_k(T)`. `D_k(T)` is evaluated as
//! `ρ_k T^α E_{α,α+1}(-ρ_k T^α)`, free of cancellation for small `ρ_k T^α`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::caputo_oracle::{caputo_derivative_sampled, L1Grid};
use crate::direct::{FractionalOrder, TimeGrid};
use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::ledger::NormLedger;
use crate::mlfunc::{ml_complement, ml_eval, MLAccuracy, MLParams};
use crate::spectral::{SpectralField, SpectrumPair};

/// `φ`, `ψ` on a common spectrum, the order `α` and the final time `T`.
#[derive(Debug, Clone)]
pub struct InverseProblemData {
    pub phi: SpectralField,
    pub psi: SpectralField,
    pub alpha: FractionalOrder,
    pub t_end: f64,
}

impl InverseProblemData {
    pub fn new(phi: SpectralField, psi: SpectralField, alpha: FractionalOrder, t_end: f64) -> Result<Self> {
        if phi.spectrum() != psi.spectrum() {
            return Err(Error::InvalidParams("phi and psi are expanded over different spectra".into()));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParams(format!("T = {t_end} must be positive")));
        }
        Ok(Self { phi, psi, alpha, t_end })
    }

    pub fn spectrum(&self) -> &Arc<SpectrumPair> {
        self.phi.spectrum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseOptions {
    /// Smallest admissible `D_k(T)`; below it the mode is reported as
    /// [`Error::DenominatorUnderflow`].
    pub denom_floor: f64,
    /// Discard modes with `μ_k^{κ-1} D_k(T)` below this threshold (the
    /// weight is 1 when `κ ≤ 1`). Off by default.
    pub cutoff: Option<f64>,
    #[serde(skip)]
    pub ml: MLAccuracy,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self { denom_floor: 1e-14, cutoff: None, ml: MLAccuracy::default() }
    }
}

#[derive(Debug, Clone)]
pub struct InverseSolution {
    pub time_grid: Vec<f64>,
    /// `u[k][j] = u_{k+1}(t_j)`.
    pub u: Vec<Vec<f64>>,
    pub f: SpectralField,
    pub c: Vec<f64>,
    /// `D_k(T) = 1 - E_{α,1}(-ρ_k T^α)`.
    pub denom: Vec<f64>,
    /// Analytic lower bound on every `D_k(T)`.
    pub denom_floor: f64,
    /// Lower bound on every `μ_k^{κ-1} D_k(T)` (equals `denom_floor` for `κ ≤ 1`).
    pub weighted_floor: f64,
    /// 1-based indices of modes zeroed by the cutoff.
    pub discarded: Vec<usize>,
}

/// Lower bounds `(floor, weighted_floor)` on the denominators: from
/// `E_{α,1}(-x) ≤ 1/(1 + x/Γ(1+α))`,
/// `D_k(T) ≥ g / ((1 + λ_k)/(μ_k T^α) + g)` with `g = 1/Γ(1+α)`.
pub fn denominator_certificate(spectrum: &SpectrumPair, alpha: FractionalOrder, t_end: f64) -> (f64, f64) {
    let bounds = certificate_bounds(spectrum, alpha, t_end);
    let floor = bounds.iter().copied().fold(f64::INFINITY, f64::min);
    let kappa = spectrum.kappa();
    let weighted = if kappa > 1.0 {
        bounds
            .iter()
            .zip(spectrum.mu())
            .map(|(b, m)| m.powf(kappa - 1.0) * b)
            .fold(f64::INFINITY, f64::min)
    } else {
        floor
    };
    (floor, weighted)
}

fn certificate_bounds(spectrum: &SpectrumPair, alpha: FractionalOrder, t_end: f64) -> Vec<f64> {
    let a = alpha.alpha();
    let g = 1.0 / gamma(1.0 + a);
    let ta = t_end.powf(a);
    spectrum
        .lambda()
        .iter()
        .zip(spectrum.mu())
        .map(|(l, m)| g / ((1.0 + l) / (m * ta) + g))
        .collect()
}

/// The modal reconstruction on `grid`, which must end at `T`.
pub fn reconstruct(data: &InverseProblemData, grid: &TimeGrid, opts: &InverseOptions) -> Result<InverseSolution> {
    if (grid.t_end() - data.t_end).abs() > 1e-12 * data.t_end {
        return Err(Error::InvalidGrid(format!("grid ends at {}, T = {}", grid.t_end(), data.t_end)));
    }
    let spectrum = data.spectrum().clone();
    let alpha = data.alpha.alpha();
    let n = spectrum.len();
    let (phi, psi) = (data.phi.coeffs(), data.psi.coeffs());
    let kappa = spectrum.kappa();

    let modes: Vec<Result<(f64, f64, f64, Vec<f64>, bool)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let rho = spectrum.rho(k);
            let mu = spectrum.mu()[k];
            let denom = ml_complement(alpha, rho * data.t_end.powf(alpha), &opts.ml)?;
            if !(denom >= opts.denom_floor) {
                return Err(Error::DenominatorUnderflow { value: denom, floor: opts.denom_floor });
            }
            let weight = if kappa > 1.0 { mu.powf(kappa - 1.0) } else { 1.0 };
            if opts.cutoff.is_some_and(|c| weight * denom < c) {
                return Ok((denom, 0.0, 0.0, vec![0.0; grid.nodes().len()], true));
            }
            let jump = psi[k] - phi[k];
            let c = (phi[k] - psi[k]) / denom;
            let f = mu * phi[k] + mu * jump / denom;
            let mut u = Vec::with_capacity(grid.nodes().len());
            for &t in grid.nodes() {
                let v = if t == 0.0 || jump == 0.0 {
                    phi[k]
                } else if t == data.t_end {
                    psi[k]
                } else {
                    phi[k] + jump * ml_complement(alpha, rho * t.powf(alpha), &opts.ml)? / denom
                };
                u.push(v);
            }
            Ok((denom, c, f, u, false))
        })
        .collect();

    let mut sol_u = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut c = Vec::with_capacity(n);
    let mut denom = Vec::with_capacity(n);
    let mut discarded = Vec::new();
    for (k, r) in modes.into_iter().enumerate() {
        let (d, ck, fk, uk, dropped) = r.map_err(|e| e.at_mode(k + 1))?;
        if dropped {
            discarded.push(k + 1);
        }
        denom.push(d);
        c.push(ck);
        f.push(fk);
        sol_u.push(uk);
    }
    let (denom_floor, weighted_floor) = denominator_certificate(&spectrum, data.alpha, data.t_end);
    Ok(InverseSolution {
        time_grid: grid.nodes().to_vec(),
        u: sol_u,
        f: SpectralField::new(f, spectrum)?,
        c,
        denom,
        denom_floor,
        weighted_floor,
        discarded,
    })
}

impl InverseSolution {
    /// Mode `k` (0-based) of `u` at an arbitrary time.
    pub fn u_at(&self, data: &InverseProblemData, k: usize, t: f64, acc: &MLAccuracy) -> Result<f64> {
        let (phi, psi) = (data.phi.coeffs()[k], data.psi.coeffs()[k]);
        if self.discarded.contains(&(k + 1)) {
            return Ok(0.0);
        }
        if t == 0.0 || phi == psi {
            return Ok(phi);
        }
        let alpha = data.alpha.alpha();
        let x = data.spectrum().rho(k) * t.powf(alpha);
        Ok(phi + (psi - phi) * ml_complement(alpha, x, acc)? / self.denom[k])
    }

    /// `D^α u_k = (ψ_k - φ_k) ρ_k E_{α,1}(-ρ_k t^α) / D_k(T)` on the grid.
    pub fn dalpha_u(&self, data: &InverseProblemData, acc: &MLAccuracy) -> Result<Vec<Vec<f64>>> {
        let alpha = data.alpha.alpha();
        let params = MLParams::new(alpha, 1.0)?;
        let s = data.spectrum();
        (0..s.len())
            .map(|k| {
                let jump = data.psi.coeffs()[k] - data.phi.coeffs()[k];
                if jump == 0.0 || self.discarded.contains(&(k + 1)) {
                    return Ok(vec![0.0; self.time_grid.len()]);
                }
                let rho = s.rho(k);
                self.time_grid
                    .iter()
                    .map(|&t| Ok(jump * rho * ml_eval(params, -rho * t.powf(alpha), acc)? / self.denom[k]))
                    .collect()
            })
            .collect()
    }
}

/// Diagnostics of a reconstruction:
///
/// * the sup-norm estimates of `u`, `Mu`, `D^α u`, `D^α Lu` and of `f`,
///   with fitted constants;
/// * `l1-residual`: `max |(1+λ) D^α u + μ u - f|` over `t ∈ [T/4, T]` and all
///   modes, with `D^α` taken by the L1 scheme on `oracle`;
/// * `eigen-relation`: `max |D^α E + ρ E|` for `E = E_{α,1}(-ρ t^α)` on the
///   same window, again through the L1 scheme.
///
/// Both oracle checks are skipped for `α = 1`.
pub fn inverse_diagnostics(
    sol: &InverseSolution,
    data: &InverseProblemData,
    oracle: &L1Grid,
    acc: &MLAccuracy,
) -> Result<NormLedger> {
    let s = data.spectrum();
    let (lambda, mu) = (s.lambda(), s.mu());
    let gamma_s = s.smoothing_index().gamma;
    let (phi, psi) = (data.phi.coeffs(), data.psi.coeffs());
    let sq = |c: &[f64], l: f64, m: f64| -> f64 {
        c.iter().enumerate().map(|(k, c)| (lambda[k].powf(l) * mu[k].powf(m) * c).powi(2)).sum()
    };
    // sup over the grid of Σ_k (w_k r_k(t_j))²
    let sup_sq = |rows: &[Vec<f64>], l: f64, m: f64| -> f64 {
        (0..sol.time_grid.len())
            .map(|j| rows.iter().enumerate().map(|(k, r)| (lambda[k].powf(l) * mu[k].powf(m) * r[j]).powi(2)).sum())
            .fold(0.0, f64::max)
    };
    let du = sol.dalpha_u(data, acc)?;

    let mut ledger = NormLedger::default();
    ledger.record(
        "u-C-estimate",
        sup_sq(&sol.u, 0.0, 0.0),
        sq(phi, 0.0, 0.0) + sq(phi, 0.0, gamma_s) + sq(psi, 0.0, gamma_s),
    );
    ledger.record(
        "Mu-C-estimate",
        sup_sq(&sol.u, 0.0, 1.0),
        sq(phi, 0.0, 1.0) + sq(phi, 0.0, 1.0 + gamma_s) + sq(psi, 0.0, 1.0 + gamma_s),
    );
    ledger.record(
        "Dalpha_u-C-estimate",
        sup_sq(&du, 0.0, 0.0),
        sq(phi, -1.0, 1.0 + gamma_s) + sq(psi, -1.0, 1.0 + gamma_s),
    );
    ledger.record(
        "Dalpha_Lu-C-estimate",
        sup_sq(&du, 1.0, 0.0),
        sq(phi, 0.0, 1.0 + gamma_s) + sq(psi, 0.0, 1.0 + gamma_s),
    );
    ledger.record(
        "f-estimate",
        sq(sol.f.coeffs(), 0.0, 0.0),
        sq(phi, 0.0, 1.0) + sq(phi, 0.0, 1.0 + gamma_s) + sq(psi, 0.0, 1.0 + gamma_s),
    );
    ledger.note("denominator-floor", sol.denom_floor);
    ledger.note("weighted-denominator-floor", sol.weighted_floor);
    ledger.note("min-denominator", sol.denom.iter().copied().fold(f64::INFINITY, f64::min));
    let interpolation = (0..s.len())
        .map(|k| {
            let last = sol.u[k].len() - 1;
            (sol.u[k][0] - phi[k]).abs().max((sol.u[k][last] - psi[k]).abs())
        })
        .filter(|_| sol.discarded.is_empty())
        .fold(0.0, f64::max);
    ledger.note("interpolation-error", interpolation);

    let alpha = data.alpha.alpha();
    if alpha < 1.0 {
        let nodes = oracle.nodes();
        let start = oracle.steps().div_ceil(4).max(1);
        let params = MLParams::new(alpha, 1.0)?;
        let per_mode: Vec<Result<(f64, f64)>> = (0..s.len())
            .into_par_iter()
            .map(|k| {
                let rho = s.rho(k);
                let e: Vec<f64> = nodes
                    .iter()
                    .map(|&t| if t == 0.0 { Ok(1.0) } else { ml_eval(params, -rho * t.powf(alpha), acc) })
                    .collect::<Result<_>>()?;
                let de = caputo_derivative_sampled(&e, oracle, alpha)?;
                let u: Vec<f64> = nodes.iter().map(|&t| sol.u_at(data, k, t, acc)).collect::<Result<_>>()?;
                let dudt = caputo_derivative_sampled(&u, oracle, alpha)?;
                let fk = sol.f.coeffs()[k];
                let mut eig: f64 = 0.0;
                let mut res: f64 = 0.0;
                for j in start..=oracle.steps() {
                    eig = eig.max((de[j - 1] + rho * e[j]).abs());
                    res = res.max(((1.0 + lambda[k]) * dudt[j - 1] + mu[k] * u[j] - fk).abs());
                }
                Ok((eig, res))
            })
            .collect();
        let mut eig: f64 = 0.0;
        let mut res: f64 = 0.0;
        for (k, r) in per_mode.into_iter().enumerate() {
            let (e, r) = r.map_err(|e| e.at_mode(k + 1))?;
            eig = eig.max(e);
            res = res.max(r);
        }
        ledger.note("eigen-relation", eig);
        ledger.note("l1-residual", res);
    }
    Ok(ledger)
}
