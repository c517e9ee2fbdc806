//! The direct problem `D^α[u + Lu] + Mu = f`, `u(0) = φ`, solved mode by mode.
//!
//! Each coefficient satisfies `(1 + λ) D^α u + μ u = f(t)`, with
//! `ρ = μ / (1 + λ)` and `E(t) = E_{α,1}(-ρ t^α)`. Two closed forms are
//! implemented:
//!
//! * case I (`1/2 < α ≤ 1`):
//!   `u = φ E(t) + (1+λ)^{-1} ∫_0^t s^{α-1} E_{α,α}(-ρ s^α) f(t-s) ds`;
//! * case II (`0 < α ≤ 1`, needs `f'`):
//!   `u = φ E(t) + μ^{-1} [f(t) - E(t) f(0) - ∫_0^t E_{α,1}(-ρ s^α) f'(t-s) ds]`.
//!
//! Constant sources use `u = φ E + (c/μ)(1 - E)` in both cases.

mod problem;
mod product;

pub use problem::{FractionalOrder, ModalProblem, QuadratureSpec, Regime, SourceFn, SourceTrace, TimeGrid};

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::caputo_oracle::{caputo_derivative_sampled, L1Grid};
use crate::error::{Error, Result};
use crate::ledger::NormLedger;
use crate::mlfunc::{ml_complement, ml_eval, MLAccuracy, MLParams};
use crate::spectral::{SpectralField, SpectrumPair};
use product::{convolve_fn, convolve_samples, Kernel};

/// Which closed form to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// Case II when every source carries a derivative, otherwise case I.
    #[default]
    Auto,
    CaseI,
    CaseII,
}

/// Values of one mode on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalSolution {
    pub values: Vec<f64>,
    /// Richardson self-estimate of the convolution term; `None` when the
    /// term is exact (constant sources) or cannot be refined (samples).
    pub quad_estimate: Option<f64>,
}

fn relaxation(p: &ModalProblem, grid: &TimeGrid, acc: &MLAccuracy) -> Result<Vec<f64>> {
    let alpha = p.alpha.alpha();
    let params = MLParams::new(alpha, 1.0)?;
    let rho = p.rho();
    grid.nodes()
        .iter()
        .map(|&t| if t == 0.0 { Ok(1.0) } else { ml_eval(params, -rho * t.powf(alpha), acc) })
        .collect()
}

/// `φ E + (c/μ)(1 - E)` on the grid.
fn constant_source(p: &ModalProblem, c: f64, grid: &TimeGrid, acc: &MLAccuracy) -> Result<ModalSolution> {
    let e = relaxation(p, grid, acc)?;
    let alpha = p.alpha.alpha();
    let rho = p.rho();
    let mut values = Vec::with_capacity(e.len());
    for (&t, &ej) in grid.nodes().iter().zip(&e) {
        let forced = if c == 0.0 { 0.0 } else { c / p.mu * ml_complement(alpha, rho * t.powf(alpha), acc)? };
        values.push(p.phi * ej + forced);
    }
    Ok(ModalSolution { values, quad_estimate: None })
}

/// The singular-kernel convolution form; requires `α > 1/2`.
pub fn solve_modal_case_i(
    p: &ModalProblem,
    grid: &TimeGrid,
    quad: &QuadratureSpec,
    acc: &MLAccuracy,
) -> Result<ModalSolution> {
    if !p.alpha.admits_case_i() {
        return Err(Error::RegimeMismatch(format!(
            "the convolution representation needs 1/2 < alpha <= 1 so that s^(alpha-1) is square integrable; \
             alpha = {} requires a source derivative and the integrated-by-parts representation",
            p.alpha.alpha()
        )));
    }
    if let SourceTrace::Constant(c) = p.source {
        return constant_source(p, c, grid, acc);
    }
    let alpha = p.alpha.alpha();
    let kernel = Kernel::new(alpha, alpha, p.rho(), *acc)?;
    let weight = 1.0 / (1.0 + p.lambda);
    let (conv, estimate) = match &p.source {
        SourceTrace::Sampled { values, .. } => {
            let g = p.source.values_on(grid)?;
            debug_assert_eq!(g.len(), values.len());
            (convolve_samples(&kernel, grid, &g)?, None)
        }
        SourceTrace::Analytic { f, .. } => {
            let (v, e) = convolve_fn(&kernel, grid, f.as_ref(), quad, weight)?;
            (v, Some(e))
        }
        SourceTrace::Constant(_) => unreachable!(),
    };
    let e = relaxation(p, grid, acc)?;
    let values = e.iter().zip(&conv).map(|(ej, cj)| p.phi * ej + weight * cj).collect();
    Ok(ModalSolution { values, quad_estimate: estimate })
}

/// The integrated-by-parts form; valid for every `α ∈ (0, 1]` but needs `f'`.
pub fn solve_modal_case_ii(
    p: &ModalProblem,
    grid: &TimeGrid,
    quad: &QuadratureSpec,
    acc: &MLAccuracy,
) -> Result<ModalSolution> {
    if let SourceTrace::Constant(c) = p.source {
        return constant_source(p, c, grid, acc);
    }
    if !p.source.has_derivative() {
        return Err(Error::MissingDerivative(
            "the integrated-by-parts representation needs f' for every mode".into(),
        ));
    }
    let alpha = p.alpha.alpha();
    let kernel = Kernel::new(alpha, 1.0, p.rho(), *acc)?;
    let weight = 1.0 / p.mu;
    let f = p.source.values_on(grid)?;
    let (conv, estimate) = match &p.source {
        SourceTrace::Sampled { .. } => (convolve_samples(&kernel, grid, &p.source.derivative_on(grid)?)?, None),
        SourceTrace::Analytic { df: Some(df), .. } => {
            let (v, e) = convolve_fn(&kernel, grid, df.as_ref(), quad, weight)?;
            (v, Some(e))
        }
        _ => unreachable!(),
    };
    let e = relaxation(p, grid, acc)?;
    let values = (0..e.len())
        .map(|j| {
            if j == 0 {
                p.phi
            } else {
                p.phi * e[j] + weight * (f[j] - e[j] * f[0] - conv[j])
            }
        })
        .collect();
    Ok(ModalSolution { values, quad_estimate: estimate })
}

/// Data of a direct problem: `φ`, one source trace per mode, and `α`.
#[derive(Debug, Clone)]
pub struct DirectProblem {
    pub phi: SpectralField,
    pub sources: Vec<SourceTrace>,
    pub alpha: FractionalOrder,
}

impl DirectProblem {
    pub fn new(phi: SpectralField, sources: Vec<SourceTrace>, alpha: FractionalOrder) -> Result<Self> {
        if sources.len() != phi.coeffs().len() {
            return Err(Error::InvalidParams(format!(
                "{} source traces for {} modes",
                sources.len(),
                phi.coeffs().len()
            )));
        }
        Ok(Self { phi, sources, alpha })
    }

    /// Zero source in every mode.
    pub fn unforced(phi: SpectralField, alpha: FractionalOrder) -> Self {
        let sources = vec![SourceTrace::zero(); phi.coeffs().len()];
        Self { phi, sources, alpha }
    }

    pub fn spectrum(&self) -> &Arc<SpectrumPair> {
        self.phi.spectrum()
    }

    pub fn modal(&self, k: usize) -> Result<ModalProblem> {
        let s = self.spectrum();
        ModalProblem::new(s.lambda()[k], s.mu()[k], self.phi.coeffs()[k], self.sources[k].clone(), self.alpha)
    }

    /// The representation [`Representation::Auto`] resolves to.
    pub fn resolve(&self, requested: Representation) -> Result<Representation> {
        let all_derivatives = self.sources.iter().all(SourceTrace::has_derivative);
        match requested {
            Representation::CaseI if !self.alpha.admits_case_i() => Err(Error::RegimeMismatch(format!(
                "case I requires 1/2 < alpha <= 1, got alpha = {}",
                self.alpha.alpha()
            ))),
            Representation::CaseII if !all_derivatives => {
                Err(Error::MissingDerivative("case II requires a derivative for every source mode".into()))
            }
            Representation::Auto if all_derivatives => Ok(Representation::CaseII),
            Representation::Auto if self.alpha.admits_case_i() => Ok(Representation::CaseI),
            Representation::Auto => Err(Error::MissingDerivative(format!(
                "alpha = {} <= 1/2 needs the integrated-by-parts representation, which requires source derivatives",
                self.alpha.alpha()
            ))),
            r => Ok(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub quad: QuadratureSpec,
    pub representation: Representation,
    pub ml: MLAccuracy,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { quad: QuadratureSpec::default(), representation: Representation::Auto, ml: MLAccuracy::default() }
    }
}

/// Everything a direct solve produces.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub time_grid: Vec<f64>,
    /// `modal_solutions[k][j] = u_{k+1}(t_j)`.
    pub modal_solutions: Vec<Vec<f64>>,
    /// `f_{k+1}(t_j)`, kept for the derived series.
    pub source_values: Vec<Vec<f64>>,
    pub spectrum: Arc<SpectrumPair>,
    pub representation: Representation,
    /// Largest quadrature self-estimate over modes, `0` if none applied.
    pub quad_estimate: f64,
    /// Some source derivative came from finite differences.
    pub differenced_derivative: bool,
    pub ledger: NormLedger,
    /// `max_t |u_N(t)|`, the size of the last retained mode.
    pub truncation_diag: f64,
}

/// Solve every mode (in parallel on the current rayon pool) and assemble
/// the report in mode order.
pub fn solve_direct(problem: &DirectProblem, grid: &TimeGrid, opts: &SolverOptions) -> Result<SolveReport> {
    let representation = problem.resolve(opts.representation)?;
    let n = problem.phi.coeffs().len();
    let results: Vec<Result<(ModalSolution, Vec<f64>)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let p = problem.modal(k)?;
            let sol = match representation {
                Representation::CaseII => solve_modal_case_ii(&p, grid, &opts.quad, &opts.ml)?,
                _ => solve_modal_case_i(&p, grid, &opts.quad, &opts.ml)?,
            };
            let f = p.source.values_on(grid)?;
            Ok((sol, f))
        })
        .collect();
    let mut modal_solutions = Vec::with_capacity(n);
    let mut source_values = Vec::with_capacity(n);
    let mut quad_estimate: f64 = 0.0;
    for (k, r) in results.into_iter().enumerate() {
        let (sol, f) = r.map_err(|e| e.at_mode(k + 1))?;
        quad_estimate = quad_estimate.max(sol.quad_estimate.unwrap_or(0.0));
        modal_solutions.push(sol.values);
        source_values.push(f);
    }
    let truncation_diag = modal_solutions[n - 1].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let mut report = SolveReport {
        time_grid: grid.nodes().to_vec(),
        modal_solutions,
        source_values,
        spectrum: problem.spectrum().clone(),
        representation,
        quad_estimate,
        differenced_derivative: problem.sources.iter().any(SourceTrace::is_differenced),
        ledger: NormLedger::default(),
        truncation_diag,
    };
    report.ledger = direct_ledger(problem, grid, &report)?;
    Ok(report)
}

/// Coefficient-wise series derived from a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derived {
    Lu,
    Mu,
    DalphaU,
    DalphaLu,
}

impl Derived {
    pub const ALL: [Derived; 4] = [Derived::Lu, Derived::Mu, Derived::DalphaU, Derived::DalphaLu];

    pub fn tag(&self) -> &'static str {
        match self {
            Derived::Lu => "Lu",
            Derived::Mu => "Mu",
            Derived::DalphaU => "Dalpha_u",
            Derived::DalphaLu => "Dalpha_Lu",
        }
    }
}

/// `Lu`, `Mu`, `D^α u = (f - μ u)/(1 + λ)` or `D^α Lu = λ D^α u`, mode by mode.
pub fn derived_series(report: &SolveReport, which: Derived) -> Vec<Vec<f64>> {
    let (lambda, mu) = (report.spectrum.lambda(), report.spectrum.mu());
    report
        .modal_solutions
        .iter()
        .zip(&report.source_values)
        .enumerate()
        .map(|(k, (u, f))| {
            let (l, m) = (lambda[k], mu[k]);
            u.iter()
                .zip(f)
                .map(|(&u, &f)| match which {
                    Derived::Lu => l * u,
                    Derived::Mu => m * u,
                    Derived::DalphaU => (f - m * u) / (1.0 + l),
                    Derived::DalphaLu => l * (f - m * u) / (1.0 + l),
                })
                .collect()
        })
        .collect()
}

/// `∫_0^T Σ_k (λ_k^l μ_k^m r_k(t))² dt` by the trapezoid rule.
pub fn time_l2_sq(rows: &[Vec<f64>], t: &[f64], lambda: &[f64], mu: &[f64], l: f64, m: f64) -> f64 {
    let pointwise: Vec<f64> = (0..t.len())
        .map(|j| {
            rows.iter()
                .enumerate()
                .map(|(k, r)| (lambda[k].powf(l) * mu[k].powf(m) * r[j]).powi(2))
                .sum()
        })
        .collect();
    trapezoid(&pointwise, t)
}

pub(crate) fn trapezoid(v: &[f64], t: &[f64]) -> f64 {
    v.windows(2).zip(t.windows(2)).map(|(v, t)| 0.5 * (v[0] + v[1]) * (t[1] - t[0])).sum()
}

fn coeff_sq(c: &[f64], lambda: &[f64], mu: &[f64], l: f64, m: f64) -> f64 {
    c.iter().enumerate().map(|(k, c)| (lambda[k].powf(l) * mu[k].powf(m) * c).powi(2)).sum()
}

fn direct_ledger(problem: &DirectProblem, grid: &TimeGrid, report: &SolveReport) -> Result<NormLedger> {
    let s = &report.spectrum;
    let (lambda, mu) = (s.lambda(), s.mu());
    let t = &report.time_grid;
    let u = &report.modal_solutions;
    let f = &report.source_values;
    let phi = problem.phi.coeffs();
    let ph = |l, m| coeff_sq(phi, lambda, mu, l, m);
    let fl2 = |l, m| time_l2_sq(f, t, lambda, mu, l, m);

    let lhs_u = time_l2_sq(u, t, lambda, mu, 0.0, 0.0);
    let lhs_lu = time_l2_sq(u, t, lambda, mu, 1.0, 0.0);
    let lhs_mu = time_l2_sq(u, t, lambda, mu, 0.0, 1.0);
    let du = derived_series(report, Derived::DalphaU);
    let lhs_du = time_l2_sq(&du, t, lambda, mu, 0.0, 0.0);
    let lhs_dlu = time_l2_sq(&du, t, lambda, mu, 1.0, 0.0);

    let mut ledger = NormLedger::default();
    match report.representation {
        Representation::CaseII => {
            let df: Vec<Vec<f64>> = problem.sources.iter().map(|s| s.derivative_on(grid)).collect::<Result<_>>()?;
            let w1 = |l, m| (fl2(l, m).sqrt() + time_l2_sq(&df, t, lambda, mu, l, m).sqrt()).powi(2);
            ledger.record("u-L2-estimate", lhs_u, ph(0.0, 0.0) + w1(0.0, -1.0));
            ledger.record("Lu-L2-estimate", lhs_lu, ph(1.0, 0.0) + w1(1.0, -1.0));
            ledger.record("Mu-L2-estimate", lhs_mu, ph(0.0, 1.0) + w1(0.0, 0.0));
            ledger.record("Dalpha_u-L2-estimate", lhs_du, ph(-1.0, 1.0) + w1(-1.0, 0.0));
            ledger.record("Dalpha_Lu-L2-estimate", lhs_dlu, ph(0.0, 1.0) + w1(0.0, 0.0));
        }
        _ => {
            ledger.record("u-L2-estimate", lhs_u, ph(0.0, 0.0) + fl2(-1.0, 0.0));
            ledger.record("Lu-L2-estimate", lhs_lu, ph(1.0, 0.0) + fl2(0.0, 0.0));
            ledger.record("Mu-L2-estimate", lhs_mu, ph(0.0, 1.0) + fl2(-1.0, 1.0));
            ledger.record("Dalpha_u-L2-estimate", lhs_du, ph(-1.0, 1.0) + fl2(-1.0, 0.0) + fl2(-2.0, 1.0));
            ledger.record("Dalpha_Lu-L2-estimate", lhs_dlu, ph(0.0, 1.0) + fl2(0.0, 0.0) + fl2(-1.0, 1.0));
        }
    }

    // (1 + λ) D^α u + μ u - f with D^α u from the derived series: zero up to roundoff
    let mut residual: f64 = 0.0;
    for (k, row) in du.iter().enumerate() {
        for j in 0..t.len() {
            residual = residual.max(((1.0 + lambda[k]) * row[j] + mu[k] * u[k][j] - f[k][j]).abs());
        }
    }
    ledger.note("modal-residual", residual);
    ledger.note("quadrature-estimate", report.quad_estimate);
    ledger.note("truncation", report.truncation_diag);

    // independent check: the L1 derivative of the computed u on [T/4, T]
    let alpha = problem.alpha.alpha();
    if grid.is_uniform() && alpha < 1.0 && grid.steps() >= 2 {
        let l1 = L1Grid::new(grid.steps(), grid.t_end())?;
        let start = grid.steps().div_ceil(4);
        let mut worst: f64 = 0.0;
        for (k, row) in u.iter().enumerate() {
            let d = caputo_derivative_sampled(row, &l1, alpha)?;
            for j in start.max(1)..=grid.steps() {
                worst = worst.max((d[j - 1] - du[k][j]).abs());
            }
        }
        ledger.note("oracle-residual", worst);
    }
    Ok(ledger)
}
