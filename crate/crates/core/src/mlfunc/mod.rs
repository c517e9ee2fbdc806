//! Two-parameter Mittag-Leffler function `E_{α,β}(z) = Σ z^m / Γ(αm + β)`
//! on the real line, for `0 < α ≤ 1`, `β > 0`.
//!
//! On the negative axis the evaluator switches on `w = |z|^{1/α}`, the
//! quantity that controls both the cancellation in the power series (its
//! largest term grows like `e^w`) and the accuracy of the Poincaré expansion
//! (its smallest term shrinks like `e^{-w}`):
//!
//! * `w ≤ 8`: compensated power series,
//! * `w ≥ 36`: asymptotic expansion truncated at the smallest term,
//! * otherwise, or whenever the chosen route misses the tolerance: the
//!   branch-cut integral representation.
//!
//! `α = 1` goes to the exponential (β = 1) or to Kummer's transformation.

pub mod branch;

use crate::error::{Error, Result};
use crate::gamma::gamma;
use branch::Estimate;

const SERIES_SWITCH: f64 = 8.0;
const ASYMPTOTIC_SWITCH: f64 = 36.0;
const KUMMER_SWITCH: f64 = 50.0;

/// Parameters `(α, β)` of `E_{α,β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    alpha: f64,
    beta: f64,
}

impl MLParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1]")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Requested absolute accuracy and the term budget for series routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLAccuracy {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl Default for MLAccuracy {
    fn default() -> Self {
        Self { abs_tol: 1e-13, max_terms: 10_000 }
    }
}

impl MLAccuracy {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        let acc = Self { abs_tol, max_terms };
        acc.validate()?;
        Ok(acc)
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol >= 1e-16 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "abs_tol = {} below machine-epsilon scale",
                self.abs_tol
            )));
        }
        if self.max_terms == 0 || self.max_terms > 1_000_000 {
            return Err(Error::InvalidParams(format!("max_terms = {}", self.max_terms)));
        }
        Ok(())
    }
}

/// Which route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Exponential,
    Series,
    Asymptotic,
    BranchCut,
}

/// `E_{α,β}(z)` with the route taken and its error estimate.
pub fn ml_eval_detailed(params: MLParams, z: f64, acc: &MLAccuracy) -> Result<(Estimate, Route)> {
    acc.validate()?;
    if !z.is_finite() {
        return Err(Error::InvalidParams(format!("z = {z} is not finite")));
    }
    let MLParams { alpha, beta } = params;
    let tol = acc.abs_tol;
    let ok = |e: Estimate| e.error <= tol && e.value.is_finite();
    let fail = |e: Estimate, what: &str| {
        Err(Error::NonConvergence(format!(
            "E_{{{alpha},{beta}}}({z}): {what} error estimate {:.3e} > {tol:.1e}",
            e.error
        )))
    };

    if alpha == 1.0 {
        if beta == 1.0 {
            let v = z.exp();
            return Ok((Estimate { value: v, error: f64::EPSILON * v }, Route::Exponential));
        }
        if z >= 0.0 {
            let e = branch::series(alpha, beta, z, acc.max_terms);
            return if ok(e) { Ok((e, Route::Series)) } else { fail(e, "series") };
        }
        let x = -z;
        if x <= KUMMER_SWITCH {
            let e = branch::exponential_kummer(beta, x, acc.max_terms);
            return if ok(e) { Ok((e, Route::Exponential)) } else { fail(e, "Kummer series") };
        }
        let e = branch::asymptotic(alpha, beta, x, acc.max_terms);
        return if ok(e) { Ok((e, Route::Asymptotic)) } else { fail(e, "asymptotic") };
    }

    if z >= 0.0 {
        let e = branch::series(alpha, beta, z, acc.max_terms);
        return if ok(e) { Ok((e, Route::Series)) } else { fail(e, "series") };
    }

    let x = -z;
    let w = x.powf(1.0 / alpha);
    if w <= SERIES_SWITCH {
        let e = branch::series(alpha, beta, z, acc.max_terms);
        if ok(e) {
            return Ok((e, Route::Series));
        }
    }
    if w >= ASYMPTOTIC_SWITCH {
        let e = branch::asymptotic(alpha, beta, x, acc.max_terms);
        if ok(e) {
            return Ok((e, Route::Asymptotic));
        }
    }
    let e = branch::branch_cut(alpha, beta, x, tol);
    if ok(e) {
        Ok((e, Route::BranchCut))
    } else {
        fail(e, "branch-cut integral")
    }
}

/// `E_{α,β}(z)` to absolute accuracy `acc.abs_tol`.
pub fn ml_eval(params: MLParams, z: f64, acc: &MLAccuracy) -> Result<f64> {
    ml_eval_detailed(params, z, acc).map(|(e, _)| e.value)
}

/// Shorthand for `E_{α,β}(z)` at the default accuracy.
pub fn ml(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    ml_eval(MLParams::new(alpha, beta)?, z, &MLAccuracy::default())
}

/// `1 - E_{α,1}(-x)` for `x ≥ 0`, computed as `x E_{α,α+1}(-x)` so that small
/// arguments keep full relative accuracy.
pub fn ml_complement(alpha: f64, x: f64, acc: &MLAccuracy) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidParams(format!("x = {x} must be non-negative")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x * ml_eval(MLParams::new(alpha, alpha + 1.0)?, -x, acc)?)
}

/// Two-sided rational bound on `E_{α,1}(-z)` for `0 < α < 1`, `z ≥ 0`:
/// `1/(1 + Γ(1-α) z) ≤ E_{α,1}(-z) ≤ 1/(1 + z/Γ(1+α))`.
pub fn ml_simon_bounds(alpha: f64, z: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::InvalidParams(format!("z = {z} must be finite and non-negative")));
    }
    let lower = 1.0 / (1.0 + gamma(1.0 - alpha) * z);
    let upper = 1.0 / (1.0 + z / gamma(1.0 + alpha));
    Ok((lower, upper))
}

/// `d/ds E_{α,1}(-ρ s^α) = -ρ s^{α-1} E_{α,α}(-ρ s^α)`, which is never positive.
pub fn ml_kernel_derivative(alpha: f64, rho: f64, s: f64, acc: &MLAccuracy) -> Result<f64> {
    if !(s > 0.0 && rho > 0.0) {
        return Err(Error::InvalidParams(format!("need s > 0 and rho > 0, got s = {s}, rho = {rho}")));
    }
    let params = MLParams::new(alpha, alpha)?;
    let e = ml_eval(params, -rho * s.powf(alpha), acc)?;
    Ok(-rho * s.powf(alpha - 1.0) * e)
}
