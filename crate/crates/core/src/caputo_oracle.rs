//! The L1 scheme: piecewise-linear product integration of the Caputo
//! derivative on a uniform grid, and the implicit time stepper built on it.
//!
//! Nothing here calls the Mittag-Leffler evaluator, which is what makes it
//! usable as an independent check on the closed-form solvers.

use crate::direct::{ModalProblem, SourceTrace};
use crate::error::{Error, Result};
use crate::gamma::gamma;

/// Uniform nodes `t_j = jT/J`, `j = 0..=J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Grid {
    steps: usize,
    t_end: f64,
}

impl L1Grid {
    pub fn new(steps: usize, t_end: f64) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidGrid(format!("L1 grid needs J >= 2, got {steps}")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidGrid(format!("T = {t_end} must be positive")));
        }
        Ok(Self { steps, t_end })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn step(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.t_end * j as f64 / self.steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.node(j)).collect()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// `b_k = (k+1)^{1-α} - k^{1-α}` for `k = 0..n`, written as
/// `k^{1-α} expm1((1-α) ln1p(1/k))` so that large `k` loses nothing to
/// cancellation.
pub fn l1_weights(n: usize, alpha: f64) -> Vec<f64> {
    let p = 1.0 - alpha;
    (0..n)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let k = k as f64;
                k.powf(p) * (p * (1.0 / k).ln_1p()).exp_m1()
            }
        })
        .collect()
}

/// L1 approximation of `D^α u` at `t_1, ..., t_J` from samples at
/// `t_0, ..., t_J`.
pub fn caputo_derivative_sampled(samples: &[f64], grid: &L1Grid, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let j_max = grid.steps();
    if samples.len() != j_max + 1 {
        return Err(Error::InvalidGrid(format!("{} samples for {} nodes", samples.len(), j_max + 1)));
    }
    let b = l1_weights(j_max, alpha);
    let d: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = grid.step().powf(-alpha) / gamma(2.0 - alpha);
    Ok((1..=j_max).map(|n| scale * history(&b, &d, n, 0)).collect())
}

/// `Σ_{k=from}^{n-1} b_k d_{n-1-k}`, where `d_i = u_{i+1} - u_i`.
#[inline]
fn history(b: &[f64], d: &[f64], n: usize, from: usize) -> f64 {
    b[from..n].iter().zip(d[..n - from].iter().rev()).map(|(x, y)| x * y).sum()
}

/// Implicit L1 stepping of `D^α u + ρ u = g(t)`, `u(0) = φ`.
pub fn l1_solve_scalar(alpha: f64, rho: f64, phi: f64, g: &[f64], grid: &L1Grid) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let j_max = grid.steps();
    if g.len() != j_max + 1 {
        return Err(Error::InvalidGrid(format!("{} source values for {} nodes", g.len(), j_max + 1)));
    }
    let b = l1_weights(j_max, alpha);
    let c = grid.step().powf(-alpha) / gamma(2.0 - alpha);
    let mut u = Vec::with_capacity(j_max + 1);
    let mut d = Vec::with_capacity(j_max);
    u.push(phi);
    for n in 1..=j_max {
        // c (u_n - u_{n-1}) + c Σ_{k≥1} b_k d_{n-1-k} + ρ u_n = g_n
        let hist = if n > 1 { history(&b, &d, n, 1) } else { 0.0 };
        let prev = u[n - 1];
        let un = (g[n] + c * prev - c * hist) / (c + rho);
        d.push(un - prev);
        u.push(un);
    }
    Ok(u)
}

/// L1 solution of a modal problem on `grid`; sampled sources must already
/// live on this grid.
pub fn l1_solve_modal(p: &ModalProblem, grid: &L1Grid) -> Result<Vec<f64>> {
    let alpha = p.alpha.alpha();
    check_alpha(alpha)?;
    let nodes = grid.nodes();
    let g: Vec<f64> = p.source.values_at(&nodes)?.into_iter().map(|f| f / (1.0 + p.lambda)).collect();
    l1_solve_scalar(alpha, p.rho(), p.phi, &g, grid)
}

/// Richardson elimination over a sequence computed with step ratio 2,
/// removing the error terms `h^{p_1}, h^{p_2}, ...` in order. Uses the last
/// `exponents.len() + 1` values.
pub fn richardson(values: &[f64], exponents: &[f64]) -> f64 {
    let m = exponents.len().min(values.len().saturating_sub(1));
    let mut row: Vec<f64> = values[values.len() - m - 1..].to_vec();
    for &p in &exponents[..m] {
        let r = 2f64.powf(p);
        row = row.windows(2).map(|w| (r * w[1] - w[0]) / (r - 1.0)).collect();
    }
    row[0]
}

/// Error exponents of the L1 stepper at a fixed time for solutions with a
/// `t^α` initial layer.
pub fn l1_error_exponents(alpha: f64) -> [f64; 4] {
    [1.0, 2.0 - alpha, 2.0, 3.0 - alpha]
}

/// `u(T)` from L1 solves at each of `steps` (which must double), combined
/// by Richardson elimination of [`l1_error_exponents`].
pub fn l1_extrapolated(p: &ModalProblem, t_end: f64, steps: &[usize]) -> Result<f64> {
    check_geometric(steps)?;
    let mut finals = Vec::with_capacity(steps.len());
    for &j in steps {
        let u = l1_solve_modal(p, &L1Grid::new(j, t_end)?)?;
        finals.push(u[j]);
    }
    Ok(richardson(&finals, &l1_error_exponents(p.alpha.alpha())))
}

fn check_geometric(steps: &[usize]) -> Result<()> {
    if steps.len() < 3 {
        return Err(Error::InsufficientRefinements(steps.len()));
    }
    if steps.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidGrid(format!("step counts {steps:?} must double")));
    }
    Ok(())
}

/// Observed errors and rates of a refinement study.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<usize>,
    pub errors: Vec<f64>,
    /// `log2(e_i / e_{i+1})`, one fewer than `errors`.
    pub rates: Vec<f64>,
    /// The last rate, or `NaN` when the scheme is exact.
    pub order: f64,
    /// Errors at roundoff level: the scheme reproduces the solution.
    pub exact: bool,
}

/// Reference against which [`convergence_order`] measures errors.
pub enum Reference<'a> {
    Exact(&'a dyn Fn(f64) -> f64),
    /// The solve at twice the finest requested resolution.
    Finest,
}

/// Observed order of [`l1_solve_modal`] over doubling step counts. Errors are
/// the maximum over nodes `t_2, ..., t_J`; the first node sits inside the
/// initial layer and is left out.
pub fn convergence_order(p: &ModalProblem, t_end: f64, steps: &[usize], reference: Reference) -> Result<ConvergenceReport> {
    check_geometric(steps)?;
    let finest = match reference {
        Reference::Finest => {
            let j = 2 * steps[steps.len() - 1];
            Some((j, l1_solve_modal(p, &L1Grid::new(j, t_end)?)?))
        }
        Reference::Exact(_) => None,
    };
    let mut errors = Vec::with_capacity(steps.len());
    let mut scale: f64 = 0.0;
    for &j in steps {
        let grid = L1Grid::new(j, t_end)?;
        let u = l1_solve_modal(p, &grid)?;
        let mut err: f64 = 0.0;
        for (n, &un) in u.iter().enumerate().skip(2) {
            let want = match (&reference, &finest) {
                (Reference::Exact(f), _) => f(grid.node(n)),
                (_, Some((jf, uf))) => uf[n * (jf / j)],
                _ => unreachable!(),
            };
            err = err.max((un - want).abs());
            scale = scale.max(want.abs());
        }
        errors.push(err);
    }
    let exact = errors.iter().all(|&e| e <= 1e-11 * scale.max(1.0));
    let rates: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order = if exact { f64::NAN } else { *rates.last().unwrap() };
    Ok(ConvergenceReport { steps: steps.to_vec(), errors, rates, order, exact })
}

/// `u = t²` solving `(1 + λ) D^α u + μ u = f` with `u(0) = 0`, which gives
/// `f(t) = (1 + λ) 2 t^{2-α} / Γ(3-α) + μ t²`.
pub fn manufactured_quadratic(lambda: f64, mu: f64, alpha: f64) -> Result<(ModalProblem, impl Fn(f64) -> f64)> {
    let order = crate::direct::FractionalOrder::new(alpha)?;
    let c = (1.0 + lambda) * 2.0 / gamma(3.0 - alpha);
    let f = move |t: f64| c * t.powf(2.0 - alpha) + mu * t * t;
    let df = move |t: f64| c * (2.0 - alpha) * t.powf(1.0 - alpha) + 2.0 * mu * t;
    let p = ModalProblem::new(lambda, mu, 0.0, SourceTrace::analytic_with_derivative(f, df), order)?;
    Ok((p, |t: f64| t * t))
}

/// `u = 1 + t`, for which the L1 scheme has no truncation error:
/// `f(t) = (1 + λ) t^{1-α} / Γ(2-α) + μ (1 + t)`.
pub fn manufactured_affine(lambda: f64, mu: f64, alpha: f64) -> Result<(ModalProblem, impl Fn(f64) -> f64)> {
    let order = crate::direct::FractionalOrder::new(alpha)?;
    let c = (1.0 + lambda) / gamma(2.0 - alpha);
    let f = move |t: f64| c * t.powf(1.0 - alpha) + mu * (1.0 + t);
    let p = ModalProblem::new(lambda, mu, 1.0, SourceTrace::analytic(f), order)?;
    Ok((p, |t: f64| 1.0 + t))
}
