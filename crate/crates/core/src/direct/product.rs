//! Product integration of `∫_0^t K_β(s) g(t - s) ds` for the kernel family
//! `K_β(s) = s^{β-1} E_{α,β}(-ρ s^α)`.
//!
//! The family is closed under integration, `∫_0^s K_β = K_{β+1}(s)`, so on a
//! panel `[a, b]` with `g` replaced by its linear interpolant both moments
//! `∫ K_β` and `∫ K_β (s - a)` come out of `K_{β+1}` and `K_{β+2}` exactly.
//! The `s^{α-1}` singularity at the origin never meets a quadrature node.

use crate::error::{Error, Result};
use crate::mlfunc::{ml_eval, MLAccuracy, MLParams};

use super::problem::{QuadratureSpec, TimeGrid};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    alpha: f64,
    beta: f64,
    rho: f64,
    first: MLParams,
    second: MLParams,
    acc: MLAccuracy,
}

impl Kernel {
    pub(crate) fn new(alpha: f64, beta: f64, rho: f64, acc: MLAccuracy) -> Result<Self> {
        Ok(Self {
            alpha,
            beta,
            rho,
            first: MLParams::new(alpha, beta + 1.0)?,
            second: MLParams::new(alpha, beta + 2.0)?,
            acc,
        })
    }

    /// `(K_{β+1}(s), K_{β+2}(s))`.
    fn antiderivatives(&self, s: f64) -> Result<(f64, f64)> {
        if s == 0.0 {
            return Ok((0.0, 0.0));
        }
        let z = -self.rho * s.powf(self.alpha);
        let p = s.powf(self.beta);
        Ok((p * ml_eval(self.first, z, &self.acc)?, p * s * ml_eval(self.second, z, &self.acc)?))
    }
}

/// Panel sums for one output time. `s` are panel nodes in the lag variable,
/// ascending from 0; `g[i] = g(t - s[i])`.
fn panel_sum(s: &[f64], k1: &[f64], k2: &[f64], g: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..s.len() - 1 {
        let w = s[i + 1] - s[i];
        let i0 = k1[i + 1] - k1[i];
        let i1 = k1[i + 1] * w - (k2[i + 1] - k2[i]);
        sum += g[i] * i0 + (g[i + 1] - g[i]) / w * i1;
    }
    sum
}

/// Convolution values at every grid node for a source known at arbitrary
/// times. Panels come from splitting each grid interval into `m` pieces and
/// `m` doubles until the self-estimate drops below `quad.tol / weight`: the
/// Richardson difference `|U_2m - U_m| / 3`, or, once that shrinks like
/// `h²`, the change between successive extrapolations. Returns the
/// extrapolated values and the estimate.
pub(crate) fn convolve_fn(
    kernel: &Kernel,
    grid: &TimeGrid,
    g: &(dyn Fn(f64) -> f64 + Sync),
    quad: &QuadratureSpec,
    weight: f64,
) -> Result<(Vec<f64>, f64)> {
    quad.validate()?;
    let tol = quad.tol / weight.abs().max(f64::MIN_POSITIVE);
    let mut m = quad.panels;
    let mut coarse = convolve_level(kernel, grid, g, m)?;
    let mut last_estimate = f64::INFINITY;
    let mut last_values: Option<Vec<f64>> = None;
    for _ in 0..quad.max_doublings {
        m *= 2;
        let fine = convolve_level(kernel, grid, g, m)?;
        let raw = fine.iter().zip(&coarse).map(|(f, c)| (f - c).abs()).fold(0.0, f64::max) / 3.0;
        let values: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
        // Once the differences shrink like h², successive extrapolations
        // bound the error of the extrapolated values themselves.
        let extrapolated = match &last_values {
            Some(prev) if last_estimate >= 3.0 * raw => {
                values.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            }
            _ => f64::INFINITY,
        };
        let estimate = raw.min(extrapolated);
        if estimate <= tol {
            return Ok((values, estimate * weight.abs()));
        }
        last_estimate = raw;
        last_values = Some(values);
        coarse = fine;
    }
    Err(Error::QuadratureFailure(format!(
        "self-estimate {:.3e} above tolerance {:.1e} at {m} panels per interval",
        last_estimate * weight.abs(),
        quad.tol
    )))
}

fn convolve_level(kernel: &Kernel, grid: &TimeGrid, g: &(dyn Fn(f64) -> f64 + Sync), m: usize) -> Result<Vec<f64>> {
    let t = grid.nodes();
    let j_max = grid.steps();
    let mut out = vec![0.0; j_max + 1];
    if grid.is_uniform() {
        // shared lags: s_i = iT/(Jm), and t_j - s_i is again a fine node
        let n = j_max * m;
        let t_end = grid.t_end();
        let fine: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let (k1, k2) = table(kernel, &fine)?;
        let gv: Vec<f64> = fine.iter().map(|&x| g(x)).collect();
        let mut rev = Vec::with_capacity(n + 1);
        for j in 1..=j_max {
            let top = j * m;
            rev.clear();
            rev.extend((0..=top).map(|i| gv[top - i]));
            out[j] = panel_sum(&fine[..=top], &k1[..=top], &k2[..=top], &rev);
        }
    } else {
        // lags t_j - τ for sub-nodes τ of each interval
        let mut tau = Vec::with_capacity(j_max * m + 1);
        tau.push(0.0);
        for w in t.windows(2) {
            for q in 1..=m {
                tau.push(if q == m { w[1] } else { w[0] + (w[1] - w[0]) * q as f64 / m as f64 });
            }
        }
        let gv: Vec<f64> = tau.iter().map(|&x| g(x)).collect();
        for j in 1..=j_max {
            let top = j * m;
            let s: Vec<f64> = (0..=top).map(|i| if i == 0 { 0.0 } else { t[j] - tau[top - i] }).collect();
            let (k1, k2) = table(kernel, &s)?;
            let rev: Vec<f64> = (0..=top).map(|i| gv[top - i]).collect();
            out[j] = panel_sum(&s, &k1, &k2, &rev);
        }
    }
    Ok(out)
}

/// Convolution with a source sampled at the grid nodes: exact for the
/// piecewise-linear interpolant, no refinement possible.
pub(crate) fn convolve_samples(kernel: &Kernel, grid: &TimeGrid, g: &[f64]) -> Result<Vec<f64>> {
    let t = grid.nodes();
    let j_max = grid.steps();
    let mut out = vec![0.0; j_max + 1];
    let uniform_table = if grid.is_uniform() { Some(table(kernel, t)?) } else { None };
    for j in 1..=j_max {
        let rev: Vec<f64> = (0..=j).map(|i| g[j - i]).collect();
        out[j] = match &uniform_table {
            Some((k1, k2)) => panel_sum(&t[..=j], &k1[..=j], &k2[..=j], &rev),
            None => {
                let s: Vec<f64> = (0..=j).map(|i| if i == 0 { 0.0 } else { t[j] - t[j - i] }).collect();
                let (k1, k2) = table(kernel, &s)?;
                panel_sum(&s, &k1, &k2, &rev)
            }
        };
    }
    Ok(out)
}

fn table(kernel: &Kernel, s: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut k1 = Vec::with_capacity(s.len());
    let mut k2 = Vec::with_capacity(s.len());
    for &x in s {
        let (a, b) = kernel.antiderivatives(x)?;
        k1.push(a);
        k2.push(b);
    }
    Ok((k1, k2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlfunc::ml;

    #[test]
    fn exact_for_linear_sources() {
        // ∫_0^t K_α(s) (a + b(t - s)) ds = a K_{α+1}(t) + b K_{α+2}(t)
        let (alpha, rho) = (0.7, 1.3);
        let kernel = Kernel::new(alpha, alpha, rho, MLAccuracy::default()).unwrap();
        let grid = TimeGrid::graded(1.0, 6, 1.5).unwrap();
        let g = |x: f64| 2.0 - 0.5 * x;
        let samples: Vec<f64> = grid.nodes().iter().map(|&x| g(x)).collect();
        let by_samples = convolve_samples(&kernel, &grid, &samples).unwrap();
        let (by_fn, _) = convolve_fn(&kernel, &grid, &g, &QuadratureSpec::default(), 1.0).unwrap();
        for (j, &t) in grid.nodes().iter().enumerate() {
            let z = -rho * t.powf(alpha);
            let want = 2.0 * t.powf(alpha) * ml(alpha, alpha + 1.0, z).unwrap()
                - 0.5 * t.powf(alpha + 1.0) * ml(alpha, alpha + 2.0, z).unwrap();
            assert!((by_samples[j] - want).abs() < 1e-14, "{} vs {want}", by_samples[j]);
            assert!((by_fn[j] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn failure_reported_when_budget_too_small() {
        let kernel = Kernel::new(0.6, 0.6, 1.0, MLAccuracy::default()).unwrap();
        let grid = TimeGrid::uniform(1.0, 2).unwrap();
        let quad = QuadratureSpec { panels: 1, tol: 1e-15, max_doublings: 1 };
        let g = |x: f64| (20.0 * x).sin();
        assert!(matches!(convolve_fn(&kernel, &grid, &g, &quad, 1.0), Err(Error::QuadratureFailure(_))));
    }
}
