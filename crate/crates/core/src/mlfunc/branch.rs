//! The individual evaluation routes for `E_{α,β}(z)` on the real line.
//!
//! Each route returns its own error estimate; the dispatcher in the parent
//! module picks the cheapest one whose estimate meets the requested
//! tolerance. They are public so the routes can be cross-checked against
//! each other.

use std::f64::consts::PI;

use crate::gamma::{ln_gamma, rgamma, sin_pi};
use crate::quad;

/// A value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Relative accuracy assumed for a single reciprocal-gamma evaluation.
const RGAMMA_REL_ERR: f64 = 2e-15;

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `z^m / Γ(αm + β)` without intermediate overflow.
fn series_term(z: f64, m: u32, arg: f64) -> f64 {
    if m == 0 {
        return rgamma(arg);
    }
    let sign = if z < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let mag = z.abs().powf(m as f64);
    let r = rgamma(arg);
    if mag.is_finite() && mag > 1e-290 && r.is_finite() && r != 0.0 && r.abs() > 1e-290 {
        let t = mag * r;
        if t.is_finite() {
            return sign * t;
        }
    }
    sign * (m as f64 * z.abs().ln() - ln_gamma(arg)).exp()
}

/// Power series `Σ z^m / Γ(αm+β)` with compensated summation.
///
/// The error estimate is dominated by the accuracy of the individual
/// coefficients times `Σ|terms|`, which is what makes the series useless
/// for large negative arguments.
pub fn series(alpha: f64, beta: f64, z: f64, max_terms: usize) -> Estimate {
    if z == 0.0 {
        return Estimate { value: rgamma(beta), error: f64::EPSILON * rgamma(beta).abs() };
    }
    let mut acc = Neumaier::default();
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut tail = f64::INFINITY;
    for m in 0..max_terms as u32 {
        let arg = alpha * m as f64 + beta;
        let t = series_term(z, m, arg);
        acc.add(t);
        abs_sum += t.abs();
        let mag = t.abs();
        // past the peak and negligible: the remaining terms decay faster than geometric
        if m > 2 && mag <= prev && mag <= 1e-18 * abs_sum.max(1e-300) {
            tail = mag;
            break;
        }
        if mag == 0.0 && m > 0 && arg > 2.0 {
            tail = 0.0;
            break;
        }
        prev = mag;
    }
    let value = acc.total();
    let error = tail + abs_sum * (RGAMMA_REL_ERR + 4.0 * f64::EPSILON);
    Estimate { value, error }
}

/// Poincaré expansion for `E_{α,β}(-x)`, `x > 0`:
/// `Σ_{k≥1} (-1)^{k+1} x^{-k} / Γ(β - αk)`, truncated at the smallest term.
pub fn asymptotic(alpha: f64, beta: f64, x: f64, max_terms: usize) -> Estimate {
    debug_assert!(x > 0.0);
    let ln_x = x.ln();
    let mut acc = Neumaier::default();
    let mut abs_sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut error = f64::INFINITY;
    let integer_beta = alpha == 1.0 && beta == beta.floor();
    for k in 1..=max_terms {
        let arg = beta - alpha * k as f64;
        if integer_beta && arg <= 0.0 {
            // every remaining coefficient vanishes
            error = 0.0;
            break;
        }
        // Truncate on the envelope |Γ(1 - s)|/π ≥ |1/Γ(s)| rather than on the
        // coefficients themselves, which dip to zero near the poles of Γ.
        let ln_env = if arg < 1.0 { ln_gamma(1.0 - arg) - PI.ln() } else { -ln_gamma(arg) };
        let env = (ln_env - k as f64 * ln_x).exp();
        if !env.is_finite() || env > prev {
            error = prev;
            break;
        }
        prev = env;
        let c = rgamma(arg);
        let mag = (-(k as f64) * ln_x).exp() * c.abs();
        if mag == 0.0 {
            continue;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 } * c.signum();
        acc.add(sign * mag);
        abs_sum += mag;
        if env <= 1e-19 * abs_sum {
            error = env;
            break;
        }
    }
    if alpha == 1.0 {
        // the exponentially small part x^{1-β} e^{-x} is left out
        error += (-x + (1.0 - beta) * ln_x).exp();
    }
    let value = acc.total();
    Estimate { value, error: error + abs_sum * (RGAMMA_REL_ERR + 4.0 * f64::EPSILON) }
}

/// `E_{1,β}(-x)` through Kummer's transformation
/// `₁F₁(1; β; -x) = e^{-x} ₁F₁(β-1; β; x)`, whose series has terms of one sign
/// for `β ≥ 1`.
pub fn exponential_kummer(beta: f64, x: f64, max_terms: usize) -> Estimate {
    debug_assert!(x >= 0.0);
    if beta == 1.0 {
        let v = (-x).exp();
        return Estimate { value: v, error: f64::EPSILON * v };
    }
    // e^{-x}/Γ(β) Σ_k (β-1)/(β-1+k) x^k/k!, with the Poisson weight e^{-x}x^k/k! in log space
    let mut acc = Neumaier::default();
    let mut abs_sum = 0.0;
    let mut tail = f64::INFINITY;
    let ln_x = if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    for k in 0..max_terms {
        let kf = k as f64;
        let poisson = if k == 0 { (-x).exp() } else { (kf * ln_x - x - ln_gamma(kf + 1.0)).exp() };
        let ratio = if k == 0 { 1.0 } else { (beta - 1.0) / (beta - 1.0 + kf) };
        let t = poisson * ratio;
        acc.add(t);
        abs_sum += t.abs();
        if kf > x && t.abs() <= 1e-18 * abs_sum {
            tail = t.abs();
            break;
        }
    }
    let r = rgamma(beta);
    Estimate {
        value: r * acc.total(),
        error: r.abs() * (tail + abs_sum * 1e-15),
    }
}

/// Branch-cut integral for `E_{α,β}(-x)`, `0 < α < 1`, `0 < β ≤ 1`, `x > 0`.
///
/// Collapsing the Hankel contour of the inverse Laplace transform onto the
/// negative axis and substituting `v = r^α` gives
///
/// ```text
/// E_{α,β}(-x) = 1/(απ) ∫_0^∞ e^{-v^{1/α}} v^{(1-β)/α}
///                 (v sin βπ + x sin (β-α)π) / (v² + 2xv cos απ + x²) dv
/// ```
///
/// which has no cancellation problem for large `x`.
fn branch_cut_base(alpha: f64, beta: f64, x: f64, abs_tol: f64) -> Estimate {
    let inv_alpha = 1.0 / alpha;
    let p = (1.0 - beta) * inv_alpha;
    let sb = sin_pi(beta);
    let sba = sin_pi(beta - alpha);
    let c = (PI * alpha).cos();
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 0.0;
        }
        let w = (-v.powf(inv_alpha)).exp();
        let num = v * sb + x * sba;
        let den = v * v + 2.0 * x * v * c + x * x;
        w * v.powf(p) * num / den
    };
    // e^{-v^{1/α}} < 1e-20 beyond this point
    let upper = 46.0_f64.powf(alpha);
    let mut breaks = Vec::new();
    if c < 0.0 {
        let peak = -x * c;
        if peak < upper {
            breaks.push(peak);
            breaks.push(0.5 * peak);
            breaks.push((1.5 * peak).min(upper));
        }
    }
    // the exponential factor turns over near v = 1
    breaks.push(1.0);
    let scale = 1.0 / (alpha * PI);
    let q = quad::integrate(integrand, 0.0, upper, &breaks, 0.25 * abs_tol / scale, 4000);
    Estimate { value: scale * q.value, error: scale * q.error + 1e-20 }
}

/// Branch-cut integral for any `β > 0`.
///
/// `β > 1` is reached from a base parameter in `(1-α, 1]` through
/// `E_{α,β+α}(z) = (E_{α,β}(z) - 1/Γ(β)) / z`, which does not amplify errors
/// once `x > 1`.
pub fn branch_cut(alpha: f64, beta: f64, x: f64, abs_tol: f64) -> Estimate {
    debug_assert!(alpha > 0.0 && alpha < 1.0 && x > 0.0);
    let steps = if beta > 1.0 { ((beta - 1.0) / alpha).ceil() as usize } else { 0 };
    let base = beta - steps as f64 * alpha;
    let mut est = branch_cut_base(alpha, base, x, abs_tol * x.min(1.0).powi(steps as i32));
    let mut b = base;
    for _ in 0..steps {
        est = Estimate {
            value: (est.value - rgamma(b)) / -x,
            error: (est.error + RGAMMA_REL_ERR * rgamma(b).abs()) / x,
        };
        b += alpha;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_reduces_to_exponential() {
        let e = series(1.0, 1.0, -1.0, 200);
        assert!((e.value - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn kummer_matches_closed_forms() {
        // E_{1,2}(-x) = (1 - e^{-x}) / x
        for &x in &[1e-3, 0.5, 3.0, 20.0] {
            let e = exponential_kummer(2.0, x, 10_000);
            let exact = -(-x).exp_m1() / x;
            assert!((e.value - exact).abs() < 1e-15, "x = {x}");
        }
        // E_{1,3}(-x) = (e^{-x} - 1 + x) / x^2
        let x = 4.0_f64;
        let e = exponential_kummer(3.0, x, 10_000);
        assert!((e.value - ((-x).exp() - 1.0 + x) / (x * x)).abs() < 1e-15);
    }

    #[test]
    fn integral_matches_exponential_limit_shape() {
        // E_{1/2,1}(-x) = e^{x²} erfc(x); at x = 3 the value is 0.1790011...
        let e = branch_cut(0.5, 1.0, 3.0, 1e-14);
        assert!((e.value - 0.179_001_151_181_389_95).abs() < 1e-12, "{e:?}");
    }
}
