//! Operator pairs `(L, M)` sharing an eigenbasis, realized through their
//! eigenvalue sequences on the truncated index set `{1, ..., N}`.
//!
//! Everything downstream acts coefficient-wise, so a vector of coefficients
//! in the shared basis stands in for an element of the Hilbert space.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Eigenvalues `λ_k` of `L` and `μ_k` of `M` for `k = 1..=N`.
///
/// Construction checks `λ_k ≥ c_L > 0`, `μ_k ≥ c_M > 0` and records the
/// growth constant `C = max_k λ_k / μ_k^κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPair {
    name: String,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    c_l: f64,
    c_m: f64,
    kappa: f64,
    growth: f64,
}

/// `γ = max(0, κ - 1)`, the extra smoothness asked of inverse-problem data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingIndex {
    pub gamma: f64,
}

fn power_table(n: usize, p: f64, what: &str) -> Result<Vec<f64>> {
    (1..=n)
        .map(|k| {
            let v = (k as f64).powf(p);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NumericOverflow(format!("{what}_{k} = {k}^{p}")))
            }
        })
        .collect()
}

impl SpectrumPair {
    /// `λ_k = μ_k = k²`, `κ = 1`.
    pub fn dirichlet_laplacian_pair(n: usize) -> Result<Self> {
        check_truncation(n)?;
        let ev = power_table(n, 2.0, "lambda")?;
        Self::from_parts("dirichlet_laplacian_pair".into(), ev.clone(), ev, 1.0)
    }

    /// `λ_k = k⁴`, `μ_k = k²`, `κ = 2`.
    pub fn bilaplacian_pair(n: usize) -> Result<Self> {
        check_truncation(n)?;
        let lambda = power_table(n, 4.0, "lambda")?;
        let mu = power_table(n, 2.0, "mu")?;
        Self::from_parts("bilaplacian_pair".into(), lambda, mu, 2.0)
    }

    /// `λ_k = k^{2a}`, `μ_k = k^{2b}`, `κ = a/b`.
    pub fn fractional_pair(a: f64, b: f64, n: usize) -> Result<Self> {
        check_truncation(n)?;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParams(format!("fractional_pair needs a, b > 0, got ({a}, {b})")));
        }
        let lambda = power_table(n, 2.0 * a, "lambda")?;
        let mu = power_table(n, 2.0 * b, "mu")?;
        Self::from_parts(format!("fractional_pair({a},{b})"), lambda, mu, a / b)
    }

    /// Look up a built-in pair by name. `fractional_pair(a,b)` carries its
    /// exponents in the name.
    pub fn builtin(name: &str, n: usize) -> Result<Self> {
        let name = name.trim();
        match name {
            "dirichlet_laplacian_pair" => Self::dirichlet_laplacian_pair(n),
            "bilaplacian_pair" => Self::bilaplacian_pair(n),
            _ => {
                let (a, b) = parse_fractional(name).ok_or_else(|| Error::UnknownSpectrum(name.to_string()))?;
                Self::fractional_pair(a, b, n)
            }
        }
    }

    /// A user-supplied pair. `c_L`, `c_M` and `C` are read off the data.
    pub fn custom(name: &str, lambda: Vec<f64>, mu: Vec<f64>, kappa: f64) -> Result<Self> {
        check_truncation(lambda.len())?;
        if lambda.len() != mu.len() {
            return Err(Error::InvalidParams(format!(
                "lambda has {} entries, mu has {}",
                lambda.len(),
                mu.len()
            )));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParams(format!("kappa = {kappa} must be positive")));
        }
        Self::from_parts(name.to_string(), lambda, mu, kappa)
    }

    fn from_parts(name: String, lambda: Vec<f64>, mu: Vec<f64>, kappa: f64) -> Result<Self> {
        let mut growth: f64 = 0.0;
        for (k, (&l, &m)) in lambda.iter().zip(&mu).enumerate() {
            if !(l > 0.0 && m > 0.0 && l.is_finite() && m.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "eigenvalues must be finite and positive: lambda_{0} = {l}, mu_{0} = {m}",
                    k + 1
                )));
            }
            let ratio = l / m.powf(kappa);
            if !ratio.is_finite() {
                return Err(Error::NumericOverflow(format!("lambda_{0} / mu_{0}^kappa", k + 1)));
            }
            growth = growth.max(ratio);
        }
        let c_l = lambda.iter().copied().fold(f64::INFINITY, f64::min);
        let c_m = mu.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { name, lambda, mu, c_l, c_m, kappa, growth })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Truncation index `N`.
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Decay rate `ρ_k = μ_k / (1 + λ_k)` of mode `k` (0-based).
    pub fn rho(&self, k: usize) -> f64 {
        self.mu[k] / (1.0 + self.lambda[k])
    }

    pub fn c_l(&self) -> f64 {
        self.c_l
    }

    pub fn c_m(&self) -> f64 {
        self.c_m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Smallest `C` with `λ_k ≤ C μ_k^κ` for every retained `k`.
    pub fn growth_constant(&self) -> f64 {
        self.growth
    }

    pub fn smoothing_index(&self) -> SmoothingIndex {
        SmoothingIndex { gamma: (self.kappa - 1.0).max(0.0) }
    }
}

fn check_truncation(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidTruncation(n))
    } else {
        Ok(())
    }
}

fn parse_fractional(name: &str) -> Option<(f64, f64)> {
    let inner = name.strip_prefix("fractional_pair(")?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// Coefficients of an element in the shared eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<f64>,
    spectrum: Arc<SpectrumPair>,
}

impl SpectralField {
    pub fn new(coeffs: Vec<f64>, spectrum: Arc<SpectrumPair>) -> Result<Self> {
        if coeffs.len() != spectrum.len() {
            return Err(Error::InvalidParams(format!(
                "{} coefficients for a spectrum truncated at N = {}",
                coeffs.len(),
                spectrum.len()
            )));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParams(format!("coefficient {} is not finite", k + 1)));
        }
        Ok(Self { coeffs, spectrum })
    }

    pub fn zeros(spectrum: Arc<SpectrumPair>) -> Self {
        Self { coeffs: vec![0.0; spectrum.len()], spectrum }
    }

    /// Coefficients `g(k)` for `k = 1..=N`.
    pub fn from_fn(spectrum: Arc<SpectrumPair>, g: impl Fn(usize) -> f64) -> Result<Self> {
        let coeffs = (1..=spectrum.len()).map(g).collect();
        Self::new(coeffs, spectrum)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn spectrum(&self) -> &Arc<SpectrumPair> {
        &self.spectrum
    }

    /// `‖L^l M^m u‖ = sqrt(Σ (λ_k^l μ_k^m u_k)²)`.
    pub fn sobolev_norm(&self, l: f64, m: f64) -> Result<f64> {
        weighted_norm(&self.coeffs, self.spectrum.lambda(), self.spectrum.mu(), l, m)
    }
}

/// The weighted ℓ² norm behind [`SpectralField::sobolev_norm`], usable on
/// bare slices. Scaled so that only a genuinely infinite result overflows.
pub fn weighted_norm(coeffs: &[f64], lambda: &[f64], mu: &[f64], l: f64, m: f64) -> Result<f64> {
    if !(l.is_finite() && m.is_finite()) {
        return Err(Error::InvalidParams(format!("exponents ({l}, {m}) must be finite")));
    }
    let mut terms = Vec::with_capacity(coeffs.len());
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        // multiply in log space so that λ^l overflowing alone is not fatal
        let ln_w = l * lambda[k].ln() + m * mu[k].ln() + c.abs().ln();
        let t = ln_w.exp();
        if !t.is_finite() {
            return Err(Error::NumericOverflow(format!("weight of mode {} in the ({l}, {m}) norm", k + 1)));
        }
        terms.push(t);
    }
    let scale = terms.iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = terms.iter().map(|t| (t / scale).powi(2)).sum();
    let norm = scale * sum.sqrt();
    if norm.is_finite() {
        Ok(norm)
    } else {
        Err(Error::NumericOverflow(format!("({l}, {m}) norm")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_eigenvalues() {
        let d = SpectrumPair::builtin("dirichlet_laplacian_pair", 4).unwrap();
        assert_eq!(d.lambda(), &[1.0, 4.0, 9.0, 16.0]);
        assert_eq!(d.mu(), &[1.0, 4.0, 9.0, 16.0]);
        assert_eq!(d.smoothing_index().gamma, 0.0);

        let b = SpectrumPair::builtin("bilaplacian_pair", 3).unwrap();
        assert_eq!(b.lambda(), &[1.0, 16.0, 81.0]);
        assert_eq!(b.mu(), &[1.0, 4.0, 9.0]);
        assert_eq!(b.kappa(), 2.0);
        assert_eq!(b.smoothing_index().gamma, 1.0);
        assert_eq!(b.growth_constant(), 1.0);

        let f = SpectrumPair::builtin("fractional_pair(1, 2)", 2).unwrap();
        assert_eq!(f.kappa(), 0.5);
        assert_eq!(f.smoothing_index().gamma, 0.0);
    }

    #[test]
    fn rejects_bad_names_and_sizes() {
        assert_eq!(
            SpectrumPair::builtin("laplacian", 3),
            Err(Error::UnknownSpectrum("laplacian".into()))
        );
        assert_eq!(SpectrumPair::builtin("bilaplacian_pair", 0), Err(Error::InvalidTruncation(0)));
        assert!(matches!(SpectrumPair::builtin("fractional_pair(1)", 3), Err(Error::UnknownSpectrum(_))));
        assert!(SpectrumPair::custom("x", vec![1.0, -1.0], vec![1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn overflow_caught_at_construction() {
        let err = SpectrumPair::fractional_pair(100.0, 1.0, 2000).unwrap_err();
        assert!(matches!(err, Error::NumericOverflow(_)));
    }

    #[test]
    fn norm_examples() {
        let d = Arc::new(SpectrumPair::dirichlet_laplacian_pair(3).unwrap());
        let e1 = SpectralField::new(vec![1.0, 0.0, 0.0], d.clone()).unwrap();
        assert_eq!(e1.sobolev_norm(0.0, 0.0).unwrap(), 1.0);
        let e2 = SpectralField::new(vec![0.0, 1.0, 0.0], d).unwrap();
        assert_eq!(e2.sobolev_norm(1.0, 0.0).unwrap(), 4.0);

        let b = Arc::new(SpectrumPair::bilaplacian_pair(2).unwrap());
        let u = SpectralField::new(vec![1.0, 1.0], b).unwrap();
        let want = (1.0f64 + (4.0f64 / 16.0).powi(2)).sqrt();
        assert!((u.sobolev_norm(-1.0, 1.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn large_weights_do_not_overflow_spuriously() {
        let b = Arc::new(SpectrumPair::bilaplacian_pair(1000).unwrap());
        let u = SpectralField::from_fn(b, |_| 1e-300).unwrap();
        // λ_1000^26 alone is 1e312; the product with the coefficient is not
        assert!(u.sobolev_norm(26.0, 0.0).unwrap().is_finite());
        assert!(matches!(
            SpectralField::from_fn(Arc::new(SpectrumPair::bilaplacian_pair(1000).unwrap()), |_| 1.0)
                .unwrap()
                .sobolev_norm(100.0, 0.0),
            Err(Error::NumericOverflow(_))
        ));
    }
}
