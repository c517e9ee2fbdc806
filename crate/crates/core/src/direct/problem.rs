use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Which closed-form representation a fractional order admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `1/2 < α < 1`: the singular-kernel convolution form.
    CaseI,
    /// `0 < α ≤ 1/2`: only the integrated-by-parts form is available.
    CaseII,
    /// `α = 1`.
    Classical,
}

/// Validated order `α ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder {
    alpha: f64,
}

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1]")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regime(&self) -> Regime {
        if self.alpha == 1.0 {
            Regime::Classical
        } else if self.alpha > 0.5 {
            Regime::CaseI
        } else {
            Regime::CaseII
        }
    }

    /// The convolution form needs `s^{α-1}` to be square integrable.
    pub fn admits_case_i(&self) -> bool {
        self.alpha > 0.5
    }
}

/// Ascending time nodes `0 = t_0 < t_1 < ... < t_J = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    uniform: bool,
}

impl TimeGrid {
    /// `t_j = jT/J`.
    pub fn uniform(t_end: f64, steps: usize) -> Result<Self> {
        Self::graded(t_end, steps, 1.0)
    }

    /// `t_j = T (j/J)^r` with `r ≥ 1`, clustering nodes near `t = 0`.
    pub fn graded(t_end: f64, steps: usize, r: f64) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidGrid(format!("T = {t_end} must be positive")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("need at least one step".into()));
        }
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::InvalidGrid(format!("grading exponent {r} must be >= 1")));
        }
        let j = steps as f64;
        let nodes = (0..=steps)
            .map(|i| if r == 1.0 { t_end * (i as f64) / j } else { t_end * (i as f64 / j).powf(r) })
            .collect();
        Ok(Self { nodes, uniform: r == 1.0 })
    }

    /// An arbitrary grid; must start at 0 and increase strictly.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(Error::InvalidGrid("need at least two nodes starting at t = 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid("nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes, uniform: false })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// True when built by [`TimeGrid::uniform`]; node `j` is then exactly `jT/J`.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}

pub type SourceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The time profile `f_ξ(t)` of one mode of the source.
#[derive(Clone)]
pub enum SourceTrace {
    Constant(f64),
    /// Values on the solver's grid. `differenced` marks a derivative that was
    /// produced by finite differences rather than supplied.
    Sampled { values: Vec<f64>, derivative: Option<Vec<f64>>, differenced: bool },
    Analytic { f: SourceFn, df: Option<SourceFn> },
}

impl fmt::Debug for SourceTrace {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => fmt.debug_tuple("Constant").field(c).finish(),
            Self::Sampled { values, derivative, differenced } => fmt
                .debug_struct("Sampled")
                .field("len", &values.len())
                .field("derivative", &derivative.is_some())
                .field("differenced", differenced)
                .finish(),
            Self::Analytic { df, .. } => fmt.debug_struct("Analytic").field("derivative", &df.is_some()).finish(),
        }
    }
}

impl SourceTrace {
    pub fn zero() -> Self {
        Self::Constant(0.0)
    }

    pub fn analytic(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Analytic { f: Arc::new(f), df: None }
    }

    pub fn analytic_with_derivative(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::Analytic { f: Arc::new(f), df: Some(Arc::new(df)) }
    }

    pub fn sampled(values: Vec<f64>) -> Self {
        Self::Sampled { values, derivative: None, differenced: false }
    }

    pub fn sampled_with_derivative(values: Vec<f64>, derivative: Vec<f64>) -> Self {
        Self::Sampled { values, derivative: Some(derivative), differenced: false }
    }

    /// Attach a derivative for sampled data: centered differences inside,
    /// one-sided at the ends. Other kinds are returned unchanged.
    pub fn with_differenced_derivative(self, grid: &TimeGrid) -> Result<Self> {
        match self {
            Self::Sampled { values, .. } => {
                check_len(&values, grid)?;
                let derivative = differences(&values, grid.nodes());
                Ok(Self::Sampled { values, derivative: Some(derivative), differenced: true })
            }
            other => Ok(other),
        }
    }

    pub fn has_derivative(&self) -> bool {
        match self {
            Self::Constant(_) => true,
            Self::Sampled { derivative, .. } => derivative.is_some(),
            Self::Analytic { df, .. } => df.is_some(),
        }
    }

    pub fn is_differenced(&self) -> bool {
        matches!(self, Self::Sampled { differenced: true, .. })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Self::Constant(c) if *c == 0.0)
    }

    /// `f(t)` for kinds that are defined off-grid.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        match self {
            Self::Constant(c) => Some(*c),
            Self::Analytic { f, .. } => Some(f(t)),
            Self::Sampled { .. } => None,
        }
    }

    /// `f'(t)` for kinds that are defined off-grid and carry a derivative.
    pub fn derivative_at(&self, t: f64) -> Option<f64> {
        match self {
            Self::Constant(_) => Some(0.0),
            Self::Analytic { df: Some(df), .. } => Some(df(t)),
            _ => None,
        }
    }

    /// Values at the grid nodes.
    pub fn values_on(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        self.values_at(grid.nodes())
    }

    /// Values at arbitrary nodes; sampled traces must have one value per node.
    pub fn values_at(&self, nodes: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Sampled { values, .. } => {
                check_len_nodes(values, nodes)?;
                Ok(values.clone())
            }
            _ => Ok(nodes.iter().map(|&t| self.value_at(t).unwrap()).collect()),
        }
    }

    /// Derivative values at the grid nodes.
    pub fn derivative_on(&self, grid: &TimeGrid) -> Result<Vec<f64>> {
        match self {
            Self::Sampled { derivative: Some(d), .. } => {
                check_len(d, grid)?;
                Ok(d.clone())
            }
            Self::Sampled { derivative: None, .. } | Self::Analytic { df: None, .. } => {
                Err(Error::MissingDerivative("source has no derivative data".into()))
            }
            _ => Ok(grid.nodes().iter().map(|&t| self.derivative_at(t).unwrap()).collect()),
        }
    }
}

fn check_len(values: &[f64], grid: &TimeGrid) -> Result<()> {
    check_len_nodes(values, grid.nodes())
}

fn check_len_nodes(values: &[f64], nodes: &[f64]) -> Result<()> {
    if values.len() != nodes.len() {
        return Err(Error::InvalidGrid(format!(
            "sampled source has {} values for {} grid nodes",
            values.len(),
            nodes.len()
        )));
    }
    Ok(())
}

/// Second-order differences on a possibly non-uniform grid, first-order
/// one-sided at both ends.
fn differences(v: &[f64], t: &[f64]) -> Vec<f64> {
    let n = v.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut d = vec![0.0; n];
    d[0] = (v[1] - v[0]) / (t[1] - t[0]);
    d[n - 1] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
    for i in 1..n - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        d[i] = (h0 * h0 * (v[i + 1] - v[i]) + h1 * h1 * (v[i] - v[i - 1])) / (h0 * h1 * (h0 + h1));
    }
    d
}

/// One scalar equation `(1 + λ) D^α u + μ u = f(t)`, `u(0) = φ`.
#[derive(Debug, Clone)]
pub struct ModalProblem {
    pub lambda: f64,
    pub mu: f64,
    pub phi: f64,
    pub source: SourceTrace,
    pub alpha: FractionalOrder,
}

impl ModalProblem {
    pub fn new(lambda: f64, mu: f64, phi: f64, source: SourceTrace, alpha: FractionalOrder) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidParams(format!("need lambda, mu > 0, got ({lambda}, {mu})")));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParams(format!("phi = {phi}")));
        }
        Ok(Self { lambda, mu, phi, source, alpha })
    }

    /// `ρ = μ / (1 + λ)`.
    pub fn rho(&self) -> f64 {
        self.mu / (1.0 + self.lambda)
    }
}

/// Product-integration controls: panels per grid interval to start from,
/// the absolute tolerance on the Richardson self-estimate, and how many
/// times the panel count may double before giving up.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadratureSpec {
    pub panels: usize,
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { panels: 4, tol: 1e-10, max_doublings: 8 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 || !(self.tol > 0.0) || self.max_doublings == 0 {
            return Err(Error::InvalidParams(format!("bad quadrature spec {self:?}")));
        }
        Ok(())
    }
}
