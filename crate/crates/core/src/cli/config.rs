//! The TOML experiment document. Every table rejects unknown keys; semantic
//! errors carry the line of the offending key.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::direct::{FractionalOrder, QuadratureSpec, Representation, SourceTrace, TimeGrid};
use crate::spectral::{SpectralField, SpectrumPair};

/// A configuration or input-data problem, optionally anchored to a line.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.file, l, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "T", default)]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ml_eval: Option<MlEvalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub name: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "J")]
    pub steps: usize,
    #[serde(default = "one")]
    pub grading: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    #[serde(default = "default_panels")]
    pub panels: usize,
    #[serde(default = "default_quad_tol")]
    pub tol: f64,
    #[serde(default = "default_doublings")]
    pub max_doublings: usize,
    #[serde(default = "default_representation")]
    pub representation: String,
}

fn default_panels() -> usize {
    QuadratureSpec::default().panels
}
fn default_quad_tol() -> f64 {
    QuadratureSpec::default().tol
}
fn default_doublings() -> usize {
    QuadratureSpec::default().max_doublings
}
fn default_representation() -> String {
    "auto".into()
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            panels: default_panels(),
            tol: default_quad_tol(),
            max_doublings: default_doublings(),
            representation: default_representation(),
        }
    }
}

/// Exactly one of `values`, `power` or `file`.
/// `power = p` means `scale · k^p` for `k = 1..=N`.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// zero, constant, sin, linear, exp or sampled
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<CoeffConfig>,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "one")]
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// exact (analytic kinds), differenced or none (sampled)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<CoeffConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<CoeffConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InverseConfig {
    #[serde(default = "default_floor")]
    pub denom_floor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default = "default_oracle_steps")]
    pub oracle_steps: usize,
    #[serde(default = "default_round_trip_tol")]
    pub round_trip_tol: f64,
}

fn default_floor() -> f64 {
    1e-14
}
fn default_oracle_steps() -> usize {
    1024
}
fn default_round_trip_tol() -> f64 {
    1e-8
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            denom_floor: default_floor(),
            cutoff: None,
            oracle_steps: default_oracle_steps(),
            round_trip_tol: default_round_trip_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_verify_steps")]
    pub steps: Vec<usize>,
    /// 1-based modes to check; all modes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<usize>>,
}

fn default_verify_steps() -> Vec<usize> {
    (10..=14).map(|p| 1 << p).collect()
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { steps: default_verify_steps(), modes: None }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MlEvalConfig {
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

/// Parsed document plus what is needed to anchor later errors.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub raw: String,
    pub path: PathBuf,
}

impl Loaded {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|e| ConfigError {
            file: path.display().to_string(),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::from_str(&raw, path)
    }

    pub fn from_str(raw: &str, path: &Path) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(raw).map_err(|e| ConfigError {
            file: path.display().to_string(),
            line: e.span().map(|s| line_of(raw, s.start)),
            message: e.message().to_string(),
        })?;
        Ok(Self { config, raw: raw.to_string(), path: path.to_path_buf() })
    }

    /// An error anchored at `key` inside `[section]` (or at top level).
    pub fn err(&self, section: Option<&str>, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            file: self.path.display().to_string(),
            line: locate(&self.raw, section, key),
            message: message.into(),
        }
    }

    fn base_dir(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    pub fn resolve_path(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir().join(p)
        }
    }

    pub fn alpha(&self) -> Result<FractionalOrder, ConfigError> {
        let a = self.config.alpha.ok_or_else(|| self.err(None, "alpha", "missing key `alpha`"))?;
        FractionalOrder::new(a).map_err(|e| self.err(None, "alpha", e.to_string()))
    }

    pub fn t_end(&self) -> Result<f64, ConfigError> {
        let t = self.config.t_end.ok_or_else(|| self.err(None, "T", "missing key `T`"))?;
        if !(t > 0.0 && t.is_finite()) {
            return Err(self.err(None, "T", format!("T = {t} must be positive")));
        }
        Ok(t)
    }

    pub fn spectrum(&self) -> Result<Arc<SpectrumPair>, ConfigError> {
        let s = self.config.spectrum.as_ref().ok_or_else(|| self.err(None, "spectrum", "missing table [spectrum]"))?;
        let built = if s.name == "custom" {
            let (Some(l), Some(m), Some(k)) = (&s.lambda, &s.mu, s.kappa) else {
                return Err(self.err(Some("spectrum"), "name", "custom spectrum needs lambda, mu and kappa"));
            };
            if l.len() != s.n {
                return Err(self.err(Some("spectrum"), "lambda", format!("{} eigenvalues for N = {}", l.len(), s.n)));
            }
            SpectrumPair::custom("custom", l.clone(), m.clone(), k)
        } else {
            if s.lambda.is_some() || s.mu.is_some() || s.kappa.is_some() {
                return Err(self.err(Some("spectrum"), "name", "lambda/mu/kappa are only allowed with name = \"custom\""));
            }
            SpectrumPair::builtin(&s.name, s.n)
        };
        built.map(Arc::new).map_err(|e| {
            let key = if matches!(e, crate::Error::InvalidTruncation(_)) { "N" } else { "name" };
            self.err(Some("spectrum"), key, e.to_string())
        })
    }

    pub fn grid(&self, t_end: f64) -> Result<TimeGrid, ConfigError> {
        let g = self.config.grid.as_ref().ok_or_else(|| self.err(None, "grid", "missing table [grid]"))?;
        TimeGrid::graded(t_end, g.steps, g.grading).map_err(|e| self.err(Some("grid"), "J", e.to_string()))
    }

    pub fn quad(&self, tol_override: Option<f64>) -> Result<(QuadratureSpec, Representation), ConfigError> {
        let q = self.config.quad.clone().unwrap_or_default();
        let spec = QuadratureSpec { panels: q.panels, tol: tol_override.unwrap_or(q.tol), max_doublings: q.max_doublings };
        spec.validate().map_err(|e| self.err(Some("quad"), "panels", e.to_string()))?;
        let repr = match q.representation.as_str() {
            "auto" => Representation::Auto,
            "case_i" => Representation::CaseI,
            "case_ii" => Representation::CaseII,
            other => {
                return Err(self.err(
                    Some("quad"),
                    "representation",
                    format!("unknown representation `{other}`, expected auto, case_i or case_ii"),
                ))
            }
        };
        Ok((spec, repr))
    }

    fn data(&self) -> Result<&DataConfig, ConfigError> {
        self.config.data.as_ref().ok_or_else(|| self.err(None, "data", "missing table [data]"))
    }

    /// `[data] phi` or `[data] psi` as a field over `spectrum`.
    pub fn coeffs(&self, key: &str, spectrum: &Arc<SpectrumPair>) -> Result<SpectralField, ConfigError> {
        let data = self.data()?;
        let c = match key {
            "phi" => data.phi.as_ref(),
            _ => data.psi.as_ref(),
        }
        .ok_or_else(|| self.err(Some("data"), key, format!("missing `{key}`")))?;
        let values = self.coeff_values(c, spectrum.len(), "data", key)?;
        SpectralField::new(values, spectrum.clone()).map_err(|e| self.err(Some("data"), key, e.to_string()))
    }

    fn coeff_values(&self, c: &CoeffConfig, n: usize, section: &str, key: &str) -> Result<Vec<f64>, ConfigError> {
        let given = [c.values.is_some(), c.power.is_some(), c.file.is_some()].iter().filter(|&&b| b).count();
        if given != 1 {
            return Err(self.err(Some(section), key, "give exactly one of `values`, `power` or `file`"));
        }
        if c.scale.is_some() && c.power.is_none() {
            return Err(self.err(Some(section), key, "`scale` only applies together with `power`"));
        }
        if let Some(v) = &c.values {
            if v.len() != n {
                return Err(self.err(Some(section), key, format!("{} values for N = {n}", v.len())));
            }
            return Ok(v.clone());
        }
        if let Some(p) = c.power {
            let s = c.scale.unwrap_or(1.0);
            return Ok((1..=n).map(|k| s * (k as f64).powf(p)).collect());
        }
        let file = c.file.as_ref().unwrap();
        super::output::read_coefficients(&self.resolve_path(file), n)
            .map_err(|m| self.err(Some(section), key, format!("{file}: {m}")))
    }

    /// One source trace per mode on `grid`.
    pub fn sources(&self, n: usize, grid: &TimeGrid) -> Result<Vec<SourceTrace>, ConfigError> {
        let Some(src) = self.data()?.source.as_ref() else {
            return Ok(vec![SourceTrace::zero(); n]);
        };
        let sec = "data.source";
        let amp = match (&src.amplitude, src.kind.as_str()) {
            (_, "zero") => vec![0.0; n],
            (_, "sampled") => Vec::new(),
            (Some(a), _) => self.coeff_values(a, n, sec, "amplitude")?,
            (None, _) => return Err(self.err(Some(sec), "kind", format!("source kind `{}` needs `amplitude`", src.kind))),
        };
        let derivative = src.derivative.as_deref();
        let (omega, rate) = (src.omega, src.rate);
        let exact = match derivative {
            Some("exact") if src.kind == "sampled" => {
                return Err(self.err(Some(sec), "derivative", "sampled sources take `differenced` or `none`"))
            }
            None | Some("exact") => true,
            Some("none") => false,
            Some("differenced") if src.kind == "sampled" => true,
            Some(d) => {
                return Err(self.err(
                    Some(sec),
                    "derivative",
                    format!("derivative `{d}` not valid for kind `{}`", src.kind),
                ))
            }
        };
        let traces = match src.kind.as_str() {
            "zero" => vec![SourceTrace::zero(); n],
            "constant" => amp.iter().map(|&a| SourceTrace::Constant(a)).collect(),
            "sin" | "linear" | "exp" => amp
                .iter()
                .map(|&a| {
                    let (f, df): (BoxFn, BoxFn) =
                        match src.kind.as_str() {
                            "sin" => (Box::new(move |t| a * (omega * t).sin()), Box::new(move |t| a * omega * (omega * t).cos())),
                            "linear" => (Box::new(move |t| a * t), Box::new(move |_| a)),
                            _ => (Box::new(move |t| a * (-rate * t).exp()), Box::new(move |t| -a * rate * (-rate * t).exp())),
                        };
                    if exact {
                        SourceTrace::analytic_with_derivative(f, df)
                    } else {
                        SourceTrace::analytic(f)
                    }
                })
                .collect(),
            "sampled" => {
                let file = src
                    .file
                    .as_ref()
                    .ok_or_else(|| self.err(Some(sec), "kind", "sampled source needs `file`"))?;
                let rows = super::output::read_samples(&self.resolve_path(file), n, grid.nodes())
                    .map_err(|m| self.err(Some(sec), "file", format!("{file}: {m}")))?;
                let difference = derivative == Some("differenced");
                rows.into_iter()
                    .map(|v| {
                        let s = SourceTrace::sampled(v);
                        if difference {
                            s.with_differenced_derivative(grid).expect("lengths checked")
                        } else {
                            s
                        }
                    })
                    .collect()
            }
            other => {
                return Err(self.err(
                    Some(sec),
                    "kind",
                    format!("unknown source kind `{other}`, expected zero, constant, sin, linear, exp or sampled"),
                ))
            }
        };
        Ok(traces)
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> Option<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| self.config.output.as_ref().and_then(|o| o.dir.as_ref()).map(|d| self.resolve_path(d)))
    }

    pub fn formats(&self) -> Result<(bool, bool), ConfigError> {
        let f = self.config.output.as_ref().map(|o| o.formats.clone()).unwrap_or_else(default_formats);
        for x in &f {
            if x != "csv" && x != "json" {
                return Err(self.err(Some("output"), "formats", format!("unknown format `{x}`")));
            }
        }
        Ok((f.iter().any(|x| x == "csv"), f.iter().any(|x| x == "json")))
    }

    /// `mode`, when present, must agree with the subcommand.
    pub fn check_mode(&self, subcommand: &str) -> Result<(), ConfigError> {
        match &self.config.mode {
            Some(m) if m != subcommand => Err(self.err(
                None,
                "mode",
                format!("config is for `{m}` but the `{subcommand}` subcommand was run"),
            )),
            _ => Ok(()),
        }
    }
}

type BoxFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

fn line_of(raw: &str, offset: usize) -> usize {
    raw[..offset.min(raw.len())].matches('\n').count() + 1
}

/// 1-based line of `key = ...` inside `[section]`; falls back to the
/// section header, then to nothing.
fn locate(raw: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    let mut header_line = None;
    for (i, line) in raw.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = Some(h.trim().to_string());
            if Some(h.trim()) == section {
                header_line = Some(i + 1);
            }
            continue;
        }
        if current.as_deref() != section {
            // keys of a sub-table written inline, e.g. `source = { ... }`
            if section.is_some_and(|s| s.rsplit_once('.').is_some_and(|(p, c)| current.as_deref() == Some(p) && t.starts_with(c)))
            {
                return Some(i + 1);
            }
            continue;
        }
        if let Some((k, _)) = t.split_once('=') {
            if k.trim().trim_matches('"') == key {
                return Some(i + 1);
            }
        }
    }
    if header_line.is_none() && section.is_none() {
        return None;
    }
    header_line
}
