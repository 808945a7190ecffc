//! Job configuration: JSON layout, defaults and conversion into library
//! objects. Every error carries the JSON path of the offending field.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::equivalence::{DEFAULT_TRIVIAL_TOL, DEFAULT_VERIFY_TOL};
use crate::expr::{parse, Context};
use crate::field::{QuadraticForm, ScalarField};
use crate::geometry::{Chart, Metric2, DEFAULT_CLASSIFY_TOL};
use crate::normal_forms::{NormalFormSpec, Sign, Variant};
use crate::rectify::RECONSTRUCTION_TOL;

/// A config problem located by its JSON path (`$` is the document root).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Classify,
    Verify,
    Generate,
    Rectify,
    Geodesic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Verify => "verify",
            Command::Generate => "generate",
            Command::Rectify => "rectify",
            Command::Geodesic => "geodesic",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub chart: ChartConfig,
    pub metric: Option<MetricConfig>,
    pub metric_pair: Option<MetricPairConfig>,
    pub normal_form: Option<NormalFormConfig>,
    pub integral: Option<IntegralConfig>,
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default = "default_grid")]
    pub nx: usize,
    #[serde(default = "default_grid")]
    pub ny: usize,
}

fn default_grid() -> usize {
    21
}

/// Either the three components `g11`, `g12`, `g22` or the conformal factor
/// `null_form = f` of `ds² = f dx dy`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub g11: Option<String>,
    pub g12: Option<String>,
    pub g22: Option<String>,
    pub null_form: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricPairConfig {
    pub g: MetricConfig,
    pub gbar: MetricConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormalFormConfig {
    Liouville { x: String, y: String, sign: Sign },
    ComplexLiouville { h: String },
    JordanBlock { y: String },
    JordanKillingFree { y_tilde: String },
}

/// `F = a p_x² + b p_x p_y + c p_y²`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralConfig {
    pub a: String,
    pub b: String,
    pub c: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    /// `[x, y, p_x, p_y]`.
    pub initial: [f64; 4],
    pub t_end: f64,
    #[serde(default)]
    pub allow_null: bool,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_max_steps() -> usize {
    1_000_000
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Normalised residual of the integral check.
    pub verify: f64,
    /// Threshold of the pointwise eigenstructure classification.
    pub classify: f64,
    /// Largest fraction of grid points allowed to classify as ambiguous, or
    /// to miss the generating case.
    pub class_fraction: f64,
    /// Relative deviation below which `F` counts as a multiple of `H`.
    pub trivial: f64,
    /// Residual of the fit `I = α F + β H`.
    pub fit: f64,
    /// Local tolerance of the geodesic integrator.
    pub integrator: f64,
    /// Relative drift of `H` and `F` along a trajectory.
    pub drift: f64,
    /// Relative error of the rectified metric and integral.
    pub reconstruction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            verify: DEFAULT_VERIFY_TOL,
            classify: DEFAULT_CLASSIFY_TOL,
            class_fraction: 0.05,
            trivial: DEFAULT_TRIVIAL_TOL,
            fit: 1e-8,
            integrator: 1e-10,
            drift: 1e-6,
            reconstruction: RECONSTRUCTION_TOL,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Report file name, relative to the output directory.
    pub report: String,
    /// Trajectory CSV file name (geodesic jobs).
    pub trajectory: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            report: "report.json".into(),
            trajectory: "trajectory.csv".into(),
        }
    }
}

/// Parses a config document and checks that the sections match the command.
pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "$".to_string()
        } else {
            format!("$.{path}")
        };
        ConfigError::new(path, e.into_inner().to_string())
    })?;
    config.check_sections()?;
    config.check_tolerances()?;
    Ok(config)
}

impl JobConfig {
    fn check_sections(&self) -> Result<(), ConfigError> {
        let present = [
            ("metric", self.metric.is_some()),
            ("metric_pair", self.metric_pair.is_some()),
            ("normal_form", self.normal_form.is_some()),
            ("integral", self.integral.is_some()),
            ("geodesic", self.geodesic.is_some()),
        ];
        let (required, optional): (&[&str], &[&str]) = match self.command {
            Command::Classify => (&["metric_pair"], &[]),
            Command::Verify | Command::Rectify => (&["metric", "integral"], &[]),
            Command::Generate => (&["normal_form"], &[]),
            Command::Geodesic => (&["metric", "geodesic"], &["integral"]),
        };
        for (name, here) in present {
            let wanted = required.contains(&name) || optional.contains(&name);
            if required.contains(&name) && !here {
                return Err(ConfigError::new(
                    format!("$.{name}"),
                    format!("section required by command '{}'", self.command.name()),
                ));
            }
            if here && !wanted {
                return Err(ConfigError::new(
                    format!("$.{name}"),
                    format!("section not used by command '{}'", self.command.name()),
                ));
            }
        }
        Ok(())
    }

    fn check_tolerances(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        let all = [
            ("verify", t.verify),
            ("classify", t.classify),
            ("class_fraction", t.class_fraction),
            ("trivial", t.trivial),
            ("fit", t.fit),
            ("integrator", t.integrator),
            ("drift", t.drift),
            ("reconstruction", t.reconstruction),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::new(
                    format!("$.tolerances.{name}"),
                    format!("tolerance must be positive and finite, got {v}"),
                ));
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> Result<Chart, ConfigError> {
        let c = &self.chart;
        Chart::new(c.x, c.y, c.nx, c.ny).map_err(|e| ConfigError::new("$.chart", e.to_string()))
    }
}

fn field(text: &str, path: &str) -> Result<ScalarField, ConfigError> {
    ScalarField::parse(text).map_err(|e| ConfigError::new(path, e.to_string()))
}

impl MetricConfig {
    /// Builds the metric; errors point below `path`.
    pub fn build(&self, chart: Chart, path: &str) -> Result<Metric2, ConfigError> {
        let parts = (&self.g11, &self.g12, &self.g22, &self.null_form);
        let metric = match parts {
            (None, None, None, Some(f)) => {
                let f = field(f, &format!("{path}.null_form"))?;
                Metric2::null_form(&f, chart)
            }
            (Some(a), Some(b), Some(c), None) => {
                let a = field(a, &format!("{path}.g11"))?;
                let b = field(b, &format!("{path}.g12"))?;
                let c = field(c, &format!("{path}.g22"))?;
                Metric2::new(a, b, c, chart)
            }
            _ => {
                return Err(ConfigError::new(
                    path,
                    "give either all of g11, g12, g22 or only null_form",
                ))
            }
        };
        metric.map_err(|e| ConfigError::new(path, e.to_string()))
    }

    pub fn null_factor_text(&self) -> Option<&str> {
        self.null_form.as_deref()
    }
}

impl IntegralConfig {
    pub fn build(&self, path: &str) -> Result<QuadraticForm, ConfigError> {
        Ok(QuadraticForm::new(
            field(&self.a, &format!("{path}.a"))?,
            field(&self.b, &format!("{path}.b"))?,
            field(&self.c, &format!("{path}.c"))?,
        ))
    }
}

impl NormalFormConfig {
    pub fn build(&self, chart: Chart, path: &str) -> Result<NormalFormSpec, ConfigError> {
        let at = |name: &str, text: &str, ctx: Context| {
            parse(text, ctx).map_err(|e| ConfigError::new(format!("{path}.{name}"), e.to_string()))
        };
        let variant = match self {
            NormalFormConfig::Liouville { x, y, sign } => Variant::Liouville {
                x_fn: at("x", x, Context::FunctionOfX)?,
                y_fn: at("y", y, Context::FunctionOfY)?,
                sign: *sign,
            },
            NormalFormConfig::ComplexLiouville { h } => Variant::ComplexLiouville {
                h: at("h", h, Context::Complex)?,
            },
            NormalFormConfig::JordanBlock { y } => Variant::JordanBlock {
                y_fn: at("y", y, Context::FunctionOfY)?,
            },
            NormalFormConfig::JordanKillingFree { y_tilde } => Variant::JordanKillingFree {
                y_tilde: at("y_tilde", y_tilde, Context::FunctionOfY)?,
            },
        };
        Ok(NormalFormSpec::new(variant, chart))
    }
}
