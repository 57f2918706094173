//! Experiment configuration: a strict TOML schema (unknown keys rejected,
//! all numeric fields range-checked) that builds the domain, measure, and
//! nonlinearity for a pipeline run. See docs/config.md for the schema.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use semel::{Domain64, DomainKind, Grading, GridFunction64, Measure64, Nonlinearity64};
use semel::measure::Atom;
use semel::solver::NonlinearityFlags;

use crate::expr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Solve,
    Verify,
    Fk,
    Sweep,
    Decompose,
    Tvnorm,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Verify => "verify",
            Task::Fk => "fk",
            Task::Sweep => "sweep",
            Task::Decompose => "decompose",
            Task::Tvnorm => "tvnorm",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub grid_size: usize,
    #[serde(default = "default_grading")]
    pub grading: String,
}

fn default_grading() -> String {
    "boundary-graded".to_string()
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub expr: String,
    #[serde(default)]
    pub nonincreasing: bool,
    #[serde(default)]
    pub sign_condition: bool,
    #[serde(default)]
    pub zero_integrable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub k_list: Vec<f64>,
    pub n_list: Vec<f64>,
    pub widths: Vec<f64>,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub x: f64,
    pub weight: f64,
    pub exclusion_radius: f64,
    /// checker thresholds used by `verify` for the violation exit code
    pub resolvent_tol: f64,
    pub stampacchia_tol: f64,
}

impl Default for TaskOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            damping: 0.5,
            k_list: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            n_list: vec![1.0, 10.0, 100.0, 1000.0],
            widths: vec![0.1, 0.03, 0.01, 0.003, 0.001],
            n_paths: 100_000,
            dt: 1e-4,
            seed: 0,
            x: 0.5,
            weight: 1.0,
            exclusion_radius: 0.05,
            resolvent_tol: 1e-6,
            stampacchia_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub domain: DomainSpec,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearitySpec>,
    #[serde(default)]
    pub options: TaskOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config does not parse: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config task '{config}' conflicts with subcommand '{cli}'")]
    TaskMismatch { config: String, cli: String },
    #[error("unknown domain kind '{0}' (expected interval-laplacian, interval-fractional, radial-ball)")]
    UnknownKind(String),
    #[error("domain kind '{0}' requires field '{1}'")]
    MissingField(&'static str, &'static str),
    #[error("field '{field}' out of range: {message}")]
    Range { field: &'static str, message: String },
    #[error("expression for {0} does not parse: {1}")]
    Expr(&'static str, expr::ParseError),
    #[error("density expression must depend on x only")]
    DensityUsesY,
    #[error("invalid domain: {0}")]
    Domain(#[from] semel::DomainError),
    #[error("invalid measure: {0}")]
    Measure(#[from] semel::MeasureError),
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = &self.domain;
        match d.kind.as_str() {
            "interval-laplacian" => {}
            "interval-fractional" => {
                let alpha = d
                    .alpha
                    .ok_or(ConfigError::MissingField("interval-fractional", "alpha"))?;
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(ConfigError::Range {
                        field: "domain.alpha",
                        message: format!("{alpha} not in (0, 2)"),
                    });
                }
            }
            "radial-ball" => {
                let dim = d.dim.ok_or(ConfigError::MissingField("radial-ball", "dim"))?;
                if dim < 2 {
                    return Err(ConfigError::Range {
                        field: "domain.dim",
                        message: format!("{dim} < 2"),
                    });
                }
            }
            other => return Err(ConfigError::UnknownKind(other.to_string())),
        }
        if d.grid_size < 8 {
            return Err(ConfigError::Range {
                field: "domain.grid_size",
                message: format!("{} < 8", d.grid_size),
            });
        }
        if !matches!(d.grading.as_str(), "uniform" | "boundary-graded") {
            return Err(ConfigError::Range {
                field: "domain.grading",
                message: format!("'{}' is not uniform|boundary-graded", d.grading),
            });
        }
        for a in &self.measure.atoms {
            if !(a[0] > 0.0 && a[0] < 1.0) {
                return Err(ConfigError::Range {
                    field: "measure.atoms",
                    message: format!("atom location {} not interior", a[0]),
                });
            }
            if a[1] == 0.0 {
                return Err(ConfigError::Range {
                    field: "measure.atoms",
                    message: "atom weight must be nonzero".into(),
                });
            }
        }
        let o = &self.options;
        for (field, ok) in [
            ("options.tol", o.tol > 0.0),
            ("options.damping", o.damping > 0.0 && o.damping <= 1.0),
            ("options.dt", o.dt > 0.0),
            ("options.x", o.x > 0.0 && o.x < 1.0),
            (
                "options.widths",
                o.widths.iter().all(|w| *w > 0.0)
                    && o.widths.windows(2).all(|w| w[1] < w[0]),
            ),
            ("options.n_list", o.n_list.iter().all(|n| *n > 0.0)),
            ("options.k_list", o.k_list.iter().all(|k| *k >= 0.0)),
            ("options.exclusion_radius", o.exclusion_radius >= 0.0),
            ("options.resolvent_tol", o.resolvent_tol > 0.0),
            ("options.stampacchia_tol", o.stampacchia_tol > 0.0),
        ] {
            if !ok {
                return Err(ConfigError::Range {
                    field,
                    message: "rejected by range check".into(),
                });
            }
        }
        if let Some(nl) = &self.nonlinearity {
            expr::parse(&nl.expr).map_err(|e| ConfigError::Expr("nonlinearity", e))?;
        }
        if let Some(g) = &self.measure.density {
            let parsed = expr::parse(g).map_err(|e| ConfigError::Expr("density", e))?;
            if !parsed.is_x_only() {
                return Err(ConfigError::DensityUsesY);
            }
        }
        Ok(())
    }

    pub fn domain_kind(&self) -> DomainKind<f64> {
        match self.domain.kind.as_str() {
            "interval-laplacian" => DomainKind::IntervalLaplacian,
            "interval-fractional" => {
                DomainKind::IntervalFractional(self.domain.alpha.expect("validated"))
            }
            "radial-ball" => DomainKind::RadialBallLaplacian(self.domain.dim.expect("validated")),
            _ => unreachable!("validated kind"),
        }
    }

    pub fn build_domain(&self) -> Result<Domain64, ConfigError> {
        let grading = if self.domain.grading == "uniform" {
            Grading::Uniform
        } else {
            Grading::BoundaryGraded
        };
        Ok(Domain64::new(
            self.domain_kind(),
            self.domain.grid_size,
            grading,
        )?)
    }

    pub fn build_measure(&self, dom: &Domain64) -> Result<Measure64, ConfigError> {
        let density = match &self.measure.density {
            None => None,
            Some(src) => {
                let parsed = expr::parse(src).map_err(|e| ConfigError::Expr("density", e))?;
                Some(GridFunction64::from_fn(dom.grid(), |x| parsed.eval(x, 0.0)))
            }
        };
        let atoms = self
            .measure
            .atoms
            .iter()
            .map(|a| Atom {
                location: a[0],
                weight: a[1],
            })
            .collect();
        Ok(Measure64::new(dom, density, atoms)?)
    }

    pub fn build_nonlinearity(&self) -> Result<Nonlinearity64, ConfigError> {
        match &self.nonlinearity {
            None => Ok(Nonlinearity64::zero()),
            Some(spec) => {
                let parsed =
                    expr::parse(&spec.expr).map_err(|e| ConfigError::Expr("nonlinearity", e))?;
                let flags = NonlinearityFlags {
                    nonincreasing_in_y: spec.nonincreasing,
                    sign_condition: spec.sign_condition,
                    zero_integrable: spec.zero_integrable,
                };
                Ok(Nonlinearity64::new(move |x, y| parsed.eval(x, y), flags))
            }
        }
    }
}
