//! Experiment configuration files (TOML).
//!
//! ```toml
//! seed = 42
//! output_dir = "runs/tp2"      # relative to the config file
//! track_metrics = true
//! image_export_stride = 0       # 0 = final image only
//! record_timing = false
//!
//! [problem]
//! preset = "tp2"
//! matched = false
//!
//! [[solver]]
//! method = "ab-hybrid"
//! max_iter = 100
//! lambda = "lcurve"
//! stopping = "dp"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use abba_core::ct::{CtSetup, TestProblem};
use abba_core::stopping::{DEFAULT_DP_TAU, DEFAULT_NCP_THRESHOLD, DEFAULT_RNS_EPSILON};
use abba_core::{LambdaStrategy, Method, SolverConfig, StoppingRule};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Malformed or inconsistent configuration; the CLI exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub track_metrics: bool,
    #[serde(default)]
    pub image_export_stride: usize,
    #[serde(default)]
    pub record_timing: bool,
    /// Run the solvers on separate threads.
    #[serde(default = "yes")]
    pub parallel: bool,
    pub problem: ProblemSpec,
    #[serde(rename = "solver", default)]
    pub solvers: Vec<SolverSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_level: Option<f64>,
    /// Random dense system with `B = Aᵀ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(default)]
    pub matched: bool,
}

/// What a [`ProblemSpec`] resolves to.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    Ct {
        name: String,
        setup: CtSetup,
    },
    Dense {
        rows: usize,
        cols: usize,
        noise_level: f64,
    },
}

impl ProblemSpec {
    pub fn resolve(&self) -> Result<ProblemKind, ConfigError> {
        let err = |m: &str| Err(ConfigError(format!("problem: {m}")));
        let explicit_ct = self.size.is_some()
            || self.angles.is_some()
            || self.det_count.is_some()
            || self.det_spacing.is_some();
        let dense = self.rows.is_some() || self.cols.is_some();
        match (&self.preset, explicit_ct, dense) {
            (Some(name), false, false) => {
                let preset: TestProblem = name.parse().map_err(|e| ConfigError(format!("problem.preset: {e}")))?;
                let mut setup = preset.setup();
                if let Some(level) = self.noise_level {
                    setup.noise_level = level;
                }
                Ok(ProblemKind::Ct { name: preset.name().into(), setup })
            }
            (None, true, false) => {
                let Some(size) = self.size else { return err("`size` is required for an explicit CT problem") };
                let Some(angles) = self.angles else { return err("`angles` is required for an explicit CT problem") };
                let setup = CtSetup {
                    size,
                    angles,
                    det_count: self.det_count.unwrap_or(size),
                    det_spacing: self.det_spacing.unwrap_or(1.5),
                    noise_level: self.noise_level.unwrap_or(0.0),
                };
                Ok(ProblemKind::Ct { name: "custom".into(), setup })
            }
            (None, false, true) => {
                let (Some(rows), Some(cols)) = (self.rows, self.cols) else {
                    return err("a dense problem needs both `rows` and `cols`");
                };
                if rows == 0 || cols == 0 {
                    return err("dense dimensions must be positive");
                }
                if !self.matched {
                    return err("dense problems always use B = Aᵀ; set `matched = true`");
                }
                Ok(ProblemKind::Dense { rows, cols, noise_level: self.noise_level.unwrap_or(0.0) })
            }
            (None, false, false) => err("give a `preset`, an explicit CT geometry (`size`, `angles`, ...) or dense `rows`/`cols`"),
            _ => err("`preset`, explicit CT geometry and dense `rows`/`cols` are mutually exclusive"),
        }
    }
}

/// `lambda = "none" | "lcurve" | "gcv" | <number>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSpec(pub LambdaStrategy);

impl Serialize for LambdaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            LambdaStrategy::None => s.serialize_str("none"),
            LambdaStrategy::LCurve => s.serialize_str("lcurve"),
            LambdaStrategy::Gcv => s.serialize_str("gcv"),
            LambdaStrategy::Fixed(v) => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = LambdaSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"none\", \"lcurve\", \"gcv\" or a nonnegative number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<LambdaSpec, E> {
                match v {
                    "none" => Ok(LambdaSpec(LambdaStrategy::None)),
                    "lcurve" => Ok(LambdaSpec(LambdaStrategy::LCurve)),
                    "gcv" => Ok(LambdaSpec(LambdaStrategy::Gcv)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<LambdaSpec, E> {
                if v >= 0.0 && v.is_finite() {
                    Ok(LambdaSpec(LambdaStrategy::Fixed(v)))
                } else {
                    Err(E::invalid_value(de::Unexpected::Float(v), &self))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<LambdaSpec, E> {
                self.visit_f64(v as f64)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoppingKind {
    #[default]
    None,
    Dp,
    Ncp,
    Rns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Output file stem; defaults to the method name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub method: String,
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<LambdaSpec>,
    #[serde(default)]
    pub stopping: StoppingKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ncp_threshold: Option<f64>,
    /// NCP segment length; 0 uses the whole residual.
    #[serde(default)]
    pub ncp_window: usize,
    #[serde(default)]
    pub restart: usize,
    #[serde(default = "yes")]
    pub reorthogonalize: bool,
}

impl SolverSpec {
    /// Core solver configuration; `noise_norm` feeds the discrepancy principle.
    pub fn to_config(&self, noise_norm: f64) -> Result<SolverConfig, String> {
        let method: Method = self.method.parse().map_err(|e| format!("method: {e}"))?;
        let mut cfg = SolverConfig::new(method, self.max_iter);
        if let Some(l) = self.lambda {
            cfg = cfg.with_lambda(l.0);
        }
        let stray = |field: &str, value: bool| {
            if value {
                Err(format!("`{field}` only applies to another stopping rule"))
            } else {
                Ok(())
            }
        };
        let rule = match self.stopping {
            StoppingKind::None => {
                stray("tau", self.tau.is_some())?;
                stray("epsilon", self.epsilon.is_some())?;
                stray("ncp_threshold", self.ncp_threshold.is_some())?;
                StoppingRule::None
            }
            StoppingKind::Dp => {
                stray("epsilon", self.epsilon.is_some())?;
                stray("ncp_threshold", self.ncp_threshold.is_some())?;
                StoppingRule::Dp {
                    tau: self.tau.unwrap_or(DEFAULT_DP_TAU),
                    noise_norm,
                }
            }
            StoppingKind::Rns => {
                stray("tau", self.tau.is_some())?;
                stray("ncp_threshold", self.ncp_threshold.is_some())?;
                StoppingRule::Rns {
                    epsilon: self.epsilon.unwrap_or(DEFAULT_RNS_EPSILON),
                }
            }
            StoppingKind::Ncp => {
                stray("tau", self.tau.is_some())?;
                stray("epsilon", self.epsilon.is_some())?;
                StoppingRule::Ncp {
                    threshold: self.ncp_threshold.unwrap_or(DEFAULT_NCP_THRESHOLD),
                    window: self.ncp_window,
                }
            }
        };
        cfg = cfg.with_stopping(rule);
        cfg.restart = self.restart;
        cfg.reorthogonalize = self.reorthogonalize;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    /// Structural checks that do not need the problem to be built.
    pub fn check(&self) -> Result<(), ConfigError> {
        self.problem.resolve()?;
        if self.solvers.is_empty() {
            return Err(ConfigError(
                "at least one [[solver]] section is required".into(),
            ));
        }
        let labels = self.labels();
        for (i, (spec, label)) in self.solvers.iter().zip(&labels).enumerate() {
            if !label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
                || label.starts_with('.')
            {
                return Err(ConfigError(format!(
                    "solver[{i}].name: '{label}' is not a plain file name"
                )));
            }
            spec.to_config(1.0)
                .map_err(|e| ConfigError(format!("solver[{i}] ({label}): {e}")))?;
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(ConfigError(format!(
                    "solver[{i}]: duplicate output name '{l}'; set distinct `name`s"
                )));
            }
        }
        Ok(())
    }

    /// Output stem of every solver, in order.
    pub fn labels(&self) -> Vec<String> {
        self.solvers
            .iter()
            .map(|s| s.name.clone().unwrap_or_else(|| s.method.clone()))
            .collect()
    }
}
