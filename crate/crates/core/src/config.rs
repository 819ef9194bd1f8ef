//! JSON model configuration consumed by the command-line driver.
//!
//! Every section except `model` has defaults, so the smallest valid file is
//! e.g. `{"model": {"kind": "cubic", "g": 0.1, "duration": 10}}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::linalg::ComplexMatrix;
use crate::moyal::CubicConfig;
use crate::scattering::ScatteringConfig;
use crate::schedule::HamiltonianSchedule;
use crate::two_level::{FigOneConfig, FigOneParams, MetricComponents, TwoLevelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: Model,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub scattering: ScatteringSection,
    #[serde(default)]
    pub checks: CheckSection,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Model {
    /// General finite-dimensional model.
    Matrix {
        schedule: HamiltonianSchedule,
        /// Initial metric; identity when absent.
        #[serde(
            default,
            with = "crate::serde_matrix::option",
            skip_serializing_if = "Option::is_none"
        )]
        theta0: Option<ComplexMatrix>,
        /// Positive weights for the static metric; all ones when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// `H = (v_μ + i w_μ)σ_μ / 2`, either constant (`params`) or the ramp.
    TwoLevel {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<TwoLevelParams>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ramp: Option<FigOneParams>,
        /// Initial metric components for the constant model; the static
        /// branch below when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<MetricComponents>,
        #[serde(default)]
        static_branch: StaticBranch,
    },
    /// `p² + q² + i g λ(t) q³` with the linear switch of length `duration`.
    Cubic { g: f64, duration: f64 },
}

/// Free parameters `(ϑ₀ˢ, α)` of the two-level static family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticBranch {
    pub theta0: f64,
    pub alpha: f64,
}

impl Default for StaticBranch {
    fn default() -> Self {
        Self {
            theta0: 1.0,
            alpha: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub t0: f64,
    pub t1: f64,
    pub flow: FlowConfig,
    pub ramp: FigOneConfig,
    pub cubic: CubicConfig,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t1: 10.0,
            flow: FlowConfig::default(),
            ramp: FigOneConfig::default(),
            cubic: CubicConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    /// Ramp or switch length `T` (two-level ramp, cubic).
    Duration,
    /// Switching rate `ε` (matrix or two-level scattering).
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringSection {
    pub config: ScatteringConfig,
    /// Switching rate for a two-level model (matrix models carry their own).
    pub epsilon: f64,
    /// `ε` ladder for the extrapolation block.
    pub ladder: Vec<f64>,
    /// When set, the ladder is repeated with the compact switch of half-width
    /// `smooth_scale / ε` and the two shapes are compared.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smooth_scale: Option<f64>,
    /// `‖S†S − I‖` below this counts as unitary.
    pub unitarity_threshold: f64,
}

impl Default for ScatteringSection {
    fn default() -> Self {
        Self {
            config: ScatteringConfig::default(),
            epsilon: 0.05,
            ladder: vec![0.4, 0.2, 0.1, 0.05],
            smooth_scale: None,
            unitarity_threshold: 1e-8,
        }
    }
}

/// Settings of `moyal-check`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    pub seed: u64,
    /// Random polynomial triples tested for associativity.
    pub samples: usize,
    pub max_degree: u32,
    /// Relative tolerance of the integrated cubic coefficients.
    pub closed_form_tol: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 20,
            max_degree: 4,
            closed_form_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Per-command default when absent (CSV for tables, JSON for reports).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidParameter(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn new(model: Model) -> Self {
        Self {
            model,
            solver: SolverSection::default(),
            sweep: None,
            scattering: ScatteringSection::default(),
            checks: CheckSection::default(),
            output: OutputSpec::default(),
        }
    }
}
