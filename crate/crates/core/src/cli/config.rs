use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algebra::{FieldContext, Mode};
use crate::error::{Error, Result};
use crate::walk::GuardParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    CheckAbsorbing,
    Construct,
    Completion,
    Simulate,
    Stationary,
    Entropy,
    Spectrum,
    Subsum,
    Decouple,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::CheckAbsorbing => "check-absorbing",
            Subcommand::Construct => "construct",
            Subcommand::Completion => "completion",
            Subcommand::Simulate => "simulate",
            Subcommand::Stationary => "stationary",
            Subcommand::Entropy => "entropy",
            Subcommand::Spectrum => "spectrum",
            Subcommand::Subsum => "subsum",
            Subcommand::Decouple => "decouple",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextConfig {
    pub q: u32,
    pub mode: Mode,
}

impl ContextConfig {
    pub fn build(&self) -> Result<FieldContext> {
        FieldContext::new(self.q, self.mode)
    }
}

/// Inputs are inline descriptors or file references; see the README for the
/// accepted forms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Inputs {
    pub measure: Option<String>,
    pub op: Option<String>,
    pub beta: Option<String>,
    pub target: Option<String>,
    pub subset: Option<Vec<usize>>,
    pub h_sigma_o: Option<String>,
    pub kappa: Option<String>,
    pub t_minus: Option<String>,
    pub delta: Option<String>,
    /// `haar`, `sample`, or a ball-measure CSV path.
    pub nu: Option<String>,
    pub level: Option<i64>,
    pub z1: Option<String>,
    pub z2: Option<String>,
    pub m_range: Option<(i64, i64)>,
    pub char_shift: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub steps: u64,
    pub samples: u64,
    /// Ball window `[lo, M)`.
    pub window: (i64, i64),
    pub guard: GuardParams,
    /// Exact rationals in ball CSVs; floats otherwise.
    pub exact: bool,
    /// Truncation level N for subsum and spectrum work.
    pub truncation: usize,
    pub n_max: u32,
    pub max_support: usize,
    pub reps_per_m: usize,
    /// Contraction statistic: number of boundary points and trials (0 = skip).
    pub k: usize,
    pub trials: u64,
    /// Tolerance for checks that compare two estimates.
    pub tolerance: Option<f64>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            steps: 100,
            samples: 100_000,
            window: (0, 3),
            guard: GuardParams::default(),
            exact: true,
            truncation: 16,
            n_max: 10,
            max_support: 1 << 20,
            reps_per_m: 1 << 16,
            k: 4,
            trials: 0,
            tolerance: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    /// Directory for the report and artifacts; stdout when absent.
    pub dir: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    #[serde(default)]
    pub context: Option<ContextConfig>,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub output: Output,
}

impl RunConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        RunConfig {
            subcommand,
            context: None,
            inputs: Inputs::default(),
            seed: 0,
            budgets: Budgets::default(),
            output: Output::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks that do not need any input files.
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.context {
            c.build()?;
        }
        let b = &self.budgets;
        if b.window.0 >= b.window.1 {
            return Err(Error::parse(format!("window [{}, {}) is empty", b.window.0, b.window.1)));
        }
        if !(b.guard.eps > 0.0 && b.guard.eps < 1.0) {
            return Err(Error::parse(format!("guard.eps = {} must lie in (0, 1)", b.guard.eps)));
        }
        if let Some((lo, hi)) = self.inputs.m_range {
            if lo > hi {
                return Err(Error::parse(format!("m_range ({lo}, {hi}) is reversed")));
            }
        }
        Ok(())
    }
}
