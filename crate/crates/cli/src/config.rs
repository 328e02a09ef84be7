//! Run configuration read from a JSON file and overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use cmc_core::{make_spec, Family, SliceLayout, SpacetimeSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    pub steps: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { tau_min: -1.0, tau_max: 1.0, steps: 41 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Newton residual tolerance; unset picks the solver default.
    pub newton: Option<f64>,
    /// Jacobian degeneracy factor relative to the Laplacian scale.
    pub degeneracy: f64,
    /// `|Dτ|` threshold of the time-function verdict.
    pub gradient: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton: None,
            degeneracy: cmc_core::solver::DEGENERACY_FACTOR,
            gradient: cmc_core::foliation::GRADIENT_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory (current directory when unset).
    pub dir: Option<PathBuf>,
    pub format: Format,
    pub plot: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub tcc_samples: usize,
    pub seed: u64,
    /// Chart times at which the time function is sampled.
    pub time_samples: usize,
    pub space_stride: usize,
    /// Rows of the curvature table.
    pub curvature_points: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { tcc_samples: 10_000, seed: 0, time_samples: 81, space_stride: 1, curvature_points: 21 }
    }
}

fn default_family() -> Family {
    Family::Counterexample { eps: 0.8, n: 2, chart: Default::default() }
}

fn default_grid() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_family")]
    pub spacetime: Family,
    /// Points of the spatial grid for n = 1 spacetimes.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spacetime: default_family(),
            grid: default_grid(),
            sweep: SweepConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
            sampling: SamplingConfig::default(),
        }
    }
}

fn field_error(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.to_string(), message: message.into() }
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field_error(field, format!("must be a positive finite number, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| field_error("spacetime", format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| field_error("spacetime", format!("{}: {e}", path.display())))
    }

    /// Rejects every invariant breach with the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid < 16 {
            return Err(field_error("grid", format!("needs at least 16 points, got {}", self.grid)));
        }
        let s = &self.sweep;
        if !(s.tau_min.is_finite() && s.tau_max.is_finite()) {
            return Err(field_error("sweep.tau_min", "tau range must be finite"));
        }
        if s.tau_min >= s.tau_max {
            return Err(field_error(
                "sweep.tau_min",
                format!("must be below sweep.tau_max ({} >= {})", s.tau_min, s.tau_max),
            ));
        }
        if s.steps < 2 {
            return Err(field_error("sweep.steps", format!("needs at least 2 steps, got {}", s.steps)));
        }
        if let Some(tol) = self.tolerances.newton {
            positive("tolerances.newton", tol)?;
        }
        positive("tolerances.degeneracy", self.tolerances.degeneracy)?;
        positive("tolerances.gradient", self.tolerances.gradient)?;
        let sm = &self.sampling;
        if sm.tcc_samples == 0 {
            return Err(field_error("sampling.tcc_samples", "must be at least 1"));
        }
        if sm.time_samples < 2 {
            return Err(field_error("sampling.time_samples", "must be at least 2"));
        }
        if sm.space_stride == 0 {
            return Err(field_error("sampling.space_stride", "must be at least 1"));
        }
        if sm.curvature_points == 0 {
            return Err(field_error("sampling.curvature_points", "must be at least 1"));
        }
        self.spec().map(|_| ())
    }

    pub fn spec(&self) -> Result<SpacetimeSpec, CliError> {
        make_spec(&self.spacetime).map_err(|e| field_error("spacetime", e.to_string()))
    }

    pub fn layout(&self, spec: &SpacetimeSpec) -> Result<SliceLayout, CliError> {
        SliceLayout::for_spec(spec, self.grid).map_err(|e| field_error("grid", e.to_string()))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
