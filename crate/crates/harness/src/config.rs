//! Experiment configuration: one JSON document per check invocation.

use std::fmt;
use std::path::{Path, PathBuf};

use evidence_duality::composite::MixtureAlternative;
use evidence_duality::decision::{RiskSpec, TiePolicy};
use evidence_duality::enumerate::DEFAULT_ENUMERATION_CAP;
use evidence_duality::{asymptotics::Expectation, Dataset, Direction, Method, Model};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Smallest replicate count accepted for Monte Carlo runs.
pub const MIN_REPS: usize = 100;

pub const DEFAULT_LEVELS: [f64; 5] = [0.01, 0.05, 0.1, 0.25, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    UnitMoment,
    MarkovBound,
    DualityDemo,
    OptimalThreshold,
    ErrorRates,
    ThresholdSweep,
    MixtureCertification,
    CompositeType2,
    PointwiseCaveat,
    ThreeLevel,
    MarginalLikelihood,
    BcPrediction,
    BcConvergence,
    Redundancy,
    RedundancyGrowth,
    RunEprocess,
    StepwiseMoment,
    KlRate,
    Dawid,
    OptionalStopping,
}

/// CLI subcommand grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    VerifyMarkov,
    BayesRisk,
    Composite,
    Redundancy,
    Sequential,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::VerifyMarkov => "verify-markov",
            Group::BayesRisk => "bayes-risk",
            Group::Composite => "composite",
            Group::Redundancy => "redundancy",
            Group::Sequential => "sequential",
        }
    }
}

impl Check {
    pub fn group(self) -> Group {
        use Check::*;
        match self {
            UnitMoment | MarkovBound | DualityDemo => Group::VerifyMarkov,
            OptimalThreshold | ErrorRates | ThresholdSweep => Group::BayesRisk,
            MixtureCertification | CompositeType2 | PointwiseCaveat | ThreeLevel | MarginalLikelihood => {
                Group::Composite
            }
            BcPrediction | BcConvergence | Redundancy | RedundancyGrowth => Group::Redundancy,
            RunEprocess | StepwiseMoment | KlRate | Dawid | OptionalStopping => Group::Sequential,
        }
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Evaluation method. Seeds come from the master seed, never from here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Enumerate {
        #[serde(default = "default_cap")]
        cap: u64,
    },
    SufficientStatistic,
    MonteCarlo {
        reps: usize,
    },
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

impl MethodConfig {
    pub fn reps(&self) -> Option<usize> {
        match *self {
            MethodConfig::MonteCarlo { reps } => Some(reps),
            _ => None,
        }
    }

    pub fn method(&self, seed: u64) -> Result<Method, HarnessError> {
        match *self {
            MethodConfig::Enumerate { cap } => Ok(Method::Enumerate { cap }),
            MethodConfig::MonteCarlo { reps } => Ok(Method::MonteCarlo { reps, seed }),
            MethodConfig::SufficientStatistic => Err(HarnessError::config(
                "method.kind",
                "sufficient_statistic applies only to redundancy checks",
            )),
        }
    }

    pub fn expectation(&self, seed: u64) -> Expectation {
        match *self {
            MethodConfig::Enumerate { cap } => Expectation::Enumerate { cap },
            MethodConfig::SufficientStatistic => Expectation::SufficientStatistic,
            MethodConfig::MonteCarlo { reps } => Expectation::MonteCarlo { reps, seed },
        }
    }
}

/// A dataset given inline (one array per observation) or as a text file
/// with one whitespace-separated observation per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataBlock {
    Inline(Vec<Vec<f64>>),
    File { file: PathBuf },
}

/// Frozen thresholds that turn an asymptotic report into a pass/fail check.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criteria {
    /// Standard errors allowed in Monte Carlo agreement checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_se: Option<f64>,
    /// Absolute tolerance for exact checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// `|gap|` at the last grid point must undercut the first by this many
    /// combined standard errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_shrinks_k_se: Option<f64>,
    /// Agreement of empirical values with the exact sufficient-statistic
    /// evaluation, in standard errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_k_se: Option<f64>,
    /// Inclusive band for `redundancy − (d/2)·ln n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_below: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fraction_within: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub check: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alt: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureAlternative>,
    /// Data-generating law for redundancy, trace and Dawid checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<RiskSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub tie_policy: TiePolicy,
    /// Restricts moment and bound checks to one side; both by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Parameter vectors searched by the pointwise caveat check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Criteria>,

    /// Directory that relative data paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut config = Self::from_json(&text).map_err(|e| e.in_file(path))?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    /// Name used for report files.
    pub fn report_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.check.name())
    }

    pub fn levels(&self) -> Vec<f64> {
        self.levels.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec())
    }

    pub fn criteria(&self) -> Criteria {
        self.criteria.clone().unwrap_or_default()
    }

    pub fn directions(&self) -> Vec<Direction> {
        match self.direction {
            Some(d) => vec![d],
            None => vec![Direction::ForNull, Direction::ForAlt],
        }
    }

    pub fn method_or_enumerate(&self) -> MethodConfig {
        self.method.unwrap_or(MethodConfig::Enumerate {
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn dataset(&self) -> Result<Dataset, HarnessError> {
        let block = self.data.as_ref().ok_or_else(|| missing("data", self.check))?;
        let dim = self
            .mixture
            .as_ref()
            .map(|m| m.family().observation_dim())
            .or_else(|| self.null.as_ref().map(|m| m.family().observation_dim()))
            .unwrap_or(1);
        match block {
            DataBlock::Inline(rows) => {
                let mut data = Dataset::empty(dim);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != dim {
                        return Err(HarnessError::config(
                            format!("data[{i}]"),
                            format!("expected {dim} components, got {}", row.len()),
                        ));
                    }
                    data.push(row);
                }
                Ok(data)
            }
            DataBlock::File { file } => {
                let path = match &self.base_dir {
                    Some(dir) if file.is_relative() => dir.join(file),
                    _ => file.clone(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
                Dataset::from_text(&text, dim).map_err(|e| HarnessError::config("data.file", e.to_string()))
            }
        }
    }

    /// Checks that every block the chosen check reads is present and sane.
    pub fn validate(&self) -> Result<(), HarnessError> {
        use Check::*;
        let need = |present: bool, field: &str| -> Result<(), HarnessError> {
            if present {
                Ok(())
            } else {
                Err(missing(field, self.check))
            }
        };
        let null = self.null.is_some();
        let alt = self.alt.is_some();
        let mixture = self.mixture.is_some();
        match self.check {
            UnitMoment | MarkovBound => {
                need(null, "null")?;
                need(alt || mixture, "alt")?;
                need(self.n.is_some(), "n")?;
            }
            DualityDemo | OptimalThreshold | ErrorRates | ThresholdSweep => {
                need(null, "null")?;
                need(alt || mixture, "alt")?;
                need(self.n.is_some(), "n")?;
                if matches!(self.check, OptimalThreshold | ThresholdSweep) {
                    need(self.risk.is_some(), "risk")?;
                }
                if self.check == ErrorRates {
                    need(self.threshold.is_some() || self.risk.is_some(), "threshold")?;
                }
            }
            MixtureCertification | CompositeType2 | PointwiseCaveat => {
                need(null, "null")?;
                need(mixture, "mixture")?;
                need(self.n.is_some(), "n")?;
            }
            ThreeLevel => {
                need(null, "null")?;
                need(alt, "alt")?;
                need(mixture, "mixture")?;
                need(self.n.is_some(), "n")?;
            }
            MarginalLikelihood => {
                need(mixture, "mixture")?;
                need(self.data.is_some(), "data")?;
            }
            BcPrediction => {
                need(null, "null")?;
                need(alt, "alt")?;
                need(mixture, "mixture")?;
                need(self.n.is_some() || self.n_grid.is_some(), "n")?;
            }
            BcConvergence => {
                need(null, "null")?;
                need(alt, "alt")?;
                need(mixture, "mixture")?;
                need(self.n_grid.is_some(), "n_grid")?;
            }
            Redundancy => {
                need(self.truth.is_some(), "truth")?;
                need(mixture, "mixture")?;
                need(self.n.is_some(), "n")?;
            }
            RedundancyGrowth => {
                need(self.truth.is_some(), "truth")?;
                need(mixture, "mixture")?;
                need(self.n_grid.is_some(), "n_grid")?;
            }
            RunEprocess => {
                need(null, "null")?;
                need(alt, "alt")?;
                need(self.t_max.is_some(), "t_max")?;
            }
            StepwiseMoment => {
                need(null, "null")?;
                need(alt, "alt")?;
                need(self.t_max.is_some(), "t_max")?;
            }
            KlRate | OptionalStopping => {
                need(null, "null")?;
                need(alt, "alt")?;
                need(self.t_max.is_some(), "t_max")?;
                need(self.method.and_then(|m| m.reps()).is_some(), "method")?;
            }
            Dawid => {
                need(null, "null")?;
                need(mixture, "mixture")?;
                need(self.truth.is_some(), "truth")?;
                need(self.t_max.is_some(), "t_max")?;
                need(self.method.and_then(|m| m.reps()).is_some(), "method")?;
            }
        }
        if let Some(MethodConfig::MonteCarlo { reps }) = self.method {
            if reps < MIN_REPS {
                return Err(HarnessError::config(
                    "method.reps",
                    format!("monte carlo needs at least {MIN_REPS} replicates, got {reps}"),
                ));
            }
        }
        if let Some(levels) = &self.levels {
            if levels.is_empty() {
                return Err(HarnessError::config("levels", "at least one level is required"));
            }
            for (i, &l) in levels.iter().enumerate() {
                if !(l > 0.0 && l <= 1.0) {
                    return Err(HarnessError::config(format!("levels[{i}]"), format!("{l} is not in (0, 1]")));
                }
            }
        }
        if let Some(alpha) = self.alpha {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(HarnessError::config("alpha", format!("{alpha} is not in (0, 1]")));
            }
        }
        if let Some(grid) = &self.n_grid {
            if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) || grid[0] == 0 {
                return Err(HarnessError::config(
                    "n_grid",
                    "must be a non-empty, strictly increasing list of positive sizes",
                ));
            }
        }
        if self.t_max == Some(0) {
            return Err(HarnessError::config("t_max", "must be at least 1"));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0) {
                return Err(HarnessError::config("threshold", format!("{t} is not positive")));
            }
        }
        Ok(())
    }
}

fn missing(field: &str, check: Check) -> HarnessError {
    HarnessError::config(field, format!("required by check `{check}`"))
}
