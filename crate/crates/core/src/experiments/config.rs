use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::overhead::exp_overhead;
use super::report::EvalReport;
use super::runners::{exp_low_data, exp_synth_size, RunSettings};
use super::{DEFAULT_N_SYNTHETIC, DEFAULT_ORIGINAL_COUNTS, DEFAULT_SYNTH_SIZES};
use crate::describer::{Epsilon, PrivacyParams, DEFAULT_BINS, DEFAULT_DEGREE};
use crate::error::{Error, Result};
use crate::models::GbtParams;
use crate::trace_io::{load_csv, Schema, TraceDataset};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    SynthSize,
    LowData,
    Overhead,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::SynthSize => "synth-size",
            ExperimentKind::LowData => "low-data",
            ExperimentKind::Overhead => "overhead",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synth-size" => Ok(Self::SynthSize),
            "low-data" => Ok(Self::LowData),
            "overhead" => Ok(Self::Overhead),
            other => Err(Error::Format(format!("unknown experiment kind `{other}`"))),
        }
    }
}

/// A trace file and its schema; relative paths resolve against the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSource {
    pub name: String,
    pub data: PathBuf,
    pub schema: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverheadSweep {
    pub row_counts: Vec<usize>,
    pub column_counts: Vec<usize>,
    pub synth_counts: Vec<usize>,
    #[serde(default = "default_overhead_degree")]
    pub degree_k: usize,
}

fn default_overhead_degree() -> usize {
    DEFAULT_DEGREE
}

fn default_trials() -> usize {
    10
}
fn default_epsilons() -> Vec<Epsilon> {
    vec![Epsilon::Off]
}
fn default_degree() -> usize {
    DEFAULT_DEGREE
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_synth_sizes() -> Vec<usize> {
    DEFAULT_SYNTH_SIZES.to_vec()
}
fn default_counts() -> Vec<usize> {
    DEFAULT_ORIGINAL_COUNTS.to_vec()
}
fn default_n_synthetic() -> usize {
    DEFAULT_N_SYNTHETIC
}

/// Experiment configuration file. Each listed ε produces its own block of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub jobs: Vec<JobSource>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<Epsilon>,
    #[serde(default = "default_degree")]
    pub degree_k: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub gbt: GbtParams,
    #[serde(default = "default_synth_sizes")]
    pub synth_sizes: Vec<usize>,
    #[serde(default = "default_counts")]
    pub original_counts: Vec<usize>,
    #[serde(default = "default_n_synthetic")]
    pub n_synthetic: usize,
    #[serde(default)]
    pub overhead: Option<OverheadSweep>,
}

impl ExperimentConfig {
    /// Parses a config and resolves job paths against `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text)?;
        for job in &mut cfg.jobs {
            if job.data.is_relative() {
                job.data = base_dir.join(&job.data);
            }
            if job.schema.is_relative() {
                job.schema = base_dir.join(&job.schema);
            }
        }
        if cfg.epsilons.is_empty() {
            return Err(Error::Format("config lists no epsilon values".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let dir = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&fs::read_to_string(path)?, dir)
    }

    pub fn privacy(&self, epsilon: Epsilon) -> Result<PrivacyParams> {
        PrivacyParams::new(epsilon, self.degree_k, self.bins, self.base_seed)
    }

    pub fn load_jobs(&self) -> Result<Vec<TraceDataset>> {
        if self.jobs.is_empty() {
            return Err(Error::Format("config lists no jobs".into()));
        }
        self.jobs
            .iter()
            .map(|j| {
                let schema = Schema::from_file(&j.schema)?;
                let data = load_csv(&j.data, &schema)?;
                TraceDataset::new(j.name.clone(), schema, data.rows().to_vec())
            })
            .collect()
    }

    /// Runs `kind` over every job and ε, concatenating rows in that order.
    pub fn run(&self, kind: ExperimentKind, threads: usize) -> Result<EvalReport> {
        let settings = RunSettings {
            gbt: self.gbt,
            threads: threads.max(1),
        };
        let mut parts = Vec::new();
        match kind {
            ExperimentKind::SynthSize | ExperimentKind::LowData => {
                let jobs = self.load_jobs()?;
                for &eps in &self.epsilons {
                    let privacy = self.privacy(eps)?;
                    for job in &jobs {
                        parts.push(match kind {
                            ExperimentKind::SynthSize => {
                                exp_synth_size(job, &self.synth_sizes, self.trials, &privacy, self.base_seed, &settings)?
                            }
                            _ => exp_low_data(
                                job,
                                &feasible_counts(job, &self.original_counts)?,
                                self.n_synthetic,
                                self.trials,
                                &privacy,
                                self.base_seed,
                                &settings,
                            )?,
                        });
                    }
                }
            }
            ExperimentKind::Overhead => {
                let sweep = self
                    .overhead
                    .as_ref()
                    .ok_or_else(|| Error::Format("config has no `overhead` sweep".into()))?;
                for &eps in &self.epsilons {
                    let privacy = PrivacyParams::new(eps, sweep.degree_k, self.bins, self.base_seed)?;
                    parts.push(exp_overhead(
                        &sweep.row_counts,
                        &sweep.column_counts,
                        &sweep.synth_counts,
                        self.trials,
                        &privacy,
                        self.base_seed,
                    )?);
                }
            }
        }
        let scaling = if parts.len() == 1 { parts[0].scaling } else { None };
        let config = json!({
            "kind": kind.as_str(),
            "config": self,
            "runs": parts.iter().map(|p| p.config.clone()).collect::<Vec<_>>(),
            "scaling_per_run": parts.iter().map(|p| p.scaling).collect::<Vec<_>>(),
        });
        let mut report = EvalReport::merge(kind.as_str(), parts, config);
        report.scaling = scaling;
        Ok(report)
    }
}

/// Counts that fit in `job`'s train split. A job too small for some of the
/// configured counts runs with the rest; the dropped counts are visible in
/// the run's recorded `original_counts`.
fn feasible_counts(job: &TraceDataset, counts: &[usize]) -> Result<Vec<usize>> {
    let n_train = super::runners::train_size(job.len())?;
    let kept: Vec<usize> = counts.iter().copied().filter(|&c| c <= n_train).collect();
    if kept.is_empty() {
        return Err(Error::Range(format!(
            "no original count fits the {n_train}-row train split of `{}`",
            job.name()
        )));
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_path_resolution() {
        let cfg = ExperimentConfig::from_json(
            r#"{"jobs":[{"name":"sort","data":"traces/sort.csv","schema":"/abs/sort.schema.json"}]}"#,
            Path::new("/cfg"),
        )
        .unwrap();
        assert_eq!(cfg.jobs[0].data, PathBuf::from("/cfg/traces/sort.csv"));
        assert_eq!(cfg.jobs[0].schema, PathBuf::from("/abs/sort.schema.json"));
        assert_eq!(cfg.trials, 10);
        assert_eq!(cfg.synth_sizes, DEFAULT_SYNTH_SIZES);
        assert_eq!(cfg.original_counts, DEFAULT_ORIGINAL_COUNTS);
        assert_eq!(cfg.n_synthetic, 1000);
        assert_eq!(cfg.epsilons, vec![Epsilon::Off]);
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        assert!(ExperimentConfig::from_json(r#"{"trails":3}"#, Path::new(".")).is_err());
        assert!("fig-2".parse::<ExperimentKind>().is_err());
        assert_eq!("low-data".parse::<ExperimentKind>().unwrap(), ExperimentKind::LowData);
    }
}
