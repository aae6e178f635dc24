use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::report::{EvalReport, ScenarioResult};
use super::TEST_FRACTION;
use crate::describer::{describe, DataSummary, PrivacyParams};
use crate::error::{Error, Result};
use crate::generator::sample;
use crate::models::{GbtParams, ModelKind, RuntimeModel};
use crate::trace_io::{sample_rows, split, TraceDataset};

/// Pipeline stage a derived seed feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Subset = 1,
    Describe = 2,
    Generate = 3,
    Corpus = 4,
}

/// SplitMix64 finalizer over `(seed, stage, index)`. The train/test split and
/// model fits use the trial seed itself.
pub fn derive_seed(seed: u64, stage: Stage, index: u64) -> u64 {
    let mut z = seed
        ^ (stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Knobs shared by the accuracy experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunSettings {
    pub gbt: GbtParams,
    /// Worker threads across trials; 1 runs serially.
    pub threads: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            gbt: GbtParams::default(),
            threads: 1,
        }
    }
}

/// The datasets behind one scenario, exactly as the runners build them.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub train: TraceDataset,
    pub test: TraceDataset,
    /// Original rows the models were fit on for `mape_original`.
    pub original: TraceDataset,
    pub summary: DataSummary,
    pub synthetic: TraceDataset,
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn describe_timed(source: &TraceDataset, privacy: &PrivacyParams, seed: u64) -> Result<(DataSummary, f64)> {
    let t = Instant::now();
    let summary = describe(source, &privacy.with_seed(seed))?;
    Ok((summary, millis(t)))
}

/// Samples `n` rows and re-attaches the source schema (the summary does not
/// carry the Ernest column mapping).
fn generate_timed(summary: &DataSummary, like: &TraceDataset, n: usize, seed: u64) -> Result<(TraceDataset, f64)> {
    let t = Instant::now();
    let raw = sample(summary, n, seed)?;
    let ms = millis(t);
    let data = TraceDataset::new(raw.name(), like.schema().clone(), raw.rows().to_vec())?;
    Ok((data, ms))
}

fn fit_score(kind: ModelKind, train: &TraceDataset, test: &TraceDataset, gbt: &GbtParams, seed: u64) -> Result<(f64, f64)> {
    let t = Instant::now();
    let model = RuntimeModel::fit(kind, train, gbt, seed)?;
    let ms = millis(t);
    Ok((model.evaluate(test)?, ms))
}

fn trial_seeds(base_seed: u64, trials: usize) -> Vec<u64> {
    (0..trials as u64).map(|t| base_seed.wrapping_add(t)).collect()
}

/// Runs `f` per trial, serially or on a dedicated pool, keeping trial order.
fn run_trials<F>(seeds: &[u64], threads: usize, f: F) -> Result<Vec<ScenarioResult>>
where
    F: Fn(u64) -> Result<Vec<ScenarioResult>> + Sync,
{
    let per_trial: Vec<Result<Vec<ScenarioResult>>> = if threads <= 1 {
        seeds.iter().map(|&s| f(s)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
        pool.install(|| seeds.par_iter().map(|&s| f(s)).collect())
    };
    let mut rows = Vec::new();
    for r in per_trial {
        rows.extend(r?);
    }
    Ok(rows)
}

fn check_common(data: &TraceDataset, trials: usize, privacy: &PrivacyParams, settings: &RunSettings) -> Result<()> {
    if trials == 0 {
        return Err(Error::Range("at least one trial is required".into()));
    }
    privacy.validate()?;
    settings.gbt.validate()?;
    if data.schema().ernest().is_none() {
        return Err(Error::InvalidSchema(format!(
            "job `{}` has no `ernest` column mapping",
            data.name()
        )));
    }
    Ok(())
}

/// Rebuilds the synthetic training set of one synthetic-size scenario.
pub fn synth_size_scenario(data: &TraceDataset, n_synthetic: usize, privacy: &PrivacyParams, trial_seed: u64) -> Result<Scenario> {
    let (train, test) = split(data, TEST_FRACTION, trial_seed)?;
    let (summary, _) = describe_timed(&train, privacy, derive_seed(trial_seed, Stage::Describe, 0))?;
    let (synthetic, _) = generate_timed(&summary, &train, n_synthetic, derive_seed(trial_seed, Stage::Generate, n_synthetic as u64))?;
    Ok(Scenario {
        original: train.clone(),
        train,
        test,
        summary,
        synthetic,
    })
}

/// Rebuilds the subset and synthetic training set of one low-data scenario.
pub fn low_data_scenario(
    data: &TraceDataset,
    count: usize,
    n_synthetic: usize,
    privacy: &PrivacyParams,
    trial_seed: u64,
) -> Result<Scenario> {
    let (train, test) = split(data, TEST_FRACTION, trial_seed)?;
    let c = count as u64;
    let original = sample_rows(&train, count, derive_seed(trial_seed, Stage::Subset, c))?;
    let (summary, _) = describe_timed(&original, privacy, derive_seed(trial_seed, Stage::Describe, c))?;
    let (synthetic, _) = generate_timed(&summary, &train, n_synthetic, derive_seed(trial_seed, Stage::Generate, c))?;
    Ok(Scenario {
        train,
        test,
        original,
        summary,
        synthetic,
    })
}

fn base_config(kind: &str, data: &TraceDataset, trials: usize, privacy: &PrivacyParams, base_seed: u64, settings: &RunSettings) -> serde_json::Value {
    json!({
        "experiment": kind,
        "job": data.name(),
        "n_rows": data.len(),
        "schema_digest": data.schema().digest(),
        "trials": trials,
        "base_seed": base_seed,
        "trial_seeds": trial_seeds(base_seed, trials),
        "privacy": privacy,
        "gbt": settings.gbt,
        "test_fraction": TEST_FRACTION,
        "threads": settings.threads,
        "seed_derivation": "split and model fits use trial_seed; other stages use splitmix64(trial_seed ^ stage*0x9E3779B97F4A7C15 ^ index*0xD1B54A32D192ED03) with stage subset=1, describe=2, generate=3",
    })
}

/// Accuracy of both models as the synthetic training set grows.
///
/// Per trial: split, fit on the original train split (baseline rows), describe
/// the train split once, then generate and refit for every size.
pub fn exp_synth_size(
    data: &TraceDataset,
    synth_sizes: &[usize],
    trials: usize,
    privacy: &PrivacyParams,
    base_seed: u64,
    settings: &RunSettings,
) -> Result<EvalReport> {
    check_common(data, trials, privacy, settings)?;
    if synth_sizes.is_empty() || synth_sizes.contains(&0) {
        return Err(Error::Range("synthetic sizes must be non-empty and positive".into()));
    }
    let seeds = trial_seeds(base_seed, trials);
    warm_up(data, privacy, synth_sizes[0])?;
    let rows = run_trials(&seeds, settings.threads, |trial_seed| {
        let (train, test) = split(data, TEST_FRACTION, trial_seed)?;
        let mut out = Vec::new();
        let mut baseline = [0.0; 2];
        for (i, kind) in ModelKind::ALL.into_iter().enumerate() {
            let (mape, fit_ms) = fit_score(kind, &train, &test, &settings.gbt, trial_seed)?;
            baseline[i] = mape;
            out.push(ScenarioResult {
                job: data.name().to_string(),
                model_kind: Some(kind),
                n_original: train.len(),
                n_synthetic: 0,
                epsilon: privacy.epsilon,
                trial_seed,
                mape_original: Some(mape),
                mape_synthetic: None,
                describe_ms: 0.0,
                generate_ms: 0.0,
                fit_ms,
            });
        }
        let (summary, describe_ms) = describe_timed(&train, privacy, derive_seed(trial_seed, Stage::Describe, 0))?;
        for &m in synth_sizes {
            let (synthetic, generate_ms) = generate_timed(&summary, &train, m, derive_seed(trial_seed, Stage::Generate, m as u64))?;
            for (i, kind) in ModelKind::ALL.into_iter().enumerate() {
                let (mape, fit_ms) = fit_score(kind, &synthetic, &test, &settings.gbt, trial_seed)?;
                out.push(ScenarioResult {
                    job: data.name().to_string(),
                    model_kind: Some(kind),
                    n_original: train.len(),
                    n_synthetic: m,
                    epsilon: privacy.epsilon,
                    trial_seed,
                    mape_original: Some(baseline[i]),
                    mape_synthetic: Some(mape),
                    describe_ms,
                    generate_ms,
                    fit_ms,
                });
            }
        }
        Ok(out)
    })?;
    let mut config = base_config("synth-size", data, trials, privacy, base_seed, settings);
    config["synth_sizes"] = json!(synth_sizes);
    config["describe_once_per_trial"] = json!(true);
    Ok(EvalReport::new("synth-size", rows, config))
}

/// Accuracy from `c` original rows versus `n_synthetic` rows generated from
/// those same `c` rows, for every count. Each scenario re-describes its subset.
pub fn exp_low_data(
    data: &TraceDataset,
    original_counts: &[usize],
    n_synthetic: usize,
    trials: usize,
    privacy: &PrivacyParams,
    base_seed: u64,
    settings: &RunSettings,
) -> Result<EvalReport> {
    check_common(data, trials, privacy, settings)?;
    if n_synthetic == 0 {
        return Err(Error::Range("synthetic row count must be at least 1".into()));
    }
    if original_counts.is_empty() {
        return Err(Error::Range("original counts must be non-empty".into()));
    }
    let n_train = train_size(data.len())?;
    if let Some(&c) = original_counts.iter().find(|&&c| c == 0 || c > n_train) {
        return Err(Error::Range(format!(
            "original count {c} is outside 1..={n_train} (train split of `{}`)",
            data.name()
        )));
    }
    let seeds = trial_seeds(base_seed, trials);
    warm_up(data, privacy, n_synthetic)?;
    let rows = run_trials(&seeds, settings.threads, |trial_seed| {
        let (train, test) = split(data, TEST_FRACTION, trial_seed)?;
        let mut out = Vec::new();
        for &c in original_counts {
            let idx = c as u64;
            let original = sample_rows(&train, c, derive_seed(trial_seed, Stage::Subset, idx))?;
            let (summary, describe_ms) = describe_timed(&original, privacy, derive_seed(trial_seed, Stage::Describe, idx))?;
            let (synthetic, generate_ms) = generate_timed(&summary, &train, n_synthetic, derive_seed(trial_seed, Stage::Generate, idx))?;
            for kind in ModelKind::ALL {
                let (mape_original, _) = fit_score(kind, &original, &test, &settings.gbt, trial_seed)?;
                let (mape_synthetic, fit_ms) = fit_score(kind, &synthetic, &test, &settings.gbt, trial_seed)?;
                out.push(ScenarioResult {
                    job: data.name().to_string(),
                    model_kind: Some(kind),
                    n_original: c,
                    n_synthetic,
                    epsilon: privacy.epsilon,
                    trial_seed,
                    mape_original: Some(mape_original),
                    mape_synthetic: Some(mape_synthetic),
                    describe_ms,
                    generate_ms,
                    fit_ms,
                });
            }
        }
        Ok(out)
    })?;
    let mut config = base_config("low-data", data, trials, privacy, base_seed, settings);
    config["original_counts"] = json!(original_counts);
    config["n_synthetic"] = json!(n_synthetic);
    config["describe_per_scenario"] = json!(true);
    Ok(EvalReport::new("low-data", rows, config))
}

/// Rows left for training after the test split of an `n`-row job.
pub(crate) fn train_size(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::Range(format!("cannot split a dataset of {n} row(s)")));
    }
    Ok(n - ((TEST_FRACTION * n as f64).round() as usize).clamp(1, n - 1))
}

/// One discarded describe/generate pass so first-touch costs stay out of the
/// recorded timings.
fn warm_up(data: &TraceDataset, privacy: &PrivacyParams, n: usize) -> Result<()> {
    let summary = describe(data, privacy)?;
    sample(&summary, n, 0)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_separate_stages_and_indices() {
        let a = derive_seed(7, Stage::Describe, 3);
        assert_eq!(a, derive_seed(7, Stage::Describe, 3));
        assert_ne!(a, derive_seed(7, Stage::Generate, 3));
        assert_ne!(a, derive_seed(7, Stage::Describe, 4));
        assert_ne!(a, derive_seed(8, Stage::Describe, 3));
    }
}
