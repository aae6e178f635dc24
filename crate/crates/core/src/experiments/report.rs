use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::describer::Epsilon;
use crate::error::Result;
use crate::models::ModelKind;

/// One measured scenario. Baseline rows (original data only) have
/// `n_synthetic = 0` and no `mape_synthetic`; overhead rows carry no model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub job: String,
    pub model_kind: Option<ModelKind>,
    pub n_original: usize,
    pub n_synthetic: usize,
    pub epsilon: Epsilon,
    pub trial_seed: u64,
    pub mape_original: Option<f64>,
    pub mape_synthetic: Option<f64>,
    pub describe_ms: f64,
    pub generate_ms: f64,
    pub fit_ms: f64,
}

pub const REPORT_HEADER: [&str; 11] = [
    "job",
    "model_kind",
    "n_original",
    "n_synthetic",
    "epsilon",
    "trial_seed",
    "mape_original",
    "mape_synthetic",
    "describe_ms",
    "generate_ms",
    "fit_ms",
];

impl ScenarioResult {
    pub fn gap(&self) -> Option<f64> {
        Some((self.mape_synthetic? - self.mape_original?).abs())
    }

    /// Copy with all wall-clock fields zeroed.
    pub fn without_timing(&self) -> Self {
        Self {
            describe_ms: 0.0,
            generate_ms: 0.0,
            fit_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single observation.
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std,
            count: values.len(),
        })
    }
}

/// Per-group statistics over trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub job: String,
    pub model_kind: Option<ModelKind>,
    pub n_original: usize,
    pub n_synthetic: usize,
    pub epsilon: Epsilon,
    pub mape_original: Option<Stat>,
    pub mape_synthetic: Option<Stat>,
    pub abs_gap: Option<Stat>,
    pub describe_ms: Stat,
    pub generate_ms: Stat,
    pub fit_ms: Stat,
}

/// Groups rows by `(job, model, n_original, n_synthetic, epsilon)` in order of
/// first appearance.
pub fn aggregate(rows: &[ScenarioResult]) -> Vec<Aggregate> {
    type Key = (String, Option<ModelKind>, usize, usize, String);
    let mut keys: Vec<Key> = Vec::new();
    let mut groups: HashMap<Key, Vec<&ScenarioResult>> = HashMap::new();
    for r in rows {
        let key = (r.job.clone(), r.model_kind, r.n_original, r.n_synthetic, r.epsilon.to_string());
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                keys.push(key);
                Vec::new()
            })
            .push(r);
    }
    keys.into_iter()
        .map(|key| {
            let g = &groups[&key];
            let collect = |f: &dyn Fn(&ScenarioResult) -> Option<f64>| -> Vec<f64> { g.iter().filter_map(|r| f(r)).collect() };
            let first = g[0];
            Aggregate {
                job: first.job.clone(),
                model_kind: first.model_kind,
                n_original: first.n_original,
                n_synthetic: first.n_synthetic,
                epsilon: first.epsilon,
                mape_original: Stat::of(&collect(&|r| r.mape_original)),
                mape_synthetic: Stat::of(&collect(&|r| r.mape_synthetic)),
                abs_gap: Stat::of(&collect(&|r| r.gap())),
                describe_ms: Stat::of(&collect(&|r| Some(r.describe_ms))).unwrap_or_default(),
                generate_ms: Stat::of(&collect(&|r| Some(r.generate_ms))).unwrap_or_default(),
                fit_ms: Stat::of(&collect(&|r| Some(r.fit_ms))).unwrap_or_default(),
            }
        })
        .collect()
}

/// Mean of `|mape_synthetic - mape_original|` over rows that carry both.
pub fn mean_abs_gap(rows: &[ScenarioResult]) -> Option<f64> {
    Stat::of(&rows.iter().filter_map(ScenarioResult::gap).collect::<Vec<_>>()).map(|s| s.mean)
}

/// Ratios measured by the overhead sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverheadScaling {
    /// Mean describe time at twice the base column count over the base.
    pub r_cols: Option<f64>,
    /// Mean total synthesis time at ten times the base synthetic count over the base.
    pub r_synth: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub kind: String,
    pub rows: Vec<ScenarioResult>,
    pub config: serde_json::Value,
    pub aggregates: Vec<Aggregate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<OverheadScaling>,
}

impl EvalReport {
    pub fn new(kind: impl Into<String>, rows: Vec<ScenarioResult>, config: serde_json::Value) -> Self {
        let aggregates = aggregate(&rows);
        Self {
            kind: kind.into(),
            rows,
            config,
            aggregates,
            scaling: None,
        }
    }

    /// Concatenates reports of the same kind, recomputing aggregates.
    pub fn merge(kind: impl Into<String>, parts: Vec<EvalReport>, config: serde_json::Value) -> Self {
        let rows = parts.into_iter().flat_map(|p| p.rows).collect();
        Self::new(kind, rows, config)
    }

    pub fn mean_abs_gap(&self) -> Option<f64> {
        mean_abs_gap(&self.rows)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_HEADER).expect("in-memory write");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                r.job.clone(),
                r.model_kind.map(|m| m.to_string()).unwrap_or_default(),
                r.n_original.to_string(),
                r.n_synthetic.to_string(),
                r.epsilon.to_string(),
                r.trial_seed.to_string(),
                opt(r.mape_original),
                opt(r.mape_synthetic),
                r.describe_ms.to_string(),
                r.generate_ms.to_string(),
                r.fit_ms.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn read_csv(text: &str) -> Result<Vec<ScenarioResult>> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| crate::Error::Format(format!("bad number `{}`", &rec[i])))
            };
            let opt = |i: usize| -> Result<Option<f64>> { if rec[i].is_empty() { Ok(None) } else { num(i).map(Some) } };
            let int = |i: usize| -> Result<u64> {
                rec[i].parse().map_err(|_| crate::Error::Format(format!("bad integer `{}`", &rec[i])))
            };
            rows.push(ScenarioResult {
                job: rec[0].to_string(),
                model_kind: if rec[1].is_empty() { None } else { Some(rec[1].parse()?) },
                n_original: int(2)? as usize,
                n_synthetic: int(3)? as usize,
                epsilon: rec[4].parse()?,
                trial_seed: int(5)?,
                mape_original: opt(6)?,
                mape_synthetic: opt(7)?,
                describe_ms: num(8)?,
                generate_ms: num(9)?,
                fit_ms: num(10)?,
            });
        }
        Ok(rows)
    }

    pub fn sidecar_json(&self) -> String {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            kind: &'a str,
            config: &'a serde_json::Value,
            #[serde(skip_serializing_if = "Option::is_none")]
            mean_abs_gap: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            scaling: Option<OverheadScaling>,
            aggregates: &'a [Aggregate],
        }
        let mut s = serde_json::to_string_pretty(&Sidecar {
            kind: &self.kind,
            config: &self.config,
            mean_abs_gap: self.mean_abs_gap(),
            scaling: self.scaling,
            aggregates: &self.aggregates,
        })
        .expect("sidecar serializes");
        s.push('\n');
        s
    }

    /// `report.csv` → `report.config.json`.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("config.json")
    }

    /// Writes the CSV and its sidecar; neither file is left behind on failure.
    pub fn save(&self, csv_path: impl AsRef<Path>) -> Result<()> {
        let csv_path = csv_path.as_ref();
        let sidecar = Self::sidecar_path(csv_path);
        crate::io_util::write_atomic(&sidecar, self.sidecar_json().as_bytes())?;
        if let Err(e) = crate::io_util::write_atomic(csv_path, self.to_csv().as_bytes()) {
            let _ = std::fs::remove_file(&sidecar);
            return Err(e);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(job: &str, trial: u64, orig: f64, syn: Option<f64>) -> ScenarioResult {
        ScenarioResult {
            job: job.into(),
            model_kind: Some(ModelKind::Gbt),
            n_original: 10,
            n_synthetic: if syn.is_some() { 1000 } else { 0 },
            epsilon: Epsilon::Off,
            trial_seed: trial,
            mape_original: Some(orig),
            mape_synthetic: syn,
            describe_ms: 1.5,
            generate_ms: 0.25,
            fit_ms: 3.0,
        }
    }

    #[test]
    fn stats() {
        let s = Stat::of(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.std, s.count), (2.0, 1.0, 3));
        assert_eq!(Stat::of(&[4.0]).unwrap().std, 0.0);
        assert!(Stat::of(&[]).is_none());
    }

    #[test]
    fn grouping_and_gap() {
        let rows = vec![
            row("a", 1, 0.1, Some(0.15)),
            row("a", 2, 0.2, Some(0.1)),
            row("a", 1, 0.1, None),
            row("b", 1, 0.3, Some(0.3)),
        ];
        let aggs = aggregate(&rows);
        assert_eq!(aggs.len(), 3);
        assert_eq!(aggs[0].abs_gap.unwrap().count, 2);
        assert!((aggs[0].abs_gap.unwrap().mean - 0.075).abs() < 1e-15);
        assert!(aggs[1].mape_synthetic.is_none());
        assert!((mean_abs_gap(&rows).unwrap() - (0.05 + 0.1 + 0.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = vec![row("a", 1, 0.1, Some(0.15)), row("a", 1, 0.1, None)];
        rows[1].epsilon = Epsilon::On(0.1);
        rows[1].model_kind = None;
        let report = EvalReport::new("low-data", rows.clone(), serde_json::json!({}));
        let text = report.to_csv();
        assert!(text.starts_with(&REPORT_HEADER.join(",")));
        assert_eq!(EvalReport::read_csv(&text).unwrap(), rows);
    }
}
