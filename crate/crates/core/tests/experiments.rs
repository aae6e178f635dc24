mod common;

use common::{load_job, root};
use perfsynth::experiments::{
    aggregate, exp_low_data, exp_overhead, exp_synth_size, low_data_scenario, synth_size_scenario, EvalReport,
    ExperimentConfig, ExperimentKind, RunSettings, ScenarioResult, Stat, REPORT_HEADER,
};
use perfsynth::{
    load_csv, AttributeKind, AttributeSpec, Error, GbtParams, ModelKind, PrivacyParams, RuntimeModel, Schema,
    TraceDataset, Value,
};

fn quick() -> RunSettings {
    RunSettings {
        gbt: GbtParams {
            n_trees: 30,
            ..GbtParams::default()
        },
        threads: 1,
    }
}

#[test]
fn synth_size_row_counts() {
    let data = load_job("sort");
    let rep = exp_synth_size(&data, &[100, 1000, 10000], 3, &PrivacyParams::default(), 11, &quick()).unwrap();
    let baselines = rep.rows.iter().filter(|r| r.n_synthetic == 0).count();
    assert_eq!(baselines, 3 * 2);
    assert_eq!(rep.rows.len() - baselines, 3 * 3 * 2);
    for r in &rep.rows {
        assert!(r.mape_original.unwrap() >= 0.0);
        assert!(r.describe_ms >= 0.0 && r.generate_ms >= 0.0 && r.fit_ms >= 0.0);
        assert_eq!(r.mape_synthetic.is_none(), r.n_synthetic == 0);
    }
    let seeds: Vec<u64> = rep.config["trial_seeds"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(seeds, vec![11, 12, 13]);
}

fn constant_dataset() -> TraceDataset {
    let schema = Schema::new(vec![
        AttributeSpec::feature("machine_type", AttributeKind::Categorical),
        AttributeSpec::feature("instance_count", AttributeKind::NumericInteger),
        AttributeSpec::feature("data_size_mb", AttributeKind::NumericContinuous),
        AttributeSpec::target("runtime"),
    ])
    .unwrap()
    .with_ernest("data_size_mb", "instance_count")
    .unwrap();
    let row = vec![Value::Cat("m4.2xlarge".into()), Value::Num(4.0), Value::Num(2048.0), Value::Num(37.5)];
    TraceDataset::new("constant", schema, vec![row; 12]).unwrap()
}

#[test]
fn degenerate_configuration_gives_zero_error() {
    let rep = exp_synth_size(&constant_dataset(), &[50], 1, &PrivacyParams::default(), 0, &quick()).unwrap();
    // GBT is exact; Ernest's least-squares solve leaves rounding residue.
    for r in &rep.rows {
        let tol = if r.model_kind == Some(ModelKind::Gbt) { 0.0 } else { 1e-12 };
        assert!(r.mape_original.unwrap() <= tol, "{r:?}");
        if r.n_synthetic > 0 {
            assert!(r.mape_synthetic.unwrap() <= tol, "{r:?}");
        }
    }
}

#[test]
fn low_data_bounds() {
    let data = load_job("sort");
    let p = PrivacyParams::default();
    let err = exp_low_data(&data, &[200], 1000, 1, &p, 0, &quick()).unwrap_err();
    assert!(matches!(err, Error::Range(_)), "{err}");

    // 36 rows: 7 held out, so 29 is the whole train split.
    let rep = exp_low_data(&data, &[3, 29], 100, 1, &p, 0, &quick()).unwrap();
    assert_eq!(rep.rows.len(), 2 * 2);
    let sc = low_data_scenario(&data, 29, 100, &p, 0).unwrap();
    assert_eq!(sc.original.rows().len(), sc.train.len());
    assert!(rep.rows.iter().all(|r| r.mape_original.is_some() && r.mape_synthetic.is_some()));
}

#[test]
fn aggregates_match_independent_recomputation() {
    let data = load_job("grep");
    let rep = exp_low_data(&data, &[5, 10], 200, 4, &PrivacyParams::default(), 3, &quick()).unwrap();
    assert_eq!(rep.aggregates, aggregate(&rep.rows));
    for agg in &rep.aggregates {
        let xs: Vec<f64> = rep
            .rows
            .iter()
            .filter(|r| r.job == agg.job && r.model_kind == agg.model_kind && r.n_original == agg.n_original)
            .map(|r| r.mape_synthetic.unwrap())
            .collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let got = agg.mape_synthetic.unwrap();
        assert_eq!(got.count, 4);
        assert_eq!(got.mean, mean);
        assert_eq!(got.std, var.sqrt());
    }
    assert_eq!(Stat::of(&[]), None);
}

/// Rebuilding a scenario's synthetic set, persisting it, and refitting from the
/// file reproduces the reported MAPE bit for bit.
#[test]
fn refit_from_persisted_synthetic_csv_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = load_job("kmeans");
    let p = PrivacyParams::default();
    let settings = quick();
    let low = exp_low_data(&data, &[10], 300, 2, &p, 40, &settings).unwrap();
    let size = exp_synth_size(&data, &[250], 2, &p, 40, &settings).unwrap();
    let rows: Vec<&ScenarioResult> = low.rows.iter().chain(size.rows.iter().filter(|r| r.n_synthetic > 0)).collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let sc = if r.n_original == 10 {
            low_data_scenario(&data, 10, 300, &p, r.trial_seed).unwrap()
        } else {
            synth_size_scenario(&data, 250, &p, r.trial_seed).unwrap()
        };
        let path = dir.path().join(format!("syn-{}-{}.csv", r.trial_seed, r.n_synthetic));
        sc.synthetic.save_csv(&path).unwrap();
        let reloaded = load_csv(&path, data.schema()).unwrap();
        let kind = r.model_kind.unwrap();
        let model = RuntimeModel::fit(kind, &reloaded, &settings.gbt, r.trial_seed).unwrap();
        assert_eq!(model.evaluate(&sc.test).unwrap(), r.mape_synthetic.unwrap(), "{r:?}");
        if kind == ModelKind::Gbt {
            let RuntimeModel::Gbt(g) = model else { unreachable!() };
            assert!(g.rmse_non_increasing());
        }
    }
}

#[test]
fn reports_reproduce_except_timing() {
    let data = load_job("sgd");
    let p = PrivacyParams::default().with_epsilon(perfsynth::Epsilon::On(1.0));
    let a = exp_low_data(&data, &[5], 200, 3, &p, 9, &quick()).unwrap();
    let b = exp_low_data(&data, &[5], 200, 3, &p, 9, &RunSettings { threads: 3, ..quick() }).unwrap();
    let strip = |r: &EvalReport| r.rows.iter().map(ScenarioResult::without_timing).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn overhead_rows_and_ratios() {
    let rep = exp_overhead(&[300], &[4, 8], &[50, 500], 2, &PrivacyParams::default(), 1).unwrap();
    assert_eq!(rep.rows.len(), 2 * 2 * 2);
    assert!(rep.rows.iter().all(|r| r.model_kind.is_none() && r.mape_original.is_none() && r.fit_ms == 0.0));
    let s = rep.scaling.unwrap();
    assert!(s.r_cols.unwrap() > 0.0 && s.r_synth.unwrap() > 0.0);
    let none = exp_overhead(&[300], &[4, 5], &[50, 60], 1, &PrivacyParams::default(), 1).unwrap();
    assert_eq!(none.scaling.unwrap().r_cols, None);
}

#[test]
fn report_files_have_exact_header_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let rep = exp_low_data(&load_job("sort"), &[3], 50, 1, &PrivacyParams::default(), 0, &quick()).unwrap();
    let path = dir.path().join("out/report.csv");
    rep.save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), REPORT_HEADER.join(","));
    assert_eq!(EvalReport::read_csv(&text).unwrap(), rep.rows);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.config.json")).unwrap()).unwrap();
    assert_eq!(sidecar["kind"], "low-data");
    assert!(sidecar["config"]["schema_digest"].as_str().unwrap().len() == 64);
    assert!(sidecar["mean_abs_gap"].as_f64().is_some());
}

#[test]
fn shipped_configs_parse() {
    for (file, kind) in [
        ("low_data.json", ExperimentKind::LowData),
        ("synth_size.json", ExperimentKind::SynthSize),
        ("overhead.json", ExperimentKind::Overhead),
    ] {
        let cfg = ExperimentConfig::load(root().join("configs").join(file)).unwrap();
        if kind == ExperimentKind::Overhead {
            assert!(cfg.overhead.is_some());
        } else {
            assert_eq!(cfg.load_jobs().unwrap().len(), 5);
        }
    }
}
