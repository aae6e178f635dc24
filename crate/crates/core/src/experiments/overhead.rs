use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::report::{EvalReport, OverheadScaling, ScenarioResult, Stat};
use super::runners::{derive_seed, Stage};
use crate::describer::{describe, PrivacyParams};
use crate::error::{Error, Result};
use crate::generator::sample;
use crate::trace_io::{AttributeKind, AttributeSpec, Schema, TraceDataset, Value};

const MACHINES: [&str; 3] = ["c4.2xlarge", "m4.2xlarge", "r4.2xlarge"];

/// A trace-shaped dataset with `cols` attributes: a categorical machine type,
/// an integer scale-out, alternating integer/continuous job parameters driven
/// by a shared latent size, and a positive runtime target last.
pub fn overhead_corpus(rows: usize, cols: usize, seed: u64) -> Result<TraceDataset> {
    if rows == 0 {
        return Err(Error::Range("corpus needs at least one row".into()));
    }
    if cols < 3 {
        return Err(Error::Range(format!("corpus needs at least 3 columns, got {cols}")));
    }
    let mut specs = vec![
        AttributeSpec::feature("machine_type", AttributeKind::Categorical),
        AttributeSpec::feature("instance_count", AttributeKind::NumericInteger),
    ];
    for i in 0..cols - 3 {
        let kind = if i % 2 == 0 {
            AttributeKind::NumericInteger
        } else {
            AttributeKind::NumericContinuous
        };
        specs.push(AttributeSpec::feature(format!("param_{i}"), kind));
    }
    specs.push(AttributeSpec::target("runtime"));
    let schema = Schema::new(specs)?;
    let schema = if cols > 3 {
        schema.with_ernest("param_0", "instance_count")?
    } else {
        schema
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows)
        .map(|_| {
            let machine = rng.gen_range(0..MACHINES.len());
            let count = rng.gen_range(2..=12u32) as f64;
            let size: f64 = rng.gen_range(1.0..10.0);
            let mut row = vec![Value::Cat(MACHINES[machine].into()), Value::Num(count)];
            for i in 0..cols - 3 {
                let v = size * (i + 1) as f64 * rng.gen_range(0.9..1.1);
                row.push(Value::Num(if i % 2 == 0 { (v * 100.0).round() } else { v }));
            }
            let runtime = 20.0 + 60.0 * size / count * (1.0 + 0.2 * machine as f64) + 2.0 * count.ln() + rng.gen_range(0.0..1.0);
            row.push(Value::Num(runtime));
            row
        })
        .collect();
    TraceDataset::new(format!("overhead_r{rows}_c{cols}"), schema, data)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Times describe and generate over every `(rows, cols, synth)` triple,
/// serially, after one discarded warm-up per triple. Ratios are taken at the
/// largest row count: `r_cols` compares describe time at twice the smallest
/// column count with the smallest; `r_synth` compares describe+generate at ten
/// times the smallest synthetic count with the smallest (both at the smallest
/// column count). A ratio is absent when its comparison point is not in the sweep.
pub fn exp_overhead(
    row_counts: &[usize],
    column_counts: &[usize],
    synth_counts: &[usize],
    trials: usize,
    privacy: &PrivacyParams,
    base_seed: u64,
) -> Result<EvalReport> {
    if trials == 0 {
        return Err(Error::Range("at least one trial is required".into()));
    }
    if row_counts.is_empty() || column_counts.is_empty() || synth_counts.is_empty() {
        return Err(Error::Range("overhead sweep needs row, column and synthetic counts".into()));
    }
    if synth_counts.contains(&0) {
        return Err(Error::Range("synthetic counts must be positive".into()));
    }
    privacy.validate()?;
    let mut rows = Vec::new();
    for &r in row_counts {
        for &c in column_counts {
            let corpus = overhead_corpus(r, c, derive_seed(base_seed, Stage::Corpus, ((r as u64) << 16) | c as u64))?;
            for &s in synth_counts {
                let warm = describe(&corpus, privacy)?;
                sample(&warm, s, 0)?;
                for t in 0..trials as u64 {
                    let trial_seed = base_seed.wrapping_add(t);
                    let start = Instant::now();
                    let summary = describe(&corpus, &privacy.with_seed(derive_seed(trial_seed, Stage::Describe, 0)))?;
                    let describe_ms = millis(start);
                    let start = Instant::now();
                    sample(&summary, s, derive_seed(trial_seed, Stage::Generate, s as u64))?;
                    let generate_ms = millis(start);
                    rows.push(ScenarioResult {
                        job: corpus.name().to_string(),
                        model_kind: None,
                        n_original: r,
                        n_synthetic: s,
                        epsilon: privacy.epsilon,
                        trial_seed,
                        mape_original: None,
                        mape_synthetic: None,
                        describe_ms,
                        generate_ms,
                        fit_ms: 0.0,
                    });
                }
            }
        }
    }

    let ref_rows = *row_counts.iter().max().expect("non-empty");
    let c0 = *column_counts.iter().min().expect("non-empty");
    let s0 = *synth_counts.iter().min().expect("non-empty");
    let mean_of = |c: usize, s: Option<usize>, f: &dyn Fn(&ScenarioResult) -> f64| -> Option<f64> {
        let v: Vec<f64> = rows
            .iter()
            .filter(|x| x.n_original == ref_rows && x.job.ends_with(&format!("_c{c}")) && s.is_none_or(|s| x.n_synthetic == s))
            .map(f)
            .collect();
        Stat::of(&v).map(|st| st.mean)
    };
    let describe_only = |x: &ScenarioResult| x.describe_ms;
    let total = |x: &ScenarioResult| x.describe_ms + x.generate_ms;
    let r_cols = column_counts
        .contains(&(2 * c0))
        .then(|| Some(mean_of(2 * c0, None, &describe_only)? / mean_of(c0, None, &describe_only)?))
        .flatten();
    let r_synth = synth_counts
        .contains(&(10 * s0))
        .then(|| Some(mean_of(c0, Some(10 * s0), &total)? / mean_of(c0, Some(s0), &total)?))
        .flatten();

    let config = json!({
        "experiment": "overhead",
        "row_counts": row_counts,
        "column_counts": column_counts,
        "synth_counts": synth_counts,
        "trials": trials,
        "base_seed": base_seed,
        "privacy": privacy,
        "warm_up_per_configuration": true,
        "ratio_reference": {"rows": ref_rows, "cols": c0, "synth": s0},
        "seed_derivation": "corpus uses splitmix64(base_seed, corpus=4, rows<<16|cols); describe and generate use splitmix64(base_seed + trial, stage, index)",
    });
    let mut report = EvalReport::new("overhead", rows, config);
    report.scaling = Some(OverheadScaling { r_cols, r_synth });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let d = overhead_corpus(50, 5, 1).unwrap();
        assert_eq!((d.len(), d.schema().len()), (50, 5));
        assert!(d.targets().iter().all(|&y| y > 0.0));
        assert!(d.schema().ernest().is_some());
        assert!(overhead_corpus(3, 3, 1).unwrap().schema().ernest().is_none());
        assert!(overhead_corpus(3, 2, 1).is_err());
    }

    #[test]
    fn small_sweep_shape() {
        let p = PrivacyParams::default();
        let rep = exp_overhead(&[40], &[3, 6], &[10, 100], 2, &p, 5).unwrap();
        assert_eq!(rep.rows.len(), 2 * 2 * 2);
        assert!(rep.rows.iter().all(|r| r.describe_ms >= 0.0 && r.generate_ms >= 0.0));
        let sc = rep.scaling.unwrap();
        assert!(sc.r_cols.is_some() && sc.r_synth.is_some());
    }
}
