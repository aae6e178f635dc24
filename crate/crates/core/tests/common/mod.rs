#![allow(dead_code)]

use std::path::PathBuf;

use perfsynth::{load_csv, AttributeKind, AttributeSpec, Schema, TraceDataset, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const JOBS: [&str; 5] = ["sort", "grep", "sgd", "kmeans", "pagerank"];

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn job_schema(job: &str) -> Schema {
    Schema::from_file(root().join(format!("data/schemas/{job}.schema.json"))).unwrap()
}

pub fn load_job(job: &str) -> TraceDataset {
    load_csv(root().join(format!("data/traces/{job}.csv")), &job_schema(job)).unwrap()
}

/// Mixed-kind dataset with a positive target in the last column.
pub fn mixed_dataset(seed: u64, n: usize, d: usize) -> TraceDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::new();
    for j in 0..d - 1 {
        let kind = match j % 3 {
            0 => AttributeKind::Categorical,
            1 => AttributeKind::NumericInteger,
            _ => AttributeKind::NumericContinuous,
        };
        specs.push(AttributeSpec::feature(format!("a{j}"), kind));
    }
    specs.push(AttributeSpec::target("runtime"));
    let schema = Schema::new(specs.clone()).unwrap();
    let rows = (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(0.0..1.0);
            specs
                .iter()
                .map(|s| match s.kind {
                    AttributeKind::Categorical => Value::Cat(if z + rng.gen_range(0.0..0.3) > 0.6 { "big" } else { "small" }.into()),
                    AttributeKind::NumericInteger => Value::Num((z * 10.0).round() + rng.gen_range(0..3) as f64),
                    AttributeKind::NumericContinuous if s.name == "runtime" => Value::Num(5.0 + 50.0 * z + rng.gen_range(0.0..2.0)),
                    AttributeKind::NumericContinuous => Value::Num(z * 3.0 - 1.0 + rng.gen_range(-0.1..0.1)),
                })
                .collect()
        })
        .collect();
    TraceDataset::new("mixed", schema, rows).unwrap()
}
