//! Regenerates the stand-in trace files under `data/traces/`.
//!
//! The public trace repository is not reachable from the build environment,
//! so the shipped files are synthetic stand-ins with the same jobs, row
//! counts, and column layout. Runtimes follow a per-job scale-out law with
//! machine-type speed factors, a memory-spill penalty, and multiplicative
//! log-normal noise.
//!
//!     cargo run -p perfsynth --example vendor_traces -- data/traces

use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const MACHINE_TYPES: [(&str, f64, f64); 3] = [
    // name, relative speed, memory per node (GB)
    ("c4.2xlarge", 1.10, 15.0),
    ("m4.2xlarge", 1.00, 32.0),
    ("r4.2xlarge", 0.95, 61.0),
];
const SCALE_OUTS: [u32; 6] = [2, 4, 6, 8, 10, 12];

struct Law {
    fixed: f64,
    per_mb: f64,
    coord: f64,
    per_node: f64,
}

fn runtime(law: &Law, work_mb: f64, data_mb: f64, machines: u32, mtype: usize, rng: &mut ChaCha8Rng) -> f64 {
    let (_, speed, mem_gb) = MACHINE_TYPES[mtype];
    let m = machines as f64;
    let mut t = law.fixed + law.per_mb * work_mb / (m * speed) + law.coord * m.ln() + law.per_node * m;
    let per_node_gb = data_mb / 1024.0 / m;
    if per_node_gb > 0.5 * mem_gb {
        t *= 1.0 + 0.6 * (per_node_gb / (0.5 * mem_gb) - 1.0).min(1.5);
    }
    let noise: f64 = Normal::new(0.0, 0.04).unwrap().sample(rng);
    t * noise.exp()
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn fmt(v: f64, digits: usize) -> String {
    format!("{v:.digits$}")
}

fn finish(mut rows: Vec<Vec<String>>, keep: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    rows.shuffle(rng);
    rows.truncate(keep);
    rows
}

fn sort(rng: &mut ChaCha8Rng) -> Table {
    let law = Law { fixed: 30.0, per_mb: 0.012, coord: 5.0, per_node: 1.0 };
    let mut rows = Vec::new();
    for (t, (name, ..)) in MACHINE_TYPES.iter().enumerate() {
        for &m in &SCALE_OUTS {
            for size in [10_000.0, 20_000.0] {
                let r = runtime(&law, size, size, m, t, rng);
                rows.push(vec![name.to_string(), m.to_string(), fmt(size, 1), fmt(r, 3), fmt(r + 45.0, 3)]);
            }
        }
    }
    Table {
        header: vec!["machine_type", "instance_count", "data_size_mb", "runtime", "gross_runtime"],
        rows: finish(rows, 36, rng),
    }
}

fn grep(rng: &mut ChaCha8Rng) -> Table {
    let law = Law { fixed: 22.0, per_mb: 0.004, coord: 4.0, per_node: 0.8 };
    let mut rows = Vec::new();
    for (t, (name, ..)) in MACHINE_TYPES.iter().enumerate() {
        for &m in &SCALE_OUTS {
            for size in [5_000.0, 10_000.0, 15_000.0, 20_000.0] {
                for p in [0.001f64, 0.01, 0.1] {
                    let work = size * (1.0 + 4.0 * p);
                    let r = runtime(&law, work, size, m, t, rng);
                    rows.push(vec![
                        name.to_string(),
                        m.to_string(),
                        fmt(size, 1),
                        p.to_string(),
                        fmt(r, 3),
                        fmt(r + 45.0, 3),
                    ]);
                }
            }
        }
    }
    Table {
        header: vec!["machine_type", "instance_count", "data_size_mb", "p_occurrence", "runtime", "gross_runtime"],
        rows: finish(rows, 150, rng),
    }
}

fn sgd(rng: &mut ChaCha8Rng) -> Table {
    let law = Law { fixed: 35.0, per_mb: 0.0015, coord: 6.0, per_node: 1.2 };
    let mut rows = Vec::new();
    for (t, (name, ..)) in MACHINE_TYPES.iter().enumerate() {
        for &m in &SCALE_OUTS {
            for obs in [2_000_000u64, 5_000_000, 10_000_000] {
                for features in [50u64, 100] {
                    for iterations in [20u64, 100] {
                        let size = (obs * features * 8) as f64 / 1e6;
                        let work = size * (1.0 + iterations as f64 / 25.0);
                        let r = runtime(&law, work, size, m, t, rng);
                        rows.push(vec![
                            name.to_string(),
                            m.to_string(),
                            obs.to_string(),
                            features.to_string(),
                            iterations.to_string(),
                            fmt(size, 1),
                            fmt(r, 3),
                            fmt(r + 45.0, 3),
                        ]);
                    }
                }
            }
        }
    }
    Table {
        header: vec![
            "machine_type",
            "instance_count",
            "observations",
            "features",
            "iterations",
            "data_size_mb",
            "runtime",
            "gross_runtime",
        ],
        rows: finish(rows, 140, rng),
    }
}

fn kmeans(rng: &mut ChaCha8Rng) -> Table {
    let law = Law { fixed: 40.0, per_mb: 0.0035, coord: 7.0, per_node: 1.5 };
    let mut rows = Vec::new();
    for (t, (name, ..)) in MACHINE_TYPES.iter().enumerate() {
        for &m in &SCALE_OUTS {
            for obs in [5_000_000u64, 10_000_000, 20_000_000] {
                for features in [10u64, 50] {
                    for k in [3u64, 6, 9] {
                        let size = (obs * features * 8) as f64 / 1e6;
                        let work = size * (1.0 + k as f64 / 3.0);
                        let r = runtime(&law, work, size, m, t, rng);
                        rows.push(vec![
                            name.to_string(),
                            m.to_string(),
                            obs.to_string(),
                            features.to_string(),
                            k.to_string(),
                            fmt(size, 1),
                            fmt(r, 3),
                            fmt(r + 45.0, 3),
                        ]);
                    }
                }
            }
        }
    }
    Table {
        header: vec![
            "machine_type",
            "instance_count",
            "observations",
            "features",
            "k",
            "data_size_mb",
            "runtime",
            "gross_runtime",
        ],
        rows: finish(rows, 140, rng),
    }
}

fn pagerank(rng: &mut ChaCha8Rng) -> Table {
    let law = Law { fixed: 30.0, per_mb: 0.02, coord: 9.0, per_node: 2.0 };
    let mut rows = Vec::new();
    for (t, (name, ..)) in MACHINE_TYPES.iter().enumerate() {
        for &m in &SCALE_OUTS {
            for pages in [500_000u64, 1_000_000, 2_000_000, 4_000_000] {
                for convergence in [0.01f64, 0.001, 0.0001, 0.00001] {
                    let links = pages * rng.gen_range(18..22);
                    let size = links as f64 * 16.0 / 1e6;
                    let work = size * (-convergence.log10()) * 2.5;
                    let r = runtime(&law, work, size * 6.0, m, t, rng);
                    rows.push(vec![
                        name.to_string(),
                        m.to_string(),
                        links.to_string(),
                        pages.to_string(),
                        convergence.to_string(),
                        fmt(size, 1),
                        fmt(r, 3),
                        fmt(r + 45.0, 3),
                    ]);
                }
            }
        }
    }
    Table {
        header: vec![
            "machine_type",
            "instance_count",
            "links",
            "pages",
            "convergence_criterion",
            "data_size_mb",
            "runtime",
            "gross_runtime",
        ],
        rows: finish(rows, 270, rng),
    }
}

fn main() {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "data/traces".into()).into();
    fs::create_dir_all(&out).expect("create output directory");
    let jobs: [(&str, fn(&mut ChaCha8Rng) -> Table); 5] =
        [("sort", sort), ("grep", grep), ("sgd", sgd), ("kmeans", kmeans), ("pagerank", pagerank)];
    for (i, (name, make)) in jobs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_100 + i as u64);
        let table = make(&mut rng);
        let mut text = table.header.join(",");
        text.push('\n');
        for row in &table.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let path = out.join(format!("{name}.csv"));
        fs::write(&path, text).expect("write trace file");
        println!("{} rows -> {}", table.rows.len(), path.display());
    }
}
