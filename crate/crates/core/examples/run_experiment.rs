//! Runs one experiment config and prints its aggregates.
//!
//! cargo run --release --example run_experiment -- low-data configs/low_data.json

use perfsynth::experiments::{ExperimentConfig, ExperimentKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let kind: ExperimentKind = args.get(1).ok_or("missing kind")?.parse()?;
    let cfg = ExperimentConfig::load(args.get(2).ok_or("missing config")?)?;
    let threads = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let t = std::time::Instant::now();
    let report = cfg.run(kind, threads)?;
    for a in &report.aggregates {
        println!(
            "{} {:?} n_orig={} n_syn={} orig={:.4} syn={:.4} gap={:.4} describe_ms={:.2} generate_ms={:.2}",
            a.job,
            a.model_kind,
            a.n_original,
            a.n_synthetic,
            a.mape_original.map_or(f64::NAN, |s| s.mean),
            a.mape_synthetic.map_or(f64::NAN, |s| s.mean),
            a.abs_gap.map_or(f64::NAN, |s| s.mean),
            a.describe_ms.mean,
            a.generate_ms.mean,
        );
    }
    println!("scaling={:?}", report.scaling);
    println!("mean_abs_gap={:?}", report.mean_abs_gap());
    println!("elapsed_s={:.1}", t.elapsed().as_secs_f64());
    Ok(())
}
