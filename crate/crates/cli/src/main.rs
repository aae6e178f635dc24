//! `perfsynth`: describe traces, generate synthetic rows, fit runtime models,
//! and run the evaluation experiments.
//!
//! Exit status: 0 on success, 1 when processing fails, 2 on usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use perfsynth::experiments::{EvalReport, ExperimentConfig, ExperimentKind};
use perfsynth::{describe, load_csv, DataSummary, Epsilon, GbtParams, ModelKind, PrivacyParams, RuntimeModel, Schema};

#[derive(Parser)]
#[command(name = "perfsynth", version, about = "Differentially-private synthetic runtime traces and runtime models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a data summary from a trace CSV.
    Describe {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Privacy budget, or `off` for exact statistics.
        #[arg(long, default_value = "off")]
        epsilon: Epsilon,
        /// Maximum number of parents per attribute.
        #[arg(long, default_value_t = perfsynth::describer::DEFAULT_DEGREE)]
        degree: usize,
        /// Histogram bins per numeric attribute.
        #[arg(long, default_value_t = perfsynth::describer::DEFAULT_BINS)]
        bins: usize,
        #[arg(long, env = "PERFSYNTH_SEED")]
        seed: u64,
    },
    /// Sample synthetic rows from a data summary.
    Generate {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        rows: u64,
        #[arg(long, env = "PERFSYNTH_SEED")]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit a runtime model on one CSV and report its MAPE on another.
    #[command(alias = "fit-eval")]
    Fit {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = GbtParams::default().n_trees)]
        trees: usize,
        #[arg(long, default_value_t = GbtParams::default().learning_rate)]
        learning_rate: f64,
        #[arg(long, default_value_t = GbtParams::default().max_depth)]
        max_depth: usize,
        #[arg(long, default_value_t = GbtParams::default().min_samples_leaf)]
        min_samples_leaf: usize,
        #[arg(long, env = "PERFSYNTH_SEED")]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Run an evaluation experiment and write its report CSV plus sidecar.
    Experiment {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Worker threads across trials (timing runs stay serial).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Ernest,
    Gbt,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Ernest => ModelKind::Ernest,
            ModelArg::Gbt => ModelKind::Gbt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    SynthSize,
    LowData,
    Overhead,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::SynthSize => ExperimentKind::SynthSize,
            KindArg::LowData => ExperimentKind::LowData,
            KindArg::Overhead => ExperimentKind::Overhead,
        }
    }
}

/// A failure tied to the input it came from.
struct Failure {
    context: String,
    error: perfsynth::Error,
}

trait Context<T> {
    fn at(self, path: &Path) -> Result<T, Failure>;
}

impl<T> Context<T> for perfsynth::Result<T> {
    fn at(self, path: &Path) -> Result<T, Failure> {
        self.map_err(|error| Failure {
            context: path.display().to_string(),
            error,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}: {}", f.context, f.error);
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Describe {
            input,
            schema,
            output,
            epsilon,
            degree,
            bins,
            seed,
        } => {
            let privacy = PrivacyParams::new(epsilon, degree, bins, seed).at(Path::new("arguments"))?;
            let schema = Schema::from_file(&schema).at(&schema)?;
            let data = load_csv(&input, &schema).at(&input)?;
            let summary = describe(&data, &privacy).at(&input)?;
            summary.save(&output).at(&output)?;
            println!("d={}", summary.d);
            println!("n_rows={}", summary.n_rows);
            println!("epsilon={}", summary.privacy.epsilon);
            println!("degree_k={}", summary.privacy.degree_k);
            println!("bins={}", summary.privacy.bins);
            println!("seed={}", summary.privacy.seed);
            println!("output={}", output.display());
        }
        Command::Generate {
            summary,
            rows,
            seed,
            output,
        } => {
            let loaded = DataSummary::load(&summary).at(&summary)?;
            let data = perfsynth::sample(&loaded, rows as usize, seed).at(&summary)?;
            data.save_csv(&output).at(&output)?;
            println!("rows={}", data.len());
            println!("seed={seed}");
            println!("output={}", output.display());
        }
        Command::Fit {
            train,
            test,
            schema,
            model,
            trees,
            learning_rate,
            max_depth,
            min_samples_leaf,
            seed,
            output,
        } => {
            let gbt = GbtParams {
                n_trees: trees,
                learning_rate,
                max_depth,
                min_samples_leaf,
            };
            let schema = Schema::from_file(&schema).at(&schema)?;
            let train_data = load_csv(&train, &schema).at(&train)?;
            let test_data = load_csv(&test, &schema).at(&test)?;
            let fitted = RuntimeModel::fit(model.into(), &train_data, &gbt, seed).at(&train)?;
            let mape = fitted.evaluate(&test_data).at(&test)?;
            fitted.save(&output).at(&output)?;
            println!("model={}", fitted.kind());
            println!("n_train={}", train_data.len());
            println!("n_test={}", test_data.len());
            println!("output={}", output.display());
            println!("mape={mape}");
        }
        Command::Experiment {
            kind,
            config,
            output,
            jobs,
        } => {
            let kind = ExperimentKind::from(kind);
            let cfg = ExperimentConfig::load(&config).at(&config)?;
            let report = cfg.run(kind, jobs as usize).at(&config)?;
            report.save(&output).at(&output)?;
            println!("kind={kind}");
            println!("rows={}", report.rows.len());
            println!("output={}", output.display());
            println!("sidecar={}", EvalReport::sidecar_path(&output).display());
            if let Some(s) = report.scaling {
                if let Some(r) = s.r_cols {
                    println!("r_cols={r}");
                }
                if let Some(r) = s.r_synth {
                    println!("r_synth={r}");
                }
            }
            if let Some(gap) = report.mean_abs_gap() {
                println!("mean_abs_gap={gap}");
            }
        }
    }
    Ok(())
}
