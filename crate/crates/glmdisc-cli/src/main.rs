use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use glmdisc::baselines::{fit_allr, fit_mdlp_chi2_pipeline, ChiMergeConfig, MdlpConfig};
use glmdisc::data::{load_csv, SchemaConfig, SplitSpec};
use glmdisc::evaluation::{
    run_benchmark, simulate, AllrMethod, BenchMethod, GlmdiscMethod, MdlpChi2Method, Scenario,
    SimSpec,
};
use glmdisc::model::ScorecardModel;
use glmdisc::quantization::FeatureQuantizer;
use glmdisc::trainer::{train, LevelBudget, TrainConfig};

#[derive(Parser)]
#[command(
    name = "glmdisc",
    version,
    about = "Learn feature quantizations jointly with a logistic scorecard"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a CSV dataset and save it as JSON
    Fit(FitArgs),
    /// Score a CSV dataset with a saved model
    Predict(PredictArgs),
    /// Render a saved model as a human-readable scorecard
    ExportScorecard(ExportArgs),
    /// Generate a synthetic dataset plus its schema file
    Simulate(SimulateArgs),
    /// Compare methods on a held-out split of one dataset
    Benchmark(BenchmarkArgs),
    /// Dump a fitted model's per-epoch selection history as CSV
    Trace(TraceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Glmdisc,
    Allr,
    MdlpChi2,
}

#[derive(Args)]
struct FitArgs {
    /// Training CSV; must contain the target column
    #[arg(long)]
    data: PathBuf,
    /// Schema JSON: {"target": "...", "features": {"name": "continuous"|"categorical"}}
    #[arg(long)]
    schema: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Glmdisc)]
    method: MethodArg,
    /// Maximum levels per quantized feature (glmdisc only)
    #[arg(long, default_value_t = 10)]
    m_max: usize,
    /// Training epochs (glmdisc only)
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    /// RMSProp learning rate (glmdisc only)
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    /// Minibatch size (glmdisc only)
    #[arg(long, default_value_t = 128)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model file
    #[arg(long)]
    model: PathBuf,
    /// CSV to score; must contain the target column (its values may all be 0)
    #[arg(long)]
    data: PathBuf,
    /// Output CSV of row probabilities
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// Saved model file
    #[arg(long)]
    model: PathBuf,
    /// Output text file; prints to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    A,
    B,
    C,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, ignore_case = true)]
    scenario: ScenarioArg,
    /// Number of rows
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; the schema lands next to it with extension .schema.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Dataset CSV; must contain the target column
    #[arg(long)]
    data: PathBuf,
    /// Schema JSON for the dataset
    #[arg(long)]
    schema: PathBuf,
    /// Comma-separated list from {glmdisc, allr, mdlp-chi2}
    #[arg(long, default_value = "glmdisc,allr,mdlp-chi2")]
    methods: String,
    /// Held-out fraction
    #[arg(long, default_value_t = 0.3)]
    test_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV report (method,config,gini,gini_sd)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TraceArgs {
    /// Saved model file holding a training history
    #[arg(long)]
    model_history: PathBuf,
    /// Output CSV
    #[arg(long)]
    out: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::ExportScorecard(args) => cmd_export_scorecard(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
        Command::Trace(args) => cmd_trace(&args),
    }
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let schema_cfg = SchemaConfig::load(&args.schema)
        .with_context(|| format!("reading schema {}", args.schema.display()))?;
    let ds = load_csv(&args.data, &schema_cfg)
        .with_context(|| format!("reading data {}", args.data.display()))?;
    let start = Instant::now();
    let model = match args.method {
        MethodArg::Glmdisc => {
            let cfg = TrainConfig {
                m_max: LevelBudget::Uniform(args.m_max),
                epochs: args.epochs,
                learning_rate: args.lr,
                batch_size: args.batch,
                seed: args.seed,
                ..TrainConfig::default()
            };
            let fitted = train(&ds, &cfg)?;
            ScorecardModel::from_glmdisc(&fitted, &cfg, ds.n())
        }
        MethodArg::Allr => {
            let fit = fit_allr(&ds)?;
            ScorecardModel::from_allr(&fit, ds.schema(), ds.n())
        }
        MethodArg::MdlpChi2 => {
            let (q, fit) =
                fit_mdlp_chi2_pipeline(&ds, &MdlpConfig::default(), &ChiMergeConfig::default())?;
            ScorecardModel::from_mdlp_chi2(&q, &fit, ds.schema(), ds.n())
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    model
        .save(&args.out)
        .with_context(|| format!("writing model {}", args.out.display()))?;
    println!(
        "fit {} on {} rows, {} features in {elapsed:.2}s",
        model.method().as_str(),
        ds.n(),
        ds.d()
    );
    println!("bic: {:.6}", model.bic());
    for line in describe_features(&model)? {
        println!("{line}");
    }
    println!("model written to {}", args.out.display());
    Ok(())
}

fn describe_features(model: &ScorecardModel) -> Result<Vec<String>> {
    let schema = model.schema();
    let mut lines = Vec::with_capacity(schema.d());
    match model.quantization()? {
        None => {
            for name in schema.feature_names() {
                lines.push(format!("{name}: raw"));
            }
        }
        Some(q) => {
            for j in 0..schema.d() {
                let name = schema.feature_name(j);
                match q.feature(j) {
                    FeatureQuantizer::Continuous(cq) => {
                        let cuts: Vec<String> =
                            cq.cutpoints().iter().map(|c| format!("{c:.6}")).collect();
                        lines.push(format!(
                            "{name}: m_hat={} cutpoints=[{}]",
                            cq.num_levels(),
                            cuts.join(", ")
                        ));
                    }
                    FeatureQuantizer::Categorical(gq) => {
                        let groups: Vec<String> = schema
                            .levels(j)
                            .iter()
                            .zip(gq.group_of())
                            .map(|(label, g)| format!("{label}:{g}"))
                            .collect();
                        lines.push(format!(
                            "{name}: m_hat={} groups=[{}]",
                            gq.num_groups(),
                            groups.join(", ")
                        ));
                    }
                }
            }
        }
    }
    Ok(lines)
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = ScorecardModel::load(&args.model)
        .with_context(|| format!("reading model {}", args.model.display()))?;
    let schema_cfg = SchemaConfig {
        target: model.schema().target_name().to_string(),
        features: model
            .schema()
            .feature_names()
            .iter()
            .cloned()
            .zip(model.schema().kinds().iter().copied())
            .collect(),
    };
    let ds = load_csv(&args.data, &schema_cfg)
        .with_context(|| format!("reading data {}", args.data.display()))?;
    let scores = model.predict(&ds)?;
    let mut text = String::from("p\n");
    for p in &scores {
        text.push_str(&format!("{p}\n"));
    }
    fs::write(&args.out, text)
        .with_context(|| format!("writing predictions {}", args.out.display()))?;
    println!("wrote {} probabilities to {}", scores.len(), args.out.display());
    Ok(())
}

fn cmd_export_scorecard(args: &ExportArgs) -> Result<()> {
    let model = ScorecardModel::load(&args.model)
        .with_context(|| format!("reading model {}", args.model.display()))?;
    let text = model.scorecard_text()?;
    match &args.out {
        Some(path) => {
            fs::write(path, &text)
                .with_context(|| format!("writing scorecard {}", path.display()))?;
            println!("scorecard written to {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let scenario = match args.scenario {
        ScenarioArg::A => Scenario::A,
        ScenarioArg::B => Scenario::B,
        ScenarioArg::C => Scenario::C,
    };
    let ds = simulate(&SimSpec { n: args.n, scenario, seed: args.seed });
    ds.save_csv(&args.out)
        .with_context(|| format!("writing data {}", args.out.display()))?;
    let schema_path = args.out.with_extension("schema.json");
    ds.schema_config()
        .save(&schema_path)
        .with_context(|| format!("writing schema {}", schema_path.display()))?;
    println!(
        "wrote {} rows (scenario {scenario}, seed {}) to {} with schema {}",
        ds.n(),
        args.seed,
        args.out.display(),
        schema_path.display()
    );
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let schema_cfg = SchemaConfig::load(&args.schema)
        .with_context(|| format!("reading schema {}", args.schema.display()))?;
    let ds = load_csv(&args.data, &schema_cfg)
        .with_context(|| format!("reading data {}", args.data.display()))?;
    let glmdisc_method = GlmdiscMethod(TrainConfig { seed: args.seed, ..TrainConfig::default() });
    let mdlp_method = MdlpChi2Method::default();
    let mut methods: Vec<&dyn BenchMethod> = Vec::new();
    for name in args.methods.split(',') {
        match name.trim() {
            "glmdisc" => methods.push(&glmdisc_method),
            "allr" => methods.push(&AllrMethod),
            "mdlp-chi2" => methods.push(&mdlp_method),
            other => bail!("unknown method {other:?}; expected glmdisc, allr or mdlp-chi2"),
        }
    }
    if methods.is_empty() {
        bail!("no methods requested");
    }
    let split_spec = SplitSpec { test_fraction: args.test_frac, seed: args.seed };
    let report = run_benchmark(&ds, &methods, &split_spec, 100)?;
    println!(
        "n_train={} n_test={} test_frac={} seed={} bootstrap_B={}",
        report.n_train, report.n_test, split_spec.test_fraction, split_spec.seed, report.bootstrap_b
    );
    println!("{:<12} {:>8} {:>8}  config", "method", "gini", "sd");
    for row in &report.rows {
        println!(
            "{:<12} {:>8.4} {:>8.4}  {}",
            row.method, row.gini, row.gini_sd, row.config
        );
    }
    write_report_csv(&args.out, &report.rows)
        .with_context(|| format!("writing report {}", args.out.display()))?;
    println!("report written to {}", args.out.display());
    Ok(())
}

fn write_report_csv(path: &Path, rows: &[glmdisc::evaluation::BenchmarkRow]) -> Result<()> {
    let mut text = String::from("method,config,gini,gini_sd\n");
    for row in rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            row.method,
            row.config.replace(',', ";"),
            row.gini,
            row.gini_sd
        ));
    }
    fs::write(path, text)?;
    Ok(())
}

fn cmd_trace(args: &TraceArgs) -> Result<()> {
    let model = ScorecardModel::load(&args.model_history)
        .with_context(|| format!("reading model {}", args.model_history.display()))?;
    let csv = model.trace_csv()?;
    fs::write(&args.out, &csv)
        .with_context(|| format!("writing trace {}", args.out.display()))?;
    let history = model
        .history()
        .context("model has no training history")?;
    let mut best = history.first().context("model history is empty")?;
    for rec in history {
        if rec.bic < best.bic {
            best = rec;
        }
    }
    println!("trace written to {} ({} epochs)", args.out.display(), history.len());
    println!("best epoch by bic: {} (bic={:.6})", best.epoch, best.bic);
    Ok(())
}
