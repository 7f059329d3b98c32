use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chainlens_core::ingest::{
    generate_synthetic_dataset, serialize_labels, serialize_transactions, SyntheticSpec,
};
use chainlens_core::pipeline::{run_all, run_stage, PipelineConfig, PipelineError, Stage};
use clap::{Args, Parser, Subcommand};

/// Bitcoin address behavior classification pipeline.
#[derive(Parser)]
#[command(name = "chainlens", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse inputs, validate labels and write the train/test split.
    Ingest(StageArgs),
    /// Slice, compress and augment each labeled address's history.
    BuildGraphs(StageArgs),
    /// Pretrain the graph encoder on slice graphs.
    TrainGfn(StageArgs),
    /// Encode every slice graph.
    Embed(StageArgs),
    /// Train the sequence classifier on training addresses.
    TrainCls(StageArgs),
    /// Classify test addresses.
    Predict(StageArgs),
    /// Score predictions.
    Evaluate(StageArgs),
    /// Run every stage in order.
    All(StageArgs),
    /// Write a synthetic dataset and a matching configuration.
    Generate {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn load(args: &StageArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn generate(out_dir: &Path, per_class: usize, seed: u64) -> Result<(), PipelineError> {
    let ds = generate_synthetic_dataset(&SyntheticSpec::new(per_class, seed))?;
    std::fs::create_dir_all(out_dir).map_err(|source| PipelineError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    write(
        &out_dir.join("transactions.jsonl"),
        &serialize_transactions(&ds.transactions),
    )?;
    write(&out_dir.join("labels.jsonl"), &serialize_labels(&ds.labels))?;
    let mut cfg = PipelineConfig::new("transactions.jsonl", "labels.jsonl", "work");
    cfg.seed = seed;
    write(&out_dir.join("pipeline.toml"), &cfg.to_toml())?;
    println!(
        "wrote {} transactions and {} labels to {}",
        ds.transactions.len(),
        ds.labels.len(),
        out_dir.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let (stage, args) = match cli.command {
        Command::Generate {
            out_dir,
            per_class,
            seed,
        } => return generate(&out_dir, per_class, seed),
        Command::All(args) => {
            let cfg = load(&args)?;
            run_all(&cfg)?;
            println!("pipeline complete; artifacts in {}", cfg.work_dir.display());
            return Ok(());
        }
        Command::Ingest(a) => (Stage::Ingest, a),
        Command::BuildGraphs(a) => (Stage::BuildGraphs, a),
        Command::TrainGfn(a) => (Stage::TrainGfn, a),
        Command::Embed(a) => (Stage::Embed, a),
        Command::TrainCls(a) => (Stage::TrainCls, a),
        Command::Predict(a) => (Stage::Predict, a),
        Command::Evaluate(a) => (Stage::Evaluate, a),
    };
    let cfg = load(&args)?;
    run_stage(stage, &cfg)?;
    println!("{stage}: done");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
