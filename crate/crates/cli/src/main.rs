use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperrobust::hwl::{hwl_distinguish_report, Verdict};
use hyperrobust::model::ModelParameters;
use hyperrobust::Hypergraph;
use hyperrobust_cli::config::PipelineConfig;
use hyperrobust_cli::error::{CliError, Result};
use hyperrobust_cli::records::{read_jsonl, write_file, write_jsonl};
use hyperrobust_cli::{bench, eval, pipeline};
use serde::Deserialize;

/// Hypergraph robustness datasets, surrogate training and evaluation.
#[derive(Debug, Parser)]
#[command(name = "hyperrobust", version)]
struct Cli {
    /// Worker threads for labeling and training (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Flat TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["static", "dynamic"])]
    attack: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Quadrature tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
}

impl Overrides {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(attack) = &self.attack {
            cfg.attack = attack.clone();
        }
        if let Some(alpha) = self.alpha {
            cfg.alpha = alpha;
        }
        if let Some(beta) = self.beta {
            cfg.beta = beta;
        }
        if self.epsilon.is_some() {
            cfg.epsilon = self.epsilon;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate and label train.jsonl and test.jsonl.
    Gen {
        #[command(flatten)]
        overrides: Overrides,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Relabel the structures of a sample file.
    Label {
        #[command(flatten)]
        overrides: Overrides,
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on a sample file.
    Train {
        #[command(flatten)]
        overrides: Overrides,
        input: PathBuf,
        /// Model file to write.
        #[arg(long)]
        out: PathBuf,
        /// Optional per-epoch history as JSONL.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Predict robustness for every sample in a file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        /// JSONL output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report mean absolute error against stored labels.
    Eval {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        /// Also re-run labeling and report its wall-clock time.
        #[arg(long)]
        time_labeling: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two hypergraphs with HWL refinement.
    Wl {
        /// JSON with `num_nodes` and `edges`; a sample line works too.
        first: PathBuf,
        second: PathBuf,
    },
    /// Time labeling against prediction.
    Bench {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        model: PathBuf,
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
struct Structure {
    num_nodes: usize,
    edges: Vec<Vec<usize>>,
}

fn read_structure(path: &Path) -> Result<Hypergraph> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let first_line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let s: Structure = serde_json::from_str(&text)
        .or_else(|_| serde_json::from_str(first_line))
        .map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            line: 1,
            source,
        })?;
    Ok(Hypergraph::from_edge_list(s.num_nodes, &s.edges)?)
}

fn read_model(path: &Path) -> Result<ModelParameters> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(ModelParameters::from_json(&text)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { overrides, out } => {
            let cfg = overrides.resolve()?;
            let data = pipeline::generate_dataset(&cfg)?;
            write_jsonl(&out.join("train.jsonl"), &data.train)?;
            write_jsonl(&out.join("test.jsonl"), &data.test)?;
            eprintln!("wrote {} train and {} test samples to {}", data.train.len(), data.test.len(), out.display());
        }
        Command::Label { overrides, input, out } => {
            let cfg = overrides.resolve()?;
            let records = read_jsonl(&input)?;
            let relabeled = pipeline::relabel(&records, &cfg.attack_spec()?, &cfg.quadrature()?)?;
            write_jsonl(&out, &relabeled)?;
        }
        Command::Train {
            overrides,
            input,
            out,
            history,
        } => {
            let cfg = overrides.resolve()?;
            let records = read_jsonl(&input)?;
            let outcome = pipeline::train_model(&records, &cfg)?;
            write_file(&out, outcome.params.to_json().as_bytes())?;
            if let Some(path) = history {
                let lines: String = outcome
                    .history
                    .iter()
                    .map(|r| serde_json::to_string(r).expect("history serializes") + "\n")
                    .collect();
                write_file(&path, lines.as_bytes())?;
            }
            let last = outcome.history.last().expect("at least one epoch");
            eprintln!("trained {} epochs, final loss {:.6e}", outcome.history.len(), last.loss);
        }
        Command::Predict { model, input, out } => {
            let params = read_model(&model)?;
            let records = read_jsonl(&input)?;
            let predictions = eval::predict_records(&params, &records)?;
            let text: String = predictions
                .iter()
                .zip(&records)
                .enumerate()
                .map(|(i, (p, r))| {
                    serde_json::json!({"index": i, "prediction": p, "label_r": r.label_r}).to_string() + "\n"
                })
                .collect();
            emit(out.as_deref(), &text)?;
        }
        Command::Eval {
            overrides,
            model,
            input,
            time_labeling,
            out,
        } => {
            let cfg = overrides.resolve()?;
            let quad = cfg.quadrature()?;
            let params = read_model(&model)?;
            let records = read_jsonl(&input)?;
            let report = eval::evaluate(&params, &records, time_labeling.then_some(&quad))?;
            emit(out.as_deref(), &pretty(&report))?;
        }
        Command::Wl { first, second } => {
            let (a, b) = (read_structure(&first)?, read_structure(&second)?);
            let report = hwl_distinguish_report(&a, &b);
            let verdict = match report.verdict {
                Verdict::NonIsomorphic => "non-isomorphic",
                Verdict::PossiblyIsomorphic => "possibly isomorphic",
            };
            println!("verdict: {verdict}");
            println!("iteration\tnodes_a\tedges_a\tnodes_b\tedges_b");
            for (k, [(na, ea), (nb, eb)]) in report.sizes.iter().enumerate() {
                println!("{k}\t{na}\t{ea}\t{nb}\t{eb}");
            }
        }
        Command::Bench {
            overrides,
            model,
            input,
            out,
        } => {
            let cfg = overrides.resolve()?;
            let params = read_model(&model)?;
            let records = read_jsonl(&input)?;
            let report = bench::bench(&params, &records, &cfg.quadrature()?)?;
            emit(out.as_deref(), &pretty(&report))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads.into()).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
