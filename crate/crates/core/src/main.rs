use clap::{Parser, Subcommand, ValueEnum};
use pipeforge::commands::{self, CommandError, MineArgs, RecommendArgs, TrainArgs};
use pipeforge::config::Config;
use pipeforge::generator::generate::Mode;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pipeforge", version, about = "Mine pipeline scripts, train a graph generator, recommend pipeline skeletons")]
struct Cli {
    /// Root for relative paths and default artifacts.
    #[arg(long, global = true, default_value = ".")]
    workdir: PathBuf,
    /// key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Greedy,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze scripts and build the pipeline-graph corpus and dataset index.
    Mine {
        scripts_dir: PathBuf,
        datasets_dir: PathBuf,
        /// JSON map from script id to dataset file name.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        #[arg(long)]
        vocabulary: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
    },
    /// Train the graph generator on a mined corpus.
    Train {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 15)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recommend pipeline skeletons for a CSV dataset.
    Recommend {
        dataset: PathBuf,
        #[arg(long)]
        target: Option<String>,
        /// Total time budget in seconds; skeletons get budget 0 without it.
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        registry: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        vocabulary: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
        mode: ModeArg,
        #[arg(long, default_value_t = ',')]
        delimiter: char,
        /// Write the skeleton JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the prepared matrix and manifest into this directory.
        #[arg(long)]
        prepare_dir: Option<PathBuf>,
    },
    /// Aggregate run and optimizer result files into tables and a report.
    Evaluate {
        results_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn delimiter(c: char) -> Result<u8, CommandError> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| CommandError::Input(format!("delimiter {c:?} is not ASCII")))
}

fn rooted(workdir: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() {
        workdir.join(p)
    } else {
        p
    }
}

fn load_config(cli: &Cli) -> Result<Config, CommandError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(&rooted(&cli.workdir, p.clone())),
        None => Ok(Config::default()),
    }
    .map_err(|e| CommandError::Input(e.to_string()))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let cfg = cfg.with_env().map_err(|e| CommandError::Input(e.to_string()))?;
    Ok(cfg.rooted(&cli.workdir))
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let cfg = load_config(&cli)?;
    let wd = cli.workdir.clone();
    match cli.command {
        Command::Mine {
            scripts_dir,
            datasets_dir,
            sidecar,
            vocabulary,
            out,
            delimiter: d,
        } => {
            let args = MineArgs {
                scripts_dir: rooted(&wd, scripts_dir),
                datasets_dir: rooted(&wd, datasets_dir),
                sidecar: sidecar.map(|p| rooted(&wd, p)),
                vocabulary: vocabulary.map(|p| rooted(&wd, p)),
                out: out.map(|p| rooted(&wd, p)).unwrap_or_else(|| cfg.corpus_dir.clone()),
                delimiter: delimiter(d)?,
            };
            let s = commands::cmd_mine(&args, &cfg)?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            let r = &s.report;
            println!(
                "scripts {} -> graphs {} (no estimator {}, too large {}, unknown dataset {}); \
                 reduction nodes {:.4} edges {:.4}; datasets indexed {}",
                r.scripts_in,
                r.graphs_out,
                r.rejected_no_estimator,
                r.rejected_too_large,
                r.unknown_dataset,
                r.reduction_rate_nodes,
                r.reduction_rate_edges,
                s.indexed_datasets
            );
        }
        Command::Train { corpus, epochs, lr, out } => {
            let args = TrainArgs {
                corpus: corpus.map(|p| rooted(&wd, p)).unwrap_or_else(|| cfg.corpus_dir.clone()),
                epochs,
                learning_rate: lr,
                out: out.map(|p| rooted(&wd, p)).unwrap_or_else(|| cfg.model_file.clone()),
            };
            let (_, log) = commands::cmd_train(&args, &cfg)?;
            for e in &log {
                eprintln!("epoch {:>3}  nll {:.6}  {:.2}s", e.epoch, e.mean_nll, e.seconds);
            }
            if let Some(last) = log.last() {
                println!("final mean NLL {:.6}", last.mean_nll);
            }
        }
        Command::Recommend {
            dataset,
            target,
            budget,
            k,
            registry,
            model,
            index,
            vocabulary,
            mode,
            delimiter: d,
            out,
            prepare_dir,
        } => {
            let args = RecommendArgs {
                dataset: rooted(&wd, dataset),
                target,
                budget,
                k: k.unwrap_or(cfg.k),
                registry: registry.map(|p| rooted(&wd, p)).unwrap_or_else(|| cfg.registry_file.clone()),
                model: model.map(|p| rooted(&wd, p)).unwrap_or_else(|| cfg.model_file.clone()),
                index: index.map(|p| rooted(&wd, p)).unwrap_or_else(|| cfg.index_file.clone()),
                vocabulary: vocabulary
                    .map(|p| rooted(&wd, p))
                    .unwrap_or_else(|| cfg.corpus_dir.join(commands::VOCABULARY_FILE)),
                mode: match mode {
                    ModeArg::Greedy => Mode::Greedy,
                    ModeArg::Sampled => Mode::Sampled(cfg.seed),
                },
                delimiter: delimiter(d)?,
                prepare_dir: prepare_dir.map(|p| rooted(&wd, p)),
            };
            let rec = commands::cmd_recommend(&args, &cfg)?;
            eprintln!(
                "seeded from {} (neighbours: {}) in {:.3}s",
                rec.seed_dataset,
                rec.neighbors
                    .iter()
                    .map(|(n, d)| format!("{n} {d:.4}"))
                    .collect::<Vec<_>>()
                    .join(", "),
                rec.elapsed_seconds
            );
            let json = rec.document.to_json();
            match out {
                Some(p) => {
                    let p = rooted(&wd, p);
                    std::fs::write(&p, json + "\n").map_err(|e| CommandError::Input(format!("{}: {e}", p.display())))?
                }
                None => println!("{json}"),
            }
        }
        Command::Evaluate { results_dir, out } => {
            let dir = rooted(&wd, results_dir);
            let out = out.map(|p| rooted(&wd, p)).unwrap_or_else(|| wd.join("evaluation"));
            let report = commands::cmd_evaluate(&dir, &out)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
