//! The end-to-end commands behind the CLI: mine, train, recommend, evaluate.

use crate::config::Config;
use crate::filter::{self, FilterOptions, FilterReport, NodeVocabulary};
use crate::generator::generate::{generate, GenerateError, GenerateOptions, Mode};
use crate::generator::io::{quantize, read_model, write_model};
use crate::generator::{canonicalize_trace, train, EpochLog, GeneratorModel, TrainConfig, TrainError};
use crate::metrics::{self, MetricKind, RankedRun, RunRecord};
use crate::pipeline::{read_jsonl, write_jsonl, PipelineGraph};
use crate::prep::{detect_task, plan_budget, prepare_dataset, PreparedDataset, Task};
use crate::profile::{embed_csv_table, read_index, write_index, EmbeddingIndex, ProfileConfig};
use crate::script::{mine_sources, read_scripts, CodeGraph};
use crate::skeleton::{
    dedupe_rank, estimator_task, to_skeletons, validate_against, CapabilityRegistry, PipelineSkeleton,
    SkeletonDocument, Validated,
};
use crate::table::read_csv;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

pub const CODE_GRAPHS_FILE: &str = "code_graphs.jsonl";
pub const PIPELINE_GRAPHS_FILE: &str = "pipeline_graphs.jsonl";
pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const INDEX_FILE: &str = "index.pfix";
pub const REPORT_FILE: &str = "filter_report.json";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Diverged(String),
    #[error("{0}")]
    NoRecommendation(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Input(_) => 2,
            CommandError::Diverged(_) => 3,
            CommandError::NoRecommendation(_) => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CommandError>;

fn input(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CommandError {
    CommandError::Input(format!("{context}: {e}"))
}

fn require_dir(p: &Path) -> Result<()> {
    if p.is_dir() {
        Ok(())
    } else {
        Err(CommandError::Input(format!("not a directory: {}", p.display())))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| input(dir.display(), e))?;
    }
    std::fs::write(path, bytes).map_err(|e| input(path.display(), e))
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| input(dir.display(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")))
        .collect();
    out.sort();
    Ok(out)
}

pub fn load_vocabulary(path: &Path) -> Result<NodeVocabulary> {
    let text = std::fs::read_to_string(path).map_err(|e| input(path.display(), e))?;
    NodeVocabulary::from_json(&text).map_err(|e| input(path.display(), e))
}

pub fn load_graphs(path: &Path) -> Result<Vec<PipelineGraph>> {
    let f = File::open(path).map_err(|e| input(path.display(), e))?;
    read_jsonl(BufReader::new(f)).map_err(|e| input(path.display(), e))
}

pub fn load_index(path: &Path) -> Result<EmbeddingIndex> {
    let f = File::open(path).map_err(|e| input(path.display(), e))?;
    read_index(BufReader::new(f)).map_err(|e| input(path.display(), e))
}

pub fn load_model(path: &Path) -> Result<GeneratorModel> {
    let f = File::open(path).map_err(|e| input(path.display(), e))?;
    read_model(BufReader::new(f)).map_err(|e| input(path.display(), e))
}

#[derive(Debug, Clone)]
pub struct MineArgs {
    pub scripts_dir: PathBuf,
    pub datasets_dir: PathBuf,
    /// JSON object mapping script id to dataset file name.
    pub sidecar: Option<PathBuf>,
    pub out: PathBuf,
    pub vocabulary: Option<PathBuf>,
    pub delimiter: u8,
}

#[derive(Debug, Clone)]
pub struct MineSummary {
    pub report: FilterReport,
    pub excluded_scripts: usize,
    pub indexed_datasets: usize,
    pub warnings: Vec<String>,
}

/// Scripts to code graphs, filtered pipeline graphs, vocabulary, embedding
/// index of the datasets directory, and a filter report, all under `out`.
pub fn cmd_mine(args: &MineArgs, cfg: &Config) -> Result<MineSummary> {
    require_dir(&args.scripts_dir)?;
    require_dir(&args.datasets_dir)?;
    let vocab = match &args.vocabulary {
        Some(p) => load_vocabulary(p)?,
        None => NodeVocabulary::default_whitelist(),
    };
    let sidecar: HashMap<String, String> = match &args.sidecar {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| input(p.display(), e))?;
            serde_json::from_str(&text).map_err(|e| input(p.display(), e))?
        }
        None => HashMap::new(),
    };
    let mut warnings = Vec::new();
    let (sources, mut excluded) = read_scripts(&args.scripts_dir).map_err(|e| input(args.scripts_dir.display(), e))?;
    if sources.is_empty() && excluded.is_empty() {
        warnings.push(format!("no scripts found in {}", args.scripts_dir.display()));
    }
    let mined = mine_sources(&sources);
    excluded.extend(mined.excluded);
    for x in &excluded {
        warnings.push(format!("excluded script {}: {}", x.script_id, x.error));
    }
    let (graphs, mut report) = filter::filter_corpus(&mined.graphs, &vocab, &sidecar, &FilterOptions::default());
    report.scripts_in += excluded.len();

    let pcfg = ProfileConfig {
        dim: cfg.dim,
        seed: cfg.seed,
        ..Default::default()
    };
    let mut entries = Vec::new();
    for path in csv_files(&args.datasets_dir)? {
        let table = match read_csv(&path, args.delimiter) {
            Ok(t) => t,
            Err(e) => {
                warnings.push(format!("skipped dataset {}: {e}", path.display()));
                continue;
            }
        };
        let name = filter::normalize_dataset_name(&path.file_name().unwrap_or_default().to_string_lossy());
        match embed_csv_table(&table, &name, &pcfg) {
            Ok(e) => entries.push(e),
            Err(e) => warnings.push(format!("skipped dataset {}: {e}", path.display())),
        }
    }
    let index = EmbeddingIndex::build(cfg.dim, entries).map_err(|e| input(args.datasets_dir.display(), e))?;

    std::fs::create_dir_all(&args.out).map_err(|e| input(args.out.display(), e))?;
    let code: Vec<&CodeGraph> = mined.graphs.iter().collect();
    let mut buf = Vec::new();
    write_jsonl(&code, &mut buf).expect("in-memory write");
    write_file(&args.out.join(CODE_GRAPHS_FILE), &buf)?;
    buf.clear();
    write_jsonl(&graphs, &mut buf).expect("in-memory write");
    write_file(&args.out.join(PIPELINE_GRAPHS_FILE), &buf)?;
    write_file(&args.out.join(VOCABULARY_FILE), vocab.to_json().as_bytes())?;
    buf.clear();
    write_index(&index, &mut buf).expect("in-memory write");
    write_file(&args.out.join(INDEX_FILE), &buf)?;
    let report_json = serde_json::to_string_pretty(&report).expect("serializable");
    write_file(&args.out.join(REPORT_FILE), report_json.as_bytes())?;
    Ok(MineSummary {
        report,
        excluded_scripts: excluded.len(),
        indexed_datasets: index.len(),
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub corpus: PathBuf,
    pub epochs: usize,
    pub learning_rate: f64,
    pub out: PathBuf,
}

/// Loss log path written next to the model file.
pub fn loss_csv_path(model: &Path) -> PathBuf {
    model.with_extension("loss.csv")
}

/// Trains on the corpus's pipeline graphs and writes the model and its loss
/// log. The returned model is the one stored on disk (f32 weights).
pub fn cmd_train(args: &TrainArgs, cfg: &Config) -> Result<(GeneratorModel, Vec<EpochLog>)> {
    let vocab = load_vocabulary(&args.corpus.join(VOCABULARY_FILE))?;
    let graphs = load_graphs(&args.corpus.join(PIPELINE_GRAPHS_FILE))?;
    let traces = graphs
        .iter()
        .map(canonicalize_trace)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| input("corpus", e))?;
    let datasets: Vec<String> = graphs
        .iter()
        .map(|g| g.dataset_name.clone())
        .filter(|d| d != filter::UNKNOWN_DATASET)
        .collect();
    let mut model = GeneratorModel::new(vocab.len(), cfg.hidden, cfg.rounds, datasets, cfg.seed);
    let tcfg = TrainConfig {
        epochs: args.epochs,
        learning_rate: args.learning_rate,
        seed: cfg.seed,
        ..Default::default()
    };
    let log = train(&mut model, &traces, &tcfg).map_err(|e| match e {
        TrainError::DivergedLoss { .. } => CommandError::Diverged(e.to_string()),
        other => CommandError::Input(other.to_string()),
    })?;
    quantize(&mut model);
    let mut buf = Vec::new();
    write_model(&model, &mut buf).expect("in-memory write");
    write_file(&args.out, &buf)?;
    buf.clear();
    crate::generator::train::write_loss_csv(&log, &mut buf).map_err(|e| input("loss log", e))?;
    write_file(&loss_csv_path(&args.out), &buf)?;
    Ok((model, log))
}

#[derive(Debug, Clone)]
pub struct RecommendArgs {
    pub dataset: PathBuf,
    /// Target column; the last column when absent.
    pub target: Option<String>,
    pub budget: Option<f64>,
    pub k: usize,
    pub registry: PathBuf,
    pub model: PathBuf,
    pub index: PathBuf,
    pub vocabulary: PathBuf,
    pub mode: Mode,
    pub delimiter: u8,
    /// Also write the prepared matrix and manifest here.
    pub prepare_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Recommendation {
    pub document: SkeletonDocument,
    /// Nearest indexed datasets with their cosine distance.
    pub neighbors: Vec<(String, f64)>,
    /// The neighbour whose dataset node seeded generation.
    pub seed_dataset: String,
    pub elapsed_seconds: f64,
    #[serde(skip)]
    pub prepared: Option<PreparedDataset>,
}

/// Neighbours tried before giving up.
pub const FALLBACK_NEIGHBORS: usize = 3;

fn task_fits(estimator: &str, task: Task) -> bool {
    estimator_task(estimator).is_none_or(|t| t == task)
}

fn registry_skeletons(
    g: &PipelineGraph,
    log_prob: f64,
    vocab: &NodeVocabulary,
    reg: &CapabilityRegistry,
    task: Task,
) -> Vec<PipelineSkeleton> {
    let Ok(sks) = to_skeletons(g, vocab, log_prob) else {
        return Vec::new();
    };
    sks.iter()
        .filter(|s| task_fits(&s.estimator, task))
        .filter_map(|s| match validate_against(s, reg) {
            Validated::Accepted { skeleton, .. } => Some(skeleton),
            Validated::Rejected(_) => None,
        })
        .collect()
}

/// Profiles the dataset, seeds generation from its nearest indexed
/// neighbour (falling back to the next ones), and turns the generated
/// graphs into registry-valid skeletons with a per-skeleton time budget.
pub fn cmd_recommend(args: &RecommendArgs, cfg: &Config) -> Result<Recommendation> {
    let start = Instant::now();
    let reg = CapabilityRegistry::load(&args.registry).map_err(|e| input(args.registry.display(), e))?;
    let model = load_model(&args.model)?;
    let index = load_index(&args.index)?;
    let vocab = load_vocabulary(&args.vocabulary)?;
    if vocab.len() != model.n_types() {
        return Err(CommandError::Input(format!(
            "vocabulary has {} entries but the model was trained with {}",
            vocab.len(),
            model.n_types()
        )));
    }
    if args.k == 0 {
        return Err(CommandError::Input("k must be at least 1".into()));
    }
    let table = read_csv(&args.dataset, args.delimiter).map_err(|e| input(args.dataset.display(), e))?;
    let target = args.target.clone().unwrap_or_else(|| table.headers.last().cloned().unwrap_or_default());
    let column = table
        .column(&target)
        .ok_or_else(|| CommandError::Input(format!("no target column {target:?}")))?;
    let task = detect_task(column).map_err(|e| input("target", e))?;
    let name = filter::normalize_dataset_name(&args.dataset.file_name().unwrap_or_default().to_string_lossy());
    let pcfg = ProfileConfig {
        dim: index.dim,
        seed: cfg.seed,
        ..Default::default()
    };
    let query = embed_csv_table(&table, &name, &pcfg).map_err(|e| input(args.dataset.display(), e))?;
    let neighbors = index.nearest(&query.vector, index.len()).map_err(|e| input(args.index.display(), e))?;

    let opts = GenerateOptions {
        k: args.k,
        max_nodes: cfg.max_nodes,
        mode: args.mode,
        retries: cfg.retries,
    };
    let accept = |g: &PipelineGraph| {
        g.validate(&vocab, cfg.max_nodes).is_ok() && !registry_skeletons(g, 0.0, &vocab, &reg, task).is_empty()
    };
    let mut chosen = None;
    let mut failures = Vec::new();
    for (ds, _) in neighbors.iter().filter(|(d, _)| model.knows_dataset(d)).take(FALLBACK_NEIGHBORS) {
        match generate(&model, ds, &opts, &accept) {
            Ok(r) => {
                chosen = Some((ds.clone(), r));
                break;
            }
            Err(e @ GenerateError::NoValidGraph { .. }) => failures.push(e.to_string()),
            Err(e) => return Err(input("generation", e)),
        }
    }
    let Some((seed_dataset, result)) = chosen else {
        return Err(CommandError::NoRecommendation(if failures.is_empty() {
            "no indexed neighbour is known to the model".into()
        } else {
            failures.join("; ")
        }));
    };
    let mut skeletons = Vec::new();
    for g in &result.graphs {
        skeletons.extend(registry_skeletons(&g.graph, g.log_prob, &vocab, &reg, task));
    }
    let mut skeletons = dedupe_rank(skeletons);
    skeletons.truncate(args.k);

    let prepared = match &args.prepare_dir {
        Some(dir) => Some(prepare_dataset(&table, &target, dir).map_err(|e| input("prepare", e))?),
        None => None,
    };
    let budget = match args.budget {
        Some(total) => {
            let consumed = start.elapsed().as_secs_f64();
            plan_budget(total, consumed, skeletons.len()).map_err(|e| input("budget", e))?.per_graph
        }
        None => 0.0,
    };
    let document = SkeletonDocument::new(&name, task, &reg.optimizer_name, &skeletons, budget);
    Ok(Recommendation {
        document,
        neighbors: neighbors.into_iter().take(FALLBACK_NEIGHBORS).collect(),
        seed_dataset,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        prepared,
    })
}

#[derive(Debug, Clone, Deserialize)]
pub struct BridgeEntry {
    pub skeleton_id: String,
    #[serde(default)]
    pub best_score: Option<f64>,
}

/// The optimizer bridge's results file, with optional labels.
#[derive(Debug, Clone, Deserialize)]
pub struct BridgeResults {
    pub results: Vec<BridgeEntry>,
    #[serde(default)]
    pub best: Option<BridgeEntry>,
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub metric: Option<String>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PairedTest {
    pub system_a: String,
    pub system_b: String,
    pub datasets: usize,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvaluationReport {
    pub files: usize,
    pub records: usize,
    /// Mean reciprocal rank of each run's best skeleton in its input order.
    pub mrr: Option<f64>,
    pub ranks: Vec<usize>,
    pub t_tests: Vec<PairedTest>,
}

fn metric_kind(name: Option<&str>, task: Option<Task>) -> MetricKind {
    match (name.map(str::to_ascii_lowercase).as_deref(), task) {
        (Some("r2"), _) | (None, Some(Task::Regression)) => MetricKind::R2,
        _ => MetricKind::F1,
    }
}

/// Reads run records, skeleton documents and bridge results from
/// `results_dir`, writes `results.csv`, `frequency.csv` and `report.json`
/// into `out`.
pub fn cmd_evaluate(results_dir: &Path, out: &Path) -> Result<EvaluationReport> {
    require_dir(results_dir)?;
    let mut paths: Vec<PathBuf> = std::fs::read_dir(results_dir)
        .map_err(|e| input(results_dir.display(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CommandError::Input(format!("no result files in {}", results_dir.display())));
    }
    let mut records = Vec::new();
    let mut docs = Vec::new();
    let mut bridge = Vec::new();
    for p in &paths {
        let text = std::fs::read_to_string(p).map_err(|e| input(p.display(), e))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| input(p.display(), e))?;
        let source = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        if v.get("skeletons").is_some() {
            docs.push(SkeletonDocument::from_json(&text).map_err(|e| input(p.display(), e))?);
        } else if v.get("results").is_some() {
            let b: BridgeResults = serde_json::from_value(v).map_err(|e| input(p.display(), e))?;
            bridge.push((source, b));
        } else {
            let mut r: RunRecord = serde_json::from_value(v).map_err(|e| input(p.display(), e))?;
            r.check().map_err(|e| input(p.display(), e))?;
            if r.source.is_empty() {
                r.source = source;
            }
            records.push(r);
        }
    }

    let owner: HashMap<&str, &SkeletonDocument> = docs
        .iter()
        .flat_map(|d| d.skeletons.iter().map(move |s| (s.id.as_str(), d)))
        .collect();
    let mut ranks = Vec::new();
    let mut runs = Vec::new();
    for (source, b) in &bridge {
        let doc = b.results.first().and_then(|r| owner.get(r.skeleton_id.as_str()).copied());
        let best_pos = b
            .best
            .as_ref()
            .and_then(|best| b.results.iter().position(|r| r.skeleton_id == best.skeleton_id));
        if let Some(pos) = best_pos {
            ranks.push(pos + 1);
        }
        if let Some(d) = doc {
            let by_id: HashMap<&str, Vec<String>> = d
                .skeletons
                .iter()
                .map(|s| {
                    let mut ops = s.preprocessors.clone();
                    ops.push(s.estimator.clone());
                    (s.id.as_str(), ops)
                })
                .collect();
            runs.push(RankedRun {
                skeletons: b
                    .results
                    .iter()
                    .filter_map(|r| by_id.get(r.skeleton_id.as_str()).cloned())
                    .collect(),
                best: best_pos,
            });
        }
        if let Some(score) = b.best.as_ref().and_then(|x| x.best_score) {
            let dataset = b
                .dataset
                .clone()
                .or_else(|| doc.map(|d| d.dataset.clone()))
                .unwrap_or_else(|| source.clone());
            let r = RunRecord {
                dataset,
                system: b.system.clone().unwrap_or_else(|| "pipeforge".into()),
                scores: vec![score],
                metric: metric_kind(b.metric.as_deref(), doc.map(|d| d.task)),
                source: source.clone(),
            };
            r.check().map_err(|e| input(source, e))?;
            records.push(r);
        }
    }

    let mut by_system: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    for r in &records {
        by_system
            .entry(r.system.as_str())
            .or_default()
            .entry(r.dataset.as_str())
            .or_default()
            .extend_from_slice(&r.scores);
    }
    let mean = |xs: &Vec<f64>| xs.iter().sum::<f64>() / xs.len() as f64;
    let systems: Vec<&str> = by_system.keys().copied().collect();
    let mut t_tests = Vec::new();
    for (i, a) in systems.iter().enumerate() {
        for b in &systems[i + 1..] {
            let (xa, xb): (Vec<f64>, Vec<f64>) = by_system[a]
                .iter()
                .filter_map(|(d, s)| by_system[b].get(d).map(|t| (mean(s), mean(t))))
                .unzip();
            if let Ok((t, p)) = metrics::paired_t_test(&xa, &xb) {
                t_tests.push(PairedTest {
                    system_a: a.to_string(),
                    system_b: b.to_string(),
                    datasets: xa.len(),
                    t,
                    p,
                });
            }
        }
    }

    let report = EvaluationReport {
        files: paths.len(),
        records: records.len(),
        mrr: metrics::mrr(&ranks).ok(),
        ranks,
        t_tests,
    };
    std::fs::create_dir_all(out).map_err(|e| input(out.display(), e))?;
    let csv_out = |name: &str| -> Result<BufWriter<File>> {
        let p = out.join(name);
        Ok(BufWriter::new(File::create(&p).map_err(|e| input(p.display(), e))?))
    };
    metrics::write_results_csv(&records, csv_out("results.csv")?).map_err(|e| input("results.csv", e))?;
    metrics::write_frequency_csv(&metrics::frequency_report(&runs), csv_out("frequency.csv")?)
        .map_err(|e| input("frequency.csv", e))?;
    write_file(
        &out.join("report.json"),
        serde_json::to_string_pretty(&report).expect("serializable").as_bytes(),
    )?;
    Ok(report)
}
