//! Python module `pipeforge`: vocabulary, pipeline graphs, the trained
//! generator, the dataset index, capability registries, skeleton documents,
//! preprocessing and metrics, plus the four end-to-end commands.
//!
//! Structured results cross the boundary as plain dicts and lists.

use pipeforge::commands::{self, CommandError, MineArgs, RecommendArgs, TrainArgs};
use pipeforge::config::Config;
use pipeforge::filter::{filter_graph, normalize_dataset_name, FilterOptions, Filtered, NodeVocabulary};
use pipeforge::generator::generate::{generate, GenerateOptions, Mode};
use pipeforge::generator::{canonicalize_trace, replay, GeneratorModel, Step};
use pipeforge::pipeline::{PipelineEdge, PipelineGraph, PipelineNode};
use pipeforge::prep::{self, BudgetError, Task};
use pipeforge::profile::{self, EmbeddingIndex, ProfileConfig};
use pipeforge::script::{analyze, ScriptSource};
use pipeforge::skeleton::{validate_against, CapabilityRegistry, PipelineSkeleton, SkeletonDocument, Validated};
use pipeforge::{metrics, table};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

create_exception!(pipeforge, PipeforgeError, PyException);
create_exception!(pipeforge, InputError, PipeforgeError);
create_exception!(pipeforge, TrainingDiverged, PipeforgeError);
create_exception!(pipeforge, NoRecommendation, PipeforgeError);
create_exception!(pipeforge, BudgetExhausted, PipeforgeError);

fn command_err(e: CommandError) -> PyErr {
    match e {
        CommandError::Input(m) => InputError::new_err(m),
        CommandError::Diverged(m) => TrainingDiverged::new_err(m),
        CommandError::NoRecommendation(m) => NoRecommendation::new_err(m),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn input_err(e: impl std::fmt::Display) -> PyErr {
    InputError::new_err(e.to_string())
}

/// Any serializable value as the equivalent Python object.
fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn task_name(t: Task) -> &'static str {
    match t {
        Task::Classification => "classification",
        Task::Regression => "regression",
    }
}

#[pyclass(name = "Vocabulary", module = "pipeforge", frozen)]
struct PyVocabulary {
    inner: NodeVocabulary,
}

#[pymethods]
impl PyVocabulary {
    /// The bundled operator whitelist.
    #[staticmethod]
    fn default() -> Self {
        Self {
            inner: NodeVocabulary::default_whitelist(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: NodeVocabulary::from_json(text).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: commands::load_vocabulary(&path).map_err(command_err)?,
        })
    }

    fn id(&self, label: &str) -> Option<u32> {
        self.inner.id(label)
    }

    fn label(&self, id: u32) -> Option<String> {
        self.inner.label(id).map(str::to_string)
    }

    /// `"Preprocessor"`, `"Estimator"`, ... or None for reserved ids.
    fn category(&self, id: u32) -> Option<String> {
        self.inner.category(id).map(|c| format!("{c:?}"))
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "PipelineGraph", module = "pipeforge", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPipelineGraph {
    inner: PipelineGraph,
}

fn step_to_py(s: &Step) -> (String, Option<usize>) {
    match *s {
        Step::AddNode(t) => ("AddNode".into(), Some(t as usize)),
        Step::StopNodes => ("StopNodes".into(), None),
        Step::AddEdgeYes => ("AddEdgeYes".into(), None),
        Step::AddEdgeNo => ("AddEdgeNo".into(), None),
        Step::PickNode(i) => ("PickNode".into(), Some(i)),
    }
}

#[pymethods]
impl PyPipelineGraph {
    #[new]
    #[pyo3(signature = (graph_id, dataset_name, node_types, edges))]
    fn new(graph_id: String, dataset_name: String, node_types: Vec<u32>, edges: Vec<(usize, usize)>) -> Self {
        Self {
            inner: PipelineGraph {
                graph_id,
                dataset_name,
                nodes: node_types
                    .into_iter()
                    .enumerate()
                    .map(|(id, vocab_id)| PipelineNode { id, vocab_id })
                    .collect(),
                edges: edges.into_iter().map(|(src, dst)| PipelineEdge { src, dst }).collect(),
            },
        }
    }

    /// The two-node `DATASET -> READ_CSV` seed.
    #[staticmethod]
    fn seed(graph_id: String, dataset_name: String) -> Self {
        Self {
            inner: PipelineGraph::seed(graph_id, dataset_name),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: serde_json::from_str(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }

    #[getter]
    fn graph_id(&self) -> String {
        self.inner.graph_id.clone()
    }

    #[getter]
    fn dataset_name(&self) -> String {
        self.inner.dataset_name.clone()
    }

    #[getter]
    fn node_types(&self) -> Vec<u32> {
        self.inner.vocab_ids().collect()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges.iter().map(|e| (e.src, e.dst)).collect()
    }

    fn labels(&self, vocab: &PyVocabulary) -> Vec<Option<String>> {
        self.inner
            .vocab_ids()
            .map(|t| vocab.inner.label(t).map(str::to_string))
            .collect()
    }

    /// Raises ValueError naming the first violated invariant.
    #[pyo3(signature = (vocab, max_nodes = 64))]
    fn validate(&self, vocab: &PyVocabulary, max_nodes: usize) -> PyResult<()> {
        self.inner.validate(&vocab.inner, max_nodes).map_err(PyValueError::new_err)
    }

    /// Canonical decision sequence as `(step, argument)` pairs.
    fn trace(&self) -> PyResult<Vec<(String, Option<usize>)>> {
        let t = canonicalize_trace(&self.inner).map_err(value_err)?;
        Ok(t.steps.iter().map(step_to_py).collect())
    }

    /// The graph rebuilt from its own trace (nodes in generation order).
    fn canonical(&self) -> PyResult<Self> {
        let t = canonicalize_trace(&self.inner).map_err(value_err)?;
        Ok(Self {
            inner: replay(&t).map_err(value_err)?,
        })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "PipelineGraph({:?}, dataset={:?}, nodes={}, edges={})",
            self.inner.graph_id,
            self.inner.dataset_name,
            self.inner.nodes.len(),
            self.inner.edges.len()
        )
    }
}

#[pyclass(name = "Model", module = "pipeforge", frozen)]
struct PyModel {
    inner: GeneratorModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: commands::load_model(&path).map_err(command_err)?,
        })
    }

    #[getter]
    fn n_types(&self) -> usize {
        self.inner.n_types()
    }

    #[getter]
    fn hidden(&self) -> usize {
        self.inner.hidden()
    }

    #[getter]
    fn rounds(&self) -> usize {
        self.inner.rounds
    }

    #[getter]
    fn datasets(&self) -> Vec<String> {
        self.inner.datasets.clone()
    }

    /// Up to `k` distinct graphs seeded from `dataset`, most likely first,
    /// as `(graph, log_prob)` pairs. Greedy unless `seed` is given. With a
    /// vocabulary, graphs violating the graph invariants are resampled.
    #[pyo3(signature = (dataset, k = 3, max_nodes = 16, seed = None, retries = 50, vocab = None))]
    fn generate(
        &self,
        py: Python<'_>,
        dataset: &str,
        k: usize,
        max_nodes: usize,
        seed: Option<u64>,
        retries: usize,
        vocab: Option<&PyVocabulary>,
    ) -> PyResult<Vec<(PyPipelineGraph, f64)>> {
        let opts = GenerateOptions {
            k,
            max_nodes,
            mode: seed.map_or(Mode::Greedy, Mode::Sampled),
            retries,
        };
        let vocab = vocab.map(|v| v.inner.clone());
        let model = &self.inner;
        let r = py
            .detach(|| {
                generate(model, dataset, &opts, &|g| {
                    vocab.as_ref().is_none_or(|v| g.validate(v, max_nodes).is_ok())
                })
            })
            .map_err(|e| NoRecommendation::new_err(e.to_string()))?;
        Ok(r
            .graphs
            .into_iter()
            .map(|g| (PyPipelineGraph { inner: g.graph }, g.log_prob))
            .collect())
    }
}

#[pyclass(name = "EmbeddingIndex", module = "pipeforge", frozen)]
struct PyEmbeddingIndex {
    inner: EmbeddingIndex,
}

#[pymethods]
impl PyEmbeddingIndex {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: commands::load_index(&path).map_err(command_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    fn names(&self) -> Vec<String> {
        self.inner.entries.iter().map(|e| e.dataset_name.clone()).collect()
    }

    /// `(dataset, cosine distance)` pairs, closest first.
    #[pyo3(signature = (vector, k = 1))]
    fn nearest(&self, vector: Vec<f64>, k: usize) -> PyResult<Vec<(String, f64)>> {
        self.inner.nearest(&vector, k).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Registry", module = "pipeforge", frozen)]
struct PyRegistry {
    inner: CapabilityRegistry,
}

#[pymethods]
impl PyRegistry {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: CapabilityRegistry::load(&path).map_err(input_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CapabilityRegistry::from_json(text).map_err(value_err)?,
        })
    }

    #[getter]
    fn optimizer(&self) -> String {
        self.inner.optimizer_name.clone()
    }

    #[getter]
    fn preprocessors(&self) -> Vec<String> {
        self.inner.preprocessors.iter().cloned().collect()
    }

    #[getter]
    fn estimators(&self) -> Vec<String> {
        self.inner.estimators.iter().cloned().collect()
    }

    /// The skeleton in the optimizer's naming plus the dropped
    /// preprocessors, or None when the estimator is unsupported.
    fn validate(&self, preprocessors: Vec<String>, estimator: String) -> Option<(Vec<String>, String, Vec<String>)> {
        let sk = PipelineSkeleton {
            skeleton_id: String::new(),
            preprocessors,
            estimator,
            log_prob: 0.0,
            source_graph_id: String::new(),
        };
        match validate_against(&sk, &self.inner) {
            Validated::Accepted { skeleton, dropped } => Some((skeleton.preprocessors, skeleton.estimator, dropped)),
            Validated::Rejected(_) => None,
        }
    }
}

/// Reads and checks a skeleton document (schema version 1).
#[pyfunction]
fn load_skeletons<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let text = std::fs::read_to_string(&path).map_err(input_err)?;
    let doc = SkeletonDocument::from_json(&text).map_err(value_err)?;
    to_py(py, &doc)
}

/// Code graph of one script as a dict.
#[pyfunction]
#[pyo3(signature = (text, script_id = "script"))]
fn analyze_script<'py>(py: Python<'py>, text: &str, script_id: &str) -> PyResult<Bound<'py, PyAny>> {
    let src = ScriptSource::new(format!("{script_id}.py"), text);
    let (_, g) = analyze(&src).map_err(value_err)?;
    to_py(py, &g)
}

/// The filtered operator graph of one script, or None when it has no
/// estimator (or is too large).
#[pyfunction]
#[pyo3(signature = (text, vocab, dataset_name, max_nodes = 64))]
fn mine_script(text: &str, vocab: &PyVocabulary, dataset_name: &str, max_nodes: usize) -> PyResult<Option<PyPipelineGraph>> {
    let (_, g) = analyze(&ScriptSource::new("script.py", text)).map_err(value_err)?;
    let name = normalize_dataset_name(dataset_name);
    Ok(match filter_graph(&g, &vocab.inner, &name, &FilterOptions { max_nodes }) {
        Filtered::Kept(p) => Some(PyPipelineGraph { inner: p }),
        Filtered::Rejected(_) => None,
    })
}

/// Unit-norm embedding of a CSV table.
#[pyfunction]
#[pyo3(signature = (path, dim = 256, seed = 0, delimiter = ','))]
fn profile_csv(path: PathBuf, dim: usize, seed: u64, delimiter: char) -> PyResult<Vec<f64>> {
    let d = u8::try_from(delimiter).map_err(value_err)?;
    let t = table::read_csv(&path, d).map_err(input_err)?;
    let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let cfg = ProfileConfig {
        dim,
        seed,
        ..Default::default()
    };
    Ok(profile::embed_csv_table(&t, &name, &cfg).map_err(value_err)?.vector)
}

#[pyfunction]
fn cosine(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    if a.len() != b.len() {
        return Err(PyValueError::new_err("vectors differ in length"));
    }
    Ok(profile::cosine(&a, &b))
}

/// `"classification"` or `"regression"`.
#[pyfunction]
fn detect_task(values: Vec<String>) -> PyResult<&'static str> {
    prep::detect_task(&values).map(task_name).map_err(value_err)
}

/// Writes the numeric matrix and manifest for `csv_path` into `out_dir`;
/// returns the preparation summary.
#[pyfunction]
#[pyo3(signature = (csv_path, target, out_dir, delimiter = ','))]
fn prepare_dataset<'py>(
    py: Python<'py>,
    csv_path: PathBuf,
    target: &str,
    out_dir: PathBuf,
    delimiter: char,
) -> PyResult<Bound<'py, PyAny>> {
    let d = u8::try_from(delimiter).map_err(value_err)?;
    let t = table::read_csv(&csv_path, d).map_err(input_err)?;
    let p = prep::prepare_dataset(&t, target, &out_dir).map_err(input_err)?;
    to_py(py, &p)
}

/// Seconds per skeleton, `(total - consumed) / k`.
#[pyfunction]
fn plan_budget(total: f64, consumed: f64, k: usize) -> PyResult<f64> {
    match prep::plan_budget(total, consumed, k) {
        Ok(p) => Ok(p.per_graph),
        Err(e @ BudgetError::BudgetExhausted { .. }) => Err(BudgetExhausted::new_err(e.to_string())),
        Err(e) => Err(value_err(e)),
    }
}

#[pyfunction]
fn macro_f1(predictions: Vec<String>, labels: Vec<String>) -> PyResult<f64> {
    metrics::macro_f1(&predictions, &labels).map_err(value_err)
}

#[pyfunction]
fn r2(predictions: Vec<f64>, targets: Vec<f64>) -> PyResult<f64> {
    metrics::r2(&predictions, &targets).map_err(value_err)
}

#[pyfunction]
fn mrr(ranks: Vec<usize>) -> PyResult<f64> {
    metrics::mrr(&ranks).map_err(value_err)
}

#[pyfunction]
fn diversity_correlation(run_a: Vec<u32>, run_b: Vec<u32>) -> PyResult<f64> {
    metrics::diversity_correlation(&run_a, &run_b).map_err(value_err)
}

/// Two-tailed paired t-test, `(t, p)`.
#[pyfunction]
fn paired_t_test(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64)> {
    metrics::paired_t_test(&a, &b).map_err(value_err)
}

fn config(seed: u64) -> Config {
    Config {
        seed,
        ..Config::default()
    }
}

/// Mines a scripts directory into `out`; returns the filter report.
#[pyfunction]
#[pyo3(signature = (scripts_dir, datasets_dir, out, sidecar = None, vocabulary = None, seed = 0))]
fn mine<'py>(
    py: Python<'py>,
    scripts_dir: PathBuf,
    datasets_dir: PathBuf,
    out: PathBuf,
    sidecar: Option<PathBuf>,
    vocabulary: Option<PathBuf>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let args = MineArgs {
        scripts_dir,
        datasets_dir,
        sidecar,
        out,
        vocabulary,
        delimiter: b',',
    };
    let s = py.detach(|| commands::cmd_mine(&args, &config(seed))).map_err(command_err)?;
    to_py(py, &s.report)
}

/// Trains on a mined corpus and writes the model; returns per-epoch
/// `(epoch, mean_nll, seconds)` rows.
#[pyfunction]
#[pyo3(signature = (corpus, out, epochs = 15, learning_rate = 1e-3, seed = 0, hidden = 32, rounds = 2))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    corpus: PathBuf,
    out: PathBuf,
    epochs: usize,
    learning_rate: f64,
    seed: u64,
    hidden: usize,
    rounds: usize,
) -> PyResult<Vec<(usize, f64, f64)>> {
    let args = TrainArgs {
        corpus,
        epochs,
        learning_rate,
        out,
    };
    let cfg = Config {
        hidden,
        rounds,
        ..config(seed)
    };
    let (_, log) = py.detach(|| commands::cmd_train(&args, &cfg)).map_err(command_err)?;
    Ok(log.iter().map(|e| (e.epoch, e.mean_nll, e.seconds)).collect())
}

/// Skeleton document for a CSV dataset. `corpus` holds the vocabulary and
/// index written by `mine`.
#[pyfunction]
#[pyo3(signature = (dataset, registry, model, corpus, k = 3, budget = None, target = None, seed = None, prepare_dir = None))]
#[allow(clippy::too_many_arguments)]
fn recommend<'py>(
    py: Python<'py>,
    dataset: PathBuf,
    registry: PathBuf,
    model: PathBuf,
    corpus: PathBuf,
    k: usize,
    budget: Option<f64>,
    target: Option<String>,
    seed: Option<u64>,
    prepare_dir: Option<PathBuf>,
) -> PyResult<Bound<'py, PyAny>> {
    let args = RecommendArgs {
        dataset,
        target,
        budget,
        k,
        registry,
        model,
        index: corpus.join(commands::INDEX_FILE),
        vocabulary: corpus.join(commands::VOCABULARY_FILE),
        mode: seed.map_or(Mode::Greedy, Mode::Sampled),
        delimiter: b',',
        prepare_dir,
    };
    let cfg = config(seed.unwrap_or(0));
    let rec = py.detach(|| commands::cmd_recommend(&args, &cfg)).map_err(|e| match e {
        CommandError::Input(m) if m.starts_with("budget:") => BudgetExhausted::new_err(m),
        other => command_err(other),
    })?;
    to_py(py, &rec)
}

/// Aggregates result files; writes the tables into `out` and returns the
/// report.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, results_dir: PathBuf, out: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let r = commands::cmd_evaluate(&results_dir, &out).map_err(command_err)?;
    to_py(py, &r)
}

#[pymodule]
#[pyo3(name = "pipeforge")]
pub fn pipeforge_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("PipeforgeError", py.get_type::<PipeforgeError>())?;
    m.add("InputError", py.get_type::<InputError>())?;
    m.add("TrainingDiverged", py.get_type::<TrainingDiverged>())?;
    m.add("NoRecommendation", py.get_type::<NoRecommendation>())?;
    m.add("BudgetExhausted", py.get_type::<BudgetExhausted>())?;
    m.add_class::<PyVocabulary>()?;
    m.add_class::<PyPipelineGraph>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyEmbeddingIndex>()?;
    m.add_class::<PyRegistry>()?;
    m.add_function(wrap_pyfunction!(load_skeletons, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_script, m)?)?;
    m.add_function(wrap_pyfunction!(mine_script, m)?)?;
    m.add_function(wrap_pyfunction!(profile_csv, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(detect_task, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(plan_budget, m)?)?;
    m.add_function(wrap_pyfunction!(macro_f1, m)?)?;
    m.add_function(wrap_pyfunction!(r2, m)?)?;
    m.add_function(wrap_pyfunction!(mrr, m)?)?;
    m.add_function(wrap_pyfunction!(diversity_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(mine, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(recommend, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
