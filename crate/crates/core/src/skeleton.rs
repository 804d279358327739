//! Pipeline skeletons (ordered preprocessors plus one estimator) and the
//! capability registries of the optimizers that run them.

use crate::filter::vocab::{Category, NodeVocabulary};
use crate::pipeline::PipelineGraph;
use crate::prep::Task;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSkeleton {
    pub skeleton_id: String,
    pub preprocessors: Vec<String>,
    pub estimator: String,
    pub log_prob: f64,
    pub source_graph_id: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SkeletonError {
    #[error("graph {0} has no estimator")]
    NoEstimator(String),
    #[error("graph {0} is not a DAG")]
    Cyclic(String),
}

/// One skeleton per estimator node: the preprocessors lying on a path
/// `read_csv -> ... -> estimator`, in topological order (ties by vocab id).
pub fn to_skeletons(
    g: &PipelineGraph,
    vocab: &NodeVocabulary,
    log_prob: f64,
) -> Result<Vec<PipelineSkeleton>, SkeletonError> {
    let n = g.nodes.len();
    let cat = |v: usize| vocab.category(g.nodes[v].vocab_id);
    let label = |v: usize| vocab.label(g.nodes[v].vocab_id).unwrap_or("?").to_string();
    let order = topo_by_vocab(g).ok_or_else(|| SkeletonError::Cyclic(g.graph_id.clone()))?;
    let read = g
        .nodes
        .iter()
        .position(|x| x.vocab_id == crate::filter::vocab::READ_CSV);
    let from_read = match read {
        Some(r) => g.reachable_from(r),
        None => vec![false; n],
    };
    let mut rev = vec![Vec::new(); n];
    for e in &g.edges {
        rev[e.dst].push(e.src);
    }
    let mut out = Vec::new();
    for &est in order.iter().filter(|&&v| cat(v) == Some(Category::Estimator)) {
        let mut to_est = vec![false; n];
        let mut stack = vec![est];
        while let Some(v) = stack.pop() {
            if !std::mem::replace(&mut to_est[v], true) {
                stack.extend(rev[v].iter().copied());
            }
        }
        let mut pre: Vec<String> = Vec::new();
        for &v in &order {
            if v != est && from_read[v] && to_est[v] && cat(v) == Some(Category::Preprocessor) {
                let l = label(v);
                if pre.last() != Some(&l) {
                    pre.push(l);
                }
            }
        }
        out.push(PipelineSkeleton {
            skeleton_id: format!("{}-s{}", g.graph_id, out.len()),
            preprocessors: pre,
            estimator: label(est),
            log_prob,
            source_graph_id: g.graph_id.clone(),
        });
    }
    if out.is_empty() {
        return Err(SkeletonError::NoEstimator(g.graph_id.clone()));
    }
    Ok(out)
}

fn topo_by_vocab(g: &PipelineGraph) -> Option<Vec<usize>> {
    let n = g.nodes.len();
    let mut indeg = vec![0usize; n];
    let adj = g.out_adjacency();
    for e in &g.edges {
        indeg[e.dst] += 1;
    }
    let mut ready: BTreeSet<(u32, usize)> = (0..n)
        .filter(|&v| indeg[v] == 0)
        .map(|v| (g.nodes[v].vocab_id, v))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = ready.pop_first() {
        order.push(v);
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert((g.nodes[w].vocab_id, w));
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityRegistry {
    #[serde(rename = "optimizer")]
    pub optimizer_name: String,
    pub preprocessors: BTreeSet<String>,
    pub estimators: BTreeSet<String>,
    #[serde(default)]
    pub rename: BTreeMap<String, String>,
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("cannot read registry: {0}")]
    Io(#[from] std::io::Error),
    #[error("registry parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("registry is invalid: {0}")]
    Invalid(String),
}

impl CapabilityRegistry {
    pub fn from_json(text: &str) -> Result<Self, RegistryError> {
        let r: CapabilityRegistry = serde_json::from_str(text)?;
        if r.preprocessors.is_empty() || r.estimators.is_empty() {
            return Err(RegistryError::Invalid("operator sets must be non-empty".into()));
        }
        if let Some(k) = r
            .rename
            .keys()
            .find(|k| !r.preprocessors.contains(*k) && !r.estimators.contains(*k))
        {
            return Err(RegistryError::Invalid(format!("rename key {k:?} is not a listed operator")));
        }
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self, RegistryError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn renamed(&self, label: &str) -> String {
        self.rename.get(label).cloned().unwrap_or_else(|| label.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Validated {
    /// Identifiers renamed for the optimizer; `dropped` lists removed
    /// preprocessors by canonical label.
    Accepted {
        skeleton: PipelineSkeleton,
        dropped: Vec<String>,
    },
    Rejected(RejectReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    EstimatorUnsupported(String),
}

pub fn validate_against(sk: &PipelineSkeleton, reg: &CapabilityRegistry) -> Validated {
    if !reg.estimators.contains(&sk.estimator) {
        return Validated::Rejected(RejectReason::EstimatorUnsupported(sk.estimator.clone()));
    }
    let (kept, dropped): (Vec<&String>, Vec<&String>) =
        sk.preprocessors.iter().partition(|p| reg.preprocessors.contains(*p));
    let mut preprocessors: Vec<String> = Vec::new();
    for p in kept {
        let r = reg.renamed(p);
        if preprocessors.last() != Some(&r) {
            preprocessors.push(r);
        }
    }
    Validated::Accepted {
        skeleton: PipelineSkeleton {
            preprocessors,
            estimator: reg.renamed(&sk.estimator),
            ..sk.clone()
        },
        dropped: dropped.into_iter().cloned().collect(),
    }
}

/// Merges skeletons with equal operators (keeping the best score and the
/// first id) and sorts by log-probability, descending and stable.
pub fn dedupe_rank(skeletons: Vec<PipelineSkeleton>) -> Vec<PipelineSkeleton> {
    let mut out: Vec<PipelineSkeleton> = Vec::new();
    let mut at: HashMap<(Vec<String>, String), usize> = HashMap::new();
    for s in skeletons {
        let key = (s.preprocessors.clone(), s.estimator.clone());
        match at.get(&key) {
            Some(&i) => {
                if s.log_prob > out[i].log_prob {
                    out[i].log_prob = s.log_prob;
                }
            }
            None => {
                at.insert(key, out.len());
                out.push(s);
            }
        }
    }
    out.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
    out
}

const CLASSIFIERS: &[&str] = &["LogisticRegression", "SVC", "LinearSVC", "GaussianNB", "MultinomialNB", "BernoulliNB"];
const REGRESSORS: &[&str] = &["LinearRegression", "Ridge", "Lasso", "ElasticNet", "SVR"];

/// The task an estimator label solves, when it can be told from the name.
pub fn estimator_task(label: &str) -> Option<Task> {
    if label.ends_with("Classifier") || CLASSIFIERS.contains(&label) {
        Some(Task::Classification)
    } else if label.ends_with("Regressor") || REGRESSORS.contains(&label) {
        Some(Task::Regression)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEntry {
    pub id: String,
    pub preprocessors: Vec<String>,
    pub estimator: String,
    pub log_prob: f64,
    pub budget_seconds: f64,
}

/// The recommendation document handed to the optimizer bridge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonDocument {
    pub version: u32,
    pub dataset: String,
    pub task: Task,
    pub skeletons: Vec<SkeletonEntry>,
    pub registry: String,
}

pub const SCHEMA_VERSION: u32 = 1;

impl SkeletonDocument {
    pub fn new(dataset: &str, task: Task, registry: &str, skeletons: &[PipelineSkeleton], budget_seconds: f64) -> Self {
        Self {
            version: SCHEMA_VERSION,
            dataset: dataset.to_string(),
            task,
            skeletons: skeletons
                .iter()
                .map(|s| SkeletonEntry {
                    id: s.skeleton_id.clone(),
                    preprocessors: s.preprocessors.clone(),
                    estimator: s.estimator.clone(),
                    log_prob: s.log_prob,
                    budget_seconds,
                })
                .collect(),
            registry: registry.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let doc: SkeletonDocument = serde_json::from_str(text)?;
        if doc.version != SCHEMA_VERSION {
            return Err(serde::de::Error::custom(format!("unsupported version {}", doc.version)));
        }
        Ok(doc)
    }
}
