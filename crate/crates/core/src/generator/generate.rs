use super::model::{rollout, Decision, GeneratorModel, GraphState, Policy, Rollout};
use super::tape::Tape;
use crate::pipeline::{PipelineEdge, PipelineGraph, PipelineNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::Instant;
use thiserror::Error;

pub const DEFAULT_MAX_GENERATED_NODES: usize = 16;
pub const DEFAULT_RETRIES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// The most likely decision path first, then seeded samples.
    Greedy,
    Sampled(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct GenerateOptions {
    pub k: usize,
    pub max_nodes: usize,
    pub mode: Mode,
    /// Extra attempts allowed beyond `k`.
    pub retries: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            k: 3,
            max_nodes: DEFAULT_MAX_GENERATED_NODES,
            mode: Mode::Greedy,
            retries: DEFAULT_RETRIES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedGraph {
    pub graph: PipelineGraph,
    pub log_prob: f64,
    /// `log_prob` divided by the number of decisions taken.
    pub normalized_log_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub dataset_name: String,
    pub graphs: Vec<GeneratedGraph>,
    pub wall_time: f64,
    pub attempts: usize,
    pub rejected: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("no valid graph for {dataset} after {attempts} attempts")]
    NoValidGraph { dataset: String, attempts: usize },
    #[error("k must be at least 1 and max_nodes at least 2")]
    BadOptions,
}

struct Argmax;

impl Policy for Argmax {
    fn choose(&mut self, _d: &Decision, lp: &[f64]) -> Option<usize> {
        let mut best = 0;
        for (i, &x) in lp.iter().enumerate() {
            if x > lp[best] {
                best = i;
            }
        }
        Some(best)
    }
}

struct Ancestral<'a>(&'a mut ChaCha8Rng);

impl Policy for Ancestral<'_> {
    fn choose(&mut self, _d: &Decision, lp: &[f64]) -> Option<usize> {
        let u: f64 = self.0.random();
        let mut acc = 0.0;
        for (i, &x) in lp.iter().enumerate() {
            acc += x.exp();
            if u < acc {
                return Some(i);
            }
        }
        // rounding left a sliver of mass: take the last option with support
        lp.iter().rposition(|x| x.is_finite())
    }
}

pub fn state_to_graph(state: &GraphState, graph_id: String, dataset_name: &str) -> PipelineGraph {
    let mut edges: Vec<PipelineEdge> = state
        .edges
        .iter()
        .map(|&(src, dst)| PipelineEdge { src, dst })
        .collect();
    edges.sort();
    PipelineGraph {
        graph_id,
        dataset_name: dataset_name.to_string(),
        nodes: state
            .types
            .iter()
            .enumerate()
            .map(|(id, &vocab_id)| PipelineNode { id, vocab_id })
            .collect(),
        edges,
    }
}

/// One rollout from the seed conditioned on `dataset_name`.
pub fn sample_once(
    model: &GeneratorModel,
    dataset_name: &str,
    max_nodes: usize,
    policy: &mut dyn Policy,
) -> Option<Rollout> {
    let mut tape = Tape::new(&model.params);
    let mut sink = Vec::new();
    rollout(&mut tape, model, model.dataset_row(dataset_name), max_nodes, policy, &mut sink)
}

/// Up to `k` distinct graphs that pass `accept`, sorted by log-probability.
pub fn generate(
    model: &GeneratorModel,
    dataset_name: &str,
    opts: &GenerateOptions,
    accept: &dyn Fn(&PipelineGraph) -> bool,
) -> Result<GenerationResult, GenerateError> {
    if opts.k == 0 || opts.max_nodes < 2 {
        return Err(GenerateError::BadOptions);
    }
    let start = Instant::now();
    let seed = match opts.mode {
        Mode::Greedy => 0,
        Mode::Sampled(s) => s,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut graphs = Vec::new();
    let mut rejected = 0;
    let budget = opts.k + opts.retries;
    let mut attempts = 0;
    while graphs.len() < opts.k && attempts < budget {
        let r = if attempts == 0 && opts.mode == Mode::Greedy {
            sample_once(model, dataset_name, opts.max_nodes, &mut Argmax)
        } else {
            sample_once(model, dataset_name, opts.max_nodes, &mut Ancestral(&mut rng))
        }
        .expect("generation policies never abort");
        attempts += 1;
        let g = state_to_graph(&r.state, format!("{dataset_name}-gen{}", graphs.len()), dataset_name);
        if !seen.insert(g.canonical_key()) {
            continue;
        }
        if !accept(&g) {
            rejected += 1;
            continue;
        }
        graphs.push(GeneratedGraph {
            graph: g,
            log_prob: r.log_prob,
            normalized_log_prob: r.log_prob / r.decisions.max(1) as f64,
        });
    }
    if graphs.is_empty() {
        return Err(GenerateError::NoValidGraph {
            dataset: dataset_name.to_string(),
            attempts,
        });
    }
    graphs.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
    for (i, g) in graphs.iter_mut().enumerate() {
        g.graph.graph_id = format!("{dataset_name}-gen{i}");
    }
    Ok(GenerationResult {
        dataset_name: dataset_name.to_string(),
        graphs,
        wall_time: start.elapsed().as_secs_f64(),
        attempts,
        rejected,
    })
}
