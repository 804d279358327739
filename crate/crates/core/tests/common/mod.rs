#![allow(dead_code)]

use pipeforge::commands::{self, MineArgs, RecommendArgs, TrainArgs};
use pipeforge::config::Config;
use pipeforge::filter::NodeVocabulary;
use pipeforge::generator::model::{rollout, Policy};
use pipeforge::generator::tape::Tape;
use pipeforge::generator::{canonicalize_trace, trace_loss, trace_nll, Decision, GenerationTrace, GeneratorModel, Mode};
use pipeforge::pipeline::{PipelineEdge, PipelineGraph, PipelineNode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn scripts_dir() -> PathBuf {
    fixtures().join("corpus/scripts")
}

pub fn datasets_dir() -> PathBuf {
    fixtures().join("corpus/datasets")
}

pub fn unseen_csv() -> PathBuf {
    fixtures().join("unseen/retail_churn.csv")
}

pub fn registry(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/registries")
        .join(format!("{name}.json"))
}

/// A fresh directory under the cargo test temp root.
pub fn scratch(name: &str) -> PathBuf {
    let p = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&p);
    std::fs::create_dir_all(&p).unwrap();
    p
}

pub fn mine_args(out: &Path) -> MineArgs {
    MineArgs {
        scripts_dir: scripts_dir(),
        datasets_dir: datasets_dir(),
        sidecar: None,
        out: out.to_path_buf(),
        vocabulary: None,
        delimiter: b',',
    }
}

pub struct Workspace {
    pub root: PathBuf,
    pub cfg: Config,
}

impl Workspace {
    /// Mines the fixture corpus into `<tmp>/<name>/corpus`.
    pub fn mined(name: &str) -> Self {
        let root = scratch(name);
        let cfg = Config::default().rooted(&root);
        commands::cmd_mine(&mine_args(&cfg.corpus_dir), &cfg).unwrap();
        Self { root, cfg }
    }

    pub fn train_args(&self, out: &Path, epochs: usize) -> TrainArgs {
        TrainArgs {
            corpus: self.cfg.corpus_dir.clone(),
            epochs,
            learning_rate: 1e-3,
            out: out.to_path_buf(),
        }
    }

    pub fn recommend_args(&self, dataset: &Path, registry_name: &str, k: usize) -> RecommendArgs {
        RecommendArgs {
            dataset: dataset.to_path_buf(),
            target: None,
            budget: None,
            k,
            registry: registry(registry_name),
            model: self.cfg.model_file.clone(),
            index: self.cfg.corpus_dir.join(commands::INDEX_FILE),
            vocabulary: self.cfg.corpus_dir.join(commands::VOCABULARY_FILE),
            mode: Mode::Greedy,
            delimiter: b',',
            prepare_dir: None,
        }
    }

    pub fn vocab(&self) -> NodeVocabulary {
        commands::load_vocabulary(&self.cfg.corpus_dir.join(commands::VOCABULARY_FILE)).unwrap()
    }

    pub fn graphs(&self) -> Vec<PipelineGraph> {
        commands::load_graphs(&self.cfg.corpus_dir.join(commands::PIPELINE_GRAPHS_FILE)).unwrap()
    }
}

/// Follows a fixed choice path; on the first decision past its end it
/// records the number of options and aborts.
struct Scripted<'a> {
    path: &'a [usize],
    pos: usize,
    branch: Option<usize>,
}

impl Policy for Scripted<'_> {
    fn choose(&mut self, _d: &Decision, lp: &[f64]) -> Option<usize> {
        if let Some(&c) = self.path.get(self.pos) {
            self.pos += 1;
            Some(c)
        } else {
            self.branch = Some(lp.len());
            None
        }
    }
}

pub struct Enumeration {
    pub mass: f64,
    pub leaves: usize,
    pub truncated: usize,
}

/// Exhaustive walk of the generation decision tree. A leaf that stopped at
/// the node cap contributes the mass of its prefix (the forced stop is not
/// a modelled choice).
pub fn enumerate(model: &GeneratorModel, dataset_row: Option<usize>, max_nodes: usize) -> Enumeration {
    let mut out = Enumeration {
        mass: 0.0,
        leaves: 0,
        truncated: 0,
    };
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(path) = stack.pop() {
        let mut tape = Tape::new(&model.params);
        let mut sink = Vec::new();
        let mut pol = Scripted {
            path: &path,
            pos: 0,
            branch: None,
        };
        match rollout(&mut tape, model, dataset_row, max_nodes, &mut pol, &mut sink) {
            Some(r) => {
                out.leaves += 1;
                let mut lp = r.log_prob;
                if r.truncated {
                    out.truncated += 1;
                    lp -= r.cap_stop_log_prob;
                }
                out.mass += lp.exp();
            }
            None => {
                let b = pol.branch.expect("aborted rollout records its branching");
                for c in 0..b {
                    let mut p = path.clone();
                    p.push(c);
                    stack.push(p);
                }
            }
        }
    }
    out
}

/// Every parameter drawn uniformly from `[-scale, scale]`, biases included.
pub fn randomize(model: &mut GeneratorModel, rng: &mut ChaCha8Rng, scale: f64) {
    for t in &mut model.params.tensors {
        for x in &mut t.data {
            *x = rng.random_range(-scale..scale);
        }
    }
}

/// A random valid pipeline graph over operator types `3..n_types`.
pub fn random_graph(rng: &mut ChaCha8Rng, n_types: u32, extra_nodes: usize, dataset: &str) -> PipelineGraph {
    let mut g = PipelineGraph::seed("rand", dataset);
    for i in 0..extra_nodes {
        let id = i + 2;
        g.nodes.push(PipelineNode {
            id,
            vocab_id: rng.random_range(3..n_types),
        });
        let mut srcs: Vec<usize> = (1..id).filter(|_| rng.random_bool(0.4)).collect();
        if srcs.is_empty() {
            srcs.push(rng.random_range(1..id));
        }
        g.edges.extend(srcs.into_iter().map(|src| PipelineEdge { src, dst: id }));
    }
    g
}

pub struct GradInstance {
    pub model: GeneratorModel,
    pub trace: GenerationTrace,
}

pub fn grad_instance(seed: u64) -> GradInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_types = rng.random_range(5..8u32);
    let h = rng.random_range(2..5usize);
    let rounds = rng.random_range(0..3usize);
    let mut model = GeneratorModel::new(n_types as usize, h, rounds, vec!["d0".into(), "d1".into()], seed);
    randomize(&mut model, &mut rng, 0.8);
    let ds = ["d0", "d1", "other"][rng.random_range(0..3)];
    let extra = rng.random_range(0..5);
    let g = random_graph(&mut rng, n_types, extra, ds);
    let mut trace = canonicalize_trace(&g).unwrap();
    trace.dataset_name = ds.into();
    GradInstance { model, trace }
}

/// Largest relative error between the analytic gradient and central
/// differences (step `eps`) over coordinates whose gradient magnitude
/// exceeds `floor`; below the floor the absolute error is folded in
/// relative to the floor.
pub fn grad_check(inst: &GradInstance, eps: f64, floor: f64) -> (f64, usize) {
    let (_, grad) = trace_nll(&inst.model, &inst.trace).unwrap();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut m = inst.model.clone();
    for k in 0..grad.tensors.len() {
        for i in 0..grad.tensors[k].data.len() {
            let x0 = m.params.tensors[k].data[i];
            m.params.tensors[k].data[i] = x0 + eps;
            let hi = trace_loss(&m, &inst.trace).unwrap();
            m.params.tensors[k].data[i] = x0 - eps;
            let lo = trace_loss(&m, &inst.trace).unwrap();
            m.params.tensors[k].data[i] = x0;
            let fd = (hi - lo) / (2.0 * eps);
            let an = grad.tensors[k].data[i];
            let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(floor);
            worst = worst.max(rel);
            checked += 1;
        }
    }
    (worst, checked)
}
