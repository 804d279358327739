//! Message passing, readout and the three decision heads.

use super::params::*;
use super::tape::{log_sigmoid_pair, log_softmax, Tape, Var};
use super::trace::{GenerationTrace, Step};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("trace {0} uses node type {1} outside the vocabulary")]
    VocabMismatch(String, u32),
    #[error("trace {0} does not match the decision process at step {1}")]
    TraceMismatch(String, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    pub rounds: usize,
    /// Sorted names of the datasets with a learned dataset-node embedding.
    pub datasets: Vec<String>,
    pub params: Params,
}

impl GeneratorModel {
    pub fn new(n_types: usize, hidden: usize, rounds: usize, mut datasets: Vec<String>, seed: u64) -> Self {
        datasets.sort();
        datasets.dedup();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = Params::xavier(n_types, datasets.len(), hidden, &mut rng);
        Self {
            rounds,
            datasets,
            params,
        }
    }

    pub fn n_types(&self) -> usize {
        self.params.n_types()
    }

    pub fn hidden(&self) -> usize {
        self.params.hidden()
    }

    pub fn dataset_row(&self, name: &str) -> Option<usize> {
        self.datasets.binary_search_by(|d| d.as_str().cmp(name)).ok()
    }

    pub fn knows_dataset(&self, name: &str) -> bool {
        self.dataset_row(name).is_some()
    }
}

/// A partial graph during generation: node types in generation order
/// (0 = DATASET, 1 = READ_CSV) and directed edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphState {
    pub types: Vec<u32>,
    pub edges: Vec<(usize, usize)>,
}

impl GraphState {
    pub fn seed() -> Self {
        Self {
            types: vec![crate::filter::vocab::DATASET, crate::filter::vocab::READ_CSV],
            edges: vec![(0, 1)],
        }
    }
}

pub struct Embedded {
    pub h: Vec<Var>,
    pub hg: Var,
}

/// `R` synchronous rounds from the initial type embeddings, then a gated
/// sum readout.
pub fn propagate(tape: &mut Tape, state: &GraphState, dataset_row: Option<usize>, rounds: usize) -> Embedded {
    let n = state.types.len();
    let hid = tape.params.hidden();
    let mut h: Vec<Var> = state.types.iter().map(|&t| tape.row(TYPE_EMB, t as usize)).collect();
    if let (Some(r), true) = (dataset_row, n > 0) {
        let d = tape.row(DATASET_EMB, r);
        h[0] = tape.add(h[0], d);
    }
    let mut nbrs: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for &(s, d) in &state.edges {
        nbrs[d].push((s, true));
        nbrs[s].push((d, false));
    }
    let zero = tape.constant(vec![0.0; hid]);
    for _ in 0..rounds {
        let plus = tape.constant(vec![1.0]);
        let minus = tape.constant(vec![-1.0]);
        let d_in = tape.affine(MSG_DIR, Some(MSG_B1), 1.0, plus);
        let d_out = tape.affine(MSG_DIR, Some(MSG_B1), 1.0, minus);
        let own: Vec<Var> = h.iter().map(|&x| tape.affine(MSG_SELF, None, 1.0, x)).collect();
        let other: Vec<Var> = h.iter().map(|&x| tape.affine(MSG_NBR, None, 1.0, x)).collect();
        let mut next = Vec::with_capacity(n);
        for v in 0..n {
            let agg = if nbrs[v].is_empty() {
                zero
            } else {
                let hidden: Vec<Var> = nbrs[v]
                    .iter()
                    .map(|&(u, incoming)| {
                        let a = tape.add(own[v], other[u]);
                        let b = tape.add(a, if incoming { d_in } else { d_out });
                        tape.tanh(b)
                    })
                    .collect();
                let s = tape.sum(hidden);
                tape.affine(MSG_W2, Some(MSG_B2), nbrs[v].len() as f64, s)
            };
            next.push(gru(tape, agg, h[v], hid));
        }
        h = next;
    }
    let terms: Vec<Var> = h
        .iter()
        .map(|&x| {
            let g = tape.affine(GATE_W, Some(GATE_B), 1.0, x);
            let g = tape.sigmoid(g);
            let p = tape.affine(PROJ_W, Some(PROJ_B), 1.0, x);
            tape.mul(g, p)
        })
        .collect();
    let hg = tape.sum(terms);
    Embedded { h, hg }
}

fn gru(tape: &mut Tape, a: Var, h: Var, n: usize) -> Var {
    let gi = tape.affine(GRU_WI, Some(GRU_BI), 1.0, a);
    let gh = tape.affine(GRU_WH, Some(GRU_BH), 1.0, h);
    let (ir, iz, inn) = (tape.slice(gi, 0, n), tape.slice(gi, n, n), tape.slice(gi, 2 * n, n));
    let (hr, hz, hn) = (tape.slice(gh, 0, n), tape.slice(gh, n, n), tape.slice(gh, 2 * n, n));
    let r = tape.add(ir, hr);
    let r = tape.sigmoid(r);
    let z = tape.add(iz, hz);
    let z = tape.sigmoid(z);
    let rh = tape.mul(r, hn);
    let cand = tape.add(inn, rh);
    let cand = tape.tanh(cand);
    let keep = tape.one_minus(z);
    let a = tape.mul(keep, cand);
    let b = tape.mul(z, h);
    tape.add(a, b)
}

/// The decision being asked of a policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    /// Options `0..|V|` add a node of that type; option `|V|` stops.
    AddNode,
    /// Option 0 = no edge, 1 = add an edge to the newest node.
    AddEdge,
    /// Options index into the candidate source nodes.
    Pick(Vec<usize>),
}

pub trait Policy {
    /// Picks an option given log-probabilities; `None` aborts the rollout.
    fn choose(&mut self, decision: &Decision, log_probs: &[f64]) -> Option<usize>;
    /// Called when a decision is forced and no choice is made.
    fn forced(&mut self, _decision: &Decision) -> Option<()> {
        Some(())
    }
}

pub struct Rollout {
    pub state: GraphState,
    /// Sum of chosen log-probabilities, including the stop at the cap.
    pub log_prob: f64,
    pub decisions: usize,
    /// Generation hit `max_nodes` and stopped without choosing to.
    pub truncated: bool,
    /// log P(stop) at the forced stop, 0 when not truncated.
    pub cap_stop_log_prob: f64,
}

/// Runs the decision process from the seed. Each choice adds its negative
/// log-probability to `losses` on the tape, so the same pass serves
/// generation and teacher-forced training.
pub fn rollout(
    tape: &mut Tape,
    model: &GeneratorModel,
    dataset_row: Option<usize>,
    max_nodes: usize,
    policy: &mut dyn Policy,
    losses: &mut Vec<Var>,
) -> Option<Rollout> {
    let n_types = model.n_types();
    let stop = n_types;
    let mut state = GraphState::seed();
    let mut log_prob = 0.0;
    let mut decisions = 0;
    let mut emb = propagate(tape, &state, dataset_row, model.rounds);
    loop {
        let logits = tape.affine(ADDNODE_W, Some(ADDNODE_B), 1.0, emb.hg);
        let lp = log_softmax(tape.value(logits));
        if state.types.len() >= max_nodes {
            policy.forced(&Decision::AddNode)?;
            return Some(Rollout {
                state,
                log_prob: log_prob + lp[stop],
                decisions: decisions + 1,
                truncated: true,
                cap_stop_log_prob: lp[stop],
            });
        }
        let c = policy.choose(&Decision::AddNode, &lp)?;
        log_prob += lp[c];
        decisions += 1;
        losses.push(tape.softmax_nll(logits, c));
        if c == stop {
            return Some(Rollout {
                state,
                log_prob,
                decisions,
                truncated: false,
                cap_stop_log_prob: 0.0,
            });
        }
        let new = state.types.len();
        state.types.push(c as u32);
        emb = propagate(tape, &state, dataset_row, model.rounds);
        loop {
            let candidates: Vec<usize> = (0..new)
                .filter(|&u| !state.edges.contains(&(u, new)))
                .collect();
            if candidates.is_empty() {
                policy.forced(&Decision::AddEdge)?;
                break;
            }
            let cat = tape.concat(vec![emb.hg, emb.h[new]]);
            let z = tape.affine(ADDEDGE_W, Some(ADDEDGE_B), 1.0, cat);
            let (ly, ln) = log_sigmoid_pair(tape.value(z)[0]);
            let c = policy.choose(&Decision::AddEdge, &[ln, ly])?;
            log_prob += if c == 1 { ly } else { ln };
            decisions += 1;
            losses.push(tape.sigmoid_nll(z, c == 1));
            if c == 0 {
                break;
            }
            let wn = tape.affine(PICK_W, None, 1.0, emb.h[new]);
            let scores: Vec<Var> = candidates
                .iter()
                .map(|&u| {
                    let bil = tape.dot(emb.h[u], wn);
                    let lin = tape.affine(PICK_V, None, 1.0, emb.h[u]);
                    tape.add(bil, lin)
                })
                .collect();
            let scores = tape.concat(scores);
            let lp = log_softmax(tape.value(scores));
            let decision = Decision::Pick(candidates);
            let c = policy.choose(&decision, &lp)?;
            log_prob += lp[c];
            decisions += 1;
            losses.push(tape.softmax_nll(scores, c));
            let Decision::Pick(candidates) = decision else { unreachable!() };
            state.edges.push((candidates[c], new));
            emb = propagate(tape, &state, dataset_row, model.rounds);
        }
    }
}

/// Replays a recorded trace as the policy.
struct Teacher<'a> {
    steps: &'a [Step],
    pos: usize,
    n_types: usize,
}

impl Teacher<'_> {
    fn next(&mut self) -> Option<Step> {
        let s = self.steps.get(self.pos).copied();
        self.pos += 1;
        s
    }
}

impl Policy for Teacher<'_> {
    fn choose(&mut self, decision: &Decision, _lp: &[f64]) -> Option<usize> {
        match (decision, self.next()?) {
            (Decision::AddNode, Step::AddNode(t)) => Some(t as usize),
            (Decision::AddNode, Step::StopNodes) => Some(self.n_types),
            (Decision::AddEdge, Step::AddEdgeYes) => Some(1),
            (Decision::AddEdge, Step::AddEdgeNo) => Some(0),
            (Decision::Pick(c), Step::PickNode(p)) => c.iter().position(|&u| u == p),
            _ => None,
        }
    }

    fn forced(&mut self, decision: &Decision) -> Option<()> {
        match (decision, self.next()?) {
            (Decision::AddEdge, Step::AddEdgeNo) | (Decision::AddNode, Step::StopNodes) => Some(()),
            _ => None,
        }
    }
}

/// Teacher-forced negative log-likelihood of a trace and its gradient.
pub fn trace_nll(model: &GeneratorModel, trace: &GenerationTrace) -> Result<(f64, Params), ModelError> {
    for s in &trace.steps {
        if let Step::AddNode(t) = s {
            if *t as usize >= model.n_types() {
                return Err(ModelError::VocabMismatch(trace.graph_id.clone(), *t));
            }
        }
    }
    let mut tape = Tape::new(&model.params);
    let mut teacher = Teacher {
        steps: &trace.steps,
        pos: 0,
        n_types: model.n_types(),
    };
    let mut losses = Vec::new();
    let row = model.dataset_row(&trace.dataset_name);
    let r = rollout(&mut tape, model, row, usize::MAX, &mut teacher, &mut losses);
    match r {
        Some(r) if teacher.pos == trace.steps.len() => Ok((-r.log_prob, tape.backward(&losses))),
        _ => Err(ModelError::TraceMismatch(trace.graph_id.clone(), teacher.pos.saturating_sub(1))),
    }
}

/// Loss only, without building gradients.
pub fn trace_loss(model: &GeneratorModel, trace: &GenerationTrace) -> Result<f64, ModelError> {
    let mut tape = Tape::new(&model.params);
    let mut teacher = Teacher {
        steps: &trace.steps,
        pos: 0,
        n_types: model.n_types(),
    };
    let mut losses = Vec::new();
    let row = model.dataset_row(&trace.dataset_name);
    match rollout(&mut tape, model, row, usize::MAX, &mut teacher, &mut losses) {
        Some(r) if teacher.pos == trace.steps.len() => Ok(-r.log_prob),
        _ => Err(ModelError::TraceMismatch(trace.graph_id.clone(), teacher.pos.saturating_sub(1))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(n_types: usize, h: usize, rounds: usize) -> GeneratorModel {
        GeneratorModel::new(n_types, h, rounds, vec!["d".into()], 7)
    }

    #[test]
    fn uniform_stop_is_ln_five() {
        let mut m = model(4, 8, 2);
        for k in [ADDNODE_W, ADDNODE_B] {
            m.params.tensors[k].data.iter_mut().for_each(|x| *x = 0.0);
        }
        let t = GenerationTrace {
            graph_id: "s".into(),
            dataset_name: "d".into(),
            steps: vec![Step::StopNodes],
        };
        let (loss, _) = trace_nll(&m, &t).unwrap();
        assert!((loss - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_rounds_keep_type_embeddings() {
        let m = model(5, 4, 0);
        let mut tape = Tape::new(&m.params);
        let s = GraphState {
            types: vec![0, 1, 3],
            edges: vec![(0, 1), (1, 2)],
        };
        let e = propagate(&mut tape, &s, None, 0);
        for (v, &t) in s.types.iter().enumerate() {
            assert_eq!(tape.value(e.h[v]), m.params.tensors[TYPE_EMB].row(t as usize));
        }
    }

    #[test]
    fn isolated_node_aggregate_is_zero() {
        let m = model(5, 4, 2);
        let mut tape = Tape::new(&m.params);
        let s = GraphState {
            types: vec![3],
            edges: vec![],
        };
        let e = propagate(&mut tape, &s, None, 2);
        // same result as two GRU steps on a zero message
        let mut t2 = Tape::new(&m.params);
        let mut h = t2.row(TYPE_EMB, 3);
        let z = t2.constant(vec![0.0; 4]);
        for _ in 0..2 {
            h = gru(&mut t2, z, h, 4);
        }
        assert_eq!(tape.value(e.h[0]), t2.value(h));
        let g = t2.affine(GATE_W, Some(GATE_B), 1.0, h);
        let g = t2.sigmoid(g);
        let p = t2.affine(PROJ_W, Some(PROJ_B), 1.0, h);
        let hg = t2.mul(g, p);
        assert_eq!(tape.value(e.hg), t2.value(hg));
    }

    #[test]
    fn unknown_type_is_vocab_mismatch() {
        let m = model(4, 4, 1);
        let t = GenerationTrace {
            graph_id: "x".into(),
            dataset_name: "d".into(),
            steps: vec![Step::AddNode(9), Step::AddEdgeNo, Step::StopNodes],
        };
        assert_eq!(trace_nll(&m, &t).unwrap_err(), ModelError::VocabMismatch("x".into(), 9));
    }
}
