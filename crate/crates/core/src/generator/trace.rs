//! Canonical decision sequences for pipeline graphs.

use crate::filter::vocab::{DATASET, READ_CSV};
use crate::pipeline::{PipelineEdge, PipelineGraph, PipelineNode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Step {
    AddNode(u32),
    StopNodes,
    AddEdgeYes,
    AddEdgeNo,
    /// Index of an existing node in generation order.
    PickNode(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub graph_id: String,
    pub dataset_name: String,
    pub steps: Vec<Step>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("graph {0} is not a valid seed-rooted DAG")]
    InvalidGraph(String),
    #[error("malformed trace at step {0}")]
    Malformed(usize),
}

/// Generation order: the seed pair first, then Kahn's algorithm with a FIFO
/// queue; nodes released by the same predecessor are queued by
/// (vocab_id, id). Every edge therefore points from an earlier node to a
/// later one. `None` when the graph has no unique seed or has a cycle.
pub fn canonical_order(g: &PipelineGraph) -> Option<Vec<usize>> {
    let n = g.nodes.len();
    let of_type = |t: u32| -> Option<usize> {
        let mut it = g.nodes.iter().filter(|x| x.vocab_id == t);
        let first = it.next()?;
        it.next().is_none().then_some(first.id)
    };
    let dataset = of_type(DATASET)?;
    let read = of_type(READ_CSV)?;
    let mut indeg = vec![0usize; n];
    let mut adj = vec![Vec::new(); n];
    for e in &g.edges {
        if e.src >= n || e.dst >= n {
            return None;
        }
        adj[e.src].push(e.dst);
        indeg[e.dst] += 1;
    }
    if indeg[dataset] != 0 {
        return None;
    }
    let mut queue = std::collections::VecDeque::from([dataset]);
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let mut released = Vec::new();
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                released.push(w);
            }
        }
        released.sort_by_key(|&w| (g.nodes[w].vocab_id, w));
        queue.extend(released);
    }
    (order.len() == n && order.get(1) == Some(&read)).then_some(order)
}

/// `g` with node ids renumbered into canonical order and edges sorted.
pub fn canonical_relabel(g: &PipelineGraph) -> Option<PipelineGraph> {
    let order = canonical_order(g)?;
    let mut pos = vec![0usize; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut edges: Vec<PipelineEdge> = g
        .edges
        .iter()
        .map(|e| PipelineEdge {
            src: pos[e.src],
            dst: pos[e.dst],
        })
        .collect();
    edges.sort();
    edges.dedup();
    Some(PipelineGraph {
        graph_id: g.graph_id.clone(),
        dataset_name: g.dataset_name.clone(),
        nodes: order
            .iter()
            .enumerate()
            .map(|(i, &v)| PipelineNode {
                id: i,
                vocab_id: g.nodes[v].vocab_id,
            })
            .collect(),
        edges,
    })
}

pub fn canonicalize_trace(g: &PipelineGraph) -> Result<GenerationTrace, TraceError> {
    let c = canonical_relabel(g).ok_or_else(|| TraceError::InvalidGraph(g.graph_id.clone()))?;
    let mut preds = vec![Vec::new(); c.nodes.len()];
    for e in &c.edges {
        preds[e.dst].push(e.src);
    }
    if preds[1] != [0] {
        return Err(TraceError::InvalidGraph(g.graph_id.clone()));
    }
    let mut steps = Vec::new();
    for (v, node) in c.nodes.iter().enumerate().skip(2) {
        steps.push(Step::AddNode(node.vocab_id));
        for &p in &preds[v] {
            steps.push(Step::AddEdgeYes);
            steps.push(Step::PickNode(p));
        }
        steps.push(Step::AddEdgeNo);
    }
    steps.push(Step::StopNodes);
    Ok(GenerationTrace {
        graph_id: g.graph_id.clone(),
        dataset_name: g.dataset_name.clone(),
        steps,
    })
}

/// Rebuilds the graph a trace describes, nodes in generation order.
pub fn replay(trace: &GenerationTrace) -> Result<PipelineGraph, TraceError> {
    let mut g = PipelineGraph::seed(trace.graph_id.clone(), trace.dataset_name.clone());
    let mut i = 0;
    let steps = &trace.steps;
    loop {
        match steps.get(i) {
            Some(Step::StopNodes) if i + 1 == steps.len() => break,
            Some(Step::AddNode(t)) => {
                let new = g.nodes.len();
                g.nodes.push(PipelineNode {
                    id: new,
                    vocab_id: *t,
                });
                i += 1;
                loop {
                    match (steps.get(i), steps.get(i + 1)) {
                        (Some(Step::AddEdgeNo), _) => {
                            i += 1;
                            break;
                        }
                        (Some(Step::AddEdgeYes), Some(Step::PickNode(p))) => {
                            let e = PipelineEdge { src: *p, dst: new };
                            if *p >= new || g.edges.contains(&e) {
                                return Err(TraceError::Malformed(i + 1));
                            }
                            g.edges.push(e);
                            i += 2;
                        }
                        _ => return Err(TraceError::Malformed(i)),
                    }
                }
            }
            _ => return Err(TraceError::Malformed(i)),
        }
    }
    g.edges.sort();
    Ok(g)
}
