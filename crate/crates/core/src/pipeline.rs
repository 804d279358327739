//! Filtered operator graph rooted at a dataset node: the training and
//! generation unit shared by the filter, the generator and the mapper.

use crate::filter::vocab::{NodeVocabulary, DATASET, READ_CSV};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PipelineNode {
    pub id: usize,
    pub vocab_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PipelineEdge {
    pub src: usize,
    pub dst: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineGraph {
    pub graph_id: String,
    pub dataset_name: String,
    pub nodes: Vec<PipelineNode>,
    pub edges: Vec<PipelineEdge>,
}

pub const DEFAULT_MAX_NODES: usize = 64;

impl PipelineGraph {
    /// The two-node seed `DATASET -> READ_CSV`.
    pub fn seed(graph_id: impl Into<String>, dataset_name: impl Into<String>) -> Self {
        Self {
            graph_id: graph_id.into(),
            dataset_name: dataset_name.into(),
            nodes: vec![
                PipelineNode { id: 0, vocab_id: DATASET },
                PipelineNode { id: 1, vocab_id: READ_CSV },
            ],
            edges: vec![PipelineEdge { src: 0, dst: 1 }],
        }
    }

    pub fn vocab_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.nodes.iter().map(|n| n.vocab_id)
    }

    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.src].push(e.dst);
        }
        adj
    }

    /// Nodes reachable from `start` along directed edges, `start` included.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let adj = self.out_adjacency();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Checks every structural invariant of a training/generation unit.
    pub fn validate(&self, vocab: &NodeVocabulary, max_nodes: usize) -> Result<(), String> {
        let n = self.nodes.len();
        if n > max_nodes {
            return Err(format!("{n} nodes exceeds the cap of {max_nodes}"));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(format!("node ids not dense at {i}"));
            }
            if node.vocab_id as usize >= vocab.len() {
                return Err(format!("vocab id {} out of range", node.vocab_id));
            }
        }
        let find_one = |ty: u32, name: &str| -> Result<usize, String> {
            let hits: Vec<usize> = self
                .nodes
                .iter()
                .filter(|x| x.vocab_id == ty)
                .map(|x| x.id)
                .collect();
            match hits.as_slice() {
                [one] => Ok(*one),
                _ => Err(format!("expected exactly one {name} node, found {}", hits.len())),
            }
        };
        let dataset = find_one(DATASET, "DATASET")?;
        let read = find_one(READ_CSV, "READ_CSV")?;
        for e in &self.edges {
            if e.src >= n || e.dst >= n {
                return Err(format!("dangling edge {}->{}", e.src, e.dst));
            }
            if e.src == e.dst {
                return Err(format!("self loop at {}", e.src));
            }
        }
        if !self.edges.iter().any(|e| e.src == dataset && e.dst == read) {
            return Err("missing DATASET -> READ_CSV edge".into());
        }
        if self.edges.iter().any(|e| e.dst == dataset || (e.dst == read && e.src != dataset)) {
            return Err("seed nodes must only be fed by the seed edge".into());
        }
        if crate::topo_order(n, self.edges.iter().map(|e| (e.src, e.dst))).is_none() {
            return Err("graph has a cycle".into());
        }
        // weak connectivity
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.src].push(e.dst);
            adj[e.dst].push(e.src);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![dataset];
        seen[dataset] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(format!("node {i} is disconnected"));
        }
        Ok(())
    }

    /// Label-preserving canonical string: equal for isomorphic graphs whose
    /// canonical traversal orders agree.
    pub fn canonical_key(&self) -> String {
        match crate::generator::trace::canonical_order(self) {
            Some(order) => {
                let mut pos = vec![0usize; self.nodes.len()];
                for (i, &v) in order.iter().enumerate() {
                    pos[v] = i;
                }
                let types: Vec<String> = order
                    .iter()
                    .map(|&v| self.nodes[v].vocab_id.to_string())
                    .collect();
                let mut edges: Vec<(usize, usize)> =
                    self.edges.iter().map(|e| (pos[e.src], pos[e.dst])).collect();
                edges.sort_unstable();
                edges.dedup();
                let edges: Vec<String> = edges.iter().map(|(a, b)| format!("{a}>{b}")).collect();
                format!("{}|{}", types.join(","), edges.join(","))
            }
            None => format!("invalid:{:?}", self.edges),
        }
    }
}

pub fn write_jsonl<T: Serialize>(items: &[T], mut w: impl Write) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(r: impl BufRead) -> std::io::Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1))
        })?;
        out.push(item);
    }
    Ok(out)
}
