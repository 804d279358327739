//! Reduce code graphs to the ML-operator core and link them to a dataset.

pub mod vocab;

pub use vocab::{build_vocabulary, Category, NodeVocabulary, OperatorEntry, VocabError};

use crate::pipeline::{PipelineEdge, PipelineGraph, PipelineNode, DEFAULT_MAX_NODES};
use crate::script::{is_read_like, CodeGraph, EdgeKind, NodeKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use vocab::{DATASET, READ_CSV};

pub const UNKNOWN_DATASET: &str = "UNKNOWN_DATASET";
const TARGET_LIBRARIES: &[&str] = &["sklearn", "xgboost", "lightgbm"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RejectReason {
    NoEstimator,
    TooLarge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Filtered {
    Kept(PipelineGraph),
    Rejected(RejectReason),
}

#[derive(Debug, Clone, Copy)]
pub struct FilterOptions {
    pub max_nodes: usize,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

/// Maps a code-graph call label onto an operator id. The flag is true when
/// the call is a method on the operator (`LogisticRegression.fit`) rather
/// than its constructor or the function itself.
pub fn match_operator(label: &str, vocab: &NodeVocabulary) -> Option<(u32, bool)> {
    if is_read_like(label) {
        return Some((READ_CSV, false));
    }
    let segs: Vec<&str> = label.split('.').collect();
    let n = segs.len();
    let in_library = |prefix: &[&str]| prefix.is_empty() || TARGET_LIBRARIES.contains(&prefix[0]);
    if vocab.is_operator(segs[n - 1]) && in_library(&segs[..n - 1]) {
        return vocab.id(segs[n - 1]).map(|id| (id, false));
    }
    if n >= 2 && vocab.is_operator(segs[n - 2]) && in_library(&segs[..n - 2]) {
        return vocab.id(segs[n - 2]).map(|id| (id, true));
    }
    None
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller id becomes the root so groups are keyed by first occurrence
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

pub fn filter_graph(
    g: &CodeGraph,
    vocab: &NodeVocabulary,
    dataset_name: &str,
    opts: &FilterOptions,
) -> Filtered {
    let n = g.nodes.len();
    let matched: Vec<Option<(u32, bool)>> = g
        .nodes
        .iter()
        .map(|node| match node.kind {
            NodeKind::CallSite => match_operator(&node.label, vocab),
            _ => None,
        })
        .collect();

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.data_flow() {
        preds[e.dst].push(e.src);
        succs[e.src].push(e.dst);
    }

    // collapse constructor + method calls on the same operator, and all reads
    let mut uf = UnionFind((0..n).collect());
    let mut first_read: Option<usize> = None;
    for i in 0..n {
        let Some((id, is_method)) = matched[i] else { continue };
        if id == READ_CSV {
            match first_read {
                Some(r) => uf.union(r, i),
                None => first_read = Some(i),
            }
        } else if is_method {
            for &p in &preds[i] {
                if matched[p].is_some_and(|(pid, _)| pid == id) {
                    uf.union(p, i);
                }
            }
        }
    }

    // pipeline node ids: DATASET 0, READ_CSV 1, operators by first occurrence
    let mut group_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut nodes = vec![
        PipelineNode { id: 0, vocab_id: DATASET },
        PipelineNode { id: 1, vocab_id: READ_CSV },
    ];
    if let Some(r) = first_read {
        group_of_root.insert(uf.find(r), 1);
    }
    let mut group = vec![usize::MAX; n];
    for i in 0..n {
        let Some((id, _)) = matched[i] else { continue };
        let root = uf.find(i);
        let gid = *group_of_root.entry(root).or_insert_with(|| {
            nodes.push(PipelineNode {
                id: nodes.len(),
                vocab_id: id,
            });
            nodes.len() - 1
        });
        group[i] = gid;
    }

    // contract data flow across removed nodes
    let mut candidate: BTreeSet<(usize, usize)> = BTreeSet::new();
    for u in (0..n).filter(|&u| matched[u].is_some()) {
        let mut stack: Vec<usize> = succs[u].clone();
        let mut seen = vec![false; n];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if matched[v].is_some() {
                candidate.insert((u, v));
            } else {
                stack.extend(succs[v].iter().copied());
            }
        }
    }

    let k = nodes.len();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    adj[0].insert(1);
    for (u, v) in candidate {
        let (a, b) = (group[u], group[v]);
        // the read node is fed by the dataset only
        if a == b || b == 1 || adj[a].contains(&b) {
            continue;
        }
        // merging calls into operator nodes can close a loop; keep the DAG
        if reaches(&adj, b, a) {
            continue;
        }
        adj[a].insert(b);
    }
    let mut indeg = vec![0usize; k];
    for succ in &adj {
        for &b in succ {
            indeg[b] += 1;
        }
    }
    for (gid, &d) in indeg.iter().enumerate().skip(2) {
        if d == 0 {
            adj[1].insert(gid);
        }
    }

    if !nodes
        .iter()
        .any(|x| vocab.category(x.vocab_id) == Some(Category::Estimator))
    {
        return Filtered::Rejected(RejectReason::NoEstimator);
    }
    if k > opts.max_nodes {
        return Filtered::Rejected(RejectReason::TooLarge);
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(a, succ)| succ.iter().map(move |&b| PipelineEdge { src: a, dst: b }))
        .collect();
    Filtered::Kept(PipelineGraph {
        graph_id: g.script_id.clone(),
        dataset_name: dataset_name.to_string(),
        nodes,
        edges,
    })
}

fn reaches(adj: &[BTreeSet<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend(adj[v].iter().copied());
        }
    }
    false
}

/// Dataset a script reads: the first literal path flowing into a read call
/// (basename), else the sidecar entry for the script, else the sentinel.
pub fn resolve_dataset_name(g: &CodeGraph, sidecar: &HashMap<String, String>) -> String {
    for e in g.data_flow() {
        let (src, dst) = (&g.nodes[e.src], &g.nodes[e.dst]);
        if src.kind == NodeKind::DataSource && dst.kind == NodeKind::CallSite && is_read_like(&dst.label) {
            let base = src.label.rsplit(['/', '\\']).next().unwrap_or(&src.label);
            if !base.is_empty() {
                return base.to_string();
            }
        }
    }
    sidecar
        .get(&g.script_id)
        .cloned()
        .unwrap_or_else(|| UNKNOWN_DATASET.to_string())
}

/// Basename, lowercased, extension stripped. The sentinel passes through.
pub fn normalize_dataset_name(name: &str) -> String {
    if name == UNKNOWN_DATASET {
        return name.to_string();
    }
    let base = name.rsplit(['/', '\\']).next().unwrap_or(name);
    let stem = match base.rfind('.') {
        Some(i) if i > 0 => &base[..i],
        _ => base,
    };
    stem.to_lowercase()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub scripts_in: usize,
    pub graphs_out: usize,
    /// Node/edge totals over the kept graphs, before and after filtering.
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub edges_before: usize,
    pub edges_after: usize,
    pub reduction_rate_nodes: f64,
    pub reduction_rate_edges: f64,
    pub rejected_no_estimator: usize,
    pub rejected_too_large: usize,
    pub unknown_dataset: usize,
}

impl FilterReport {
    fn finish(mut self) -> Self {
        let rate = |after: usize, before: usize| {
            if before == 0 {
                0.0
            } else {
                1.0 - after as f64 / before as f64
            }
        };
        self.reduction_rate_nodes = rate(self.nodes_after, self.nodes_before);
        self.reduction_rate_edges = rate(self.edges_after, self.edges_before);
        self
    }

    /// Combined node+edge reduction.
    pub fn reduction_rate_total(&self) -> f64 {
        let before = self.nodes_before + self.edges_before;
        if before == 0 {
            return 0.0;
        }
        1.0 - (self.nodes_after + self.edges_after) as f64 / before as f64
    }

    /// Associative merge of two partial reports.
    pub fn merge(&self, other: &FilterReport) -> FilterReport {
        FilterReport {
            scripts_in: self.scripts_in + other.scripts_in,
            graphs_out: self.graphs_out + other.graphs_out,
            nodes_before: self.nodes_before + other.nodes_before,
            nodes_after: self.nodes_after + other.nodes_after,
            edges_before: self.edges_before + other.edges_before,
            edges_after: self.edges_after + other.edges_after,
            reduction_rate_nodes: 0.0,
            reduction_rate_edges: 0.0,
            rejected_no_estimator: self.rejected_no_estimator + other.rejected_no_estimator,
            rejected_too_large: self.rejected_too_large + other.rejected_too_large,
            unknown_dataset: self.unknown_dataset + other.unknown_dataset,
        }
        .finish()
    }
}

pub fn filter_corpus(
    graphs: &[CodeGraph],
    vocab: &NodeVocabulary,
    sidecar: &HashMap<String, String>,
    opts: &FilterOptions,
) -> (Vec<PipelineGraph>, FilterReport) {
    let mut out = Vec::new();
    let mut report = FilterReport {
        scripts_in: graphs.len(),
        ..Default::default()
    };
    for g in graphs {
        let name = normalize_dataset_name(&resolve_dataset_name(g, sidecar));
        match filter_graph(g, vocab, &name, opts) {
            Filtered::Kept(p) => {
                report.graphs_out += 1;
                report.nodes_before += g.nodes.len();
                report.edges_before += g.edges.len();
                report.nodes_after += p.nodes.len();
                report.edges_after += p.edges.len();
                if name == UNKNOWN_DATASET {
                    report.unknown_dataset += 1;
                }
                out.push(p);
            }
            Filtered::Rejected(RejectReason::NoEstimator) => report.rejected_no_estimator += 1,
            Filtered::Rejected(RejectReason::TooLarge) => report.rejected_too_large += 1,
        }
    }
    (out, report.finish())
}

/// Rebuilds a code graph whose call labels are exactly the vocabulary
/// labels of `p` (used to check filtering idempotence).
pub fn as_code_graph(p: &PipelineGraph, vocab: &NodeVocabulary) -> CodeGraph {
    use crate::script::{CodeEdge, CodeNode};
    let skip = p.nodes.iter().filter(|n| n.vocab_id == DATASET).count();
    let remap: Vec<Option<usize>> = {
        let mut next = 0;
        p.nodes
            .iter()
            .map(|n| {
                if n.vocab_id == DATASET {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let nodes = p
        .nodes
        .iter()
        .filter(|n| n.vocab_id != DATASET)
        .enumerate()
        .map(|(i, n)| CodeNode {
            id: i,
            kind: NodeKind::CallSite,
            label: if n.vocab_id == READ_CSV {
                "pandas.read_csv".to_string()
            } else {
                vocab.label(n.vocab_id).unwrap_or("?").to_string()
            },
            line: i as u32 + 1,
        })
        .collect();
    let _ = skip;
    let edges = p
        .edges
        .iter()
        .filter_map(|e| Some((remap[e.src]?, remap[e.dst]?)))
        .map(|(src, dst)| CodeEdge {
            src,
            dst,
            kind: EdgeKind::DataFlow,
        })
        .collect();
    CodeGraph {
        script_id: p.graph_id.clone(),
        nodes,
        edges,
    }
}
