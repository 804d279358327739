//! Mine ML pipeline scripts into operator graphs, learn a generative model
//! over them, and recommend pipeline skeletons for unseen tabular datasets.

pub mod commands;
pub mod config;
pub mod filter;
pub mod generator;
pub mod metrics;
pub mod pipeline;
pub mod prep;
pub mod profile;
pub mod script;
pub mod skeleton;
pub mod table;

/// Kahn topological order of `n` nodes; `None` when the edges contain a cycle.
pub fn topo_order(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; n];
    let mut adj = vec![Vec::new(); n];
    for (s, d) in edges {
        adj[s].push(d);
        indeg[d] += 1;
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.insert(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}
