//! Per-script code graph: call sites linked by data flow and control flow.

use super::ast::{Expr, LiteralKind, StatementList, StmtKind, Target};
use super::resolve::{is_builtin, is_read_like, AliasEnv, Resolver};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    CallSite,
    DataSource,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    DataFlow,
    ControlFlow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeNode {
    pub id: usize,
    pub kind: NodeKind,
    pub label: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeEdge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeGraph {
    pub script_id: String,
    pub nodes: Vec<CodeNode>,
    pub edges: Vec<CodeEdge>,
}

impl CodeGraph {
    pub fn empty(script_id: impl Into<String>) -> Self {
        Self {
            script_id: script_id.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn data_flow(&self) -> impl Iterator<Item = &CodeEdge> {
        self.edges.iter().filter(|e| e.kind == EdgeKind::DataFlow)
    }

    /// Checks the structural invariants; returns a description of the first violation.
    pub fn validate(&self) -> Result<(), String> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(format!("node ids not dense at {i}"));
            }
            if n.label.is_empty() || n.label.chars().any(char::is_whitespace) {
                return Err(format!("bad label {:?}", n.label));
            }
        }
        let mut cf_out = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            if e.src >= self.nodes.len() || e.dst >= self.nodes.len() {
                return Err(format!("dangling edge {}->{}", e.src, e.dst));
            }
            if e.kind == EdgeKind::ControlFlow {
                cf_out[e.src] += 1;
                if cf_out[e.src] > 1 {
                    return Err(format!("node {} has two control-flow successors", e.src));
                }
            }
        }
        if crate::topo_order(self.nodes.len(), self.data_flow().map(|e| (e.src, e.dst))).is_none() {
            return Err("data-flow cycle".into());
        }
        Ok(())
    }
}

struct Builder<'a> {
    resolver: Resolver<'a>,
    nodes: Vec<CodeNode>,
    edges: Vec<CodeEdge>,
    /// Variable -> nodes whose results it currently holds.
    defs: HashMap<String, Vec<usize>>,
    unresolved: HashMap<String, usize>,
    last_call: Option<usize>,
}

impl<'a> Builder<'a> {
    fn add_node(&mut self, kind: NodeKind, label: String, line: u32) -> usize {
        let id = self.nodes.len();
        let label: String = label
            .chars()
            .map(|c| if c.is_whitespace() { '_' } else { c })
            .collect();
        let label = if label.is_empty() { "_".to_string() } else { label };
        self.nodes.push(CodeNode { id, kind, label, line });
        id
    }

    fn eval(&mut self, e: &Expr, line: u32) -> Vec<usize> {
        match e {
            Expr::Name(n) => {
                if let Some(d) = self.defs.get(n) {
                    return d.clone();
                }
                if self.resolver.lookup(n).is_some() || is_builtin(n) {
                    return Vec::new();
                }
                if let Some(&id) = self.unresolved.get(n) {
                    return vec![id];
                }
                let id = self.add_node(NodeKind::Unresolved, n.clone(), line);
                self.unresolved.insert(n.clone(), id);
                vec![id]
            }
            Expr::Literal(_) | Expr::Unresolved => Vec::new(),
            Expr::Attribute { base, .. } => self.eval(base, line),
            Expr::Subscript { base, index } => {
                let mut out = self.eval(base, line);
                out.extend(self.eval(index, line));
                out
            }
            Expr::Collection { items, .. } | Expr::Operation(items) => {
                items.iter().flat_map(|i| self.eval(i, line)).collect()
            }
            Expr::Call { func, args, kwargs } => {
                let label = self.resolver.call_label(func);
                let read = is_read_like(&label);
                let mut inputs = match func.as_ref() {
                    Expr::Attribute { base, .. } => self.eval(base, line),
                    Expr::Name(n) => self.defs.get(n).cloned().unwrap_or_default(),
                    other => self.eval(other, line),
                };
                for a in args.iter().chain(kwargs.iter().map(|(_, v)| v)) {
                    match a {
                        Expr::Literal(LiteralKind::Str(s)) if read => {
                            let src = self.add_node(NodeKind::DataSource, s.clone(), line);
                            inputs.push(src);
                        }
                        _ => inputs.extend(self.eval(a, line)),
                    }
                }
                let id = self.add_node(NodeKind::CallSite, label, line);
                let inputs: BTreeSet<usize> = inputs.into_iter().collect();
                for src in inputs {
                    self.edges.push(CodeEdge {
                        src,
                        dst: id,
                        kind: EdgeKind::DataFlow,
                    });
                }
                if let Some(prev) = self.last_call {
                    self.edges.push(CodeEdge {
                        src: prev,
                        dst: id,
                        kind: EdgeKind::ControlFlow,
                    });
                }
                self.last_call = Some(id);
                vec![id]
            }
        }
    }
}

/// Builds the code graph for one script.
///
/// `env` is the completed alias environment of the same statements; it only
/// serves imports that occur after their first use (out-of-order notebook cells).
pub fn build_code_graph(statements: &StatementList, env: &AliasEnv, script_id: &str) -> CodeGraph {
    let mut b = Builder {
        resolver: Resolver::with_fallback(env),
        nodes: Vec::new(),
        edges: Vec::new(),
        defs: HashMap::new(),
        unresolved: HashMap::new(),
        last_call: None,
    };
    for stmt in &statements.statements {
        match &stmt.kind {
            StmtKind::Import { .. } => {}
            StmtKind::Assign { targets, value } => {
                let produced = b.eval(value, stmt.line);
                for t in targets {
                    match t {
                        Target::Name(n) => {
                            b.defs.insert(n.clone(), produced.clone());
                        }
                        Target::Element(n) => {
                            let entry = b.defs.entry(n.clone()).or_default();
                            for p in &produced {
                                if !entry.contains(p) {
                                    entry.push(*p);
                                }
                            }
                        }
                    }
                }
            }
            StmtKind::Expr(e) => {
                b.eval(e, stmt.line);
            }
        }
        b.resolver.apply(&stmt.kind);
    }
    CodeGraph {
        script_id: script_id.to_string(),
        nodes: b.nodes,
        edges: b.edges,
    }
}
