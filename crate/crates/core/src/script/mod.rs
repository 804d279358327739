//! Static analysis of ML pipeline scripts into code graphs.
//!
//! The supported syntax subset is documented in `SUBSET.md` next to this
//! module. Anything outside it is skipped and counted, never fatal; only
//! lexical errors exclude a script.

pub mod ast;
pub mod graph;
pub mod lexer;
pub mod parser;
pub mod resolve;

pub use ast::{Expr, Statement, StatementList, StmtKind, Target};
pub use graph::{build_code_graph, CodeEdge, CodeGraph, CodeNode, EdgeKind, NodeKind};
pub use lexer::LexError;
pub use resolve::{is_read_like, resolve_names, AliasEnv, Binding};

use rayon::prelude::*;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptSource {
    pub path: PathBuf,
    pub text: String,
    pub line_count: usize,
}

impl ScriptSource {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        let text = text.into();
        let line_count = text.lines().count();
        Self {
            path: path.into(),
            text,
            line_count,
        }
    }

    /// Decodes raw bytes; notebooks (`.ipynb`) contribute their code cells
    /// concatenated in order.
    pub fn from_bytes(path: impl Into<PathBuf>, bytes: &[u8]) -> Result<Self, LexError> {
        let path = path.into();
        let text = std::str::from_utf8(bytes).map_err(|_| LexError::InvalidUtf8)?;
        if path.extension().is_some_and(|e| e == "ipynb") {
            if let Some(code) = notebook_code(text) {
                return Ok(Self::new(path, code));
            }
        }
        Ok(Self::new(path, text))
    }

    /// Script identifier: the file stem.
    pub fn script_id(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

#[derive(Deserialize)]
struct Notebook {
    cells: Vec<NotebookCell>,
}

#[derive(Deserialize)]
struct NotebookCell {
    cell_type: String,
    #[serde(default)]
    source: CellSource,
}

#[derive(Deserialize, Default)]
#[serde(untagged)]
enum CellSource {
    Lines(Vec<String>),
    Text(String),
    #[default]
    Empty,
}

fn notebook_code(text: &str) -> Option<String> {
    let nb: Notebook = serde_json::from_str(text).ok()?;
    let mut out = String::new();
    for cell in nb.cells.into_iter().filter(|c| c.cell_type == "code") {
        match cell.source {
            CellSource::Lines(lines) => lines.iter().for_each(|l| out.push_str(l)),
            CellSource::Text(t) => out.push_str(&t),
            CellSource::Empty => {}
        }
        if !out.ends_with('\n') {
            out.push('\n');
        }
    }
    Some(out)
}

pub fn parse_script(source: &ScriptSource) -> Result<StatementList, LexError> {
    let lines = lexer::tokenize(&source.text)?;
    Ok(parser::parse_lines(&lines))
}

/// Parse, resolve and build in one step.
pub fn analyze(source: &ScriptSource) -> Result<(StatementList, CodeGraph), LexError> {
    let statements = parse_script(source)?;
    let env = resolve_names(&statements);
    let graph = build_code_graph(&statements, &env, &source.script_id());
    Ok((statements, graph))
}

#[derive(Debug, Clone)]
pub struct Excluded {
    pub script_id: String,
    pub error: LexError,
}

#[derive(Debug, Clone, Default)]
pub struct MineOutcome {
    pub graphs: Vec<CodeGraph>,
    pub excluded: Vec<Excluded>,
    pub skipped_constructs: usize,
}

impl MineOutcome {
    pub fn total(&self) -> usize {
        self.graphs.len() + self.excluded.len()
    }
}

/// Analyzes many scripts in parallel. Never fails as a whole: scripts with
/// lexical errors land in `excluded`. Output is ordered by script id.
pub fn mine_sources(sources: &[ScriptSource]) -> MineOutcome {
    let results: Vec<_> = sources
        .par_iter()
        .map(|s| (s.script_id(), analyze(s)))
        .collect();
    let mut out = MineOutcome::default();
    for (script_id, r) in results {
        match r {
            Ok((stmts, g)) => {
                out.skipped_constructs += stmts.skipped_total();
                out.graphs.push(g);
            }
            Err(error) => out.excluded.push(Excluded { script_id, error }),
        }
    }
    out.graphs.sort_by(|a, b| a.script_id.cmp(&b.script_id));
    out.excluded.sort_by(|a, b| a.script_id.cmp(&b.script_id));
    out
}

/// Reads `.py` and `.ipynb` files from a directory (non-recursive, sorted).
/// Files that are not valid UTF-8 are reported as excluded.
pub fn read_scripts(dir: &Path) -> std::io::Result<(Vec<ScriptSource>, Vec<Excluded>)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "py" || e == "ipynb"))
        .collect();
    paths.sort();
    let mut sources = Vec::new();
    let mut excluded = Vec::new();
    for p in paths {
        let bytes = std::fs::read(&p)?;
        match ScriptSource::from_bytes(&p, &bytes) {
            Ok(s) => sources.push(s),
            Err(error) => excluded.push(Excluded {
                script_id: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                error,
            }),
        }
    }
    Ok((sources, excluded))
}
