//! Normalized statement forms produced by the parser.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LiteralKind {
    Str(String),
    Number,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CollectionKind {
    Tuple,
    List,
    Set,
    Dict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr {
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
        kwargs: Vec<(String, Expr)>,
    },
    Attribute {
        base: Box<Expr>,
        name: String,
    },
    Name(String),
    Subscript {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Literal(LiteralKind),
    /// Tuple, list, set or dict display.
    Collection {
        kind: CollectionKind,
        items: Vec<Expr>,
    },
    /// Operator application, slice, conditional or starred value; only the
    /// operands matter for data flow.
    Operation(Vec<Expr>),
    /// A construct outside the supported subset (lambda, comprehension).
    Unresolved,
}

impl Expr {
    pub fn call_count(&self) -> usize {
        match self {
            Expr::Call { func, args, kwargs } => {
                1 + func.call_count()
                    + args.iter().map(Expr::call_count).sum::<usize>()
                    + kwargs.iter().map(|(_, e)| e.call_count()).sum::<usize>()
            }
            Expr::Attribute { base, .. } => base.call_count(),
            Expr::Subscript { base, index } => base.call_count() + index.call_count(),
            Expr::Collection { items, .. } | Expr::Operation(items) => {
                items.iter().map(Expr::call_count).sum()
            }
            Expr::Name(_) | Expr::Literal(_) | Expr::Unresolved => 0,
        }
    }

    /// Root identifier of an attribute/subscript chain (`df` for `df['a'].b`).
    pub fn root_name(&self) -> Option<&str> {
        match self {
            Expr::Name(n) => Some(n),
            Expr::Attribute { base, .. } | Expr::Subscript { base, .. } => base.root_name(),
            _ => None,
        }
    }

    /// Collects every identifier read by this expression.
    pub fn names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Name(n) => out.push(n),
            Expr::Call { func, args, kwargs } => {
                func.names(out);
                args.iter().for_each(|a| a.names(out));
                kwargs.iter().for_each(|(_, a)| a.names(out));
            }
            Expr::Attribute { base, .. } => base.names(out),
            Expr::Subscript { base, index } => {
                base.names(out);
                index.names(out);
            }
            Expr::Collection { items, .. } | Expr::Operation(items) => {
                items.iter().for_each(|a| a.names(out))
            }
            Expr::Literal(_) | Expr::Unresolved => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Target {
    /// Plain rebinding of a variable (strong update).
    Name(String),
    /// Element or attribute store into an existing variable (weak update).
    Element(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StmtKind {
    Import { module: String, alias: String },
    Assign { targets: Vec<Target>, value: Expr },
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statement {
    pub line: u32,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatementList {
    pub statements: Vec<Statement>,
    /// Construct name -> number of occurrences skipped.
    pub skipped: BTreeMap<String, usize>,
}

impl StatementList {
    pub fn call_count(&self) -> usize {
        self.statements
            .iter()
            .map(|s| match &s.kind {
                StmtKind::Import { .. } => 0,
                StmtKind::Assign { value, .. } => value.call_count(),
                StmtKind::Expr(e) => e.call_count(),
            })
            .sum()
    }

    pub fn skipped_total(&self) -> usize {
        self.skipped.values().sum()
    }
}
