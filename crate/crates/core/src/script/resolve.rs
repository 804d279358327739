//! Alias environment: what each identifier refers to.

use super::ast::{Expr, StatementList, StmtKind, Target};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Binding {
    /// Imported module, class or function path.
    Module(String),
    /// Object constructed from a class path.
    Instance(String),
    /// A pandas frame or series.
    DataFrame,
    Unresolved,
}

pub type AliasEnv = BTreeMap<String, Binding>;

const BUILTINS: &[&str] = &[
    "abs", "all", "any", "bool", "dict", "dir", "enumerate", "filter", "float", "format",
    "getattr", "hasattr", "id", "input", "int", "isinstance", "iter", "len", "list", "map",
    "max", "min", "next", "object", "open", "print", "range", "repr", "reversed", "round",
    "set", "setattr", "sorted", "str", "sum", "super", "tuple", "type", "vars", "zip",
    "display",
];

// Aliases notebooks use without importing in the same cell.
const CONVENTIONAL: &[(&str, &str)] = &[
    ("pd", "pandas"),
    ("np", "numpy"),
    ("plt", "matplotlib.pyplot"),
    ("sns", "seaborn"),
];

fn conventional_alias(name: &str) -> Option<&'static Binding> {
    static BINDINGS: std::sync::OnceLock<Vec<(&'static str, Binding)>> = std::sync::OnceLock::new();
    BINDINGS
        .get_or_init(|| {
            CONVENTIONAL
                .iter()
                .map(|(a, m)| (*a, Binding::Module(m.to_string())))
                .collect()
        })
        .iter()
        .find(|(a, _)| *a == name)
        .map(|(_, b)| b)
}

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

/// Calls that load a table from disk.
pub fn is_read_like(label: &str) -> bool {
    let last = label.rsplit('.').next().unwrap_or(label);
    last.starts_with("read_") || label == "numpy.loadtxt" || label == "numpy.genfromtxt"
}

fn is_class_path(path: &str) -> bool {
    path.rsplit('.')
        .next()
        .and_then(|s| s.chars().next())
        .is_some_and(|c| c.is_uppercase())
}

/// Flow-sensitive binding tracker shared by name resolution and graph building.
#[derive(Debug, Clone, Default)]
pub struct Resolver<'a> {
    pub env: AliasEnv,
    /// Bindings from a completed pass, consulted for imports that appear
    /// later in the script than their first use.
    fallback: Option<&'a AliasEnv>,
}

impl<'a> Resolver<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fallback(env: &'a AliasEnv) -> Self {
        Self {
            env: AliasEnv::new(),
            fallback: Some(env),
        }
    }

    pub fn lookup(&self, name: &str) -> Option<&Binding> {
        self.env.get(name).or_else(|| {
            self.fallback
                .and_then(|f| f.get(name))
                .filter(|b| matches!(b, Binding::Module(_)))
        })
        .or_else(|| conventional_alias(name))
    }

    /// Dotted module path of an expression built only from imports.
    pub fn static_path(&self, e: &Expr) -> Option<String> {
        match e {
            Expr::Name(n) => match self.lookup(n) {
                Some(Binding::Module(p)) => Some(p.clone()),
                None if is_builtin(n) => Some(format!("builtins.{n}")),
                _ => None,
            },
            Expr::Attribute { base, name } => self.static_path(base).map(|p| format!("{p}.{name}")),
            _ => None,
        }
    }

    pub fn value_type(&self, e: &Expr) -> Binding {
        match e {
            Expr::Name(n) => self.lookup(n).cloned().unwrap_or(Binding::Unresolved),
            Expr::Attribute { base, name } => {
                if let Some(p) = self.static_path(base) {
                    return Binding::Module(format!("{p}.{name}"));
                }
                match self.value_type(base) {
                    Binding::DataFrame => Binding::DataFrame,
                    _ => Binding::Unresolved,
                }
            }
            Expr::Subscript { base, .. } => match self.value_type(base) {
                Binding::DataFrame => Binding::DataFrame,
                _ => Binding::Unresolved,
            },
            Expr::Call { func, .. } => self.call_result(func),
            _ => Binding::Unresolved,
        }
    }

    fn call_result(&self, func: &Expr) -> Binding {
        if let Some(path) = self.static_path(func) {
            if path == "pandas.DataFrame" || path == "pandas.Series" || path.starts_with("pandas.") {
                return Binding::DataFrame;
            }
            if is_class_path(&path) {
                return Binding::Instance(path);
            }
            return Binding::Unresolved;
        }
        match func {
            Expr::Name(n) if self.lookup(n).is_none() && is_class_path(n) => {
                Binding::Instance(n.clone())
            }
            Expr::Attribute { base, name } => match self.value_type(base) {
                Binding::DataFrame => Binding::DataFrame,
                Binding::Instance(c) if name == "fit" => Binding::Instance(c),
                _ => Binding::Unresolved,
            },
            _ => Binding::Unresolved,
        }
    }

    /// Fully-qualified label of the function invoked by a call expression.
    pub fn call_label(&self, func: &Expr) -> String {
        if let Some(p) = self.static_path(func) {
            return p;
        }
        match func {
            Expr::Name(n) => match self.lookup(n) {
                Some(Binding::Instance(c)) => format!("{c}.__call__"),
                Some(Binding::DataFrame) => "pandas.DataFrame.__call__".to_string(),
                _ => n.clone(),
            },
            Expr::Attribute { base, name } => match self.value_type(base) {
                Binding::Instance(c) => format!("{c}.{name}"),
                Binding::DataFrame => format!("pandas.DataFrame.{name}"),
                _ => match dotted_text(base) {
                    Some(t) => format!("{t}.{name}"),
                    None => format!("unknown.{name}"),
                },
            },
            _ => "unknown.__call__".to_string(),
        }
    }

    pub fn apply(&mut self, kind: &StmtKind) {
        match kind {
            StmtKind::Import { module, alias } => {
                self.env.insert(alias.clone(), Binding::Module(module.clone()));
            }
            StmtKind::Assign { targets, value } => {
                let names: Vec<&str> = targets
                    .iter()
                    .filter_map(|t| match t {
                        Target::Name(n) => Some(n.as_str()),
                        Target::Element(_) => None,
                    })
                    .collect();
                let ty = if names.len() == 1 && targets.len() == 1 {
                    self.value_type(value)
                } else {
                    Binding::Unresolved
                };
                for n in names {
                    self.env.insert(n.to_string(), ty.clone());
                }
            }
            StmtKind::Expr(_) => {}
        }
    }
}

fn dotted_text(e: &Expr) -> Option<String> {
    match e {
        Expr::Name(n) => Some(n.clone()),
        Expr::Attribute { base, name } => dotted_text(base).map(|b| format!("{b}.{name}")),
        _ => None,
    }
}

/// Final alias environment after all statements, in source order.
pub fn resolve_names(statements: &StatementList) -> AliasEnv {
    let mut r = Resolver::new();
    for s in &statements.statements {
        r.apply(&s.kind);
    }
    r.env
}
