//! Recursive-descent parser for the supported statement subset.
//!
//! Control-flow headers are linearized: `for t in it:` becomes an assignment
//! of `it` to `t`, `if`/`while` conditions become expression statements, and
//! bodies are read in source order. `def`/`class` blocks are skipped by
//! indentation and counted. Lines that do not fit the grammar are skipped
//! and counted as `unparsed`.

use super::ast::*;
use super::lexer::{LogicalLine, Tok, Token};
use std::collections::BTreeMap;

#[derive(Debug)]
struct SyntaxError;

type PResult<T> = Result<T, SyntaxError>;

const AUG_OPS: &[&str] = &[
    "+=", "-=", "*=", "/=", "//=", "%=", "**=", "@=", "&=", "|=", "^=", ">>=", "<<=",
];

pub fn parse_lines(lines: &[LogicalLine]) -> StatementList {
    let mut out = StatementList::default();
    let mut skip_above: Option<usize> = None;
    for line in lines {
        if let Some(indent) = skip_above {
            if line.indent > indent {
                continue;
            }
            skip_above = None;
        }
        if line.magic {
            bump(&mut out.skipped, "magic");
            continue;
        }
        let mut p = LineParser {
            toks: &line.tokens,
            pos: 0,
            skipped: BTreeMap::new(),
            stmts: Vec::new(),
        };
        match p.logical_line() {
            Ok(LineOutcome::Statements) => {
                out.statements.append(&mut p.stmts);
                for (k, v) in p.skipped {
                    *out.skipped.entry(k).or_insert(0) += v;
                }
            }
            Ok(LineOutcome::SkipBlock(kind)) => {
                bump(&mut out.skipped, kind);
                skip_above = Some(line.indent);
            }
            Ok(LineOutcome::Skip(kind)) => bump(&mut out.skipped, kind),
            Err(SyntaxError) => bump(&mut out.skipped, "unparsed"),
        }
    }
    out
}

fn bump(map: &mut BTreeMap<String, usize>, key: &str) {
    *map.entry(key.to_string()).or_insert(0) += 1;
}

enum LineOutcome {
    Statements,
    SkipBlock(&'static str),
    Skip(&'static str),
}

struct LineParser<'a> {
    toks: &'a [Token],
    pos: usize,
    skipped: BTreeMap<String, usize>,
    stmts: Vec<Statement>,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, off: usize) -> Option<&'a Tok> {
        self.toks.get(self.pos + off).map(|t| &t.tok)
    }

    fn line(&self) -> u32 {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.line)
            .unwrap_or(0)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Some(Tok::Op(o)) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Name(n)) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(SyntaxError)
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Name(n)) if !is_keyword(n) => {
                self.pos += 1;
                Ok(n.clone())
            }
            _ => Err(SyntaxError),
        }
    }

    fn skip_construct(&mut self, kind: &str) {
        bump(&mut self.skipped, kind);
    }

    fn emit(&mut self, line: u32, kind: StmtKind) {
        self.stmts.push(Statement { line, kind });
    }

    fn logical_line(&mut self) -> PResult<LineOutcome> {
        let Some(Tok::Name(first)) = self.peek() else {
            if self.is_op("@") {
                return Ok(LineOutcome::Skip("decorator"));
            }
            self.simple_statements()?;
            return Ok(LineOutcome::Statements);
        };
        match first.as_str() {
            "def" => return Ok(LineOutcome::SkipBlock("function_def")),
            "class" => return Ok(LineOutcome::SkipBlock("class_def")),
            "async" => return Ok(LineOutcome::SkipBlock("async")),
            "if" | "elif" | "while" => {
                self.pos += 1;
                let line = self.line();
                let cond = self.expr()?;
                self.expect_op(":")?;
                self.emit(line, StmtKind::Expr(cond));
                self.inline_body()?;
            }
            "else" | "try" | "finally" => {
                self.pos += 1;
                self.expect_op(":")?;
                self.inline_body()?;
            }
            "except" => {
                self.pos += 1;
                if !self.is_op(":") {
                    self.expr()?;
                    if self.eat_kw("as") {
                        self.ident()?;
                    }
                }
                self.expect_op(":")?;
                self.inline_body()?;
            }
            "for" => {
                self.pos += 1;
                let line = self.line();
                let target = self.target_list()?;
                if !self.eat_kw("in") {
                    return Err(SyntaxError);
                }
                let iter = self.testlist()?;
                self.expect_op(":")?;
                let targets = to_targets(&target);
                self.emit(line, StmtKind::Assign { targets, value: iter });
                self.inline_body()?;
            }
            "with" => {
                self.pos += 1;
                loop {
                    let line = self.line();
                    let ctx = self.expr()?;
                    if self.eat_kw("as") {
                        let t = self.primary()?;
                        self.emit(
                            line,
                            StmtKind::Assign {
                                targets: to_targets(&t),
                                value: ctx,
                            },
                        );
                    } else {
                        self.emit(line, StmtKind::Expr(ctx));
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(":")?;
                self.inline_body()?;
            }
            _ => {
                self.simple_statements()?;
            }
        }
        Ok(LineOutcome::Statements)
    }

    /// Statements following a compound header's colon on the same line.
    fn inline_body(&mut self) -> PResult<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.simple_statements()
        }
    }

    fn simple_statements(&mut self) -> PResult<()> {
        loop {
            if self.at_end() {
                return Ok(());
            }
            self.simple_statement()?;
            if !self.eat_op(";") {
                break;
            }
        }
        if self.at_end() {
            Ok(())
        } else {
            Err(SyntaxError)
        }
    }

    fn simple_statement(&mut self) -> PResult<()> {
        let line = self.line();
        if let Some(Tok::Name(kw)) = self.peek() {
            match kw.as_str() {
                "import" => {
                    self.pos += 1;
                    return self.import_names(line);
                }
                "from" => {
                    self.pos += 1;
                    return self.from_import(line);
                }
                "pass" | "break" | "continue" => {
                    self.pos += 1;
                    return Ok(());
                }
                "global" | "nonlocal" | "del" => {
                    // no data flow of interest; consume the rest of the statement
                    while !self.at_end() && !self.is_op(";") {
                        self.pos += 1;
                    }
                    return Ok(());
                }
                "return" | "raise" | "assert" | "yield" => {
                    self.pos += 1;
                    if !self.at_end() && !self.is_op(";") {
                        let e = self.testlist()?;
                        if self.eat_kw("from") {
                            self.expr()?;
                        }
                        self.emit(line, StmtKind::Expr(e));
                    }
                    return Ok(());
                }
                "print" if !matches!(self.peek_at(1), Some(Tok::Op("(")) | None | Some(Tok::Op(";"))) => {
                    return Err(SyntaxError);
                }
                _ => {}
            }
        }
        let first = self.testlist_star()?;
        if self.is_op("=") {
            let mut targets = to_targets(&first);
            let mut value;
            loop {
                self.expect_op("=")?;
                value = self.testlist_star()?;
                if self.is_op("=") {
                    targets.extend(to_targets(&value));
                } else {
                    break;
                }
            }
            self.emit(line, StmtKind::Assign { targets, value });
        } else if let Some(Tok::Op(op)) = self.peek() {
            if AUG_OPS.contains(op) {
                self.pos += 1;
                let value = self.testlist()?;
                let targets = to_targets(&first)
                    .into_iter()
                    .map(|t| match t {
                        Target::Name(n) | Target::Element(n) => Target::Element(n),
                    })
                    .collect();
                self.emit(line, StmtKind::Assign { targets, value });
            } else if *op == ":" {
                // annotated assignment
                self.pos += 1;
                self.expr()?;
                if self.eat_op("=") {
                    let value = self.testlist_star()?;
                    self.emit(
                        line,
                        StmtKind::Assign {
                            targets: to_targets(&first),
                            value,
                        },
                    );
                }
            } else {
                self.emit(line, StmtKind::Expr(first));
            }
        } else {
            self.emit(line, StmtKind::Expr(first));
        }
        Ok(())
    }

    fn dotted_name(&mut self) -> PResult<String> {
        let mut name = self.ident()?;
        while self.eat_op(".") {
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    fn import_names(&mut self, line: u32) -> PResult<()> {
        loop {
            let module = self.dotted_name()?;
            if self.eat_kw("as") {
                let alias = self.ident()?;
                self.emit(line, StmtKind::Import { module, alias });
            } else {
                // `import a.b` binds `a`; attribute chains resolve through it
                let root = module.split('.').next().unwrap_or_default().to_string();
                self.emit(
                    line,
                    StmtKind::Import {
                        module: root.clone(),
                        alias: root,
                    },
                );
            }
            if !self.eat_op(",") {
                return Ok(());
            }
        }
    }

    fn from_import(&mut self, line: u32) -> PResult<()> {
        let mut module = String::new();
        while self.is_op(".") || self.is_op("...") {
            self.pos += 1;
            module.push('.');
        }
        if !self.is_kw("import") {
            module.push_str(&self.dotted_name()?);
        }
        if !self.eat_kw("import") {
            return Err(SyntaxError);
        }
        if self.eat_op("*") {
            self.skip_construct("star_import");
            return Ok(());
        }
        let paren = self.eat_op("(");
        loop {
            if paren && self.is_op(")") {
                break;
            }
            let name = self.ident()?;
            let alias = if self.eat_kw("as") { self.ident()? } else { name.clone() };
            let full = if module.is_empty() || module.ends_with('.') {
                format!("{module}{name}")
            } else {
                format!("{module}.{name}")
            };
            self.emit(line, StmtKind::Import { module: full, alias });
            if !self.eat_op(",") {
                break;
            }
        }
        if paren {
            self.expect_op(")")?;
        }
        Ok(())
    }

    fn target_list(&mut self) -> PResult<Expr> {
        let mut items = vec![self.target_atom()?];
        let mut tuple = false;
        while self.eat_op(",") {
            tuple = true;
            if self.is_kw("in") || self.at_end() {
                break;
            }
            items.push(self.target_atom()?);
        }
        if tuple {
            Ok(Expr::Collection {
                kind: CollectionKind::Tuple,
                items,
            })
        } else {
            Ok(items.pop().unwrap())
        }
    }

    fn target_atom(&mut self) -> PResult<Expr> {
        if self.eat_op("*") {
            return self.primary();
        }
        self.primary()
    }

    fn testlist_star(&mut self) -> PResult<Expr> {
        self.sequence(|p| p.star_or_expr())
    }

    fn testlist(&mut self) -> PResult<Expr> {
        self.sequence(|p| p.star_or_expr())
    }

    fn sequence(&mut self, mut item: impl FnMut(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        let first = item(self)?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_end() || self.is_op("=") || self.is_op(";") || self.is_op(":") || self.is_op(")") {
                break;
            }
            if let Some(Tok::Op(op)) = self.peek() {
                if AUG_OPS.contains(op) {
                    break;
                }
            }
            items.push(item(self)?);
        }
        Ok(Expr::Collection {
            kind: CollectionKind::Tuple,
            items,
        })
    }

    fn star_or_expr(&mut self) -> PResult<Expr> {
        if self.eat_op("*") || self.eat_op("**") {
            let inner = self.bitor()?;
            return Ok(Expr::Operation(vec![inner]));
        }
        self.expr()
    }

    fn expr(&mut self) -> PResult<Expr> {
        if self.eat_kw("lambda") {
            while !self.is_op(":") {
                if self.at_end() {
                    return Err(SyntaxError);
                }
                self.pos += 1;
            }
            self.pos += 1;
            self.expr()?;
            self.skip_construct("lambda");
            return Ok(Expr::Unresolved);
        }
        let body = self.or_test()?;
        if self.is_kw("if") {
            self.pos += 1;
            let cond = self.or_test()?;
            if !self.eat_kw("else") {
                return Err(SyntaxError);
            }
            let other = self.expr()?;
            return Ok(Expr::Operation(vec![body, cond, other]));
        }
        if self.eat_op(":=") {
            let value = self.expr()?;
            return Ok(Expr::Operation(vec![body, value]));
        }
        Ok(body)
    }

    fn or_test(&mut self) -> PResult<Expr> {
        let mut operands = vec![self.and_test()?];
        while self.eat_kw("or") {
            operands.push(self.and_test()?);
        }
        Ok(collapse(operands))
    }

    fn and_test(&mut self) -> PResult<Expr> {
        let mut operands = vec![self.not_test()?];
        while self.eat_kw("and") {
            operands.push(self.not_test()?);
        }
        Ok(collapse(operands))
    }

    fn not_test(&mut self) -> PResult<Expr> {
        if self.eat_kw("not") {
            let inner = self.not_test()?;
            return Ok(Expr::Operation(vec![inner]));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let mut operands = vec![self.bitor()?];
        loop {
            let matched = match self.peek() {
                Some(Tok::Op(op)) => matches!(*op, "<" | ">" | "==" | ">=" | "<=" | "!="),
                Some(Tok::Name(n)) => n == "in" || n == "is" || (n == "not" && matches!(self.peek_at(1), Some(Tok::Name(m)) if m == "in")),
                _ => false,
            };
            if !matched {
                break;
            }
            if self.eat_kw("not") {
                self.eat_kw("in");
            } else if self.eat_kw("is") {
                self.eat_kw("not");
            } else {
                self.pos += 1;
            }
            operands.push(self.bitor()?);
        }
        Ok(collapse(operands))
    }

    fn bitor(&mut self) -> PResult<Expr> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: &[&[&str]] = &[
            &["|"],
            &["^"],
            &["&"],
            &["<<", ">>"],
            &["+", "-"],
            &["*", "/", "//", "%", "@"],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut operands = vec![self.binary(level + 1)?];
        while matches!(self.peek(), Some(Tok::Op(op)) if LEVELS[level].contains(op)) {
            self.pos += 1;
            operands.push(self.binary(level + 1)?);
        }
        Ok(collapse(operands))
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_op("-") || self.eat_op("+") || self.eat_op("~") {
            let inner = self.unary()?;
            return Ok(Expr::Operation(vec![inner]));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        self.eat_kw("await");
        let base = self.primary()?;
        if self.eat_op("**") {
            let exp = self.unary()?;
            return Ok(Expr::Operation(vec![base, exp]));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat_op(".") {
                let name = match self.peek() {
                    Some(Tok::Name(n)) => n.clone(),
                    _ => return Err(SyntaxError),
                };
                self.pos += 1;
                e = Expr::Attribute {
                    base: Box::new(e),
                    name,
                };
            } else if self.eat_op("(") {
                let (args, kwargs) = self.call_args()?;
                e = Expr::Call {
                    func: Box::new(e),
                    args,
                    kwargs,
                };
            } else if self.eat_op("[") {
                let index = self.subscript_items()?;
                e = Expr::Subscript {
                    base: Box::new(e),
                    index: Box::new(index),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn call_args(&mut self) -> PResult<(Vec<Expr>, Vec<(String, Expr)>)> {
        let mut args = Vec::new();
        let mut kwargs = Vec::new();
        loop {
            if self.eat_op(")") {
                return Ok((args, kwargs));
            }
            if self.eat_op("**") {
                args.push(Expr::Operation(vec![self.expr()?]));
            } else if self.eat_op("*") {
                args.push(Expr::Operation(vec![self.expr()?]));
            } else if matches!(self.peek(), Some(Tok::Name(n)) if !is_keyword(n))
                && matches!(self.peek_at(1), Some(Tok::Op("=")))
            {
                let name = self.ident()?;
                self.pos += 1;
                kwargs.push((name, self.expr()?));
            } else {
                let e = self.expr()?;
                if self.is_kw("for") || self.is_kw("async") {
                    self.skip_comprehension(")")?;
                    args.push(Expr::Unresolved);
                    return Ok((args, kwargs));
                }
                args.push(e);
            }
            if !self.eat_op(",") {
                self.expect_op(")")?;
                return Ok((args, kwargs));
            }
        }
    }

    fn subscript_items(&mut self) -> PResult<Expr> {
        let mut items = Vec::new();
        loop {
            if self.eat_op("]") {
                break;
            }
            let mut parts = Vec::new();
            let mut slice = false;
            loop {
                if self.is_op(":") {
                    self.pos += 1;
                    slice = true;
                    continue;
                }
                if self.is_op(",") || self.is_op("]") {
                    break;
                }
                parts.push(self.star_or_expr()?);
                if self.is_kw("for") {
                    self.skip_comprehension("]")?;
                    return Ok(Expr::Unresolved);
                }
            }
            items.push(if slice || parts.len() != 1 {
                Expr::Operation(parts)
            } else {
                parts.pop().unwrap()
            });
            if !self.eat_op(",") {
                self.expect_op("]")?;
                break;
            }
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Expr::Collection {
                kind: CollectionKind::Tuple,
                items,
            }
        })
    }

    /// Consumes a comprehension tail up to and including `close`.
    fn skip_comprehension(&mut self, close: &str) -> PResult<()> {
        let mut depth = 0usize;
        while let Some(tok) = self.peek() {
            self.pos += 1;
            if let Tok::Op(op) = tok {
                match *op {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" if depth > 0 => depth -= 1,
                    o if o == close && depth == 0 => {
                        self.skip_construct("comprehension");
                        return Ok(());
                    }
                    ")" | "]" | "}" => return Err(SyntaxError),
                    _ => {}
                }
            }
        }
        Err(SyntaxError)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek() else {
            return Err(SyntaxError);
        };
        self.pos += 1;
        match tok {
            Tok::Name(n) => match n.as_str() {
                "True" | "False" | "None" => Ok(Expr::Literal(LiteralKind::Constant)),
                "lambda" => {
                    self.pos -= 1;
                    self.expr()
                }
                n if is_keyword(n) => Err(SyntaxError),
                _ => Ok(Expr::Name(n.clone())),
            },
            Tok::Number(_) => Ok(Expr::Literal(LiteralKind::Number)),
            Tok::Str(s) => {
                let mut value = s.clone();
                while let Some(Tok::Str(more)) = self.peek() {
                    value.push_str(more);
                    self.pos += 1;
                }
                Ok(Expr::Literal(LiteralKind::Str(value)))
            }
            Tok::Op("...") => Ok(Expr::Literal(LiteralKind::Constant)),
            Tok::Op("(") => self.display(")", CollectionKind::Tuple),
            Tok::Op("[") => self.display("]", CollectionKind::List),
            Tok::Op("{") => self.display("}", CollectionKind::Set),
            Tok::Op(_) => Err(SyntaxError),
        }
    }

    fn display(&mut self, close: &str, kind: CollectionKind) -> PResult<Expr> {
        let mut items = Vec::new();
        let mut kind = kind;
        let mut trailing_comma = false;
        loop {
            if self.eat_op(close) {
                break;
            }
            let item = if kind == CollectionKind::Set || kind == CollectionKind::Dict {
                if self.eat_op("**") {
                    kind = CollectionKind::Dict;
                    Expr::Operation(vec![self.bitor()?])
                } else {
                    let key = self.star_or_expr()?;
                    if self.eat_op(":") {
                        kind = CollectionKind::Dict;
                        let value = self.expr()?;
                        Expr::Operation(vec![key, value])
                    } else {
                        key
                    }
                }
            } else {
                self.star_or_expr()?
            };
            if self.is_kw("for") || self.is_kw("async") {
                self.skip_comprehension(close)?;
                return Ok(Expr::Unresolved);
            }
            items.push(item);
            trailing_comma = self.eat_op(",");
            if !trailing_comma {
                self.expect_op(close)?;
                break;
            }
        }
        // parenthesized single expression, not a tuple
        if close == ")" && items.len() == 1 && !trailing_comma {
            return Ok(items.pop().unwrap());
        }
        Ok(Expr::Collection { kind, items })
    }
}

fn collapse(mut operands: Vec<Expr>) -> Expr {
    if operands.len() == 1 {
        operands.pop().unwrap()
    } else {
        Expr::Operation(operands)
    }
}

fn to_targets(e: &Expr) -> Vec<Target> {
    match e {
        Expr::Name(n) => vec![Target::Name(n.clone())],
        Expr::Attribute { .. } | Expr::Subscript { .. } => e
            .root_name()
            .map(|n| vec![Target::Element(n.to_string())])
            .unwrap_or_default(),
        Expr::Collection { items, .. } => items.iter().flat_map(to_targets).collect(),
        Expr::Operation(items) if items.len() == 1 => to_targets(&items[0]),
        _ => Vec::new(),
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "and" | "as" | "assert" | "async" | "await" | "break" | "class" | "continue" | "def"
            | "del" | "elif" | "else" | "except" | "finally" | "for" | "from" | "global" | "if"
            | "import" | "in" | "is" | "lambda" | "nonlocal" | "not" | "or" | "pass" | "raise"
            | "return" | "try" | "while" | "with" | "yield"
    )
}
