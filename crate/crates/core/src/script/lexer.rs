//! Tokenizer for the supported Python surface syntax.
//!
//! Produces logical lines: physical lines joined across open brackets and
//! backslash continuations, each tagged with its indentation width.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("script is not valid UTF-8")]
    InvalidUtf8,
    #[error("line {line}: unterminated string literal")]
    UnterminatedString { line: u32 },
    #[error("line {line}: unexpected character {ch:?}")]
    UnexpectedChar { line: u32, ch: char },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Name(String),
    Number(String),
    Str(String),
    Op(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalLine {
    pub line: u32,
    pub indent: usize,
    pub tokens: Vec<Token>,
    /// Notebook magic or shell escape (`%matplotlib inline`, `!pip install`).
    pub magic: bool,
}

// Longest operators first so the greedy match picks `**=` before `**`.
const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "==", "!=", "<=", ">=", "<<",
    ">>", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@",
    "<", ">", "=", ".", ",", ":", ";", "(", ")", "[", "]", "{", "}", "~", "&", "|", "^",
];

pub fn tokenize(text: &str) -> Result<Vec<LogicalLine>, LexError> {
    Lexer::new(text).run()
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    depth: usize,
    out: Vec<LogicalLine>,
    current: Option<LogicalLine>,
    _src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            depth: 0,
            out: Vec::new(),
            current: None,
            _src: src,
        }
    }

    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn finish_line(&mut self) {
        if let Some(l) = self.current.take() {
            if !l.tokens.is_empty() || l.magic {
                self.out.push(l);
            }
        }
        self.depth = 0;
    }

    fn push(&mut self, tok: Tok, line: u32) {
        let cur = self.current.get_or_insert_with(|| LogicalLine {
            line,
            indent: 0,
            tokens: Vec::new(),
            magic: false,
        });
        cur.tokens.push(Token { tok, line });
    }

    fn run(mut self) -> Result<Vec<LogicalLine>, LexError> {
        let mut at_line_start = true;
        while self.pos < self.chars.len() {
            if at_line_start && self.current.is_none() {
                // measure indentation of a new logical line
                let mut indent = 0;
                while let Some(c) = self.peek(0) {
                    match c {
                        ' ' => indent += 1,
                        '\t' => indent += 8 - indent % 8,
                        '\x0c' => {}
                        _ => break,
                    }
                    self.pos += 1;
                }
                at_line_start = false;
                match self.peek(0) {
                    Some('%') | Some('!') => {
                        while let Some(c) = self.peek(0) {
                            if c == '\n' {
                                break;
                            }
                            self.pos += 1;
                        }
                        self.out.push(LogicalLine {
                            line: self.line,
                            indent,
                            tokens: Vec::new(),
                            magic: true,
                        });
                        continue;
                    }
                    Some('\n') | Some('#') | Some('\r') | None => {}
                    Some(_) => {
                        self.current = Some(LogicalLine {
                            line: self.line,
                            indent,
                            tokens: Vec::new(),
                            magic: false,
                        });
                    }
                }
                continue;
            }
            let c = self.chars[self.pos];
            match c {
                '\n' => {
                    self.pos += 1;
                    self.line += 1;
                    if self.depth == 0 {
                        self.finish_line();
                        at_line_start = true;
                    }
                }
                ' ' | '\t' | '\r' | '\x0c' => self.pos += 1,
                '#' => {
                    while let Some(c) = self.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                '\\' if self.peek(1) == Some('\n') => {
                    self.pos += 2;
                    self.line += 1;
                }
                '\\' if self.peek(1) == Some('\r') && self.peek(2) == Some('\n') => {
                    self.pos += 3;
                    self.line += 1;
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                    self.number()
                }
                c if c == '_' || c.is_alphabetic() => {
                    if let Some(quote_at) = self.string_prefix_len() {
                        self.pos += quote_at;
                        self.string()?;
                    } else {
                        self.name();
                    }
                }
                '\'' | '"' => self.string()?,
                _ => self.operator()?,
            }
        }
        self.finish_line();
        Ok(self.out)
    }

    /// If the identifier at the cursor is a string prefix (r, b, f, u, rb, ...)
    /// immediately followed by a quote, returns the prefix length.
    fn string_prefix_len(&self) -> Option<usize> {
        let mut n = 0;
        while n < 3 {
            match self.peek(n) {
                Some(c) if matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'f' | 'u') => n += 1,
                Some('\'') | Some('"') if n > 0 => return Some(n),
                _ => return None,
            }
        }
        match self.peek(n) {
            Some('\'') | Some('"') => Some(n),
            _ => None,
        }
    }

    fn name(&mut self) {
        let start = self.pos;
        while let Some(c) = self.peek(0) {
            if c == '_' || c.is_alphanumeric() {
                self.pos += 1;
            } else {
                break;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        let line = self.line;
        self.push(Tok::Name(s), line);
    }

    fn number(&mut self) {
        let start = self.pos;
        let hex = self.peek(0) == Some('0') && matches!(self.peek(1), Some('x') | Some('X'));
        while let Some(c) = self.peek(0) {
            let prev = if self.pos > start { self.chars[self.pos - 1] } else { ' ' };
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                self.pos += 1;
            } else if (c == '+' || c == '-') && !hex && matches!(prev, 'e' | 'E') {
                self.pos += 1;
            } else {
                break;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        let line = self.line;
        self.push(Tok::Number(s), line);
    }

    fn string(&mut self) -> Result<(), LexError> {
        let start_line = self.line;
        let quote = self.chars[self.pos];
        let triple = self.peek(1) == Some(quote) && self.peek(2) == Some(quote);
        self.pos += if triple { 3 } else { 1 };
        let mut value = String::new();
        loop {
            let Some(c) = self.peek(0) else {
                return Err(LexError::UnterminatedString { line: start_line });
            };
            if c == '\\' {
                if let Some(next) = self.peek(1) {
                    if next == '\n' {
                        self.line += 1;
                    } else {
                        value.push(c);
                        value.push(next);
                    }
                    self.pos += 2;
                    continue;
                }
                return Err(LexError::UnterminatedString { line: start_line });
            }
            if c == quote {
                if !triple {
                    self.pos += 1;
                    break;
                }
                if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
                    self.pos += 3;
                    break;
                }
            }
            if c == '\n' {
                if !triple {
                    return Err(LexError::UnterminatedString { line: start_line });
                }
                self.line += 1;
            }
            value.push(c);
            self.pos += 1;
        }
        self.push(Tok::Str(value), start_line);
        Ok(())
    }

    fn operator(&mut self) -> Result<(), LexError> {
        for op in OPERATORS {
            let len = op.len();
            if self.pos + len <= self.chars.len()
                && op.chars().zip(&self.chars[self.pos..self.pos + len]).all(|(a, b)| a == *b)
            {
                match *op {
                    "(" | "[" | "{" => self.depth += 1,
                    ")" | "]" | "}" => self.depth = self.depth.saturating_sub(1),
                    _ => {}
                }
                self.pos += len;
                let line = self.line;
                self.push(Tok::Op(op), line);
                return Ok(());
            }
        }
        Err(LexError::UnexpectedChar {
            line: self.line,
            ch: self.chars[self.pos],
        })
    }
}
