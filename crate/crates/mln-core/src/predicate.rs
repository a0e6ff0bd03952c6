//! Node filter predicates: parse, print, evaluate.
//!
//! Grammar (keywords are lowercase and case-sensitive):
//!
//! ```text
//! expr       := or
//! or         := and ("or" and)*
//! and        := unary ("and" unary)*
//! unary      := "not" unary | "(" expr ")" | comparison | "true" | "false"
//! comparison := term op term             op := == | != | < | <= | > | >=
//! term       := "degree" | "actor" | identifier | number | string-literal
//! ```
//!
//! Identifiers name node attributes. Evaluation is total: a missing
//! attribute makes any comparison false; comparing a number against a string
//! yields false, except `!=` which yields true.

use std::fmt;

use crate::model::{AttributeMap, AttributeValue};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum PredicateError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown keyword `{word}` at offset {offset} (keywords are lowercase)")]
    UnknownKeyword { word: String, offset: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }
}

/// One side of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Degree,
    Actor,
    Attribute(String),
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Literal(bool),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
    Compare {
        lhs: Term,
        op: CompareOp,
        rhs: Term,
    },
}

/// What a predicate sees when applied to one node of a layer.
#[derive(Debug, Clone)]
pub struct NodeContext {
    pub actor: String,
    /// Degree within the filtered layer.
    pub degree: usize,
    pub attributes: AttributeMap,
}

impl Term {
    fn value(&self, ctx: &NodeContext) -> Option<AttributeValue> {
        match self {
            Term::Degree => Some(AttributeValue::Number(ctx.degree as f64)),
            Term::Actor => Some(AttributeValue::Text(ctx.actor.clone())),
            Term::Attribute(name) => ctx.attributes.get(name).cloned(),
            Term::Number(n) => Some(AttributeValue::Number(*n)),
            Term::Text(t) => Some(AttributeValue::Text(t.clone())),
        }
    }
}

fn compare(lhs: Option<AttributeValue>, op: CompareOp, rhs: Option<AttributeValue>) -> bool {
    let (Some(lhs), Some(rhs)) = (lhs, rhs) else {
        return false;
    };
    use AttributeValue::{Number, Text};
    match (lhs, rhs) {
        (Number(a), Number(b)) => match op {
            CompareOp::Eq => a == b,
            CompareOp::Ne => a != b,
            CompareOp::Lt => a < b,
            CompareOp::Le => a <= b,
            CompareOp::Gt => a > b,
            CompareOp::Ge => a >= b,
        },
        (Text(a), Text(b)) => match op {
            CompareOp::Eq => a == b,
            CompareOp::Ne => a != b,
            CompareOp::Lt => a < b,
            CompareOp::Le => a <= b,
            CompareOp::Gt => a > b,
            CompareOp::Ge => a >= b,
        },
        _ => op == CompareOp::Ne,
    }
}

impl Predicate {
    /// Total evaluation; see the module docs for the mismatch rules.
    pub fn evaluate(&self, ctx: &NodeContext) -> bool {
        match self {
            Predicate::Literal(b) => *b,
            Predicate::Not(x) => !x.evaluate(ctx),
            Predicate::And(a, b) => a.evaluate(ctx) && b.evaluate(ctx),
            Predicate::Or(a, b) => a.evaluate(ctx) || b.evaluate(ctx),
            Predicate::Compare { lhs, op, rhs } => compare(lhs.value(ctx), *op, rhs.value(ctx)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Predicate::Or(..) => 1,
            Predicate::And(..) => 2,
            Predicate::Not(..) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Degree => f.write_str("degree"),
            Term::Actor => f.write_str("actor"),
            Term::Attribute(name) => f.write_str(name),
            Term::Number(n) => write!(f, "{n}"),
            Term::Text(t) => {
                f.write_str("\"")?;
                for c in t.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// Prints `p`, parenthesizing only where reparsing would otherwise change
/// the tree shape (binary connectives associate left).
fn fmt_prec(p: &Predicate, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = p.precedence();
    if prec < min {
        f.write_str("(")?;
        fmt_prec(p, 1, f)?;
        return f.write_str(")");
    }
    match p {
        Predicate::Or(a, b) => {
            fmt_prec(a, 1, f)?;
            f.write_str(" or ")?;
            fmt_prec(b, 2, f)
        }
        Predicate::And(a, b) => {
            fmt_prec(a, 2, f)?;
            f.write_str(" and ")?;
            fmt_prec(b, 3, f)
        }
        Predicate::Not(x) => {
            f.write_str("not ")?;
            fmt_prec(x, 3, f)
        }
        Predicate::Literal(b) => f.write_str(if *b { "true" } else { "false" }),
        Predicate::Compare { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 1, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    And,
    Or,
    Not,
    True,
    False,
    Degree,
    Actor,
    Ident(String),
    Num(f64),
    Str(String),
    Op(CompareOp),
    LParen,
    RParen,
}

struct Spanned {
    tok: Tok,
    /// 1-based character offset of the token's first character.
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> PredicateError {
    PredicateError::Syntax {
        offset,
        message: message.into(),
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize, // 0-based index into chars
}

impl Lexer {
    fn new(text: &str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn offset(&self) -> usize {
        self.pos + 1
    }

    fn lex(mut self) -> Result<(Vec<Spanned>, usize), PredicateError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let start = self.offset();
            match c {
                c if c.is_whitespace() => {
                    self.pos += 1;
                }
                c if c.is_alphabetic() || c == '_' => {
                    let word = self.take_while(|c| c.is_alphanumeric() || c == '_');
                    let tok = match word.as_str() {
                        "and" => Tok::And,
                        "or" => Tok::Or,
                        "not" => Tok::Not,
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "degree" => Tok::Degree,
                        "actor" => Tok::Actor,
                        _ => Tok::Ident(word),
                    };
                    out.push(Spanned { tok, offset: start });
                }
                c if c.is_ascii_digit() || c == '-' => {
                    let tok = self.lex_number(start)?;
                    out.push(Spanned { tok, offset: start });
                }
                '"' => {
                    let tok = self.lex_string(start)?;
                    out.push(Spanned { tok, offset: start });
                }
                '(' => {
                    self.pos += 1;
                    out.push(Spanned {
                        tok: Tok::LParen,
                        offset: start,
                    });
                }
                ')' => {
                    self.pos += 1;
                    out.push(Spanned {
                        tok: Tok::RParen,
                        offset: start,
                    });
                }
                '=' | '!' | '<' | '>' => {
                    let op = self.lex_operator(start)?;
                    out.push(Spanned {
                        tok: Tok::Op(op),
                        offset: start,
                    });
                }
                other => {
                    return Err(syntax(start, format!("unexpected character `{other}`")));
                }
            }
        }
        Ok((out, self.offset()))
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().map(&pred).unwrap_or(false) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn lex_number(&mut self, start: usize) -> Result<Tok, PredicateError> {
        let begin = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let int_digits = self.take_while(|c| c.is_ascii_digit());
        if int_digits.is_empty() {
            return Err(syntax(start, "expected digits after `-`"));
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            self.take_while(|c| c.is_ascii_digit());
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            // exponent only if digits (optionally signed) actually follow
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                self.pos = mark;
            }
        }
        if self
            .peek()
            .map(|c| c.is_alphanumeric() || c == '_')
            .unwrap_or(false)
        {
            return Err(syntax(self.offset(), "malformed number"));
        }
        let text: String = self.chars[begin..self.pos].iter().collect();
        let value: f64 = text
            .parse()
            .map_err(|_| syntax(start, "malformed number"))?;
        Ok(Tok::Num(value))
    }

    fn lex_string(&mut self, start: usize) -> Result<Tok, PredicateError> {
        self.pos += 1; // opening quote
        let mut value = String::new();
        loop {
            match self.peek() {
                None => return Err(syntax(start, "unterminated string literal")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(Tok::Str(value));
                }
                Some('\\') => {
                    let esc_at = self.offset();
                    self.pos += 1;
                    match self.peek() {
                        Some('"') => value.push('"'),
                        Some('\\') => value.push('\\'),
                        Some('n') => value.push('\n'),
                        Some('t') => value.push('\t'),
                        _ => return Err(syntax(esc_at, "invalid escape sequence")),
                    }
                    self.pos += 1;
                }
                Some(c) => {
                    value.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn lex_operator(&mut self, start: usize) -> Result<CompareOp, PredicateError> {
        let first = self.peek().unwrap();
        self.pos += 1;
        let eq_next = self.peek() == Some('=');
        let op = match (first, eq_next) {
            ('=', true) => CompareOp::Eq,
            ('!', true) => CompareOp::Ne,
            ('<', true) => CompareOp::Le,
            ('>', true) => CompareOp::Ge,
            ('<', false) => return Ok(CompareOp::Lt),
            ('>', false) => return Ok(CompareOp::Gt),
            ('=', false) => return Err(syntax(start, "expected `==`")),
            ('!', false) => return Err(syntax(start, "expected `!=`")),
            _ => unreachable!(),
        };
        self.pos += 1;
        Ok(op)
    }
}

const KEYWORDS: [&str; 7] = ["and", "or", "not", "true", "false", "degree", "actor"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof_offset: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.offset)
            .unwrap_or(self.eof_offset)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|s| &s.tok);
        self.pos += 1;
        t
    }

    fn parse_or(&mut self) -> Result<Predicate, PredicateError> {
        let mut lhs = self.parse_and()?;
        while self.peek() == Some(&Tok::Or) {
            self.next();
            let rhs = self.parse_and()?;
            lhs = Predicate::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Predicate, PredicateError> {
        let mut lhs = self.parse_unary()?;
        while self.peek() == Some(&Tok::And) {
            self.next();
            let rhs = self.parse_unary()?;
            lhs = Predicate::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Predicate, PredicateError> {
        let offset = self.offset();
        match self.peek() {
            Some(Tok::Not) => {
                self.next();
                Ok(Predicate::Not(Box::new(self.parse_unary()?)))
            }
            Some(Tok::LParen) => {
                self.next();
                let inner = self.parse_or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax(self.offset(), "expected `)`"));
                }
                self.next();
                Ok(inner)
            }
            Some(Tok::True) => {
                self.next();
                Ok(Predicate::Literal(true))
            }
            Some(Tok::False) => {
                self.next();
                Ok(Predicate::Literal(false))
            }
            Some(Tok::Ident(word))
                if KEYWORDS.contains(&word.to_ascii_lowercase().as_str())
                    && !matches!(self.peek2(), Some(Tok::Op(_))) =>
            {
                // a mis-cased keyword where an expression must start, and not
                // the left side of a comparison over an attribute of that name
                Err(PredicateError::UnknownKeyword {
                    word: word.clone(),
                    offset,
                })
            }
            Some(_) => self.parse_comparison(),
            None => Err(syntax(offset, "expected expression")),
        }
    }

    fn parse_comparison(&mut self) -> Result<Predicate, PredicateError> {
        let lhs = self.parse_term()?;
        let op = match self.peek() {
            Some(&Tok::Op(op)) => {
                self.next();
                op
            }
            _ => return Err(syntax(self.offset(), "expected comparison operator")),
        };
        let rhs = self.parse_term()?;
        Ok(Predicate::Compare { lhs, op, rhs })
    }

    fn parse_term(&mut self) -> Result<Term, PredicateError> {
        let offset = self.offset();
        let term = match self.peek() {
            Some(Tok::Degree) => Term::Degree,
            Some(Tok::Actor) => Term::Actor,
            Some(Tok::Ident(name)) => Term::Attribute(name.clone()),
            Some(Tok::Num(n)) => Term::Number(*n),
            Some(Tok::Str(s)) => Term::Text(s.clone()),
            _ => return Err(syntax(offset, "expected value")),
        };
        self.next();
        Ok(term)
    }
}

/// Parses the filter language; errors carry 1-based character offsets.
pub fn parse_predicate(text: &str) -> Result<Predicate, PredicateError> {
    let (toks, eof_offset) = Lexer::new(text).lex()?;
    let mut parser = Parser {
        toks,
        pos: 0,
        eof_offset,
    };
    let expr = parser.parse_or()?;
    match parser.peek() {
        None => Ok(expr),
        Some(Tok::Ident(word)) if KEYWORDS.contains(&word.to_ascii_lowercase().as_str()) => {
            Err(PredicateError::UnknownKeyword {
                word: word.clone(),
                offset: parser.offset(),
            })
        }
        Some(_) => Err(syntax(parser.offset(), "unexpected token")),
    }
}
