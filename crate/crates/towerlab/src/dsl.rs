//! Surface syntax: rational-function expressions and the `.twr` script
//! language, parsed by recursive descent with line/column error positions.
//!
//! Expression grammar (highest precedence first): `^` with nonnegative
//! integer exponents (right-associative), unary `-`, `*` `/` and
//! juxtaposition (`2x^2*y`), then `+` `-`. `frob(f, m)` is sugar for
//! f^(p^m). Scripts are newline-separated statements with `#` comments; see
//! [`parse_script`] for the statement forms.

use crate::arith::{FieldSpec, RatFunc};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Abstract syntax of a field-element expression. Identifiers are resolved
/// against a FieldSpec (and, in scripts, against bound element names) at
/// evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(u64),
    Ident(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    /// frob(f, m) = f^(p^m).
    Frob(Box<Expr>, u32),
}

/// A right-hand-side value in a script: an element expression, a generator
/// list, or one of the builtin constructions.
#[derive(Debug, Clone, PartialEq)]
pub enum ScriptExpr {
    Element(Expr),
    /// `<g1, g2, ...>`: a subfield presented by generators.
    Gens(Vec<Expr>),
    /// `tower(W, depth = n)`.
    Tower { base: Box<ScriptExpr>, depth: usize },
    /// `levels(<...>, <...>, ...)`: explicit per-level presentations.
    Levels(Vec<Vec<Expr>>),
    Degrees(Box<ScriptExpr>),
    Ranks(Box<ScriptExpr>),
    /// `jacobson(T)`: the derivation sequence of a tower.
    Jacobson(Box<ScriptExpr>),
    /// `diffalg(T)`: the operator algebras of a tower.
    Diffalg(Box<ScriptExpr>),
    Unpack(Box<ScriptExpr>),
    /// `integrals(T, bound)`: truncated first-integral probe.
    Integrals { tower: Box<ScriptExpr>, bound: u32 },
    /// `extend(W)`: one-step foliation extension.
    Extend(Box<ScriptExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindKind {
    Subfield,
    Tower,
    Seq,
    Alg,
    Probe,
    Element,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub p: u32,
    pub vars: Vec<String>,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Field(FieldDecl),
    Bind {
        kind: BindKind,
        name: String,
        value: ScriptExpr,
        line: usize,
    },
    Print {
        value: ScriptExpr,
        line: usize,
    },
    Assert {
        lhs: ScriptExpr,
        rhs: ScriptExpr,
        negated: bool,
        line: usize,
    },
}

/// A parsed script: exactly one field declaration (first), names bound
/// before use, no rebinding.
#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    statements: Vec<Statement>,
}

impl Script {
    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn field_decl(&self) -> &FieldDecl {
        match &self.statements[0] {
            Statement::Field(d) => d,
            _ => unreachable!("validated at parse time"),
        }
    }
}

// ---------------------------------------------------------------------------
// Printers (parse . print . parse = parse)
// ---------------------------------------------------------------------------

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Ident(_) | Expr::Frob(..) => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(n) => write!(f, "{n}")?,
            Expr::Ident(s) => write!(f, "{s}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Pow(a, k) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{k}")?;
            }
            Expr::Frob(a, m) => write!(f, "frob({a}, {m})")?,
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

fn fmt_gens(gens: &[Expr], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "<")?;
    for (i, g) in gens.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{g}")?;
    }
    write!(f, ">")
}

impl fmt::Display for ScriptExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScriptExpr::Element(e) => write!(f, "{e}"),
            ScriptExpr::Gens(gens) => fmt_gens(gens, f),
            ScriptExpr::Tower { base, depth } => write!(f, "tower({base}, depth = {depth})"),
            ScriptExpr::Levels(levels) => {
                write!(f, "levels(")?;
                for (i, l) in levels.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    fmt_gens(l, f)?;
                }
                write!(f, ")")
            }
            ScriptExpr::Degrees(v) => write!(f, "degrees({v})"),
            ScriptExpr::Ranks(v) => write!(f, "ranks({v})"),
            ScriptExpr::Jacobson(v) => write!(f, "jacobson({v})"),
            ScriptExpr::Diffalg(v) => write!(f, "diffalg({v})"),
            ScriptExpr::Unpack(v) => write!(f, "unpack({v})"),
            ScriptExpr::Integrals { tower, bound } => write!(f, "integrals({tower}, {bound})"),
            ScriptExpr::Extend(v) => write!(f, "extend({v})"),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Field(d) => {
                write!(f, "field {} = GF({})({})", d.name, d.p, d.vars.join(", "))
            }
            Statement::Bind {
                kind, name, value, ..
            } => {
                let kw = match kind {
                    BindKind::Subfield => "subfield",
                    BindKind::Tower => "tower",
                    BindKind::Seq => "seq",
                    BindKind::Alg => "alg",
                    BindKind::Probe => "probe",
                    BindKind::Element => "let",
                };
                write!(f, "{kw} {name} = {value}")
            }
            Statement::Print { value, .. } => write!(f, "print {value}"),
            Statement::Assert {
                lhs, rhs, negated, ..
            } => {
                let op = if *negated { "!=" } else { "==" };
                write!(f, "assert {lhs} {op} {rhs}")
            }
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Lt,
    Gt,
    Comma,
    Eq,
    EqEq,
    NotEq,
    Newline,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::EqEq => write!(f, "`==`"),
            Tok::NotEq => write!(f, "`!=`"),
            Tok::Newline => write!(f, "end of line"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    for (li, raw_line) in src.lines().enumerate() {
        let line = li + 1;
        let text: &str = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let simple = match c {
                ' ' | '\t' | '\r' => {
                    i += 1;
                    continue;
                }
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '/' => Some(Tok::Slash),
                '^' => Some(Tok::Caret),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '<' => Some(Tok::Lt),
                '>' => Some(Tok::Gt),
                ',' => Some(Tok::Comma),
                _ => None,
            };
            if let Some(tok) = simple {
                out.push(Spanned { tok, line, col });
                i += 1;
                continue;
            }
            if c == '=' {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Spanned {
                        tok: Tok::EqEq,
                        line,
                        col,
                    });
                    i += 2;
                } else {
                    out.push(Spanned {
                        tok: Tok::Eq,
                        line,
                        col,
                    });
                    i += 1;
                }
                continue;
            }
            if c == '!' && chars.get(i + 1) == Some(&'=') {
                out.push(Spanned {
                    tok: Tok::NotEq,
                    line,
                    col,
                });
                i += 2;
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n: u64 = text.parse().map_err(|_| Error::Parse {
                    line,
                    col,
                    msg: format!("number `{text}` is too large"),
                })?;
                out.push(Spanned {
                    tok: Tok::Num(n),
                    line,
                    col,
                });
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                    col,
                });
                continue;
            }
            return Err(Error::Parse {
                line,
                col,
                msg: format!("unexpected character `{c}`"),
            });
        }
        out.push(Spanned {
            tok: Tok::Newline,
            line,
            col: chars.len() + 1,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Inside parentheses / generator lists newlines are insignificant.
    group_depth: usize,
}

const BUILTINS: &[&str] = &[
    "tower",
    "levels",
    "degrees",
    "ranks",
    "jacobson",
    "diffalg",
    "unpack",
    "integrals",
    "extend",
];

impl Parser {
    fn new(toks: Vec<Spanned>) -> Parser {
        Parser {
            toks,
            pos: 0,
            group_depth: 0,
        }
    }

    fn skip_newlines(&mut self) {
        while matches!(self.toks.get(self.pos).map(|s| &s.tok), Some(Tok::Newline)) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<&Spanned> {
        if self.group_depth > 0 {
            self.skip_newlines();
        }
        self.toks.get(self.pos)
    }

    /// Second lookahead token (after the current one), honoring grouping.
    fn peek2(&self) -> Option<&Tok> {
        let mut i = self.pos + 1;
        while let Some(s) = self.toks.get(i) {
            if self.group_depth > 0 && s.tok == Tok::Newline {
                i += 1;
            } else {
                return Some(&s.tok);
            }
        }
        None
    }

    fn last_pos(&self) -> (usize, usize) {
        self.toks
            .last()
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err_here(&mut self, msg: impl Into<String>) -> Error {
        let (line, col) = match self.peek() {
            Some(s) => (s.line, s.col),
            None => self.last_pos(),
        };
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn advance(&mut self) -> Option<Spanned> {
        let s = self.peek().cloned();
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn expect(&mut self, tok: &Tok) -> Result<Spanned> {
        match self.peek().cloned() {
            Some(s) if s.tok == *tok => {
                self.pos += 1;
                Ok(s)
            }
            Some(s) => Err(Error::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected {tok}, found {}", s.tok),
            }),
            None => {
                let (line, col) = self.last_pos();
                Err(Error::Parse {
                    line,
                    col,
                    msg: format!("expected {tok}, found end of input"),
                })
            }
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize)> {
        match self.advance() {
            Some(Spanned {
                tok: Tok::Ident(s),
                line,
                col,
            }) => Ok((s, line, col)),
            Some(s) => Err(Error::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected an identifier, found {}", s.tok),
            }),
            None => {
                let (line, col) = self.last_pos();
                Err(Error::Parse {
                    line,
                    col,
                    msg: "expected an identifier, found end of input".into(),
                })
            }
        }
    }

    fn expect_number(&mut self) -> Result<u64> {
        match self.advance() {
            Some(Spanned {
                tok: Tok::Num(n), ..
            }) => Ok(n),
            Some(s) => Err(Error::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected a number, found {}", s.tok),
            }),
            None => {
                let (line, col) = self.last_pos();
                Err(Error::Parse {
                    line,
                    col,
                    msg: "expected a number, found end of input".into(),
                })
            }
        }
    }

    // -- expressions --------------------------------------------------------

    fn parse_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek().map(|s| s.tok.clone()) {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                // Juxtaposition: `2x`, `2 frob(x, 1)`.
                Some(Tok::Ident(_)) => {
                    let rhs = self.parse_pow()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr> {
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Minus)) {
            self.pos += 1;
            let inner = self.parse_unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_pow()
    }

    fn parse_pow(&mut self) -> Result<Expr> {
        let base = self.parse_primary()?;
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Caret)) {
            self.pos += 1;
            let e = self.parse_exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    /// A nonnegative integer exponent; `a^b^c` nests to the right, so the
    /// exponent may itself be a `^`-chain of numbers.
    fn parse_exponent(&mut self) -> Result<u32> {
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Minus)) {
            return Err(self.err_here("negative exponents are not allowed"));
        }
        let n = self.expect_number()?;
        let n: u32 = n
            .try_into()
            .map_err(|_| self.err_here("exponent is too large"))?;
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Caret)) {
            self.pos += 1;
            let m = self.parse_exponent()?;
            return n
                .checked_pow(m)
                .ok_or_else(|| self.err_here("exponent is too large"));
        }
        Ok(n)
    }

    fn parse_primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Spanned {
                tok: Tok::Num(n), ..
            }) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Spanned {
                tok: Tok::Ident(name),
                ..
            }) => {
                self.pos += 1;
                if name == "frob" {
                    self.expect(&Tok::LParen)?;
                    self.group_depth += 1;
                    let inner = self.parse_expr()?;
                    self.expect(&Tok::Comma)?;
                    let m = self.expect_number()?;
                    let m: u32 = m
                        .try_into()
                        .map_err(|_| self.err_here("frob level is too large"))?;
                    self.group_depth -= 1;
                    self.expect(&Tok::RParen)?;
                    Ok(Expr::Frob(Box::new(inner), m))
                } else {
                    Ok(Expr::Ident(name))
                }
            }
            Some(Spanned {
                tok: Tok::LParen, ..
            }) => {
                self.pos += 1;
                self.group_depth += 1;
                let inner = self.parse_expr()?;
                self.group_depth -= 1;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Some(s) => Err(Error::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected an expression, found {}", s.tok),
            }),
            None => {
                let (line, col) = self.last_pos();
                Err(Error::Parse {
                    line,
                    col,
                    msg: "expected an expression, found end of input".into(),
                })
            }
        }
    }

    // -- script values ------------------------------------------------------

    fn parse_gens(&mut self) -> Result<Vec<Expr>> {
        self.expect(&Tok::Lt)?;
        self.group_depth += 1;
        let mut gens = vec![self.parse_expr()?];
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Comma)) {
            self.pos += 1;
            gens.push(self.parse_expr()?);
        }
        self.group_depth -= 1;
        self.expect(&Tok::Gt)?;
        Ok(gens)
    }

    fn parse_value(&mut self) -> Result<ScriptExpr> {
        if matches!(self.peek().map(|s| &s.tok), Some(Tok::Lt)) {
            return Ok(ScriptExpr::Gens(self.parse_gens()?));
        }
        if let Some(Spanned {
            tok: Tok::Ident(name),
            ..
        }) = self.peek().cloned()
        {
            if BUILTINS.contains(&name.as_str()) && self.peek2() == Some(&Tok::LParen) {
                return self.parse_builtin(&name);
            }
        }
        Ok(ScriptExpr::Element(self.parse_expr()?))
    }

    fn parse_builtin(&mut self, name: &str) -> Result<ScriptExpr> {
        self.pos += 1; // the builtin identifier
        self.expect(&Tok::LParen)?;
        self.group_depth += 1;
        let out = match name {
            "tower" => {
                let base = self.parse_value()?;
                self.expect(&Tok::Comma)?;
                let (kw, line, col) = self.expect_ident()?;
                if kw != "depth" {
                    return Err(Error::Parse {
                        line,
                        col,
                        msg: format!("expected `depth`, found `{kw}`"),
                    });
                }
                self.expect(&Tok::Eq)?;
                let depth = self.expect_number()? as usize;
                if depth == 0 {
                    return Err(self.err_here("tower depth must be at least 1"));
                }
                ScriptExpr::Tower {
                    base: Box::new(base),
                    depth,
                }
            }
            "levels" => {
                let mut levels = vec![self.parse_gens()?];
                while matches!(self.peek().map(|s| &s.tok), Some(Tok::Comma)) {
                    self.pos += 1;
                    levels.push(self.parse_gens()?);
                }
                ScriptExpr::Levels(levels)
            }
            "integrals" => {
                let tower = self.parse_value()?;
                self.expect(&Tok::Comma)?;
                let bound = self.expect_number()?;
                let bound: u32 = bound
                    .try_into()
                    .map_err(|_| self.err_here("degree bound is too large"))?;
                ScriptExpr::Integrals {
                    tower: Box::new(tower),
                    bound,
                }
            }
            _ => {
                let inner = Box::new(self.parse_value()?);
                match name {
                    "degrees" => ScriptExpr::Degrees(inner),
                    "ranks" => ScriptExpr::Ranks(inner),
                    "jacobson" => ScriptExpr::Jacobson(inner),
                    "diffalg" => ScriptExpr::Diffalg(inner),
                    "unpack" => ScriptExpr::Unpack(inner),
                    "extend" => ScriptExpr::Extend(inner),
                    _ => unreachable!("filtered by BUILTINS"),
                }
            }
        };
        self.group_depth -= 1;
        self.expect(&Tok::RParen)?;
        Ok(out)
    }

    // -- statements ---------------------------------------------------------

    fn parse_field_decl(&mut self, line: usize) -> Result<FieldDecl> {
        let (name, ..) = self.expect_ident()?;
        self.expect(&Tok::Eq)?;
        let (gf, gline, gcol) = self.expect_ident()?;
        if gf != "GF" {
            return Err(Error::Parse {
                line: gline,
                col: gcol,
                msg: format!("expected `GF`, found `{gf}`"),
            });
        }
        self.expect(&Tok::LParen)?;
        self.group_depth += 1;
        let p = self.expect_number()?;
        let p: u32 = p
            .try_into()
            .map_err(|_| self.err_here("characteristic is too large"))?;
        self.group_depth -= 1;
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::LParen)?;
        self.group_depth += 1;
        let mut vars = vec![self.expect_ident()?.0];
        while matches!(self.peek().map(|s| &s.tok), Some(Tok::Comma)) {
            self.pos += 1;
            vars.push(self.expect_ident()?.0);
        }
        self.group_depth -= 1;
        self.expect(&Tok::RParen)?;
        Ok(FieldDecl {
            name,
            p,
            vars,
            line,
        })
    }

    fn end_statement(&mut self) -> Result<()> {
        match self.peek().cloned() {
            None => Ok(()),
            Some(s) if s.tok == Tok::Newline => {
                self.pos += 1;
                Ok(())
            }
            Some(s) => Err(Error::Parse {
                line: s.line,
                col: s.col,
                msg: format!("expected end of statement, found {}", s.tok),
            }),
        }
    }
}

/// Walk a value's expressions, checking every identifier is a field variable
/// or a previously bound name.
fn check_names(
    value: &ScriptExpr,
    vars: &[String],
    bound: &HashMap<String, BindKind>,
    line: usize,
) -> Result<()> {
    fn check_expr(
        e: &Expr,
        vars: &[String],
        bound: &HashMap<String, BindKind>,
        line: usize,
    ) -> Result<()> {
        match e {
            Expr::Num(_) => Ok(()),
            Expr::Ident(name) => {
                if vars.iter().any(|v| v == name) || bound.contains_key(name) {
                    Ok(())
                } else {
                    Err(Error::Script {
                        line,
                        col: 1,
                        msg: format!("unknown name `{name}`"),
                    })
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Frob(a, _) => check_expr(a, vars, bound, line),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                check_expr(a, vars, bound, line)?;
                check_expr(b, vars, bound, line)
            }
        }
    }
    match value {
        ScriptExpr::Element(e) => check_expr(e, vars, bound, line),
        ScriptExpr::Gens(gens) => gens.iter().try_for_each(|g| check_expr(g, vars, bound, line)),
        ScriptExpr::Levels(levels) => levels
            .iter()
            .flatten()
            .try_for_each(|g| check_expr(g, vars, bound, line)),
        ScriptExpr::Tower { base, .. } => check_names(base, vars, bound, line),
        ScriptExpr::Integrals { tower, .. } => check_names(tower, vars, bound, line),
        ScriptExpr::Degrees(v)
        | ScriptExpr::Ranks(v)
        | ScriptExpr::Jacobson(v)
        | ScriptExpr::Diffalg(v)
        | ScriptExpr::Unpack(v)
        | ScriptExpr::Extend(v) => check_names(v, vars, bound, line),
    }
}

/// Parse a single field-element expression against a known field.
pub fn parse_expr(src: &str, spec: &Arc<FieldSpec>) -> Result<Expr> {
    let mut p = Parser::new(lex(src)?);
    p.skip_newlines();
    let e = p.parse_expr()?;
    p.skip_newlines();
    if let Some(s) = p.peek() {
        return Err(Error::Parse {
            line: s.line,
            col: s.col,
            msg: format!("unexpected {} after the expression", s.tok),
        });
    }
    // Identifier validation against the spec (frob is handled in grammar).
    fn check(e: &Expr, spec: &Arc<FieldSpec>) -> Result<()> {
        match e {
            Expr::Num(_) => Ok(()),
            Expr::Ident(name) => {
                if spec.var_index(name).is_some() {
                    Ok(())
                } else {
                    Err(Error::Parse {
                        line: 1,
                        col: 1,
                        msg: format!("unknown identifier `{name}`"),
                    })
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Frob(a, _) => check(a, spec),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                check(a, spec)?;
                check(b, spec)
            }
        }
    }
    check(&e, spec)?;
    Ok(e)
}

/// Evaluate with a custom identifier resolver (used by the script runner,
/// where names may refer to bound elements).
pub fn eval_expr_with(
    e: &Expr,
    spec: &Arc<FieldSpec>,
    resolve: &dyn Fn(&str) -> Option<RatFunc>,
) -> Result<RatFunc> {
    match e {
        Expr::Num(n) => Ok(RatFunc::constant(spec, (n % spec.p() as u64) as u32)),
        Expr::Ident(name) => resolve(name).ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            msg: format!("unknown identifier `{name}`"),
        }),
        Expr::Neg(a) => Ok(eval_expr_with(a, spec, resolve)?.neg()),
        Expr::Add(a, b) => eval_expr_with(a, spec, resolve)?.add(&eval_expr_with(b, spec, resolve)?),
        Expr::Sub(a, b) => eval_expr_with(a, spec, resolve)?.sub(&eval_expr_with(b, spec, resolve)?),
        Expr::Mul(a, b) => eval_expr_with(a, spec, resolve)?.mul(&eval_expr_with(b, spec, resolve)?),
        Expr::Div(a, b) => eval_expr_with(a, spec, resolve)?.div(&eval_expr_with(b, spec, resolve)?),
        Expr::Pow(a, k) => Ok(eval_expr_with(a, spec, resolve)?.pow(*k)),
        Expr::Frob(a, m) => Ok(eval_expr_with(a, spec, resolve)?.pth_power(*m)),
    }
}

/// Exact evaluation in K; identifiers are the field variables.
pub fn eval_expr(e: &Expr, spec: &Arc<FieldSpec>) -> Result<RatFunc> {
    let s = spec.clone();
    eval_expr_with(e, spec, &move |name| {
        s.var_index(name).map(|i| RatFunc::var(&s, i))
    })
}

/// Canonical text form; `parse_expr` + `eval_expr` recovers the element.
pub fn print_canonical(f: &RatFunc) -> String {
    f.to_string()
}

/// Parse a `.twr` script. Statement forms:
///
/// ```text
/// field K = GF(2)(x, y)
/// subfield W = <x + y^2>
/// tower T = tower(W, depth = 3)
/// tower T2 = levels(<x, y^2>, <x + y^2, y^4>)
/// seq S = jacobson(T)
/// alg A = diffalg(T)
/// probe P = integrals(T, 6)
/// let f = x + frob(y, 1)
/// print degrees(T)
/// assert unpack(A) == S
/// ```
///
/// `#` starts a line comment. The field declaration must come first and
/// appear exactly once; names must be bound before use and never rebound.
pub fn parse_script(src: &str) -> Result<Script> {
    let mut p = Parser::new(lex(src)?);
    let mut statements: Vec<Statement> = Vec::new();
    let mut field: Option<FieldDecl> = None;
    let mut bound: HashMap<String, BindKind> = HashMap::new();

    loop {
        p.skip_newlines();
        let Some(head) = p.peek().cloned() else {
            break;
        };
        let line = head.line;
        let (kw, kline, kcol) = p.expect_ident()?;
        let script_err = |msg: String| Error::Script {
            line: kline,
            col: kcol,
            msg,
        };
        if kw != "field" && field.is_none() {
            return Err(script_err(
                "the script must start with a field declaration".into(),
            ));
        }
        match kw.as_str() {
            "field" => {
                if field.is_some() {
                    return Err(script_err("duplicate field declaration".into()));
                }
                let decl = p.parse_field_decl(line)?;
                for v in &decl.vars {
                    bound.insert(v.clone(), BindKind::Element);
                }
                bound.insert(decl.name.clone(), BindKind::Element);
                field = Some(decl.clone());
                statements.push(Statement::Field(decl));
            }
            "subfield" | "tower" | "seq" | "alg" | "probe" | "let" => {
                let kind = match kw.as_str() {
                    "subfield" => BindKind::Subfield,
                    "tower" => BindKind::Tower,
                    "seq" => BindKind::Seq,
                    "alg" => BindKind::Alg,
                    "probe" => BindKind::Probe,
                    _ => BindKind::Element,
                };
                let (name, nline, ncol) = p.expect_ident()?;
                if bound.contains_key(&name) {
                    return Err(Error::Script {
                        line: nline,
                        col: ncol,
                        msg: format!("name `{name}` is already bound"),
                    });
                }
                p.expect(&Tok::Eq)?;
                let value = p.parse_value()?;
                check_names(&value, &[], &bound, line)?;
                bound.insert(name.clone(), kind);
                statements.push(Statement::Bind {
                    kind,
                    name,
                    value,
                    line,
                });
            }
            "print" => {
                let value = p.parse_value()?;
                check_names(&value, &[], &bound, line)?;
                statements.push(Statement::Print { value, line });
            }
            "assert" => {
                let lhs = p.parse_value()?;
                let negated = match p.peek().map(|s| s.tok.clone()) {
                    Some(Tok::EqEq) => false,
                    Some(Tok::NotEq) => true,
                    _ => return Err(p.err_here("expected `==` or `!=` in assert")),
                };
                p.pos += 1;
                let rhs = p.parse_value()?;
                check_names(&lhs, &[], &bound, line)?;
                check_names(&rhs, &[], &bound, line)?;
                statements.push(Statement::Assert {
                    lhs,
                    rhs,
                    negated,
                    line,
                });
            }
            other => {
                return Err(script_err(format!("unknown statement keyword `{other}`")));
            }
        }
        p.end_statement()?;
    }
    if field.is_none() {
        return Err(Error::Script {
            line: 1,
            col: 1,
            msg: "the script contains no field declaration".into(),
        });
    }
    Ok(Script { statements })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2xy() -> Arc<FieldSpec> {
        FieldSpec::new(2, &["x", "y"]).unwrap()
    }

    fn f3xy() -> Arc<FieldSpec> {
        FieldSpec::new(3, &["x", "y"]).unwrap()
    }

    fn eval(src: &str, spec: &Arc<FieldSpec>) -> RatFunc {
        eval_expr(&parse_expr(src, spec).unwrap(), spec).unwrap()
    }

    #[test]
    fn expression_examples() {
        let s2 = f2xy();
        let x = RatFunc::var(&s2, 0);
        let y = RatFunc::var(&s2, 1);
        assert_eq!(eval("x + y^2", &s2), x.add(&y.pow(2)).unwrap());
        assert_eq!(eval("x/x", &s2), RatFunc::one(&s2));
        assert_eq!(eval("(x+y)^2", &s2), x.pow(2).add(&y.pow(2)).unwrap());
        // Juxtaposition and chained exponents.
        assert_eq!(eval("2x^2*y", &f3xy()), {
            let s3 = f3xy();
            RatFunc::var(&s3, 0)
                .pow(2)
                .mul(&RatFunc::var(&s3, 1))
                .unwrap()
                .scale(2)
        });
        assert_eq!(eval("x^2^3", &s2), x.pow(8));
        // frob(f, m) = f^(p^m).
        let s3 = f3xy();
        let xy = RatFunc::var(&s3, 0).add(&RatFunc::var(&s3, 1)).unwrap();
        assert_eq!(eval("frob(x + y, 2)", &s3), xy.pow(9));
        assert_eq!(eval("frob(x + y, 2)", &s3), xy.pth_power(2));
        // Unary minus at p = 3.
        assert_eq!(eval("-x", &s3), RatFunc::var(&s3, 0).scale(2));
    }

    #[test]
    fn expression_errors_carry_positions() {
        let s = f2xy();
        match parse_expr("1/(x+", &s) {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 6);
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_expr("x^-2", &s),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_expr("x + z", &s),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            eval_expr(&parse_expr("1/0", &s).unwrap(), &s),
            Err(Error::DivisionByZero)
        ));
        assert!(matches!(
            eval_expr(&parse_expr("1/(x + x)", &s).unwrap(), &s),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn print_parse_round_trip() {
        let s = f3xy();
        let x = RatFunc::var(&s, 0);
        let y = RatFunc::var(&s, 1);
        let samples = vec![
            RatFunc::one(&s),
            RatFunc::zero(&s),
            x.pow(2).add(&y).unwrap(),
            x.pow(2).mul(&y).unwrap().scale(2).add(&x).unwrap(),
            x.div(&y.add(&RatFunc::one(&s)).unwrap()).unwrap(),
            x.add(&y).unwrap().inv().unwrap(),
        ];
        for f in samples {
            let text = print_canonical(&f);
            let back = eval(&text, &s);
            assert_eq!(back, f, "round trip failed on `{text}`");
            // Printer stability: parse . print . parse = parse.
            assert_eq!(print_canonical(&back), text);
        }
    }

    #[test]
    fn script_statement_counts_and_shape() {
        let src = "\
field K = GF(2)(x, y)
subfield W = <x + y^2>
tower T = tower(W, depth = 3)
print degrees(T)
seq S = jacobson(T)
alg A = diffalg(T)
assert unpack(A) == S
";
        let script = parse_script(src).unwrap();
        assert_eq!(script.statements().len(), 7);
        assert_eq!(script.field_decl().p, 2);
        assert_eq!(script.field_decl().vars, vec!["x", "y"]);
        assert!(matches!(
            script.statements()[1],
            Statement::Bind {
                kind: BindKind::Subfield,
                ..
            }
        ));
        assert!(matches!(
            script.statements()[6],
            Statement::Assert { negated: false, .. }
        ));
    }

    #[test]
    fn script_explicit_levels_and_comments() {
        let src = "\
# twisted tower
field K = GF(2)(x, y)
tower T = levels(<x, y^2>, <x + y^2, y^4>,
                 <x + y^2 + y^4, y^8>)
probe P = integrals(T, 6)
print P
";
        let script = parse_script(src).unwrap();
        assert_eq!(script.statements().len(), 4);
        match &script.statements()[1] {
            Statement::Bind {
                value: ScriptExpr::Levels(levels),
                ..
            } => assert_eq!(levels.len(), 3),
            other => panic!("unexpected statement {other:?}"),
        }
    }

    #[test]
    fn script_name_errors() {
        // Redefinition.
        let src = "field K = GF(2)(x, y)\nsubfield K = <x>\n";
        assert!(matches!(parse_script(src), Err(Error::Script { .. })));
        // Use before binding.
        let src = "field K = GF(2)(x, y)\nprint degrees(T)\n";
        assert!(matches!(parse_script(src), Err(Error::Script { .. })));
        // Missing field declaration.
        assert!(matches!(
            parse_script("subfield W = <1>\n"),
            Err(Error::Script { .. })
        ));
        // Unknown keyword.
        assert!(matches!(
            parse_script("field K = GF(2)(x)\nfoo W = <x>\n"),
            Err(Error::Script { .. })
        ));
    }
}
