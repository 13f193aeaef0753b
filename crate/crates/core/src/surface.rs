//! Concrete syntax: lexer, parser, and printer for `.grip` files and
//! single terms.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::syntax::build::*;
use crate::syntax::{as_numeral, occurs, shift, Ind, Level, Name, Sort, Term, Tm, MAX_LEVEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub offset: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.line, self.span.col, sev, self.message
        )
    }
}

#[derive(Clone, Debug)]
pub struct Decl {
    pub name: String,
    pub ty: Tm,
    /// `None` for axioms.
    pub body: Option<Tm>,
    pub span: Span,
}

#[derive(Clone, Debug, Default)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

impl SourceFile {
    pub fn get(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name == name)
    }
}

/// Names visible while parsing: inlined definitions and declared axioms.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    defs: HashMap<String, Tm>,
    axioms: HashMap<String, Tm>,
}

impl Scope {
    pub fn new() -> Scope {
        Scope::default()
    }

    pub fn add_def(&mut self, name: &str, body: Tm) {
        self.defs.insert(name.to_string(), body);
    }

    pub fn add_axiom(&mut self, name: &str, ty: Tm) {
        self.axioms.insert(name.to_string(), ty);
    }

    pub fn from_file(file: &SourceFile) -> Scope {
        let mut s = Scope::new();
        for d in &file.decls {
            match &d.body {
                Some(b) => s.add_def(&d.name, b.clone()),
                None => s.add_axiom(&d.name, d.ty.clone()),
            }
        }
        s
    }

    pub fn merge(&mut self, other: &Scope) {
        for (k, v) in &other.defs {
            self.defs.insert(k.clone(), v.clone());
        }
        for (k, v) in &other.axioms {
            self.axioms.insert(k.clone(), v.clone());
        }
    }

    pub fn axioms(&self) -> &HashMap<String, Tm> {
        &self.axioms
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Colon,
    Defeq,
    Dot,
    Arrow,
    FatArrow,
    Implies,
    And,
    Le,
    Question,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Num(n) => return write!(f, "`{n}`"),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrack => "`[`",
            Tok::RBrack => "`]`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Defeq => "`:=`",
            Tok::Dot => "`.`",
            Tok::Arrow => "`->`",
            Tok::FatArrow => "`=>`",
            Tok::Implies => "`==>`",
            Tok::And => "`/\\`",
            Tok::Le => "`<=`",
            Tok::Question => "`?`",
            Tok::At => "`@`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

const NUMERAL_LIMIT: u64 = 100_000;

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let at = |i: usize| bytes.get(i).map(|&(_, c)| c);
    let offset_of = |i: usize| bytes.get(i).map(|&(o, _)| o).unwrap_or(src.len());
    while i < bytes.len() {
        let c = bytes[i].1;
        let start = Span {
            line,
            col,
            offset: offset_of(i),
            len: 1,
        };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && at(i + 1) == Some('-') {
            while i < bytes.len() && bytes[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let (n, tok) = match c {
            '(' => (1, Tok::LParen),
            ')' => (1, Tok::RParen),
            '[' => (1, Tok::LBrack),
            ']' => (1, Tok::RBrack),
            ',' => (1, Tok::Comma),
            '.' => (1, Tok::Dot),
            '?' => (1, Tok::Question),
            '@' => (1, Tok::At),
            ':' if at(i + 1) == Some('=') => (2, Tok::Defeq),
            ':' => (1, Tok::Colon),
            '-' if at(i + 1) == Some('>') => (2, Tok::Arrow),
            '=' if at(i + 1) == Some('=') && at(i + 2) == Some('>') => (3, Tok::Implies),
            '=' if at(i + 1) == Some('>') => (2, Tok::FatArrow),
            '/' if at(i + 1) == Some('\\') => (2, Tok::And),
            '<' if at(i + 1) == Some('=') => (2, Tok::Le),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while at(j).is_some_and(|c| c.is_ascii_digit()) {
                    j += 1;
                }
                let text = &src[offset_of(i)..offset_of(j)];
                let n: u64 = match text.parse() {
                    Ok(n) if n <= NUMERAL_LIMIT => n,
                    _ => {
                        return Err(Diagnostic {
                            severity: Severity::Error,
                            message: format!("numeral {text} is too large"),
                            span: Span {
                                len: text.len(),
                                ..start
                            },
                        })
                    }
                };
                (j - i, Tok::Num(n))
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while at(j).is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                    j += 1;
                }
                let text = src[offset_of(i)..offset_of(j)].to_string();
                (j - i, Tok::Ident(text))
            }
            other => {
                return Err(Diagnostic {
                    severity: Severity::Error,
                    message: format!("unexpected character {other:?}"),
                    span: Span {
                        len: other.len_utf8(),
                        ..start
                    },
                })
            }
        };
        let span = Span {
            len: offset_of(i + n) - offset_of(i),
            ..start
        };
        out.push((tok, span));
        i += n;
        col += n;
    }
    out.push((
        Tok::Eof,
        Span {
            line,
            col,
            offset: src.len(),
            len: 0,
        },
    ));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "def", "axiom", "fun", "Pi", "forall", "Sig", "Type", "Prop", "Nat", "Bool", "Unit", "Empty",
    "true", "false", "tt", "Bot", "S", "cast", "iota", "up", "down", "List", "nil", "cons", "err",
    "exfalso", "Box", "box", "pairP", "fstP", "sndP",
];

fn catch_keyword(s: &str) -> Option<(Ind, bool)> {
    for ind in Ind::ALL {
        let kw = ind.keyword();
        if s == kw {
            return Some((ind, false));
        }
        if s.len() == kw.len() + 1 && s.starts_with(kw) && s.ends_with('P') {
            return Some((ind, true));
        }
    }
    None
}

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s) || catch_keyword(s).is_some()
}

// ---------------------------------------------------------------- parser

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    scope: Scope,
    /// Bound variable names, innermost last.
    bound: Vec<String>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: String) -> PResult<T> {
        Err(Diagnostic {
            severity: Severity::Error,
            message,
            span: self.span(),
        })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {t}, found {}", self.peek()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected an identifier, found {other}")),
        }
    }

    fn level(&mut self) -> PResult<Level> {
        match self.peek().clone() {
            Tok::Num(n) if n <= MAX_LEVEL as u64 => {
                self.bump();
                Ok(Level(n as u32))
            }
            Tok::Num(n) => self.error(format!(
                "universe level {n} exceeds the maximum level {MAX_LEVEL}"
            )),
            other => self.error(format!("expected a universe level, found {other}")),
        }
    }

    fn bracketed(&mut self) -> PResult<Tm> {
        self.expect(Tok::LBrack)?;
        let t = self.term()?;
        self.expect(Tok::RBrack)?;
        Ok(t)
    }

    /// `(x y : A)` groups; returns (names, type) pairs with each type parsed
    /// in the scope extended by the earlier names.
    fn binder_groups(&mut self, allow_many: bool) -> PResult<Vec<(String, Tm)>> {
        let mut out = Vec::new();
        let pushed_before = self.bound.len();
        loop {
            if *self.peek() != Tok::LParen {
                break;
            }
            self.bump();
            let mut names = vec![];
            loop {
                match self.peek().clone() {
                    Tok::Ident(s) if s == "_" || !is_keyword(&s) => {
                        self.bump();
                        names.push(s);
                    }
                    _ => break,
                }
            }
            if names.is_empty() {
                return self.error(format!("expected a binder name, found {}", self.peek()));
            }
            self.expect(Tok::Colon)?;
            let ty = self.term()?;
            self.expect(Tok::RParen)?;
            for (k, n) in names.into_iter().enumerate() {
                out.push((n.clone(), shift(&ty, 0, k as isize)));
                self.bound.push(n);
            }
            if !allow_many {
                break;
            }
        }
        self.bound.truncate(pushed_before);
        if out.is_empty() {
            return self.error(format!("expected a binder `(x : A)`, found {}", self.peek()));
        }
        Ok(out)
    }

    fn with_binders<F>(&mut self, binders: &[(String, Tm)], body: F) -> PResult<Tm>
    where
        F: FnOnce(&mut Self) -> PResult<Tm>,
    {
        let n = self.bound.len();
        for (x, _) in binders {
            self.bound.push(x.clone());
        }
        let r = body(self);
        self.bound.truncate(n);
        r
    }

    fn term(&mut self) -> PResult<Tm> {
        if self.is_kw("fun") {
            self.bump();
            let bs = self.binder_groups(true)?;
            self.expect(Tok::FatArrow)?;
            let body = self.with_binders(&bs, |p| p.term())?;
            return Ok(bs
                .into_iter()
                .rev()
                .fold(body, |b, (x, a)| lam(&x, a, b)));
        }
        if self.is_kw("Pi") {
            self.bump();
            let bs = self.binder_groups(true)?;
            self.expect(Tok::Arrow)?;
            let body = self.with_binders(&bs, |p| p.term())?;
            return Ok(bs.into_iter().rev().fold(body, |b, (x, a)| pi(&x, a, b)));
        }
        if self.is_kw("forall") {
            self.bump();
            let bs = self.binder_groups(true)?;
            self.expect(Tok::Comma)?;
            let body = self.with_binders(&bs, |p| p.term())?;
            return Ok(bs.into_iter().rev().fold(body, |b, (x, a)| all(&x, a, b)));
        }
        if self.is_kw("Sig") {
            self.bump();
            let bs = self.binder_groups(false)?;
            let body = self.with_binders(&bs, |p| p.term())?;
            let (x, a) = bs.into_iter().next().expect("one binder");
            return Ok(sigma(&x, a, body));
        }
        self.implication()
    }

    fn implication(&mut self) -> PResult<Tm> {
        let lhs = self.conj()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            self.bound.push("_".into());
            let rhs = self.implication_rhs();
            self.bound.pop();
            return Ok(Arc::new(Term::All(Name::anon(), lhs, rhs?)));
        }
        Ok(lhs)
    }

    /// Right operand of a non-dependent arrow: parsed under a dummy binder
    /// so that its indices already account for it.
    fn implication_rhs(&mut self) -> PResult<Tm> {
        if self.starts_binder() {
            self.term()
        } else {
            self.implication()
        }
    }

    fn starts_binder(&self) -> bool {
        self.is_kw("fun") || self.is_kw("Pi") || self.is_kw("forall") || self.is_kw("Sig")
    }

    fn conj(&mut self) -> PResult<Tm> {
        let lhs = self.prec()?;
        if *self.peek() == Tok::And {
            self.bump();
            let rhs = if self.starts_binder() {
                self.term()?
            } else {
                self.conj()?
            };
            return Ok(and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn prec(&mut self) -> PResult<Tm> {
        let lhs = self.arrow()?;
        match self.peek() {
            Tok::Le => {
                self.bump();
                self.expect(Tok::LBrack)?;
                let i = self.level()?;
                self.expect(Tok::RBrack)?;
                let rhs = self.arrow()?;
                Ok(Arc::new(Term::TyPrec(i, lhs, rhs)))
            }
            Tok::Colon => {
                self.bump();
                let ta = self.arrow()?;
                self.expect(Tok::Le)?;
                let rhs = self.arrow()?;
                self.expect(Tok::Colon)?;
                let tb = self.arrow()?;
                Ok(tm_prec(ta, tb, lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn arrow(&mut self) -> PResult<Tm> {
        let lhs = self.app()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            self.bound.push("_".into());
            let rhs = if self.starts_binder() {
                self.term()
            } else {
                self.arrow()
            };
            self.bound.pop();
            return Ok(Arc::new(Term::Pi(Name::anon(), lhs, rhs?)));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => {
                !is_keyword(s)
                    || matches!(
                        s.as_str(),
                        "Type" | "Prop" | "Nat" | "Bool" | "Unit" | "Empty" | "true" | "false"
                            | "tt" | "Bot" | "nil" | "err"
                    )
            }
            Tok::Num(_) | Tok::LParen | Tok::Question => true,
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Tm> {
        let mut head = self.app_head()?;
        while self.starts_atom() {
            let a = self.atom()?;
            head = app(head, a);
        }
        Ok(head)
    }

    fn app_head(&mut self) -> PResult<Tm> {
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            Tok::At => {
                self.bump();
                let name = match self.peek().clone() {
                    Tok::Ident(s) => {
                        self.bump();
                        s
                    }
                    other => return self.error(format!("expected a constant name, found {other}")),
                };
                if !self.scope.axioms.contains_key(&name) {
                    return self.error(format!("unknown constant `@{name}`"));
                }
                let mut args = vec![];
                while self.starts_atom() {
                    args.push(self.atom()?);
                }
                return Ok(konst(&name, args));
            }
            _ => return self.atom(),
        };
        if let Some((ind, prop)) = catch_keyword(&kw) {
            self.bump();
            let param = if ind.has_param() {
                Some(self.bracketed()?)
            } else {
                None
            };
            let motive = self.atom()?;
            let mut branches = vec![];
            for _ in 0..ind.arity() {
                branches.push(self.atom()?);
            }
            let on_err = self.atom()?;
            let on_unk = self.atom()?;
            let scrut = self.atom()?;
            return Ok(catch(
                ind, prop, param, motive, branches, on_err, on_unk, scrut,
            ));
        }
        let t = match kw.as_str() {
            "S" => {
                self.bump();
                succ(self.atom()?)
            }
            "cast" => {
                self.bump();
                let a = self.atom()?;
                let b = self.atom()?;
                let t = self.atom()?;
                cast(a, b, t)
            }
            "iota" => {
                self.bump();
                cum(self.atom()?)
            }
            "up" => {
                self.bump();
                up(self.atom()?)
            }
            "down" => {
                self.bump();
                down(self.atom()?)
            }
            "List" => {
                self.bump();
                list(self.atom()?)
            }
            "cons" => {
                self.bump();
                let a = self.bracketed()?;
                let h = self.atom()?;
                let t = self.atom()?;
                cons(a, h, t)
            }
            "exfalso" => {
                self.bump();
                let p = self.atom()?;
                let a = self.atom()?;
                exfalso(p, a)
            }
            "Box" => {
                self.bump();
                box_p(self.atom()?)
            }
            "box" => {
                self.bump();
                let p = self.bracketed()?;
                box_intro(p, self.atom()?)
            }
            "pairP" => {
                self.bump();
                let p = self.atom()?;
                pair_p(p, self.atom()?)
            }
            "fstP" => {
                self.bump();
                fst_p(self.atom()?)
            }
            "sndP" => {
                self.bump();
                snd_p(self.atom()?)
            }
            _ => self.atom()?,
        };
        Ok(t)
    }

    fn atom(&mut self) -> PResult<Tm> {
        let sp = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(num(n))
            }
            Tok::Question => {
                self.bump();
                Ok(unk(self.bracketed()?))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let u = self.term()?;
                    self.expect(Tok::RParen)?;
                    let s = self.bracketed()?;
                    return Ok(pair(s, t, u));
                }
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) => {
                let simple = match s.as_str() {
                    "Prop" => Some(prop()),
                    "Nat" => Some(nat()),
                    "Bool" => Some(bool_()),
                    "Unit" => Some(unit()),
                    "Empty" => Some(empty()),
                    "true" => Some(tru()),
                    "false" => Some(fls()),
                    "tt" => Some(tt()),
                    "Bot" => Some(bot()),
                    _ => None,
                };
                if let Some(t) = simple {
                    self.bump();
                    return Ok(t);
                }
                match s.as_str() {
                    "Type" => {
                        self.bump();
                        let i = self.level()?;
                        Ok(Arc::new(Term::Sort(Sort::Univ(i))))
                    }
                    "nil" => {
                        self.bump();
                        Ok(nil(self.bracketed()?))
                    }
                    "err" => {
                        self.bump();
                        Ok(err(self.bracketed()?))
                    }
                    _ if is_keyword(&s) => {
                        self.error(format!("keyword `{s}` cannot be used here"))
                    }
                    "_" => self.error("`_` cannot be referenced".into()),
                    _ => {
                        self.bump();
                        if let Some(k) = self.bound.iter().rev().position(|b| *b == s) {
                            return Ok(var(k));
                        }
                        if let Some(body) = self.scope.defs.get(&s) {
                            return Ok(body.clone());
                        }
                        if self.scope.axioms.contains_key(&s) {
                            return Ok(konst(&s, vec![]));
                        }
                        Err(Diagnostic {
                            severity: Severity::Error,
                            message: format!("unbound identifier `{s}`"),
                            span: sp,
                        })
                    }
                }
            }
            other => self.error(format!("expected a term, found {other}")),
        }
    }

    fn decl(&mut self, file: &mut SourceFile) -> PResult<()> {
        let sp = self.span();
        let is_axiom = if self.is_kw("def") {
            false
        } else if self.is_kw("axiom") {
            true
        } else {
            return self.error(format!(
                "expected `def` or `axiom`, found {}",
                self.peek()
            ));
        };
        self.bump();
        let name_span = self.span();
        let name = self.ident()?;
        if file.get(&name).is_some() || self.scope.defs.contains_key(&name) {
            return Err(Diagnostic {
                severity: Severity::Error,
                message: format!("`{name}` is already defined"),
                span: name_span,
            });
        }
        self.expect(Tok::Colon)?;
        let ty = self.term()?;
        let body = if is_axiom {
            None
        } else {
            self.expect(Tok::Defeq)?;
            Some(self.term()?)
        };
        self.expect(Tok::Dot)?;
        match &body {
            Some(b) => self.scope.add_def(&name, b.clone()),
            None => self.scope.add_axiom(&name, ty.clone()),
        }
        file.decls.push(Decl {
            name,
            ty,
            body,
            span: sp,
        });
        Ok(())
    }
}

/// Parse a whole `.grip` file. `base` supplies names (such as the prelude
/// axioms) visible to every declaration.
pub fn parse_file_with(text: &str, base: &Scope) -> Result<SourceFile, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut file = SourceFile::default();
    let mut p = Parser {
        toks,
        pos: 0,
        scope: base.clone(),
        bound: vec![],
    };
    while *p.peek() != Tok::Eof {
        p.decl(&mut file).map_err(|d| vec![d])?;
    }
    Ok(file)
}

pub fn parse_file(text: &str) -> Result<SourceFile, Vec<Diagnostic>> {
    parse_file_with(text, &crate::prelude::scope())
}

/// Parse a single closed term against a scope of definitions and axioms.
pub fn parse_term_with(text: &str, scope: &Scope, names: &[String]) -> Result<Tm, Vec<Diagnostic>> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut p = Parser {
        toks,
        pos: 0,
        scope: scope.clone(),
        bound: names.to_vec(),
    };
    let t = p.term().map_err(|d| vec![d])?;
    if *p.peek() != Tok::Eof {
        return Err(vec![Diagnostic {
            severity: Severity::Error,
            message: format!("unexpected {} after term", p.peek()),
            span: p.span(),
        }]);
    }
    Ok(t)
}

/// Parse a single closed term; prelude constants are in scope.
pub fn parse_term(text: &str) -> Result<Tm, Vec<Diagnostic>> {
    parse_term_with(text, &crate::prelude::scope(), &[])
}

// ---------------------------------------------------------------- printer

// Precedence levels, loosest first.
const P_BINDER: u8 = 0;
const P_IMPL: u8 = 1;
const P_CONJ: u8 = 2;
const P_PREC: u8 = 3;
const P_ARROW: u8 = 4;
const P_APP: u8 = 5;
const P_ATOM: u8 = 6;

struct Printer {
    names: Vec<String>,
}

impl Printer {
    fn fresh(&self, hint: &str, used: bool) -> String {
        if !used {
            return "_".into();
        }
        let base = if hint == "_" || hint.is_empty() || is_keyword(hint) {
            "x".to_string()
        } else {
            hint.to_string()
        };
        let mut cand = base.clone();
        let mut k = 0;
        while self.names.contains(&cand) || is_keyword(&cand) {
            k += 1;
            cand = format!("{base}{k}");
        }
        cand
    }

    fn paren(&self, need: bool, s: String) -> String {
        if need {
            format!("({s})")
        } else {
            s
        }
    }

    fn under(&mut self, x: &str, t: &Tm, level: u8) -> String {
        self.names.push(x.to_string());
        let s = self.go(t, level);
        self.names.pop();
        s
    }

    fn go(&mut self, t: &Tm, level: u8) -> String {
        use Term::*;
        if let Some(n) = as_numeral(t) {
            return n.to_string();
        }
        match &**t {
            Var(i) => match self.names.len().checked_sub(i + 1) {
                Some(k) => self.names[k].clone(),
                None => format!("#{i}"),
            },
            Sort(crate::syntax::Sort::Univ(i)) => self.paren(level > P_APP, format!("Type {i}")),
            Sort(crate::syntax::Sort::Prop) => "Prop".into(),
            Nat => "Nat".into(),
            Bool => "Bool".into(),
            Unit => "Unit".into(),
            Empty => "Empty".into(),
            True => "true".into(),
            False => "false".into(),
            Tt => "tt".into(),
            Bot => "Bot".into(),
            Zero => "0".into(),
            Pi(x, a, b) | All(x, a, b) => {
                let is_pi = matches!(&**t, Pi(..));
                if !occurs(b, 0) {
                    let lvl = if is_pi { P_ARROW } else { P_IMPL };
                    let op = if is_pi { "->" } else { "==>" };
                    let lhs = self.go(a, lvl + 1);
                    let rhs = self.under("_", b, lvl);
                    return self.paren(level > lvl, format!("{lhs} {op} {rhs}"));
                }
                let name = self.fresh(x.as_str(), true);
                let dom = self.go(a, P_BINDER);
                let body = self.under(&name, b, P_BINDER);
                let s = if is_pi {
                    format!("Pi ({name} : {dom}) -> {body}")
                } else {
                    format!("forall ({name} : {dom}), {body}")
                };
                self.paren(level > P_BINDER, s)
            }
            Lam(x, a, b) => {
                let name = self.fresh(x.as_str(), occurs(b, 0));
                let dom = self.go(a, P_BINDER);
                let body = self.under(&name, b, P_BINDER);
                self.paren(level > P_BINDER, format!("fun ({name} : {dom}) => {body}"))
            }
            Sigma(x, a, b) => {
                let name = self.fresh(x.as_str(), occurs(b, 0));
                let dom = self.go(a, P_BINDER);
                let body = self.under(&name, b, P_BINDER);
                self.paren(level > P_BINDER, format!("Sig ({name} : {dom}) {body}"))
            }
            App(f, a) => {
                let fs = match &**f {
                    Const(..) => format!("({})", self.go(f, P_BINDER)),
                    _ => self.go(f, P_APP),
                };
                let s = format!("{fs} {}", self.go(a, P_ATOM));
                self.paren(level > P_APP, s)
            }
            List(a) => self.prefix(level, "List", &[a]),
            Nil(a) => format!("nil[{}]", self.go(a, P_BINDER)),
            Cons(a, h, tl) => {
                let s = format!(
                    "cons[{}] {} {}",
                    self.go(a, P_BINDER),
                    self.go(h, P_ATOM),
                    self.go(tl, P_ATOM)
                );
                self.paren(level > P_APP, s)
            }
            Succ(n) => self.prefix(level, "S", &[n]),
            Pair(s, a, b) => format!(
                "({} , {})[{}]",
                self.go(a, P_BINDER),
                self.go(b, P_BINDER),
                self.go(s, P_BINDER)
            ),
            Catch {
                ind,
                prop,
                param,
                motive,
                branches,
                on_err,
                on_unk,
                scrut,
            } => {
                let mut s = ind.keyword().to_string();
                if *prop {
                    s.push('P');
                }
                if let Some(p) = param {
                    s.push_str(&format!("[{}]", self.go(p, P_BINDER)));
                }
                let mut parts = vec![motive];
                parts.extend(branches.iter());
                parts.push(on_err);
                parts.push(on_unk);
                parts.push(scrut);
                for p in parts {
                    s.push(' ');
                    s.push_str(&self.go(p, P_ATOM));
                }
                self.paren(level > P_APP, s)
            }
            Unk(a) => format!("?[{}]", self.go(a, P_BINDER)),
            Err(a) => format!("err[{}]", self.go(a, P_BINDER)),
            Cast(a, b, x) => self.prefix(level, "cast", &[a, b, x]),
            Cum(a) => self.prefix(level, "iota", &[a]),
            Up(a) => self.prefix(level, "up", &[a]),
            Down(a) => self.prefix(level, "down", &[a]),
            ExFalso(p, a) => self.prefix(level, "exfalso", &[p, a]),
            AndP(p, q) => {
                let lhs = self.go(p, P_CONJ + 1);
                let rhs = self.go(q, P_CONJ);
                self.paren(level > P_CONJ, format!("{lhs} /\\ {rhs}"))
            }
            PairP(p, q) => self.prefix(level, "pairP", &[p, q]),
            FstP(p) => self.prefix(level, "fstP", &[p]),
            SndP(p) => self.prefix(level, "sndP", &[p]),
            BoxP(p) => self.prefix(level, "Box", &[p]),
            BoxIntro(p, q) => {
                let s = format!("box[{}] {}", self.go(p, P_BINDER), self.go(q, P_ATOM));
                self.paren(level > P_APP, s)
            }
            TyPrec(i, a, b) => {
                let s = format!("{} <=[{i}] {}", self.go(a, P_ARROW), self.go(b, P_ARROW));
                self.paren(level > P_PREC, s)
            }
            TmPrec(ta, tb, a, b) => {
                let s = format!(
                    "{} :{} <= {} :{}",
                    self.go(a, P_ARROW),
                    self.go(ta, P_ARROW),
                    self.go(b, P_ARROW),
                    self.go(tb, P_ARROW)
                );
                self.paren(level > P_PREC, s)
            }
            Const(c, args) => {
                let mut s = format!("@{c}");
                for a in args {
                    s.push(' ');
                    s.push_str(&self.go(a, P_ATOM));
                }
                self.paren(level > P_APP, s)
            }
        }
    }

    fn prefix(&mut self, level: u8, kw: &str, args: &[&Tm]) -> String {
        let mut s = kw.to_string();
        for a in args {
            s.push(' ');
            s.push_str(&self.go(a, P_ATOM));
        }
        self.paren(level > P_APP, s)
    }
}

/// Print a closed term.
pub fn print(t: &Tm) -> String {
    print_in(t, &[])
}

/// Print a term whose free variables are named by `names` (outermost first).
pub fn print_in(t: &Tm, names: &[String]) -> String {
    let mut p = Printer {
        names: names.to_vec(),
    };
    p.go(t, P_BINDER)
}

/// Print a whole source file back to text.
pub fn print_decl(name: &str, ty: &Tm, body: Option<&Tm>) -> String {
    match body {
        Some(b) => format!("def {name} : {} :=\n  {}.\n", print(ty), print(b)),
        None => format!("axiom {name} : {}.\n", print(ty)),
    }
}

pub struct Pretty<'a>(pub &'a Tm);

impl fmt::Display for Pretty<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self.0))
    }
}
