//! A finite model of the theory for two universe levels: type codes,
//! semantic values, the model's cast and precision, and exhaustive checks
//! of the preorder and embedding-projection laws within enumeration bounds.
//!
//! Values of the unknown type carry the germ they were injected from.
//! Beyond the unknown's `err`/`?`, an injection `Inj(g, v)` covers the
//! universe (`g = Univ`), cumulativity (`g = Cum A`), lists (`g = List ?`)
//! and, by the same pattern, the remaining inductives and sigma types.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::eval::normalize;
use crate::syntax::build::*;
use crate::syntax::{as_numeral, occurs, shift, Sort as S, Term, Tm};

/// Type codes. `Univ` is the code of the lower universe, living at level 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Code {
    Nat,
    Bool,
    Unit,
    Empty,
    Prop,
    Box,
    List(std::boxed::Box<Code>),
    Sigma(std::boxed::Box<Code>, Family),
    Pi(std::boxed::Box<Code>, Family),
    ErrU(u8),
    UnkU(u8),
    Univ,
    Cum(std::boxed::Box<Code>),
}

/// A code family over the values of a domain code.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Const(std::boxed::Box<Code>),
    /// Defined on every enumerated value of the domain.
    Table(Vec<(MVal, Code)>),
}

/// Semantic values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MVal {
    Err,
    Unk,
    Nat(u64),
    Bool(bool),
    Tt,
    Nil,
    Cons(std::boxed::Box<MVal>, std::boxed::Box<MVal>),
    Pair(std::boxed::Box<MVal>, std::boxed::Box<MVal>),
    /// A function tabulated over the enumeration of its domain.
    Fun(Vec<(MVal, MVal)>),
    /// An element of the lower universe.
    Code(Code),
    /// The single element of the error type.
    Star,
    /// The degenerate inhabitant of propositions and boxes.
    Proof,
    /// An element of the unknown type injected from a germ.
    Inj(Code, std::boxed::Box<MVal>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumBound {
    pub nat_bound: u64,
    pub list_len: usize,
    pub fn_table_bound: usize,
    pub depth: usize,
    /// Largest enumeration produced before giving up.
    pub max_values: usize,
}

impl Default for EnumBound {
    fn default() -> EnumBound {
        EnumBound {
            nat_bound: 3,
            list_len: 2,
            fn_table_bound: 8,
            depth: 2,
            max_values: 8192,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("domain of {code} has {size} values, more than the table bound {bound}")]
    DomainTooLarge { code: String, size: usize, bound: usize },
    #[error("enumeration of {code} exceeds {limit} values")]
    Overflow { code: String, limit: usize },
    #[error("{0} is not in the tabulated domain")]
    OutOfTable(String),
    #[error("{a} and {b} live at different levels")]
    LevelMismatch { a: String, b: String },
    #[error("{a} is not more precise than {b}")]
    Unrelated { a: String, b: String },
}

pub type OResult<T> = Result<T, OracleError>;

fn bx<T>(t: T) -> std::boxed::Box<T> {
    std::boxed::Box::new(t)
}

impl Code {
    pub fn list(c: Code) -> Code {
        Code::List(bx(c))
    }

    pub fn cum(c: Code) -> Code {
        Code::Cum(bx(c))
    }

    pub fn arrow(a: Code, b: Code) -> Code {
        Code::Pi(bx(a), Family::Const(bx(b)))
    }

    pub fn pi(a: Code, f: Family) -> Code {
        Code::Pi(bx(a), f)
    }

    pub fn prod(a: Code, b: Code) -> Code {
        Code::Sigma(bx(a), Family::Const(bx(b)))
    }

    pub fn sigma(a: Code, f: Family) -> Code {
        Code::Sigma(bx(a), f)
    }

    pub fn level(&self) -> u8 {
        match self {
            Code::Nat | Code::Bool | Code::Unit | Code::Empty | Code::Prop | Code::Box => 0,
            Code::List(a) => a.level(),
            Code::Sigma(a, f) | Code::Pi(a, f) => a.level().max(f.max_level()),
            Code::ErrU(l) | Code::UnkU(l) => *l,
            Code::Univ | Code::Cum(_) => 1,
        }
    }

    /// The germ a value of this code passes through on its way into the
    /// unknown type; `None` for codes without one.
    pub fn germ(&self) -> Option<Code> {
        let l = self.level();
        match self {
            Code::Nat | Code::Bool | Code::Unit | Code::Empty | Code::Prop | Code::Univ | Code::Cum(_) => {
                Some(self.clone())
            }
            Code::List(_) => Some(Code::list(Code::UnkU(l))),
            Code::Sigma(..) => Some(Code::prod(Code::UnkU(l), Code::UnkU(l))),
            Code::Pi(..) | Code::Box | Code::ErrU(_) | Code::UnkU(_) => None,
        }
    }

    fn head_tag(&self) -> u8 {
        match self {
            Code::Nat => 0,
            Code::Bool => 1,
            Code::Unit => 2,
            Code::Empty => 3,
            Code::Prop => 4,
            Code::Box => 5,
            Code::List(_) => 6,
            Code::Sigma(..) => 7,
            Code::Pi(..) => 8,
            Code::Univ => 9,
            Code::Cum(_) => 10,
            Code::ErrU(_) => 11,
            Code::UnkU(_) => 12,
        }
    }
}

impl Family {
    fn at(&self, v: &MVal) -> OResult<&Code> {
        match self {
            Family::Const(c) => Ok(c),
            Family::Table(t) => t
                .iter()
                .find(|(k, _)| k == v)
                .map(|(_, c)| c)
                .ok_or_else(|| OracleError::OutOfTable(v.to_string())),
        }
    }

    fn codes(&self) -> std::boxed::Box<dyn Iterator<Item = &Code> + '_> {
        match self {
            Family::Const(c) => std::boxed::Box::new(std::iter::once(&**c)),
            Family::Table(t) => std::boxed::Box::new(t.iter().map(|(_, c)| c)),
        }
    }

    fn max_level(&self) -> u8 {
        self.codes().map(Code::level).max().unwrap_or(0)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Code::Nat => write!(f, "Nat"),
            Code::Bool => write!(f, "Bool"),
            Code::Unit => write!(f, "Unit"),
            Code::Empty => write!(f, "Empty"),
            Code::Prop => write!(f, "Prop"),
            Code::Box => write!(f, "Box"),
            Code::List(a) => write!(f, "List ({a})"),
            Code::Sigma(a, Family::Const(b)) => write!(f, "({a} * {b})"),
            Code::Pi(a, Family::Const(b)) => write!(f, "({a} -> {b})"),
            Code::Sigma(a, Family::Table(t)) | Code::Pi(a, Family::Table(t)) => {
                let kw = if matches!(self, Code::Pi(..)) { "Pi" } else { "Sig" };
                write!(f, "{kw} ({a}) [")?;
                for (i, (k, c)) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k} => {c}")?;
                }
                write!(f, "]")
            }
            Code::ErrU(l) => write!(f, "err[Type {l}]"),
            Code::UnkU(l) => write!(f, "?[Type {l}]"),
            Code::Univ => write!(f, "Type 0"),
            Code::Cum(a) => write!(f, "iota ({a})"),
        }
    }
}

impl fmt::Display for MVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MVal::Err => write!(f, "err"),
            MVal::Unk => write!(f, "?"),
            MVal::Nat(n) => write!(f, "{n}"),
            MVal::Bool(b) => write!(f, "{b}"),
            MVal::Tt => write!(f, "tt"),
            MVal::Nil => write!(f, "[]"),
            MVal::Cons(h, t) => write!(f, "{h} :: {t}"),
            MVal::Pair(a, b) => write!(f, "({a}, {b})"),
            MVal::Fun(t) => {
                write!(f, "{{")?;
                for (i, (k, v)) in t.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k} => {v}")?;
                }
                write!(f, "}}")
            }
            MVal::Code(c) => write!(f, "<{c}>"),
            MVal::Star => write!(f, "*"),
            MVal::Proof => write!(f, "proof"),
            MVal::Inj(g, v) => write!(f, "inj[{g}]({v})"),
        }
    }
}

/// The model at a fixed enumeration bound.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub bound: EnumBound,
}

impl Model {
    pub fn new(bound: EnumBound) -> Model {
        Model { bound }
    }

    /// Components of lists, pairs and injections are enumerated one
    /// level of unknown-nesting lower.
    fn lower(&self) -> Model {
        Model {
            bound: EnumBound {
                depth: self.bound.depth.saturating_sub(1),
                ..self.bound
            },
        }
    }

    // ------------------------------------------------------------ values

    /// Every value of `c` within the bound, exceptions included.
    pub fn enumerate(&self, c: &Code) -> OResult<Vec<MVal>> {
        let b = self.bound;
        let exc = || vec![MVal::Err, MVal::Unk];
        let out = match c {
            Code::Nat => {
                let mut v = vec![MVal::Err];
                v.extend((0..=b.nat_bound).map(MVal::Nat));
                v.push(MVal::Unk);
                v
            }
            Code::Bool => vec![MVal::Err, MVal::Bool(true), MVal::Bool(false), MVal::Unk],
            Code::Unit => vec![MVal::Err, MVal::Tt, MVal::Unk],
            Code::Empty => exc(),
            Code::Prop | Code::Box => vec![MVal::Err, MVal::Proof, MVal::Unk],
            Code::ErrU(_) => vec![MVal::Star],
            Code::List(a) => {
                let elems = self.lower().enumerate(a)?;
                let base = vec![MVal::Err, MVal::Unk, MVal::Nil];
                let mut lists = base.clone();
                for _ in 0..b.list_len {
                    let mut next = base.clone();
                    for e in &elems {
                        for l in &lists {
                            next.push(MVal::Cons(bx(e.clone()), bx(l.clone())));
                        }
                    }
                    self.guard(c, next.len())?;
                    lists = next;
                }
                lists
            }
            Code::Sigma(a, f) => {
                let mut v = exc();
                let inner = self.lower();
                for x in inner.enumerate(a)? {
                    for y in inner.enumerate(f.at(&x)?)? {
                        v.push(MVal::Pair(bx(x.clone()), bx(y)));
                    }
                    self.guard(c, v.len())?;
                }
                v
            }
            Code::Pi(a, f) => {
                let dom = self.enumerate(a)?;
                if dom.len() > b.fn_table_bound {
                    return Err(OracleError::DomainTooLarge {
                        code: c.to_string(),
                        size: dom.len(),
                        bound: b.fn_table_bound,
                    });
                }
                let mut tables: Vec<Vec<(MVal, MVal)>> = vec![vec![]];
                for x in &dom {
                    let outs = self.enumerate(f.at(x)?)?;
                    self.guard(c, tables.len() * outs.len())?;
                    tables = tables
                        .into_iter()
                        .flat_map(|t| {
                            outs.iter().map(move |y| {
                                let mut t = t.clone();
                                t.push((x.clone(), y.clone()));
                                t
                            })
                        })
                        .collect();
                }
                tables.into_iter().map(MVal::Fun).collect()
            }
            Code::Univ => self.codes0(b.depth).into_iter().map(MVal::Code).collect(),
            Code::Cum(a) => self.enumerate(a)?,
            Code::UnkU(l) => {
                let mut v = exc();
                if b.depth > 0 {
                    let inner = self.lower();
                    for g in inner.germs(*l) {
                        let (e, u) = (inner.err(&g)?, inner.unk(&g)?);
                        for p in inner.enumerate(&g)? {
                            if p != e && p != u {
                                v.push(MVal::Inj(g.clone(), bx(p)));
                            }
                        }
                        self.guard(c, v.len())?;
                    }
                }
                v
            }
        };
        self.guard(c, out.len())?;
        Ok(out)
    }

    fn guard(&self, c: &Code, n: usize) -> OResult<()> {
        if n > self.bound.max_values {
            Err(OracleError::Overflow {
                code: c.to_string(),
                limit: self.bound.max_values,
            })
        } else {
            Ok(())
        }
    }

    /// Codes of the lower universe enumerated at the given depth.
    pub fn codes0(&self, depth: usize) -> Vec<Code> {
        let mut v = vec![
            Code::Nat,
            Code::Bool,
            Code::Unit,
            Code::Empty,
            Code::Prop,
            Code::ErrU(0),
            Code::UnkU(0),
        ];
        if depth > 0 {
            v.push(Code::list(Code::Nat));
            v.push(Code::list(Code::UnkU(0)));
            v.push(Code::arrow(Code::Unit, Code::Bool));
        }
        v
    }

    /// Germs of the unknown type at level `l`.
    fn germs(&self, l: u8) -> Vec<Code> {
        let mut v = vec![];
        if l == 0 {
            v.extend([Code::Nat, Code::Bool, Code::Unit, Code::Empty, Code::Prop]);
        } else {
            v.push(Code::Univ);
            v.extend(self.codes0(self.bound.depth).into_iter().map(Code::cum));
        }
        v.push(Code::list(Code::UnkU(l)));
        v.push(Code::prod(Code::UnkU(l), Code::UnkU(l)));
        v
    }

    pub fn err(&self, c: &Code) -> OResult<MVal> {
        self.exc(c, MVal::Err)
    }

    pub fn unk(&self, c: &Code) -> OResult<MVal> {
        self.exc(c, MVal::Unk)
    }

    fn exc(&self, c: &Code, e: MVal) -> OResult<MVal> {
        Ok(match c {
            Code::Pi(a, f) => {
                let mut t = vec![];
                for x in self.enumerate(a)? {
                    let y = self.exc(f.at(&x)?, e.clone())?;
                    t.push((x, y));
                }
                MVal::Fun(t)
            }
            Code::ErrU(_) => MVal::Star,
            Code::Univ => MVal::Code(if e == MVal::Err { Code::ErrU(0) } else { Code::UnkU(0) }),
            Code::Cum(a) => self.exc(a, e)?,
            _ => e,
        })
    }

    pub fn apply(&self, f: &MVal, x: &MVal) -> OResult<MVal> {
        match f {
            MVal::Fun(t) => t
                .iter()
                .find(|(k, _)| k == x)
                .map(|(_, y)| y.clone())
                .ok_or_else(|| OracleError::OutOfTable(x.to_string())),
            _ => Err(OracleError::OutOfTable(format!("{f} is not a function"))),
        }
    }

    // -------------------------------------------------------------- cast

    /// The model's cast, following the kernel's reduction rules.
    pub fn cast(&self, a: &Code, b: &Code, v: &MVal) -> OResult<MVal> {
        if a.level() != b.level() {
            return Err(OracleError::LevelMismatch {
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        match (a, b) {
            (Code::ErrU(_), _) => self.err(b),
            (_, Code::ErrU(_)) => Ok(MVal::Star),
            (Code::UnkU(_), Code::UnkU(_)) => Ok(v.clone()),
            (Code::UnkU(_), _) => match v {
                MVal::Err => self.err(b),
                MVal::Unk => self.unk(b),
                MVal::Inj(g, w) => self.cast(g, b, w),
                _ => Err(OracleError::OutOfTable(format!("{v} is not a value of {a}"))),
            },
            (_, Code::UnkU(_)) => match a.germ() {
                None => self.err(b),
                Some(g) => {
                    let w = if g == *a { v.clone() } else { self.cast(a, &g, v)? };
                    self.inject(g, w)
                }
            },
            _ if a.head_tag() != b.head_tag() => self.err(b),
            (Code::Pi(a1, f1), Code::Pi(a2, f2)) => {
                let mut t = vec![];
                for y in self.enumerate(a2)? {
                    let x = self.cast(a2, a1, &y)?;
                    let r = self.apply(v, &x)?;
                    let out = self.cast(f1.at(&x)?, f2.at(&y)?, &r)?;
                    t.push((y, out));
                }
                Ok(MVal::Fun(t))
            }
            (Code::Cum(a1), Code::Cum(a2)) => self.cast(a1, a2, v),
            (Code::Univ, Code::Univ) | (Code::Prop, Code::Prop) => Ok(v.clone()),
            (Code::Box, Code::Box) => self.err(b),
            (Code::List(a1), Code::List(a2)) => match v {
                MVal::Cons(h, t) => Ok(MVal::Cons(bx(self.cast(a1, a2, h)?), bx(self.cast(a, b, t)?))),
                _ => Ok(v.clone()),
            },
            (Code::Sigma(a1, f1), Code::Sigma(a2, f2)) => match v {
                MVal::Pair(x, y) => {
                    let x2 = self.cast(a1, a2, x)?;
                    let y2 = self.cast(f1.at(x)?, f2.at(&x2)?, y)?;
                    Ok(MVal::Pair(bx(x2), bx(y2)))
                }
                _ => Ok(v.clone()),
            },
            _ => Ok(v.clone()),
        }
    }

    /// Injection into the unknown type; exceptions of the germ become the
    /// unknown type's own.
    pub fn inject(&self, g: Code, w: MVal) -> OResult<MVal> {
        Ok(if w == self.err(&g)? {
            MVal::Err
        } else if w == self.unk(&g)? {
            MVal::Unk
        } else {
            MVal::Inj(g, bx(w))
        })
    }

    // --------------------------------------------------------- precision

    /// Type precision between codes of the same level.
    pub fn ty_prec(&self, a: &Code, b: &Code) -> OResult<bool> {
        Ok(match (a, b) {
            (Code::ErrU(_), Code::ErrU(_) | Code::UnkU(_)) => true,
            (Code::ErrU(_), _) => self.ty_prec(b, b)? && self.bounded(b)?,
            (_, Code::UnkU(_)) => self.bounded(a)?,
            (Code::UnkU(_), _) | (_, Code::ErrU(_)) => false,
            (Code::List(x), Code::List(y)) | (Code::Cum(x), Code::Cum(y)) => self.ty_prec(x, y)?,
            (Code::Pi(a0, f0), Code::Pi(a1, f1)) | (Code::Sigma(a0, f0), Code::Sigma(a1, f1)) => {
                self.ty_prec(a0, a1)?
                    && self.family_prec(a0, f0, a0, f0)?
                    && self.family_prec(a1, f1, a1, f1)?
                    && self.family_prec(a0, f0, a1, f1)?
            }
            _ => a.head_tag() == b.head_tag(),
        })
    }

    fn family_prec(&self, d0: &Code, f0: &Family, d1: &Code, f1: &Family) -> OResult<bool> {
        let xs = self.enumerate(d0)?;
        let ys = self.enumerate(d1)?;
        for x in &xs {
            for y in &ys {
                if self.hprec(d0, d1, x, y)? && !self.ty_prec(f0.at(x)?, f1.at(y)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `a` is below the unknown type of its level.
    pub fn bounded(&self, a: &Code) -> OResult<bool> {
        Ok(match a {
            Code::Pi(..) | Code::Box => false,
            Code::List(x) => self.bounded(x)?,
            Code::Cum(x) => self.ty_prec(x, x)?,
            Code::Sigma(x, f) => {
                if !self.bounded(x)? {
                    return Ok(false);
                }
                for v in self.enumerate(x)? {
                    if self.prec(x, &v, &v)? && !self.bounded(f.at(&v)?)? {
                        return Ok(false);
                    }
                }
                true
            }
            _ => true,
        })
    }

    /// Homogeneous term precision at `c`.
    pub fn prec(&self, c: &Code, v: &MVal, w: &MVal) -> OResult<bool> {
        match c {
            Code::ErrU(_) | Code::Box => return Ok(true),
            Code::Cum(a) => return self.prec(a, v, w),
            Code::Univ => {
                let (MVal::Code(x), MVal::Code(y)) = (v, w) else {
                    return Ok(false);
                };
                return Ok(self.ty_prec(x, y)? && self.bounded(y)?);
            }
            Code::Pi(a, f) => {
                return Ok(self.monotone(a, f, v)? && self.monotone(a, f, w)? && self.pointwise(a, f, v, w)?)
            }
            _ => {}
        }
        match (v, w) {
            (MVal::Err, MVal::Err | MVal::Unk) | (MVal::Unk, MVal::Unk) => return Ok(true),
            (MVal::Err, _) => return self.prec(c, w, w),
            (_, MVal::Unk) => return self.prec(c, v, v),
            _ => {}
        }
        Ok(match (c, v, w) {
            (Code::Nat, MVal::Nat(x), MVal::Nat(y)) => x == y,
            (Code::Bool, MVal::Bool(x), MVal::Bool(y)) => x == y,
            (Code::Unit, MVal::Tt, MVal::Tt) | (Code::Prop, MVal::Proof, MVal::Proof) => true,
            (Code::List(_), MVal::Nil, MVal::Nil) => true,
            (Code::List(a), MVal::Cons(h, t), MVal::Cons(h2, t2)) => {
                self.prec(a, h, h2)? && self.prec(c, t, t2)?
            }
            (Code::Sigma(a, f), MVal::Pair(x, y), MVal::Pair(x2, y2)) => {
                self.prec(a, x, x2)? && self.hprec(f.at(x)?, f.at(x2)?, y, y2)?
            }
            (Code::UnkU(_), MVal::Inj(g1, x), MVal::Inj(g2, y)) => match (g1, g2) {
                (Code::Cum(a), Code::Cum(b)) => {
                    self.ty_prec(a, a)? && self.ty_prec(b, b)? && self.hprec(a, b, x, y)?
                }
                _ => g1 == g2 && self.prec(g1, x, y)?,
            },
            _ => false,
        })
    }

    fn monotone(&self, a: &Code, f: &Family, g: &MVal) -> OResult<bool> {
        self.pointwise(a, f, g, g)
    }

    /// Related inputs go to related outputs: `x ⊑ x'` implies
    /// `g x ⊑ h x'` across the family.
    fn pointwise(&self, a: &Code, f: &Family, g: &MVal, h: &MVal) -> OResult<bool> {
        let dom = self.enumerate(a)?;
        for x in &dom {
            for y in &dom {
                if self.prec(a, x, y)? && !self.hprec(f.at(x)?, f.at(y)?, &self.apply(g, x)?, &self.apply(h, y)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Heterogeneous precision: `v` below the downcast of `w`, with `w`
    /// self-precise.
    pub fn hprec(&self, a: &Code, b: &Code, v: &MVal, w: &MVal) -> OResult<bool> {
        if a == b {
            return self.prec(a, v, w);
        }
        Ok(self.prec(b, w, w)? && self.prec(a, v, &self.cast(b, a, w)?)?)
    }

    pub fn self_precise(&self, c: &Code, v: &MVal) -> OResult<bool> {
        self.prec(c, v, v)
    }

    pub fn equiprecise(&self, c: &Code, v: &MVal, w: &MVal) -> OResult<bool> {
        Ok(self.prec(c, v, w)? && self.prec(c, w, v)?)
    }
}

// ------------------------------------------------------------- law checks

#[derive(Clone, Debug, Serialize)]
pub struct PreorderReport {
    pub code: String,
    pub values: usize,
    pub related_pairs: usize,
    pub triples: usize,
    pub violations: Vec<String>,
}

impl PreorderReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EpReport {
    pub a: String,
    pub b: String,
    pub monotonicity: usize,
    pub adjunction: usize,
    pub retraction: usize,
    pub composition: usize,
    pub violations: Vec<String>,
}

impl EpReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn checked(&self) -> usize {
        self.monotonicity + self.adjunction + self.retraction + self.composition
    }
}

const MAX_REPORTED: usize = 20;

fn note(v: &mut Vec<String>, msg: impl FnOnce() -> String) {
    if v.len() < MAX_REPORTED {
        v.push(msg());
    }
}

/// Dense precision relation over an enumeration, one bitset row per value.
struct Relation {
    rows: Vec<Vec<u64>>,
}

impl Relation {
    fn build(m: &Model, c: &Code, vals: &[MVal]) -> OResult<Relation> {
        let words = vals.len().div_ceil(64);
        let mut rows = vec![vec![0u64; words]; vals.len()];
        for (i, v) in vals.iter().enumerate() {
            for (j, w) in vals.iter().enumerate() {
                if m.prec(c, v, w)? {
                    rows[i][j / 64] |= 1 << (j % 64);
                }
            }
        }
        Ok(Relation { rows })
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i][j / 64] >> (j % 64) & 1 == 1
    }
}

impl Model {
    /// Transitivity and quasi-reflexivity of precision at `c`, plus
    /// minimality of `err` and maximality of `?` among self-precise values.
    pub fn check_partial_preorder(&self, c: &Code) -> OResult<PreorderReport> {
        let vals = self.enumerate(c)?;
        let rel = Relation::build(self, c, &vals)?;
        let n = vals.len();
        let mut violations = vec![];
        let mut related = 0;
        let mut triples = 0;
        for i in 0..n {
            for j in 0..n {
                if !rel.get(i, j) {
                    continue;
                }
                related += 1;
                if !rel.get(i, i) || !rel.get(j, j) {
                    note(&mut violations, || {
                        format!("quasi-reflexivity: {} <= {} at {c}", vals[i], vals[j])
                    });
                }
                // rows[j] must be contained in rows[i]
                for (w, (ri, rj)) in rel.rows[i].iter().zip(&rel.rows[j]).enumerate() {
                    triples += rj.count_ones() as usize;
                    let missing = rj & !ri;
                    if missing != 0 {
                        let k = w * 64 + missing.trailing_zeros() as usize;
                        note(&mut violations, || {
                            format!("transitivity: {} <= {} <= {} at {c}", vals[i], vals[j], vals[k])
                        });
                    }
                }
            }
        }
        let (e, u) = (self.err(c)?, self.unk(c)?);
        for v in &vals {
            if self.self_precise(c, v)? {
                if !self.prec(c, &e, v)? {
                    note(&mut violations, || format!("err not below {v} at {c}"));
                }
                if !self.prec(c, v, &u)? {
                    note(&mut violations, || format!("? not above {v} at {c}"));
                }
            }
        }
        Ok(PreorderReport {
            code: c.to_string(),
            values: n,
            related_pairs: related,
            triples,
            violations,
        })
    }

    /// Embedding-projection laws for the casts between `a ⊑ b`, with the
    /// identity and composition laws through the unknown type of the level.
    pub fn check_ep_pair(&self, a: &Code, b: &Code) -> OResult<EpReport> {
        if a.level() != b.level() {
            return Err(OracleError::LevelMismatch {
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        if !self.ty_prec(a, b)? {
            return Err(OracleError::Unrelated {
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        let va = self.enumerate(a)?;
        let vb = self.enumerate(b)?;
        let ra = Relation::build(self, a, &va)?;
        let rb = Relation::build(self, b, &vb)?;
        let up = va.iter().map(|x| self.cast(a, b, x)).collect::<OResult<Vec<_>>>()?;
        let down = vb.iter().map(|y| self.cast(b, a, y)).collect::<OResult<Vec<_>>>()?;
        let mut r = EpReport {
            a: a.to_string(),
            b: b.to_string(),
            monotonicity: 0,
            adjunction: 0,
            retraction: 0,
            composition: 0,
            violations: vec![],
        };
        for i in 0..va.len() {
            for j in 0..va.len() {
                if ra.get(i, j) {
                    r.monotonicity += 1;
                    if !self.prec(b, &up[i], &up[j])? {
                        note(&mut r.violations, || {
                            format!("monotonicity of upcast: {} <= {} but {} not <= {}", va[i], va[j], up[i], up[j])
                        });
                    }
                }
            }
        }
        for i in 0..vb.len() {
            for j in 0..vb.len() {
                if rb.get(i, j) {
                    r.monotonicity += 1;
                    if !self.prec(a, &down[i], &down[j])? {
                        note(&mut r.violations, || {
                            format!("monotonicity of downcast: {} <= {} but {} not <= {}", vb[i], vb[j], down[i], down[j])
                        });
                    }
                }
            }
        }
        for i in (0..va.len()).filter(|&i| ra.get(i, i)) {
            for j in (0..vb.len()).filter(|&j| rb.get(j, j)) {
                r.adjunction += 1;
                let lhs = self.prec(b, &up[i], &vb[j])?;
                let rhs = self.prec(a, &va[i], &down[j])?;
                if lhs != rhs {
                    note(&mut r.violations, || {
                        format!("adjunction at {} and {}: up <= is {lhs}, <= down is {rhs}", va[i], vb[j])
                    });
                }
            }
            r.retraction += 1;
            let back = self.cast(b, a, &up[i])?;
            if !self.equiprecise(a, &back, &va[i])? {
                note(&mut r.violations, || format!("retraction at {}: came back as {back}", va[i]));
            }
            r.composition += 1;
            let id = self.cast(a, a, &va[i])?;
            if !self.equiprecise(a, &id, &va[i])? {
                note(&mut r.violations, || format!("cast identity at {}: got {id}", va[i]));
            }
        }
        let top = Code::UnkU(a.level());
        if *b != top && self.ty_prec(b, &top)? {
            for i in (0..va.len()).filter(|&i| ra.get(i, i)) {
                r.composition += 1;
                let two = self.cast(b, &top, &up[i])?;
                let one = self.cast(a, &top, &va[i])?;
                if !self.equiprecise(&top, &two, &one)? {
                    note(&mut r.violations, || format!("upcast composition at {}: {two} vs {one}", va[i]));
                }
            }
            for z in self.enumerate(&top)? {
                if !self.self_precise(&top, &z)? {
                    continue;
                }
                r.composition += 1;
                let two = self.cast(b, a, &self.cast(&top, b, &z)?)?;
                let one = self.cast(&top, a, &z)?;
                if !self.equiprecise(a, &two, &one)? {
                    note(&mut r.violations, || format!("downcast composition at {z}: {two} vs {one}"));
                }
            }
        }
        Ok(r)
    }

    /// The shipped codes at each level, used by the law suites.
    pub fn shipped_codes(&self) -> Vec<Code> {
        let bool_fam = |t: Code, f: Code| {
            Family::Table(vec![
                (MVal::Err, Code::ErrU(0)),
                (MVal::Bool(true), t),
                (MVal::Bool(false), f),
                (MVal::Unk, Code::UnkU(0)),
            ])
        };
        vec![
            Code::Nat,
            Code::Bool,
            Code::Unit,
            Code::Empty,
            Code::Prop,
            Code::Box,
            Code::ErrU(0),
            Code::UnkU(0),
            Code::list(Code::Nat),
            Code::list(Code::Bool),
            Code::list(Code::UnkU(0)),
            Code::prod(Code::Bool, Code::Unit),
            Code::prod(Code::UnkU(0), Code::UnkU(0)),
            Code::sigma(Code::Bool, bool_fam(Code::Unit, Code::Bool)),
            Code::arrow(Code::Bool, Code::Bool),
            Code::arrow(Code::Unit, Code::Nat),
            Code::arrow(Code::Empty, Code::UnkU(0)),
            Code::pi(Code::Bool, bool_fam(Code::Bool, Code::Unit)),
            Code::ErrU(1),
            Code::UnkU(1),
            Code::Univ,
            Code::cum(Code::Nat),
            Code::cum(Code::UnkU(0)),
            Code::cum(Code::arrow(Code::Unit, Code::Bool)),
            Code::list(Code::cum(Code::Bool)),
        ]
    }

    /// Every ordered pair of shipped codes related by type precision.
    pub fn related_pairs(&self) -> OResult<Vec<(Code, Code)>> {
        let codes = self.shipped_codes();
        let mut out = vec![];
        for a in &codes {
            for b in &codes {
                if a.level() == b.level() && self.ty_prec(a, b)? {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        Ok(out)
    }
}

// ------------------------------------------------------------------ meets

#[derive(Clone, Debug, Serialize)]
pub struct MeetsReport {
    pub direct: MVal,
    pub via_meet: MVal,
    pub equiprecise: bool,
}

/// Casting `λ _ : Nat. 5` from `Nat -> Nat` to `Pi (b : Bool). if b then
/// Nat else Bool` directly, and through their meet `err -> err`, then
/// applying both to `true`.
pub fn check_beck_chevalley_failure(m: &Model) -> OResult<MeetsReport> {
    let x1 = Code::arrow(Code::Nat, Code::Nat);
    let x2 = Code::pi(
        Code::Bool,
        Family::Table(vec![
            (MVal::Err, Code::ErrU(0)),
            (MVal::Bool(true), Code::Nat),
            (MVal::Bool(false), Code::Bool),
            (MVal::Unk, Code::UnkU(0)),
        ]),
    );
    let meet = Code::arrow(Code::ErrU(0), Code::ErrU(0));
    let five = MVal::Fun(m.enumerate(&Code::Nat)?.into_iter().map(|x| (x, MVal::Nat(5))).collect());
    let t = MVal::Bool(true);
    let direct = m.apply(&m.cast(&x1, &x2, &five)?, &t)?;
    let through = m.cast(&meet, &x2, &m.cast(&x1, &meet, &five)?)?;
    let via_meet = m.apply(&through, &t)?;
    let equiprecise = m.equiprecise(&Code::Nat, &direct, &via_meet)?;
    Ok(MeetsReport {
        direct,
        via_meet,
        equiprecise,
    })
}

// -------------------------------------------------- kernel correspondence

/// The kernel type a code stands for (first-order codes and constant
/// families only).
pub fn encode_code(c: &Code) -> Option<Tm> {
    Some(match c {
        Code::Nat => nat(),
        Code::Bool => bool_(),
        Code::Unit => unit(),
        Code::Empty => empty(),
        Code::Prop => prop(),
        Code::Box => box_p(bot()),
        Code::List(a) => list(encode_code(a)?),
        Code::Sigma(a, Family::Const(b)) => sigma("x", encode_code(a)?, shift(&encode_code(b)?, 0, 1)),
        Code::Pi(a, Family::Const(b)) => pi("x", encode_code(a)?, shift(&encode_code(b)?, 0, 1)),
        Code::Sigma(..) | Code::Pi(..) => return None,
        Code::ErrU(l) => err_univ(*l as u32),
        Code::UnkU(l) => unk_univ(*l as u32),
        Code::Univ => univ(0),
        Code::Cum(a) => cum(encode_code(a)?),
    })
}

/// The kernel term for a value of a code.
pub fn encode_val(c: &Code, v: &MVal) -> Option<Tm> {
    let ty = encode_code(c)?;
    Some(match (c, v) {
        (Code::Cum(a), _) => match v {
            MVal::Err => err(ty),
            MVal::Unk => unk(ty),
            _ => up(encode_val(a, v)?),
        },
        (Code::ErrU(_), MVal::Star) => err(ty),
        (_, MVal::Err) => err(ty),
        (_, MVal::Unk) => unk(ty),
        (Code::Nat, MVal::Nat(n)) => num(*n),
        (Code::Bool, MVal::Bool(b)) => {
            if *b {
                tru()
            } else {
                fls()
            }
        }
        (Code::Unit, MVal::Tt) => tt(),
        (Code::Box, MVal::Proof) => return None,
        (Code::List(a), MVal::Nil) => nil(encode_code(a)?),
        (Code::List(a), MVal::Cons(h, t)) => cons(encode_code(a)?, encode_val(a, h)?, encode_val(c, t)?),
        (Code::Sigma(a, f), MVal::Pair(x, y)) => pair(ty, encode_val(a, x)?, encode_val(f.at(x).ok()?, y)?),
        (Code::Univ, MVal::Code(k)) => encode_code(k)?,
        (Code::UnkU(_), MVal::Inj(g, x)) => cast(encode_code(g)?, ty, encode_val(g, x)?),
        _ => return None,
    })
}

/// Read a kernel type back as a code.
pub fn decode_code(t: &Tm) -> Option<Code> {
    use Term::*;
    Some(match &**t {
        Nat => Code::Nat,
        Bool => Code::Bool,
        Unit => Code::Unit,
        Empty => Code::Empty,
        Sort(S::Prop) => Code::Prop,
        Sort(S::Univ(l)) if l.0 == 0 => Code::Univ,
        BoxP(_) => Code::Box,
        List(a) => Code::list(decode_code(a)?),
        Cum(a) => Code::cum(decode_code(a)?),
        Sigma(_, a, b) | Pi(_, a, b) if !occurs(b, 0) => {
            let a = decode_code(a)?;
            let b = decode_code(&shift(b, 0, -1))?;
            if matches!(&**t, Sigma(..)) {
                Code::prod(a, b)
            } else {
                Code::arrow(a, b)
            }
        }
        Err(a) => match &**a {
            Sort(S::Univ(l)) if l.0 <= 1 => Code::ErrU(l.0 as u8),
            _ => return None,
        },
        Unk(a) => match &**a {
            Sort(S::Univ(l)) if l.0 <= 1 => Code::UnkU(l.0 as u8),
            _ => return None,
        },
        _ => return None,
    })
}

/// Read a kernel normal form of type `c` back as a value.
pub fn decode_val(m: &Model, c: &Code, t: &Tm) -> Option<MVal> {
    use Term::*;
    match (c, &**t) {
        (Code::ErrU(_), _) => return Some(MVal::Star),
        (Code::Univ, _) => return Some(MVal::Code(decode_code(t)?)),
        (Code::Cum(a), Up(x)) => return decode_val(m, a, x),
        (Code::Prop | Code::Box, Err(_)) => return Some(MVal::Err),
        (Code::Prop | Code::Box, Unk(_)) => return Some(MVal::Unk),
        (Code::Prop | Code::Box, _) => return Some(MVal::Proof),
        (_, Err(_)) => return Some(MVal::Err),
        (_, Unk(_)) => return Some(MVal::Unk),
        _ => {}
    }
    Some(match (c, &**t) {
        (Code::Nat, _) => MVal::Nat(as_numeral(t)?),
        (Code::Bool, True) => MVal::Bool(true),
        (Code::Bool, False) => MVal::Bool(false),
        (Code::Unit, Tt) => MVal::Tt,
        (Code::List(_), Nil(_)) => MVal::Nil,
        (Code::List(a), Cons(_, h, tl)) => MVal::Cons(bx(decode_val(m, a, h)?), bx(decode_val(m, c, tl)?)),
        (Code::Sigma(a, f), Pair(_, x, y)) => {
            let x = decode_val(m, a, x)?;
            let y = decode_val(m, f.at(&x).ok()?, y)?;
            MVal::Pair(bx(x), bx(y))
        }
        (Code::UnkU(_), Cast(g, _, x)) => {
            let g = decode_code(g)?;
            let x = decode_val(m, &g, x)?;
            m.inject(g, x).ok()?
        }
        _ => return None,
    })
}

/// First-order codes used for kernel agreement sampling, by level.
pub fn agreement_codes() -> [Vec<Code>; 2] {
    [
        vec![
            Code::Nat,
            Code::Bool,
            Code::Unit,
            Code::Empty,
            Code::ErrU(0),
            Code::UnkU(0),
            Code::list(Code::Nat),
            Code::list(Code::Bool),
            Code::list(Code::UnkU(0)),
            Code::prod(Code::Bool, Code::Nat),
            Code::prod(Code::UnkU(0), Code::UnkU(0)),
        ],
        vec![
            Code::Univ,
            Code::ErrU(1),
            Code::UnkU(1),
            Code::cum(Code::Nat),
            Code::cum(Code::Bool),
            Code::cum(Code::list(Code::Nat)),
            Code::cum(Code::UnkU(0)),
            Code::list(Code::UnkU(1)),
            Code::list(Code::cum(Code::Nat)),
        ],
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementReport {
    pub samples: usize,
    pub skipped: usize,
    pub disagreements: Vec<String>,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Compare the kernel's `normalize (cast A B v)` with the model's cast on
/// `samples` random first-order instances, including chains of two casts
/// through the unknown type.
pub fn check_kernel_agreement<R: rand::Rng>(
    m: &Model,
    samples: usize,
    fuel: u64,
    rng: &mut R,
) -> OResult<AgreementReport> {
    let levels = agreement_codes();
    let mut values = std::collections::HashMap::new();
    let mut report = AgreementReport {
        samples: 0,
        skipped: 0,
        disagreements: vec![],
    };
    while report.samples < samples {
        let codes = &levels[rng.random_range(0..2)];
        let a = &codes[rng.random_range(0..codes.len())];
        let b = &codes[rng.random_range(0..codes.len())];
        if !values.contains_key(a) {
            values.insert(a.clone(), m.enumerate(a)?);
        }
        let vals = &values[a];
        let v = &vals[rng.random_range(0..vals.len())];
        let (Some(ta), Some(tb), Some(tv)) = (encode_code(a), encode_code(b), encode_val(a, v)) else {
            report.skipped += 1;
            continue;
        };
        report.samples += 1;
        let expected = m.cast(a, b, v)?;
        let got = normalize(&cast(ta, tb, tv), fuel).ok().and_then(|nf| decode_val(m, b, &nf));
        if got.as_ref() != Some(&expected) {
            note(&mut report.disagreements, || {
                format!(
                    "cast {a} {b} {v}: model {expected}, kernel {}",
                    got.map(|g| g.to_string()).unwrap_or_else(|| "unreadable".into())
                )
            });
        }
    }
    Ok(report)
}
