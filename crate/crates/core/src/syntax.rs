//! Abstract syntax of GRIP: levels, sorts, terms with de Bruijn indices,
//! contexts, and the shift/substitution machinery everything else builds on.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// Highest universe index a term may mention.
pub const MAX_LEVEL: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Level(pub u32);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("universe level {0} exceeds the maximum level {MAX_LEVEL}")]
pub struct LevelOverflow(pub u32);

impl Level {
    pub fn new(i: u32) -> Result<Level, LevelOverflow> {
        if i > MAX_LEVEL {
            Err(LevelOverflow(i))
        } else {
            Ok(Level(i))
        }
    }

    pub fn succ(self) -> Result<Level, LevelOverflow> {
        Level::new(self.0 + 1)
    }

    pub fn pred(self) -> Option<Level> {
        self.0.checked_sub(1).map(Level)
    }

    pub fn max(self, other: Level) -> Level {
        Level(self.0.max(other.0))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Univ(Level),
    Prop,
}

/// A binder name kept only for printing; it never influences equality.
#[derive(Clone)]
pub struct Name(pub Arc<str>);

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn anon() -> Name {
        Name::new("_")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl PartialEq for Name {
    fn eq(&self, _: &Name) -> bool {
        true
    }
}

impl Eq for Name {}

impl Hash for Name {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// The inductive types that come with a catch eliminator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ind {
    List,
    Nat,
    Bool,
    Unit,
    Empty,
    Sigma,
    Box,
}

impl Ind {
    /// Number of constructor branches a catch on this type carries.
    pub fn arity(self) -> usize {
        match self {
            Ind::List | Ind::Nat | Ind::Bool => 2,
            Ind::Unit | Ind::Sigma | Ind::Box => 1,
            Ind::Empty => 0,
        }
    }

    /// Whether the catch carries a parameter annotation (element type,
    /// sigma type, or boxed proposition).
    pub fn has_param(self) -> bool {
        matches!(self, Ind::List | Ind::Sigma | Ind::Box)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Ind::List => "catch_list",
            Ind::Nat => "catch_nat",
            Ind::Bool => "catch_bool",
            Ind::Unit => "catch_unit",
            Ind::Empty => "catch_empty",
            Ind::Sigma => "catch_sigma",
            Ind::Box => "catch_box",
        }
    }

    pub const ALL: [Ind; 7] = [
        Ind::List,
        Ind::Nat,
        Ind::Bool,
        Ind::Unit,
        Ind::Empty,
        Ind::Sigma,
        Ind::Box,
    ];
}

pub type Tm = Arc<Term>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Sort(Sort),
    Pi(Name, Tm, Tm),
    Lam(Name, Tm, Tm),
    App(Tm, Tm),

    List(Tm),
    Nil(Tm),
    Cons(Tm, Tm, Tm),
    Nat,
    Zero,
    Succ(Tm),
    Bool,
    True,
    False,
    Unit,
    Tt,
    Empty,
    Sigma(Name, Tm, Tm),
    /// A pair annotated with its sigma type.
    Pair(Tm, Tm, Tm),
    /// `catch` on an inductive. The motive is a type family, always a
    /// lambda; `param` is the element type (lists), the sigma type, or the
    /// boxed proposition.
    Catch {
        ind: Ind,
        prop: bool,
        param: Option<Tm>,
        motive: Tm,
        branches: Vec<Tm>,
        on_err: Tm,
        on_unk: Tm,
        scrut: Tm,
    },

    Unk(Tm),
    Err(Tm),
    /// `Cast(src, tgt, t)` is the cast of `t : src` to `tgt`.
    Cast(Tm, Tm, Tm),
    Cum(Tm),
    Up(Tm),
    Down(Tm),

    Bot,
    ExFalso(Tm, Tm),
    All(Name, Tm, Tm),
    AndP(Tm, Tm),
    PairP(Tm, Tm),
    FstP(Tm),
    SndP(Tm),
    BoxP(Tm),
    BoxIntro(Tm, Tm),

    TyPrec(Level, Tm, Tm),
    TmPrec(Tm, Tm, Tm, Tm),
    Const(Arc<str>, Vec<Tm>),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("shift would make de Bruijn index {index} negative")]
pub struct ScopeError {
    pub index: usize,
}

impl Term {
    /// Children paired with the number of binders each one sits under.
    pub fn children(&self) -> Vec<(&Tm, usize)> {
        use Term::*;
        match self {
            Var(_) | Sort(_) | Nat | Zero | Bool | True | False | Unit | Tt | Empty | Bot => {
                vec![]
            }
            Pi(_, a, b) | Lam(_, a, b) | Sigma(_, a, b) | All(_, a, b) => vec![(a, 0), (b, 1)],
            App(a, b) | AndP(a, b) | PairP(a, b) | ExFalso(a, b) | BoxIntro(a, b) => {
                vec![(a, 0), (b, 0)]
            }
            TyPrec(_, a, b) => vec![(a, 0), (b, 0)],
            List(a) | Nil(a) | Succ(a) | Unk(a) | Err(a) | Cum(a) | Up(a) | Down(a) | FstP(a)
            | SndP(a) | BoxP(a) => vec![(a, 0)],
            Cons(a, b, c) | Pair(a, b, c) | Cast(a, b, c) => vec![(a, 0), (b, 0), (c, 0)],
            TmPrec(a, b, c, d) => vec![(a, 0), (b, 0), (c, 0), (d, 0)],
            Catch {
                param,
                motive,
                branches,
                on_err,
                on_unk,
                scrut,
                ..
            } => {
                let mut v = Vec::with_capacity(branches.len() + 5);
                if let Some(p) = param {
                    v.push((p, 0));
                }
                v.push((motive, 0));
                v.extend(branches.iter().map(|b| (b, 0)));
                v.push((on_err, 0));
                v.push((on_unk, 0));
                v.push((scrut, 0));
                v
            }
            Const(_, args) => args.iter().map(|a| (a, 0)).collect(),
        }
    }

    /// Rebuild the node with each child replaced by `f(child, binders)`.
    /// Children are visited in the same order as [`Term::children`].
    pub fn map_children<E>(
        &self,
        mut f: impl FnMut(&Tm, usize) -> Result<Tm, E>,
    ) -> Result<Term, E> {
        use Term::*;
        Ok(match self {
            Var(_) | Sort(_) | Nat | Zero | Bool | True | False | Unit | Tt | Empty | Bot => {
                self.clone()
            }
            Pi(x, a, b) => Pi(x.clone(), f(a, 0)?, f(b, 1)?),
            Lam(x, a, b) => Lam(x.clone(), f(a, 0)?, f(b, 1)?),
            Sigma(x, a, b) => Sigma(x.clone(), f(a, 0)?, f(b, 1)?),
            All(x, a, b) => All(x.clone(), f(a, 0)?, f(b, 1)?),
            App(a, b) => App(f(a, 0)?, f(b, 0)?),
            AndP(a, b) => AndP(f(a, 0)?, f(b, 0)?),
            PairP(a, b) => PairP(f(a, 0)?, f(b, 0)?),
            ExFalso(a, b) => ExFalso(f(a, 0)?, f(b, 0)?),
            BoxIntro(a, b) => BoxIntro(f(a, 0)?, f(b, 0)?),
            TyPrec(i, a, b) => TyPrec(*i, f(a, 0)?, f(b, 0)?),
            List(a) => List(f(a, 0)?),
            Nil(a) => Nil(f(a, 0)?),
            Succ(a) => Succ(f(a, 0)?),
            Unk(a) => Unk(f(a, 0)?),
            Err(a) => Err(f(a, 0)?),
            Cum(a) => Cum(f(a, 0)?),
            Up(a) => Up(f(a, 0)?),
            Down(a) => Down(f(a, 0)?),
            FstP(a) => FstP(f(a, 0)?),
            SndP(a) => SndP(f(a, 0)?),
            BoxP(a) => BoxP(f(a, 0)?),
            Cons(a, b, c) => Cons(f(a, 0)?, f(b, 0)?, f(c, 0)?),
            Pair(a, b, c) => Pair(f(a, 0)?, f(b, 0)?, f(c, 0)?),
            Cast(a, b, c) => Cast(f(a, 0)?, f(b, 0)?, f(c, 0)?),
            TmPrec(a, b, c, d) => TmPrec(f(a, 0)?, f(b, 0)?, f(c, 0)?, f(d, 0)?),
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
                let param = match param {
                    Some(p) => Some(f(p, 0)?),
                    None => None,
                };
                let motive = f(motive, 0)?;
                let branches = branches
                    .iter()
                    .map(|b| f(b, 0))
                    .collect::<Result<Vec<_>, E>>()?;
                Catch {
                    ind: *ind,
                    prop: *prop,
                    param,
                    motive,
                    branches,
                    on_err: f(on_err, 0)?,
                    on_unk: f(on_unk, 0)?,
                    scrut: f(scrut, 0)?,
                }
            }
            Const(c, args) => Const(
                c.clone(),
                args.iter().map(|a| f(a, 0)).collect::<Result<_, E>>()?,
            ),
        })
    }

    /// Replace the child at position `idx` (in [`Term::children`] order).
    pub fn with_child(&self, idx: usize, new: Tm) -> Term {
        let mut k = 0;
        let mut new = Some(new);
        let r: Result<Term, ()> = self.map_children(|c, _| {
            let out = if k == idx {
                new.take().expect("child replaced twice")
            } else {
                c.clone()
            };
            k += 1;
            Ok(out)
        });
        r.expect("infallible")
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|(c, _)| c.size()).sum::<usize>()
    }
}

/// Relocate free indices `>= cutoff` by `amount`.
pub fn try_shift(t: &Tm, cutoff: usize, amount: isize) -> Result<Tm, ScopeError> {
    if amount == 0 {
        return Ok(t.clone());
    }
    match &**t {
        Term::Var(i) => {
            if *i >= cutoff {
                let j = *i as isize + amount;
                if j < cutoff as isize {
                    return Err(ScopeError { index: *i });
                }
                Ok(Arc::new(Term::Var(j as usize)))
            } else {
                Ok(t.clone())
            }
        }
        _ if is_closed_above(t, cutoff) => Ok(t.clone()),
        other => other
            .map_children(|c, b| try_shift(c, cutoff + b, amount))
            .map(Arc::new),
    }
}

/// Shift that treats a negative index as an internal bug.
pub fn shift(t: &Tm, cutoff: usize, amount: isize) -> Tm {
    try_shift(t, cutoff, amount).expect("scope bug: negative de Bruijn index")
}

/// Substitute `u` for index `j` in `t`, lowering the indices above `j`.
/// `u` is expressed in the context outside the binder being removed.
pub fn subst(t: &Tm, j: usize, u: &Tm) -> Tm {
    fn go(t: &Tm, j: usize, u: &Tm, depth: usize) -> Tm {
        match &**t {
            Term::Var(i) => {
                if *i == j + depth {
                    shift(u, 0, depth as isize)
                } else if *i > j + depth {
                    Arc::new(Term::Var(i - 1))
                } else {
                    t.clone()
                }
            }
            _ if is_closed_above(t, j + depth) => t.clone(),
            other => {
                let r: Result<Term, ()> = other.map_children(|c, b| Ok(go(c, j, u, depth + b)));
                Arc::new(r.expect("infallible"))
            }
        }
    }
    go(t, j, u, 0)
}

/// Instantiate the outermost bound variable of a binder body.
pub fn instantiate(body: &Tm, u: &Tm) -> Tm {
    subst(body, 0, u)
}

/// True iff every free index of `t` is `< depth`.
pub fn scope_check(t: &Term, depth: usize) -> bool {
    match t {
        Term::Var(i) => *i < depth,
        other => other
            .children()
            .into_iter()
            .all(|(c, b)| scope_check(c, depth + b)),
    }
}

fn is_closed_above(t: &Term, depth: usize) -> bool {
    // Cheap check used to skip rebuilding closed subtrees.
    match t {
        Term::Var(i) => *i < depth,
        Term::Sort(_)
        | Term::Nat
        | Term::Zero
        | Term::Bool
        | Term::True
        | Term::False
        | Term::Unit
        | Term::Tt
        | Term::Empty
        | Term::Bot => true,
        _ => false,
    }
}

/// True iff index `j` occurs free in `t`.
pub fn occurs(t: &Term, j: usize) -> bool {
    match t {
        Term::Var(i) => *i == j,
        other => other
            .children()
            .into_iter()
            .any(|(c, b)| occurs(c, j + b)),
    }
}

/// A typing context; each entry's type lives in the context of the entries
/// before it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context {
    entries: Vec<(Name, Tm)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, name: Name, ty: Tm) {
        self.entries.push((name, ty));
    }

    pub fn pop(&mut self) {
        self.entries.pop();
    }

    pub fn extend(&self, name: Name, ty: Tm) -> Context {
        let mut c = self.clone();
        c.push(name, ty);
        c
    }

    /// Type of variable `i`, relocated into the full context.
    pub fn lookup(&self, i: usize) -> Option<Tm> {
        let n = self.entries.len();
        if i >= n {
            return None;
        }
        let (_, ty) = &self.entries[n - 1 - i];
        Some(shift(ty, 0, i as isize + 1))
    }

    pub fn name(&self, i: usize) -> Option<&Name> {
        let n = self.entries.len();
        (i < n).then(|| &self.entries[n - 1 - i].0)
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|(n, _)| n.0.to_string()).collect()
    }

    pub fn entries(&self) -> &[(Name, Tm)] {
        &self.entries
    }
}

/// Short constructors used throughout the crate and its tests.
pub mod build {
    use super::*;

    pub fn var(i: usize) -> Tm {
        Arc::new(Term::Var(i))
    }
    pub fn univ(i: u32) -> Tm {
        Arc::new(Term::Sort(Sort::Univ(Level(i))))
    }
    pub fn prop() -> Tm {
        Arc::new(Term::Sort(Sort::Prop))
    }
    pub fn pi(x: &str, a: Tm, b: Tm) -> Tm {
        Arc::new(Term::Pi(Name::new(x), a, b))
    }
    /// Non-dependent function type; `b` is given in the outer context.
    pub fn arrow(a: Tm, b: Tm) -> Tm {
        Arc::new(Term::Pi(Name::anon(), a, shift(&b, 0, 1)))
    }
    pub fn lam(x: &str, a: Tm, b: Tm) -> Tm {
        Arc::new(Term::Lam(Name::new(x), a, b))
    }
    pub fn app(f: Tm, a: Tm) -> Tm {
        Arc::new(Term::App(f, a))
    }
    pub fn apps(f: Tm, args: impl IntoIterator<Item = Tm>) -> Tm {
        args.into_iter().fold(f, app)
    }
    pub fn nat() -> Tm {
        Arc::new(Term::Nat)
    }
    pub fn zero() -> Tm {
        Arc::new(Term::Zero)
    }
    pub fn succ(t: Tm) -> Tm {
        Arc::new(Term::Succ(t))
    }
    pub fn num(n: u64) -> Tm {
        (0..n).fold(zero(), |t, _| succ(t))
    }
    pub fn bool_() -> Tm {
        Arc::new(Term::Bool)
    }
    pub fn tru() -> Tm {
        Arc::new(Term::True)
    }
    pub fn fls() -> Tm {
        Arc::new(Term::False)
    }
    pub fn unit() -> Tm {
        Arc::new(Term::Unit)
    }
    pub fn tt() -> Tm {
        Arc::new(Term::Tt)
    }
    pub fn empty() -> Tm {
        Arc::new(Term::Empty)
    }
    pub fn list(a: Tm) -> Tm {
        Arc::new(Term::List(a))
    }
    pub fn nil(a: Tm) -> Tm {
        Arc::new(Term::Nil(a))
    }
    pub fn cons(a: Tm, h: Tm, t: Tm) -> Tm {
        Arc::new(Term::Cons(a, h, t))
    }
    pub fn sigma(x: &str, a: Tm, b: Tm) -> Tm {
        Arc::new(Term::Sigma(Name::new(x), a, b))
    }
    pub fn pair(s: Tm, a: Tm, b: Tm) -> Tm {
        Arc::new(Term::Pair(s, a, b))
    }
    pub fn unk(a: Tm) -> Tm {
        Arc::new(Term::Unk(a))
    }
    pub fn err(a: Tm) -> Tm {
        Arc::new(Term::Err(a))
    }
    /// `?[Type i]`
    pub fn unk_univ(i: u32) -> Tm {
        unk(univ(i))
    }
    /// `err[Type i]`
    pub fn err_univ(i: u32) -> Tm {
        err(univ(i))
    }
    pub fn cast(a: Tm, b: Tm, t: Tm) -> Tm {
        Arc::new(Term::Cast(a, b, t))
    }
    pub fn cum(a: Tm) -> Tm {
        Arc::new(Term::Cum(a))
    }
    pub fn up(a: Tm) -> Tm {
        Arc::new(Term::Up(a))
    }
    pub fn down(a: Tm) -> Tm {
        Arc::new(Term::Down(a))
    }
    pub fn bot() -> Tm {
        Arc::new(Term::Bot)
    }
    pub fn exfalso(p: Tm, a: Tm) -> Tm {
        Arc::new(Term::ExFalso(p, a))
    }
    pub fn all(x: &str, a: Tm, p: Tm) -> Tm {
        Arc::new(Term::All(Name::new(x), a, p))
    }
    /// Implication between propositions; `q` is given in the outer context.
    pub fn imp(p: Tm, q: Tm) -> Tm {
        Arc::new(Term::All(Name::anon(), p, shift(&q, 0, 1)))
    }
    pub fn and(p: Tm, q: Tm) -> Tm {
        Arc::new(Term::AndP(p, q))
    }
    pub fn pair_p(p: Tm, q: Tm) -> Tm {
        Arc::new(Term::PairP(p, q))
    }
    pub fn fst_p(p: Tm) -> Tm {
        Arc::new(Term::FstP(p))
    }
    pub fn snd_p(p: Tm) -> Tm {
        Arc::new(Term::SndP(p))
    }
    pub fn box_p(p: Tm) -> Tm {
        Arc::new(Term::BoxP(p))
    }
    pub fn box_intro(p: Tm, q: Tm) -> Tm {
        Arc::new(Term::BoxIntro(p, q))
    }
    pub fn ty_prec(i: u32, a: Tm, b: Tm) -> Tm {
        Arc::new(Term::TyPrec(Level(i), a, b))
    }
    pub fn tm_prec(ta: Tm, tb: Tm, a: Tm, b: Tm) -> Tm {
        Arc::new(Term::TmPrec(ta, tb, a, b))
    }
    pub fn konst(name: &str, args: Vec<Tm>) -> Tm {
        Arc::new(Term::Const(Arc::from(name), args))
    }
    #[allow(clippy::too_many_arguments)]
    pub fn catch(
        ind: Ind,
        prop: bool,
        param: Option<Tm>,
        motive: Tm,
        branches: Vec<Tm>,
        on_err: Tm,
        on_unk: Tm,
        scrut: Tm,
    ) -> Tm {
        Arc::new(Term::Catch {
            ind,
            prop,
            param,
            motive,
            branches,
            on_err,
            on_unk,
            scrut,
        })
    }
}

/// Numeral value of a closed `S (S ... 0)` chain.
pub fn as_numeral(t: &Term) -> Option<u64> {
    let mut n = 0;
    let mut cur = t;
    loop {
        match cur {
            Term::Zero => return Some(n),
            Term::Succ(p) => {
                n += 1;
                cur = p;
            }
            _ => return None,
        }
    }
}
