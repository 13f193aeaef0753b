//! Reduction: the cast calculus rules, exception propagation, the
//! propositional extensions, and the precision-unfolding rules, with
//! single-step, weak-head, and full normalization.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::build::*;
use crate::syntax::{shift, subst, Ind, Level, Name, Term, Tm};

/// Default step budget.
pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum Rule {
    // base computation
    PiBeta,
    CatchNil,
    CatchCons,
    // exception propagation
    PiUnk,
    PiErr,
    CumUnk,
    CumErr,
    CatchUnk,
    CatchErr,
    LCastUnk,
    LCastErr,
    DownUnk,
    DownErr,
    // casts
    PiPi,
    CumCum,
    UnivUniv,
    LLNil,
    LLCons,
    HeadErr,
    DomErr,
    CodErr,
    CastPiErr,
    UpDown,
    LDec,
    // boxes
    BoxBox,
    // precision unfolding
    CumCongTy,
    LCongTy,
    PiCong,
    UnivPrec,
    PiPrec,
    CumPrec,
    LPrecCons,
    NoConfNilCons,
    NoConfConsNil,
    BoxCong,
    // the other inductives, by analogy with lists
    CatchZero,
    CatchSucc,
    CatchTrue,
    CatchFalse,
    CatchTt,
    CatchPair,
    CatchBox,
    IndCastUnk,
    IndCastErr,
    NatNatZero,
    NatNatSucc,
    BoolBool,
    UnitUnit,
    SigSig,
    SigDec,
    UnkUnk,
    BoxGermErr,
    CoeRetr,
    SigCong,
    NatPrecSucc,
    NoConfZeroSucc,
    NoConfSuccZero,
    NoConfTrueFalse,
    NoConfFalseTrue,
    SigPrecPair,
}

impl Rule {
    pub fn name(self) -> &'static str {
        use Rule::*;
        match self {
            PiBeta => "Pi-Beta",
            CatchNil => "Catch-Nil",
            CatchCons => "Catch-Cons",
            PiUnk => "Pi-Unk",
            PiErr => "Pi-Err",
            CumUnk => "Cum-Unk",
            CumErr => "Cum-Err",
            CatchUnk => "Catch-Unk",
            CatchErr => "Catch-Err",
            LCastUnk => "L-Cast-Unk",
            LCastErr => "L-Cast-Err",
            DownUnk => "Down-Unk",
            DownErr => "Down-Err",
            PiPi => "Pi-Pi",
            CumCum => "Cum-Cum",
            UnivUniv => "Univ-Univ",
            LLNil => "L-L-Nil",
            LLCons => "L-L-Cons",
            HeadErr => "Head-Err",
            DomErr => "Dom-Err",
            CodErr => "Cod-Err",
            CastPiErr => "Cast-Pi-Err",
            UpDown => "Up-Down",
            LDec => "L-Dec",
            BoxBox => "Box-Box",
            CumCongTy => "Cum-Cong-Ty",
            LCongTy => "L-Cong-Ty",
            PiCong => "Pi-Cong",
            UnivPrec => "Univ-Prec",
            PiPrec => "Pi-Prec",
            CumPrec => "Cum-Prec",
            LPrecCons => "L-Prec-Cons",
            NoConfNilCons => "NoConf-Nil-Cons",
            NoConfConsNil => "NoConf-Cons-Nil",
            BoxCong => "Box-Cong",
            CatchZero => "Catch-Zero",
            CatchSucc => "Catch-Succ",
            CatchTrue => "Catch-True",
            CatchFalse => "Catch-False",
            CatchTt => "Catch-Tt",
            CatchPair => "Catch-Pair",
            CatchBox => "Catch-Box",
            IndCastUnk => "Ind-Cast-Unk",
            IndCastErr => "Ind-Cast-Err",
            NatNatZero => "Nat-Nat-Zero",
            NatNatSucc => "Nat-Nat-Succ",
            BoolBool => "Bool-Bool",
            UnitUnit => "Unit-Unit",
            SigSig => "Sig-Sig",
            SigDec => "Sig-Dec",
            UnkUnk => "Unk-Unk",
            BoxGermErr => "Box-Germ-Err",
            CoeRetr => "Coe-Retr",
            SigCong => "Sig-Cong",
            NatPrecSucc => "Nat-Prec-Succ",
            NoConfZeroSucc => "NoConf-Zero-Succ",
            NoConfSuccZero => "NoConf-Succ-Zero",
            NoConfTrueFalse => "NoConf-True-False",
            NoConfFalseTrue => "NoConf-False-True",
            SigPrecPair => "Sig-Prec-Pair",
        }
    }

    /// The rules of the cast calculus and box extension, in figure order.
    pub const CORE: [Rule; 25] = [
        Rule::PiBeta,
        Rule::CatchNil,
        Rule::CatchCons,
        Rule::PiUnk,
        Rule::PiErr,
        Rule::CumUnk,
        Rule::CumErr,
        Rule::CatchUnk,
        Rule::CatchErr,
        Rule::LCastUnk,
        Rule::LCastErr,
        Rule::DownUnk,
        Rule::DownErr,
        Rule::PiPi,
        Rule::CumCum,
        Rule::UnivUniv,
        Rule::LLNil,
        Rule::LLCons,
        Rule::HeadErr,
        Rule::DomErr,
        Rule::CodErr,
        Rule::CastPiErr,
        Rule::UpDown,
        Rule::LDec,
        Rule::BoxBox,
    ];

    /// The precision-unfolding rules.
    pub const PRECISION: [Rule; 10] = [
        Rule::CumCongTy,
        Rule::LCongTy,
        Rule::PiCong,
        Rule::UnivPrec,
        Rule::PiPrec,
        Rule::CumPrec,
        Rule::LPrecCons,
        Rule::NoConfNilCons,
        Rule::NoConfConsNil,
        Rule::BoxCong,
    ];
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Head constructors of weak-head normal types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum HeadTag {
    Univ,
    Pi,
    ListH,
    NatH,
    BoolH,
    UnitH,
    EmptyH,
    SigmaH,
    BoxH,
    CumH,
}

pub fn head(t: &Term) -> Option<HeadTag> {
    Some(match t {
        Term::Sort(_) => HeadTag::Univ,
        Term::Pi(..) => HeadTag::Pi,
        Term::List(_) => HeadTag::ListH,
        Term::Nat => HeadTag::NatH,
        Term::Bool => HeadTag::BoolH,
        Term::Unit => HeadTag::UnitH,
        Term::Empty => HeadTag::EmptyH,
        Term::Sigma(..) => HeadTag::SigmaH,
        Term::BoxP(_) => HeadTag::BoxH,
        Term::Cum(_) => HeadTag::CumH,
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum StuckReason {
    Neutral,
    NormalForm,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Stepped(Rule, Tm),
    Stuck(StuckReason),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("step budget of {0} exhausted")]
    OutOfFuel(u64),
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TraceEntry {
    pub rule: Rule,
    #[serde(serialize_with = "ser_term")]
    pub before: Tm,
    #[serde(serialize_with = "ser_term")]
    pub after: Tm,
}

fn ser_term<S: serde::Serializer>(t: &Tm, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::surface::print(t))
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
    pub steps: u64,
}

impl Trace {
    /// Line-oriented `rule | before | after` rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s.push_str(&format!(
                "{} | {} | {}\n",
                e.rule,
                crate::surface::print(&e.before),
                crate::surface::print(&e.after)
            ));
        }
        s
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.entries.iter().map(|e| e.rule).collect()
    }
}

// ---------------------------------------------------------------- helpers

/// `B[x := Var(v)]` for a body `B` with one binder, placed in a context
/// extended by `extra` binders.
fn inst_under(b: &Tm, extra: usize, v: usize) -> Tm {
    subst(&shift(b, 1, extra as isize), 0, &var(v))
}

/// `B[x := u]` where `u` lives in the context outside the binder.
fn inst(b: &Tm, u: &Tm) -> Tm {
    subst(b, 0, u)
}

fn unk_sort_level(t: &Term) -> Option<Level> {
    match t {
        Term::Unk(a) => match &**a {
            Term::Sort(crate::syntax::Sort::Univ(i)) => Some(*i),
            _ => None,
        },
        _ => None,
    }
}

fn err_sort_level(t: &Term) -> Option<Level> {
    match t {
        Term::Err(a) => match &**a {
            Term::Sort(crate::syntax::Sort::Univ(i)) => Some(*i),
            _ => None,
        },
        _ => None,
    }
}

pub fn is_unk_type(t: &Term) -> bool {
    unk_sort_level(t).is_some()
}

pub fn is_err_type(t: &Term) -> bool {
    err_sort_level(t).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TyClass {
    Head(HeadTag),
    Unk,
    Err,
    Other,
}

fn class(t: &Term) -> TyClass {
    if let Some(h) = head(t) {
        TyClass::Head(h)
    } else if is_unk_type(t) {
        TyClass::Unk
    } else if is_err_type(t) {
        TyClass::Err
    } else {
        TyClass::Other
    }
}

/// Germs: the least precise type for a head, into which casts to the
/// unknown type decompose and from which they are canonical.
pub fn is_germ(t: &Term) -> bool {
    match t {
        Term::List(a) => is_unk_type(a),
        Term::Sort(_) | Term::Cum(_) | Term::Nat | Term::Bool | Term::Unit | Term::Empty => true,
        Term::Sigma(_, a, b) => is_unk_type(a) && is_unk_type(b),
        _ => false,
    }
}

/// Whether a type is in weak-head normal form (a head, `?`, or `err`).
fn is_whnf_type(t: &Tm) -> bool {
    class(t) != TyClass::Other && head_redex(t).is_none()
}

/// Level of a type, when it can be read off syntactically. `env` holds the
/// types of enclosing binders, innermost last.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TyLevel {
    Univ(u32),
    Prop,
}

pub fn type_level(env: &mut Vec<Tm>, t: &Tm) -> Option<TyLevel> {
    type_level_fuel(env, t, 64)
}

fn type_level_fuel(env: &mut Vec<Tm>, t: &Tm, fuel: u32) -> Option<TyLevel> {
    use Term::*;
    if fuel == 0 {
        return None;
    }
    let univ = |l: Option<TyLevel>| match l? {
        TyLevel::Univ(i) => Some(i),
        TyLevel::Prop => Some(0),
    };
    match &**t {
        Sort(crate::syntax::Sort::Univ(i)) => Some(TyLevel::Univ(i.0 + 1)),
        Sort(crate::syntax::Sort::Prop) => Some(TyLevel::Univ(0)),
        Nat | Bool | Unit | Empty | BoxP(_) => Some(TyLevel::Univ(0)),
        Bot | All(..) | AndP(..) | TyPrec(..) | TmPrec(..) => Some(TyLevel::Prop),
        List(a) => type_level_fuel(env, a, fuel - 1),
        Cum(a) => univ(type_level_fuel(env, a, fuel - 1)).map(|i| TyLevel::Univ(i + 1)),
        Unk(a) | Err(a) => match &**a {
            Sort(crate::syntax::Sort::Univ(i)) => Some(TyLevel::Univ(i.0)),
            _ => None,
        },
        Pi(_, a, b) | Sigma(_, a, b) => {
            let la = univ(type_level_fuel(env, a, fuel - 1))?;
            env.push(a.clone());
            let lb = type_level_fuel(env, b, fuel - 1);
            env.pop();
            Some(TyLevel::Univ(la.max(univ(lb)?)))
        }
        Var(k) => {
            let n = env.len();
            if *k >= n {
                return None;
            }
            let ty = shift(&env[n - 1 - k], 0, *k as isize + 1);
            match &*whnf_quiet(&ty) {
                Sort(crate::syntax::Sort::Univ(i)) => Some(TyLevel::Univ(i.0)),
                Sort(crate::syntax::Sort::Prop) => Some(TyLevel::Prop),
                _ => None,
            }
        }
        Catch { motive, prop, .. } => {
            if *prop {
                return Some(TyLevel::Prop);
            }
            match &**motive {
                Lam(_, _, body) => match &**body {
                    Sort(crate::syntax::Sort::Univ(i)) => Some(TyLevel::Univ(i.0)),
                    Sort(crate::syntax::Sort::Prop) => Some(TyLevel::Prop),
                    _ => None,
                },
                _ => None,
            }
        }
        _ => {
            let w = whnf_quiet(t);
            if w == *t {
                None
            } else {
                type_level_fuel(env, &w, fuel - 1)
            }
        }
    }
}

fn whnf_quiet(t: &Tm) -> Tm {
    whnf(t, 10_000).unwrap_or_else(|_| t.clone())
}

// ---------------------------------------------------------------- rules

/// A redex at the root of `t`, if any.
pub fn root_redex(t: &Tm) -> Option<(Rule, Tm)> {
    use Term::*;
    match &**t {
        App(f, u) => match &**f {
            Lam(_, _, body) => Some((Rule::PiBeta, inst(body, u))),
            _ => None,
        },
        Unk(a) => match &**a {
            Pi(x, dom, cod) => Some((Rule::PiUnk, Arc::new(Lam(x.clone(), dom.clone(), unk(cod.clone()))))),
            Cum(inner) => Some((Rule::CumUnk, up(unk(inner.clone())))),
            _ => None,
        },
        Err(a) => match &**a {
            Pi(x, dom, cod) => Some((Rule::PiErr, Arc::new(Lam(x.clone(), dom.clone(), err(cod.clone()))))),
            Cum(inner) => Some((Rule::CumErr, up(err(inner.clone())))),
            _ => None,
        },
        Down(a) => match &**a {
            Up(inner) => Some((Rule::CoeRetr, inner.clone())),
            _ => None,
        },
        Catch { .. } => catch_redex(t),
        Cast(a, b, x) => cast_redex(a, b, x),
        TyPrec(i, a, b) => ty_prec_redex(*i, a, b),
        TmPrec(ta, tb, a, b) => tm_prec_redex(ta, tb, a, b),
        _ => None,
    }
}

fn catch_redex(t: &Tm) -> Option<(Rule, Tm)> {
    let Term::Catch {
        ind,
        branches,
        on_err,
        on_unk,
        scrut,
        ..
    } = &**t
    else {
        return None;
    };
    let recurse = |sub: &Tm| -> Tm { Arc::new(t.with_child(t.children().len() - 1, sub.clone())) };
    use Term::*;
    match (&**scrut, ind) {
        (Unk(_), _) => Some((Rule::CatchUnk, on_unk.clone())),
        (Err(_), _) => Some((Rule::CatchErr, on_err.clone())),
        (Nil(_), Ind::List) => Some((Rule::CatchNil, branches[0].clone())),
        (Cons(_, h, tl), Ind::List) => Some((
            Rule::CatchCons,
            apps(branches[1].clone(), [h.clone(), tl.clone(), recurse(tl)]),
        )),
        (Zero, Ind::Nat) => Some((Rule::CatchZero, branches[0].clone())),
        (Succ(n), Ind::Nat) => Some((
            Rule::CatchSucc,
            apps(branches[1].clone(), [n.clone(), recurse(n)]),
        )),
        (True, Ind::Bool) => Some((Rule::CatchTrue, branches[0].clone())),
        (False, Ind::Bool) => Some((Rule::CatchFalse, branches[1].clone())),
        (Tt, Ind::Unit) => Some((Rule::CatchTt, branches[0].clone())),
        (Pair(_, a, b), Ind::Sigma) => Some((
            Rule::CatchPair,
            apps(branches[0].clone(), [a.clone(), b.clone()]),
        )),
        (BoxIntro(_, p), Ind::Box) => Some((Rule::CatchBox, app(branches[0].clone(), p.clone()))),
        _ => None,
    }
}

fn cast_redex(a: &Tm, b: &Tm, x: &Tm) -> Option<(Rule, Tm)> {
    use HeadTag as H;
    use Term::*;
    use TyClass as C;
    let (ca, cb) = (class(a), class(b));
    match (ca, cb) {
        (C::Err, C::Head(_) | C::Unk | C::Err) => Some((Rule::DomErr, err(b.clone()))),
        (C::Head(_) | C::Unk, C::Err) => Some((Rule::CodErr, err(b.clone()))),
        (C::Unk, C::Unk) => Some((Rule::UnkUnk, x.clone())),
        (C::Unk, C::Head(_)) => match &**x {
            Unk(_) => Some((Rule::DownUnk, unk(b.clone()))),
            Err(_) => Some((Rule::DownErr, err(b.clone()))),
            Cast(g, u, inner) if is_unk_type(u) && is_germ(g) => {
                Some((Rule::UpDown, cast(g.clone(), b.clone(), inner.clone())))
            }
            _ => None,
        },
        (C::Head(h), C::Unk) => match (h, &**a) {
            (H::Pi, _) => Some((Rule::CastPiErr, err(b.clone()))),
            (H::BoxH, _) => Some((Rule::BoxGermErr, err(b.clone()))),
            (H::ListH, List(elem)) if !is_unk_type(elem) && is_whnf_type(elem) => {
                let germ = list(b.clone());
                Some((
                    Rule::LDec,
                    cast(germ.clone(), b.clone(), cast(a.clone(), germ, x.clone())),
                ))
            }
            (H::SigmaH, Sigma(_, fst, snd)) => {
                let fire = if is_unk_type(fst) {
                    !is_unk_type(snd) && is_whnf_type(snd)
                } else {
                    is_whnf_type(fst)
                };
                if !fire {
                    return None;
                }
                let germ = sigma("x", b.clone(), b.clone());
                Some((
                    Rule::SigDec,
                    cast(germ.clone(), b.clone(), cast(a.clone(), germ, x.clone())),
                ))
            }
            _ => None,
        },
        (C::Head(h1), C::Head(h2)) if h1 != h2 => Some((Rule::HeadErr, err(b.clone()))),
        (C::Head(h), C::Head(_)) => same_head_cast(h, a, b, x),
        _ => None,
    }
}

fn same_head_cast(h: HeadTag, a: &Tm, b: &Tm, x: &Tm) -> Option<(Rule, Tm)> {
    use HeadTag as H;
    use Term::*;
    let exc = |list_rules: bool| -> Option<(Rule, Tm)> {
        match &**x {
            Unk(_) => Some((
                if list_rules { Rule::LCastUnk } else { Rule::IndCastUnk },
                unk(b.clone()),
            )),
            Err(_) => Some((
                if list_rules { Rule::LCastErr } else { Rule::IndCastErr },
                err(b.clone()),
            )),
            _ => None,
        }
    };
    match h {
        H::Univ => Some((Rule::UnivUniv, x.clone())),
        H::Pi => {
            let (Pi(_, a1, b1), Pi(y, a2, b2)) = (&**a, &**b) else {
                return None;
            };
            let arg = cast(shift(a2, 0, 1), shift(a1, 0, 1), var(0));
            let cod_src = subst(&shift(b1, 1, 1), 0, &arg);
            let body = cast(cod_src, b2.clone(), app(shift(x, 0, 1), arg));
            Some((Rule::PiPi, Arc::new(Lam(y.clone(), a2.clone(), body))))
        }
        H::CumH => {
            let (Cum(a1), Cum(a2)) = (&**a, &**b) else {
                return None;
            };
            match &**x {
                Up(inner) => Some((Rule::CumCum, up(cast(a1.clone(), a2.clone(), inner.clone())))),
                _ => None,
            }
        }
        H::ListH => {
            let List(a2) = &**b else { return None };
            match &**x {
                Nil(_) => Some((Rule::LLNil, nil(a2.clone()))),
                Cons(ann, hd, tl) => Some((
                    Rule::LLCons,
                    cons(
                        a2.clone(),
                        cast(ann.clone(), a2.clone(), hd.clone()),
                        cast(list(ann.clone()), list(a2.clone()), tl.clone()),
                    ),
                )),
                _ => exc(true),
            }
        }
        H::NatH => match &**x {
            Zero => Some((Rule::NatNatZero, zero())),
            Succ(n) => Some((Rule::NatNatSucc, succ(cast(nat(), nat(), n.clone())))),
            _ => exc(false),
        },
        H::BoolH => match &**x {
            True | False => Some((Rule::BoolBool, x.clone())),
            _ => exc(false),
        },
        H::UnitH => match &**x {
            Tt => Some((Rule::UnitUnit, tt())),
            _ => exc(false),
        },
        H::EmptyH => exc(false),
        H::SigmaH => {
            let (Sigma(_, a1, b1), Sigma(_, a2, b2)) = (&**a, &**b) else {
                return None;
            };
            match &**x {
                Pair(_, u, v) => {
                    let u2 = cast(a1.clone(), a2.clone(), u.clone());
                    let v2 = cast(inst(b1, u), inst(b2, &u2), v.clone());
                    Some((Rule::SigSig, pair(b.clone(), u2, v2)))
                }
                _ => exc(false),
            }
        }
        H::BoxH => Some((Rule::BoxBox, err(b.clone()))),
    }
}

/// `forall a0 a1 : D, a0 :D <= a1 :D ==> body(a0, a1)` style quantifier
/// over a pair of inputs related by term precision. `d0`, `d1` are the
/// domains, `body` receives the de Bruijn indices of the two inputs in
/// the context extended by three binders.
fn forall_related(d0: &Tm, d1: &Tm, body: impl FnOnce(usize, usize) -> Tm) -> Tm {
    let rel = tm_prec(shift(d0, 0, 2), shift(d1, 0, 2), var(1), var(0));
    all(
        "a0",
        d0.clone(),
        all("a1", shift(d1, 0, 1), all("_", rel, body(2, 1))),
    )
}

fn ty_prec_redex(i: Level, a: &Tm, b: &Tm) -> Option<(Rule, Tm)> {
    use Term::*;
    match (&**a, &**b) {
        (Cum(x), Cum(y)) => {
            let j = i.pred()?;
            Some((Rule::CumCongTy, Arc::new(TyPrec(j, x.clone(), y.clone()))))
        }
        (List(x), List(y)) => Some((Rule::LCongTy, Arc::new(TyPrec(i, x.clone(), y.clone())))),
        (BoxP(p), BoxP(q)) => Some((Rule::BoxCong, tm_prec(prop(), prop(), p.clone(), q.clone()))),
        (Pi(_, a0, b0), Pi(_, a1, b1)) => family_cong(i, a0, b0, a1, b1).map(|t| (Rule::PiCong, t)),
        (Sigma(_, a0, b0), Sigma(_, a1, b1)) => {
            family_cong(i, a0, b0, a1, b1).map(|t| (Rule::SigCong, t))
        }
        _ => None,
    }
}

/// The right-hand side shared by the Pi and Sigma congruence rules.
/// Levels of the domain and codomain come from the types themselves when
/// possible; a free type variable's level is recovered from `max(j, k) = i`.
fn family_cong(i: Level, a0: &Tm, b0: &Tm, a1: &Tm, b1: &Tm) -> Option<Tm> {
    let mut env = vec![];
    let level = |env: &mut Vec<Tm>, t: &Tm| match type_level(env, t) {
        Some(TyLevel::Univ(i)) => Ok(Some(i)),
        Some(TyLevel::Prop) => Err(()),
        None => Ok(None),
    };
    let agree = |x: Option<u32>, y: Option<u32>| match (x, y) {
        (Some(x), Some(y)) if x != y => Err(()),
        _ => Ok(x.or(y)),
    };
    let j = agree(level(&mut env, a0).ok()?, level(&mut env, a1).ok()?).ok()?;
    env.push(a0.clone());
    let k0 = level(&mut env, b0).ok()?;
    env.pop();
    env.push(a1.clone());
    let k1 = level(&mut env, b1).ok()?;
    env.pop();
    let k = agree(k0, k1).ok()?;
    let (j0, k0) = match (j, k) {
        (Some(j), Some(k)) => (j, k),
        (None, Some(k)) if k < i.0 => (i.0, k),
        (Some(j), None) if j < i.0 => (j, i.0),
        (None, None) | (None, Some(_)) | (Some(_), None) if i.0 == 0 => (0, 0),
        _ => return None,
    };
    let (j, k) = (Level(j0), Level(k0));
    let dom = Arc::new(Term::TyPrec(j, a0.clone(), a1.clone()));
    let fam = |d0: &Tm, d1: &Tm, c0: &Tm, c1: &Tm| {
        forall_related(d0, d1, |v0, v1| {
            Arc::new(Term::TyPrec(k, inst_under(c0, 3, v0), inst_under(c1, 3, v1)))
        })
    };
    Some(and(
        dom,
        and(fam(a0, a0, b0, b0), and(fam(a1, a1, b1, b1), fam(a0, a1, b0, b1))),
    ))
}

fn tm_prec_redex(ta: &Tm, tb: &Tm, a: &Tm, b: &Tm) -> Option<(Rule, Tm)> {
    use Term::*;
    match (&**ta, &**tb) {
        (Sort(crate::syntax::Sort::Univ(i)), Sort(crate::syntax::Sort::Univ(j))) if i == j => Some((
            Rule::UnivPrec,
            and(
                Arc::new(TyPrec(*i, a.clone(), b.clone())),
                Arc::new(TyPrec(*i, b.clone(), unk(univ(i.0)))),
            ),
        )),
        (Pi(_, a0, b0), Pi(_, a1, b1)) => {
            let mono = |d: &Tm, c: &Tm, f: &Tm| {
                forall_related(d, d, |v0, v1| {
                    let f3 = shift(f, 0, 3);
                    tm_prec(
                        inst_under(c, 3, v0),
                        inst_under(c, 3, v1),
                        app(f3.clone(), var(v0)),
                        app(f3, var(v1)),
                    )
                })
            };
            let het = forall_related(a0, a1, |v0, v1| {
                tm_prec(
                    inst_under(b0, 3, v0),
                    inst_under(b1, 3, v1),
                    app(shift(a, 0, 3), var(v0)),
                    app(shift(b, 0, 3), var(v1)),
                )
            });
            Some((Rule::PiPrec, and(mono(a0, b0, a), and(mono(a1, b1, b), het))))
        }
        (Cum(x), Cum(y)) => Some((
            Rule::CumPrec,
            tm_prec(x.clone(), y.clone(), down(a.clone()), down(b.clone())),
        )),
        (List(x), List(y)) => match (&**a, &**b) {
            (Cons(_, h0, t0), Cons(_, h1, t1)) => Some((
                Rule::LPrecCons,
                and(
                    tm_prec(x.clone(), y.clone(), h0.clone(), h1.clone()),
                    tm_prec(ta.clone(), tb.clone(), t0.clone(), t1.clone()),
                ),
            )),
            (Nil(_), Cons(..)) => Some((Rule::NoConfNilCons, bot())),
            (Cons(..), Nil(_)) => Some((Rule::NoConfConsNil, bot())),
            _ => None,
        },
        (Nat, Nat) => match (&**a, &**b) {
            (Succ(n), Succ(m)) => Some((
                Rule::NatPrecSucc,
                tm_prec(nat(), nat(), n.clone(), m.clone()),
            )),
            (Zero, Succ(_)) => Some((Rule::NoConfZeroSucc, bot())),
            (Succ(_), Zero) => Some((Rule::NoConfSuccZero, bot())),
            _ => None,
        },
        (Bool, Bool) => match (&**a, &**b) {
            (True, False) => Some((Rule::NoConfTrueFalse, bot())),
            (False, True) => Some((Rule::NoConfFalseTrue, bot())),
            _ => None,
        },
        (Sigma(_, a0, b0), Sigma(_, a1, b1)) => match (&**a, &**b) {
            (Pair(_, u0, v0), Pair(_, u1, v1)) => Some((
                Rule::SigPrecPair,
                and(
                    tm_prec(a0.clone(), a1.clone(), u0.clone(), u1.clone()),
                    tm_prec(inst(b0, u0), inst(b1, u1), v0.clone(), v1.clone()),
                ),
            )),
            _ => None,
        },
        _ => None,
    }
}

// ---------------------------------------------------------------- strategies

/// Indices (in [`Term::children`] order) of the positions weak-head
/// reduction looks into.
fn critical_positions(t: &Term) -> Vec<usize> {
    use Term::*;
    match t {
        App(..) => vec![0],
        Unk(_) | Err(_) | Down(_) => vec![0],
        Catch { .. } => vec![t.children().len() - 1],
        Cast(..) => vec![0, 1, 2],
        TyPrec(..) => vec![0, 1],
        TmPrec(..) => vec![0, 1, 2, 3],
        _ => vec![],
    }
}

/// One weak-head step: the root redex, or a step inside a critical position.
pub fn head_redex(t: &Tm) -> Option<(Rule, Tm)> {
    if let Some(r) = root_redex(t) {
        return Some(r);
    }
    let positions = critical_positions(t);
    if positions.is_empty() {
        return None;
    }
    let children: Vec<Tm> = t.children().into_iter().map(|(c, _)| c.clone()).collect();
    for p in positions {
        if let Some((rule, c2)) = head_redex(&children[p]) {
            return Some((rule, Arc::new(t.with_child(p, c2))));
        }
    }
    None
}

/// One leftmost-outermost step with full congruence.
pub fn step(t: &Tm) -> StepResult {
    match step_lo(t) {
        Some((r, t2)) => StepResult::Stepped(r, t2),
        None => StepResult::Stuck(if is_neutral(t) {
            StuckReason::Neutral
        } else {
            StuckReason::NormalForm
        }),
    }
}

fn step_lo(t: &Tm) -> Option<(Rule, Tm)> {
    if let Some(r) = root_redex(t) {
        return Some(r);
    }
    for (k, (c, _)) in t.children().into_iter().enumerate() {
        if let Some((rule, c2)) = step_lo(c) {
            return Some((rule, Arc::new(t.with_child(k, c2))));
        }
    }
    None
}

/// Whether the term's head is blocked on a variable, a constant, or an
/// eliminator applied to such a thing.
pub fn is_neutral(t: &Term) -> bool {
    use Term::*;
    match t {
        Var(_) | Const(..) => true,
        App(f, _) => is_neutral(f),
        Down(a) | FstP(a) | SndP(a) => is_neutral(a),
        ExFalso(..) => true,
        Catch { scrut, .. } => is_neutral(scrut),
        Cast(a, b, x) => is_neutral(a) || is_neutral(b) || is_neutral(x),
        TyPrec(_, a, b) => is_neutral(a) || is_neutral(b),
        TmPrec(ta, tb, a, b) => is_neutral(ta) || is_neutral(tb) || is_neutral(a) || is_neutral(b),
        _ => false,
    }
}

struct Machine {
    limit: u64,
    used: u64,
}

impl Machine {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.used += 1;
        if self.used > self.limit {
            Err(EvalError::OutOfFuel(self.limit))
        } else {
            Ok(())
        }
    }

    fn whnf(&mut self, t: &Tm) -> Result<Tm, EvalError> {
        let mut cur = t.clone();
        while let Some((_, next)) = head_redex(&cur) {
            self.tick()?;
            cur = next;
        }
        Ok(cur)
    }

    fn nf(&mut self, t: &Tm) -> Result<Tm, EvalError> {
        let mut cur = t.clone();
        loop {
            cur = self.whnf(&cur)?;
            let mut err = None;
            let r: Result<Term, ()> = cur.map_children(|c, _| {
                if err.is_some() {
                    return Ok(c.clone());
                }
                match self.nf(c) {
                    Ok(v) => Ok(v),
                    Err(e) => {
                        err = Some(e);
                        Ok(c.clone())
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            let next = Arc::new(r.expect("infallible"));
            if root_redex(&next).is_none() && head_redex(&next).is_none() {
                return Ok(next);
            }
            cur = next;
        }
    }
}

/// Weak-head normal form within `fuel` steps.
pub fn whnf(t: &Tm, fuel: u64) -> Result<Tm, EvalError> {
    Machine {
        limit: fuel,
        used: 0,
    }
    .whnf(t)
}

/// Full normal form within `fuel` steps.
pub fn normalize(t: &Tm, fuel: u64) -> Result<Tm, EvalError> {
    Machine {
        limit: fuel,
        used: 0,
    }
    .nf(t)
}

/// Normalize and report the number of steps taken.
pub fn normalize_counting(t: &Tm, fuel: u64) -> Result<(Tm, u64), EvalError> {
    let mut m = Machine {
        limit: fuel,
        used: 0,
    };
    let v = m.nf(t)?;
    Ok((v, m.used))
}

/// Normalize by repeated leftmost-outermost steps, recording each one.
pub fn trace(t: &Tm, fuel: u64) -> Result<(Tm, Trace), EvalError> {
    let mut tr = Trace::default();
    let mut cur = t.clone();
    while let Some((rule, next)) = step_lo(&cur) {
        tr.steps += 1;
        if tr.steps > fuel {
            return Err(EvalError::OutOfFuel(fuel));
        }
        tr.entries.push(TraceEntry {
            rule,
            before: cur.clone(),
            after: next.clone(),
        });
        cur = next;
    }
    Ok((cur, tr))
}

/// Normalize by repeated leftmost-outermost steps without recording.
pub fn normalize_lo(t: &Tm, fuel: u64) -> Result<Tm, EvalError> {
    let mut cur = t.clone();
    let mut n = 0;
    while let Some((_, next)) = step_lo(&cur) {
        n += 1;
        if n > fuel {
            return Err(EvalError::OutOfFuel(fuel));
        }
        cur = next;
    }
    Ok(cur)
}

/// Paths (child indices from the root) of every redex in `t`.
pub fn redex_paths(t: &Tm) -> Vec<Vec<usize>> {
    fn go(t: &Tm, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if root_redex(t).is_some() {
            out.push(path.clone());
        }
        for (k, (c, _)) in t.children().into_iter().enumerate() {
            path.push(k);
            go(c, path, out);
            path.pop();
        }
    }
    let mut out = vec![];
    go(t, &mut vec![], &mut out);
    out
}

/// Contract the redex at `path`.
pub fn step_at(t: &Tm, path: &[usize]) -> Option<(Rule, Tm)> {
    match path.split_first() {
        None => root_redex(t),
        Some((&k, rest)) => {
            let child = t.children().get(k)?.0.clone();
            let (rule, c2) = step_at(&child, rest)?;
            Some((rule, Arc::new(t.with_child(k, c2))))
        }
    }
}

/// Normalize by contracting a randomly chosen redex at each step, biased
/// toward the deepest ones.
pub fn normalize_random<R: rand::Rng>(t: &Tm, fuel: u64, rng: &mut R) -> Result<Tm, EvalError> {
    let mut cur = t.clone();
    let mut n = 0;
    loop {
        let paths = redex_paths(&cur);
        if paths.is_empty() {
            return Ok(cur);
        }
        n += 1;
        if n > fuel {
            return Err(EvalError::OutOfFuel(fuel));
        }
        let max_depth = paths.iter().map(|p| p.len()).max().unwrap_or(0);
        let deepest: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == max_depth).collect();
        let chosen = if rng.random_bool(0.75) {
            deepest[rng.random_range(0..deepest.len())]
        } else {
            &paths[rng.random_range(0..paths.len())]
        };
        cur = step_at(&cur, chosen).expect("redex path is valid").1;
    }
}

/// A binder name used in generated terms.
pub fn hint(s: &str) -> Name {
    Name::new(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn head_tags() {
        assert_eq!(head(&arrow(nat(), nat())), Some(HeadTag::Pi));
        assert_eq!(head(&app(var(0), zero())), None);
        assert_eq!(head(&cum(nat())), Some(HeadTag::CumH));
    }

    #[test]
    fn call_by_name_errors() {
        let t = app(lam("x", nat(), zero()), err(nat()));
        assert_eq!(normalize(&t, 10).unwrap(), zero());
    }

    #[test]
    fn bool_to_nat_cast_fails() {
        let t = cast(bool_(), nat(), tru());
        assert_eq!(step(&t), StepResult::Stepped(Rule::HeadErr, err(nat())));
    }

    #[test]
    fn univ_univ() {
        let t = cast(univ(0), univ(0), nat());
        assert_eq!(step(&t), StepResult::Stepped(Rule::UnivUniv, nat()));
    }

    #[test]
    fn err_at_pi_is_a_lambda() {
        let t = err(arrow(nat(), nat()));
        assert_eq!(whnf(&t, 10).unwrap(), lam("x", nat(), err(nat())));
    }

    #[test]
    fn unk_at_cum() {
        assert_eq!(whnf(&unk(cum(nat())), 10).unwrap(), up(unk(nat())));
    }

    #[test]
    fn zero_is_normal() {
        assert_eq!(whnf(&zero(), 1).unwrap(), zero());
        let (_, tr) = trace(&zero(), 1).unwrap();
        assert!(tr.entries.is_empty());
    }

    #[test]
    fn fuel_exhaustion_is_reported() {
        let t = cast(nat(), nat(), num(50));
        assert_eq!(normalize(&t, 3), Err(EvalError::OutOfFuel(3)));
    }

    #[test]
    fn type_levels() {
        let mut env = vec![];
        assert_eq!(type_level(&mut env, &arrow(nat(), univ(0))), Some(TyLevel::Univ(1)));
        assert_eq!(type_level(&mut env, &cum(nat())), Some(TyLevel::Univ(1)));
        assert_eq!(type_level(&mut env, &unk_univ(2)), Some(TyLevel::Univ(2)));
    }
}
