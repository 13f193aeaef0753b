//! Bidirectional type checking and type-directed conversion.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::eval::{self, EvalError};
use crate::surface::{print_in, Decl, SourceFile, Span};
use crate::syntax::build::*;
use crate::syntax::{shift, subst, Context, Ind, Level, Name, Sort, Term, Tm, MAX_LEVEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ErrorKind {
    UnboundVariable,
    SortMismatch,
    NotAFunction,
    CastLevelMismatch,
    PrecLevelMismatch,
    PropElimRestriction,
    ConversionFailure,
    GripUpViolation,
    OutOfFuel,
}

#[derive(Clone, Debug)]
pub struct TypeError {
    pub kind: ErrorKind,
    /// Name of the typing rule whose premise failed.
    pub rule: &'static str,
    pub message: String,
    pub term: Tm,
    pub expected: Option<Tm>,
    pub actual: Option<Tm>,
    /// Names of the context the terms live in, for printing.
    pub names: Vec<String>,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {:?}: {}", self.rule, self.kind, self.message)?;
        write!(f, "\n  in: {}", print_in(&self.term, &self.names))?;
        if let Some(e) = &self.expected {
            write!(f, "\n  expected: {}", print_in(e, &self.names))?;
        }
        if let Some(a) = &self.actual {
            write!(f, "\n  actual: {}", print_in(a, &self.names))?;
        }
        Ok(())
    }
}

impl std::error::Error for TypeError {}

pub type TResult<T> = Result<T, TypeError>;

/// Global checking parameters: constant signatures, fuel, and whether the
/// restricted monotone system is in force.
#[derive(Clone, Debug)]
pub struct Env {
    pub axioms: Arc<HashMap<String, Tm>>,
    pub fuel: u64,
    pub grip_up: bool,
}

impl Default for Env {
    fn default() -> Env {
        Env::new()
    }
}

impl Env {
    /// The prelude constants and the default fuel.
    pub fn new() -> Env {
        Env {
            axioms: Arc::new(crate::prelude::types().clone()),
            fuel: eval::DEFAULT_FUEL,
            grip_up: false,
        }
    }

    pub fn grip_up(mut self) -> Env {
        self.grip_up = true;
        self
    }

    pub fn with_fuel(mut self, fuel: u64) -> Env {
        self.fuel = fuel;
        self
    }

    pub fn add_axiom(&mut self, name: &str, ty: Tm) {
        Arc::make_mut(&mut self.axioms).insert(name.to_string(), ty);
    }
}

#[derive(Clone, Debug)]
pub struct TypedJudgment {
    pub context: Context,
    pub term: Tm,
    pub ty: Tm,
}

/// A type error attributed to a declaration.
#[derive(Clone, Debug)]
pub struct DeclError {
    pub decl: String,
    pub span: Span,
    pub error: TypeError,
}

impl fmt::Display for DeclError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: error in `{}`: {}",
            self.span.line, self.span.col, self.decl, self.error
        )
    }
}

struct Cx<'e> {
    env: &'e Env,
}

fn fail<T>(
    kind: ErrorKind,
    rule: &'static str,
    ctx: &Context,
    term: &Tm,
    message: impl Into<String>,
) -> TResult<T> {
    Err(TypeError {
        kind,
        rule,
        message: message.into(),
        term: term.clone(),
        expected: None,
        actual: None,
        names: ctx.names(),
    })
}

fn mismatch(rule: &'static str, ctx: &Context, term: &Tm, expected: &Tm, actual: &Tm) -> TypeError {
    TypeError {
        kind: ErrorKind::ConversionFailure,
        rule,
        message: "types are not convertible".into(),
        term: term.clone(),
        expected: Some(expected.clone()),
        actual: Some(actual.clone()),
        names: ctx.names(),
    }
}

fn fuel_err(ctx: &Context, term: &Tm, e: EvalError) -> TypeError {
    TypeError {
        kind: ErrorKind::OutOfFuel,
        rule: "Conv",
        message: e.to_string(),
        term: term.clone(),
        expected: None,
        actual: None,
        names: ctx.names(),
    }
}

fn sort_level(s: Sort) -> u32 {
    match s {
        Sort::Univ(l) => l.0,
        Sort::Prop => 0,
    }
}

fn is_prop_former(t: &Term) -> bool {
    matches!(
        t,
        Term::All(..) | Term::AndP(..) | Term::Bot | Term::TyPrec(..) | Term::TmPrec(..)
    )
}

impl<'e> Cx<'e> {
    fn whnf(&self, ctx: &Context, t: &Tm) -> TResult<Tm> {
        eval::whnf(t, self.env.fuel).map_err(|e| fuel_err(ctx, t, e))
    }

    fn infer_sort(&self, ctx: &Context, t: &Tm, rule: &'static str) -> TResult<Sort> {
        let ty = self.infer(ctx, t)?;
        match &*self.whnf(ctx, &ty)? {
            Term::Sort(s) => Ok(*s),
            _ => Err(TypeError {
                kind: ErrorKind::SortMismatch,
                rule,
                message: "expected a type".into(),
                term: t.clone(),
                expected: None,
                actual: Some(ty),
                names: ctx.names(),
            }),
        }
    }

    fn infer_univ(&self, ctx: &Context, t: &Tm, rule: &'static str) -> TResult<Level> {
        match self.infer_sort(ctx, t, rule)? {
            Sort::Univ(l) => Ok(l),
            Sort::Prop => fail(
                ErrorKind::SortMismatch,
                rule,
                ctx,
                t,
                "expected a type in a universe, found a proposition",
            ),
        }
    }

    fn infer_prop(&self, ctx: &Context, t: &Tm, rule: &'static str) -> TResult<()> {
        match self.infer_sort(ctx, t, rule)? {
            Sort::Prop => Ok(()),
            Sort::Univ(_) => fail(
                ErrorKind::SortMismatch,
                rule,
                ctx,
                t,
                "expected a proposition",
            ),
        }
    }

    fn level_succ(&self, ctx: &Context, t: &Tm, l: u32, rule: &'static str) -> TResult<Level> {
        Level::new(l + 1).or_else(|e| fail(ErrorKind::SortMismatch, rule, ctx, t, e.to_string()))
    }

    fn check(&self, ctx: &Context, t: &Tm, expected: &Tm, rule: &'static str) -> TResult<()> {
        let actual = self.infer(ctx, t)?;
        if self.conv_types(ctx, &actual, expected)? {
            Ok(())
        } else {
            Err(mismatch(rule, ctx, t, expected, &actual))
        }
    }

    fn conv_types(&self, ctx: &Context, a: &Tm, b: &Tm) -> TResult<bool> {
        Conv { cx: self }
            .untyped(ctx, a, b, true)
            .map_err(|e| fuel_err(ctx, a, e))
    }

    fn infer(&self, ctx: &Context, t: &Tm) -> TResult<Tm> {
        use Term::*;
        match &**t {
            Var(i) => match ctx.lookup(*i) {
                Some(ty) => Ok(ty),
                None => fail(
                    ErrorKind::UnboundVariable,
                    "Var",
                    ctx,
                    t,
                    format!("variable #{i} is not bound"),
                ),
            },
            Sort(crate::syntax::Sort::Univ(i)) => {
                let j = self.level_succ(ctx, t, i.0, "Univ")?;
                Ok(univ(j.0))
            }
            Sort(crate::syntax::Sort::Prop) => Ok(univ(0)),
            Pi(x, a, b) => {
                let sa = self.infer_sort(ctx, a, "Prod")?;
                let inner = ctx.extend(x.clone(), a.clone());
                let sb = self.infer_sort(&inner, b, "Prod")?;
                let crate::syntax::Sort::Univ(lb) = sb else {
                    return fail(
                        ErrorKind::SortMismatch,
                        "Prod",
                        ctx,
                        t,
                        "the codomain of a product is a proposition; use `forall`",
                    );
                };
                let l = sort_level(sa).max(lb.0);
                if self.env.grip_up {
                    if l + 1 > MAX_LEVEL {
                        return fail(
                            ErrorKind::GripUpViolation,
                            "Pi-GRIP-up",
                            ctx,
                            t,
                            format!("product raised to level {} exceeds the maximum level", l + 1),
                        );
                    }
                    Ok(univ(l + 1))
                } else {
                    Ok(univ(l))
                }
            }
            All(x, a, p) => {
                self.infer_sort(ctx, a, "All-Wf")?;
                self.infer_prop(&ctx.extend(x.clone(), a.clone()), p, "All-Wf")?;
                Ok(prop())
            }
            Lam(x, a, body) => {
                self.infer_sort(ctx, a, "Abs")?;
                let inner = ctx.extend(x.clone(), a.clone());
                let b = self.infer(&inner, body)?;
                match self.infer_sort(&inner, &b, "Abs")? {
                    crate::syntax::Sort::Prop => Ok(Arc::new(All(x.clone(), a.clone(), b))),
                    crate::syntax::Sort::Univ(_) => Ok(Arc::new(Pi(x.clone(), a.clone(), b))),
                }
            }
            App(f, u) => {
                let ft = self.infer(ctx, f)?;
                match &*self.whnf(ctx, &ft)? {
                    Pi(_, a, b) => {
                        self.check(ctx, u, a, "App")?;
                        Ok(subst(b, 0, u))
                    }
                    All(_, a, b) => {
                        self.check(ctx, u, a, "All-Elim")?;
                        Ok(subst(b, 0, u))
                    }
                    _ => TResult::Err(TypeError {
                        kind: ErrorKind::NotAFunction,
                        rule: "App",
                        message: "applied term is not a function".into(),
                        term: f.clone(),
                        expected: None,
                        actual: Some(ft),
                        names: ctx.names(),
                    }),
                }
            }
            List(a) => {
                let l = self.infer_univ(ctx, a, "List")?;
                Ok(univ(l.0))
            }
            Nil(a) => {
                self.infer_univ(ctx, a, "List-Nil")?;
                Ok(list(a.clone()))
            }
            Cons(a, h, tl) => {
                self.infer_univ(ctx, a, "List-Cons")?;
                self.check(ctx, h, a, "List-Cons")?;
                self.check(ctx, tl, &list(a.clone()), "List-Cons")?;
                Ok(list(a.clone()))
            }
            Nat | Bool | Unit | Empty => Ok(univ(0)),
            Zero => Ok(nat()),
            Succ(n) => {
                self.check(ctx, n, &nat(), "Nat-Succ")?;
                Ok(nat())
            }
            True | False => Ok(bool_()),
            Tt => Ok(unit()),
            Sigma(x, a, b) => {
                let la = self.infer_univ(ctx, a, "Sig-Wf")?;
                let lb = self.infer_univ(&ctx.extend(x.clone(), a.clone()), b, "Sig-Wf")?;
                Ok(univ(la.0.max(lb.0)))
            }
            Pair(s, a, b) => {
                self.infer_univ(ctx, s, "Pair")?;
                match &*self.whnf(ctx, s)? {
                    Sigma(_, fa, fb) => {
                        self.check(ctx, a, fa, "Pair")?;
                        self.check(ctx, b, &subst(fb, 0, a), "Pair")?;
                        Ok(s.clone())
                    }
                    _ => fail(
                        ErrorKind::SortMismatch,
                        "Pair",
                        ctx,
                        s,
                        "pair annotation is not a sigma type",
                    ),
                }
            }
            Unk(a) => {
                self.infer_univ(ctx, a, "Unk")?;
                Ok(a.clone())
            }
            Err(a) => {
                self.infer_univ(ctx, a, "Err")?;
                Ok(a.clone())
            }
            Cast(a, b, x) => {
                let la = self.infer_univ(ctx, a, "Cast")?;
                let lb = self.infer_univ(ctx, b, "Cast")?;
                if la != lb {
                    return TResult::Err(TypeError {
                        kind: ErrorKind::CastLevelMismatch,
                        rule: "Cast",
                        message: format!(
                            "cast between universe levels {} and {}",
                            la.0, lb.0
                        ),
                        term: t.clone(),
                        expected: Some(a.clone()),
                        actual: Some(b.clone()),
                        names: ctx.names(),
                    });
                }
                self.check(ctx, x, a, "Cast")?;
                Ok(b.clone())
            }
            Cum(a) => {
                let l = self.infer_univ(ctx, a, "Cum")?;
                let j = self.level_succ(ctx, t, l.0, "Cum")?;
                Ok(univ(j.0))
            }
            Up(x) => {
                let a = self.infer(ctx, x)?;
                let l = self.infer_univ(ctx, &a, "Coe")?;
                self.level_succ(ctx, t, l.0, "Coe")?;
                Ok(cum(a))
            }
            Down(x) => {
                let a = self.infer(ctx, x)?;
                match &*self.whnf(ctx, &a)? {
                    Cum(inner) => Ok(inner.clone()),
                    _ => TResult::Err(TypeError {
                        kind: ErrorKind::SortMismatch,
                        rule: "Coe-Inv",
                        message: "`down` expects a term of a lifted type".into(),
                        term: x.clone(),
                        expected: None,
                        actual: Some(a),
                        names: ctx.names(),
                    }),
                }
            }
            Bot => Ok(prop()),
            ExFalso(p, a) => {
                self.check(ctx, p, &bot(), "Bot-Elim")?;
                self.infer_sort(ctx, a, "Bot-Elim")?;
                Ok(a.clone())
            }
            AndP(p, q) => {
                self.infer_prop(ctx, p, "And-Wf")?;
                self.infer_prop(ctx, q, "And-Wf")?;
                Ok(prop())
            }
            PairP(p, q) => {
                let pt = self.infer(ctx, p)?;
                self.infer_prop(ctx, &pt, "And-Intro")?;
                let qt = self.infer(ctx, q)?;
                self.infer_prop(ctx, &qt, "And-Intro")?;
                Ok(and(pt, qt))
            }
            FstP(p) | SndP(p) => {
                let pt = self.infer(ctx, p)?;
                match &*self.whnf(ctx, &pt)? {
                    AndP(l, r) => Ok(if matches!(&**t, FstP(_)) {
                        l.clone()
                    } else {
                        r.clone()
                    }),
                    _ => TResult::Err(TypeError {
                        kind: ErrorKind::SortMismatch,
                        rule: "And-Elim",
                        message: "projection from a proof that is not a conjunction".into(),
                        term: p.clone(),
                        expected: None,
                        actual: Some(pt),
                        names: ctx.names(),
                    }),
                }
            }
            BoxP(p) => {
                self.infer_prop(ctx, p, "Box-Wf")?;
                Ok(univ(0))
            }
            BoxIntro(p, q) => {
                self.infer_prop(ctx, p, "Box-Intro")?;
                self.check(ctx, q, p, "Box-Intro")?;
                Ok(box_p(p.clone()))
            }
            TyPrec(i, a, b) => {
                for side in [a, b] {
                    let l = self.infer_univ(ctx, side, "Prec-Type-Wf")?;
                    if l != *i {
                        return TResult::Err(TypeError {
                            kind: ErrorKind::PrecLevelMismatch,
                            rule: "Prec-Type-Wf",
                            message: format!(
                                "type precision at level {} relates a type of level {}",
                                i.0, l.0
                            ),
                            term: side.clone(),
                            expected: None,
                            actual: None,
                            names: ctx.names(),
                        });
                    }
                }
                Ok(prop())
            }
            TmPrec(ta, tb, a, b) => {
                let la = self.infer_univ(ctx, ta, "Prec-Wf")?;
                let lb = self.infer_univ(ctx, tb, "Prec-Wf")?;
                if la != lb {
                    return TResult::Err(TypeError {
                        kind: ErrorKind::PrecLevelMismatch,
                        rule: "Prec-Wf",
                        message: format!(
                            "term precision between types of levels {} and {}",
                            la.0, lb.0
                        ),
                        term: t.clone(),
                        expected: Some(ta.clone()),
                        actual: Some(tb.clone()),
                        names: ctx.names(),
                    });
                }
                self.check(ctx, a, ta, "Prec-Wf")?;
                self.check(ctx, b, tb, "Prec-Wf")?;
                Ok(prop())
            }
            Const(name, args) => {
                let Some(mut ty) = self.env.axioms.get(&**name).cloned() else {
                    return fail(
                        ErrorKind::UnboundVariable,
                        "Const",
                        ctx,
                        t,
                        format!("unknown constant `{name}`"),
                    );
                };
                for arg in args {
                    match &*self.whnf(ctx, &ty)? {
                        Pi(_, a, b) | All(_, a, b) => {
                            self.check(ctx, arg, a, "Const")?;
                            ty = subst(b, 0, arg);
                        }
                        _ => {
                            return fail(
                                ErrorKind::NotAFunction,
                                "Const",
                                ctx,
                                t,
                                format!("too many arguments to `{name}`"),
                            )
                        }
                    }
                }
                Ok(ty)
            }
            Catch { .. } => self.infer_catch(ctx, t),
        }
    }

    fn infer_catch(&self, ctx: &Context, t: &Tm) -> TResult<Tm> {
        let Term::Catch {
            ind,
            prop: is_prop,
            param,
            motive,
            branches,
            on_err,
            on_unk,
            scrut,
        } = &**t
        else {
            unreachable!()
        };
        let rule: &'static str = match (ind, is_prop) {
            (Ind::List, false) => "List-Catch",
            (Ind::List, true) => "List-Catch-Prop",
            (Ind::Box, _) => "Box-Elim",
            (_, false) => "Ind-Catch",
            (_, true) => "Ind-Catch-Prop",
        };
        let param = || param.clone().expect("parameterised catch carries its parameter");
        let data: Tm = match ind {
            Ind::List => {
                let a = param();
                self.infer_univ(ctx, &a, rule)?;
                list(a)
            }
            Ind::Nat => nat(),
            Ind::Bool => bool_(),
            Ind::Unit => unit(),
            Ind::Empty => empty(),
            Ind::Sigma => {
                let s = param();
                self.infer_univ(ctx, &s, rule)?;
                if !matches!(&*self.whnf(ctx, &s)?, Term::Sigma(..)) {
                    return fail(ErrorKind::SortMismatch, rule, ctx, &s, "expected a sigma type");
                }
                s
            }
            Ind::Box => {
                let p = param();
                self.infer_prop(ctx, &p, rule)?;
                box_p(p)
            }
        };
        let Term::Lam(mx, ma, mbody) = &**motive else {
            return fail(
                ErrorKind::SortMismatch,
                rule,
                ctx,
                motive,
                "the motive must be a `fun` over the eliminated type",
            );
        };
        self.infer_sort(ctx, ma, rule)?;
        if !self.conv_types(ctx, ma, &data)? {
            return Err(mismatch(rule, ctx, motive, &data, ma));
        }
        let inner = ctx.extend(mx.clone(), data.clone());
        let msort = self.infer_sort(&inner, mbody, rule)?;
        match (msort, is_prop) {
            (Sort::Prop, false) => {
                return fail(
                    ErrorKind::SortMismatch,
                    rule,
                    ctx,
                    motive,
                    "propositional motive needs the `P` variant of catch",
                )
            }
            (Sort::Univ(_), true) => {
                return fail(
                    ErrorKind::SortMismatch,
                    rule,
                    ctx,
                    motive,
                    "the `P` variant of catch needs a propositional motive",
                )
            }
            _ => {}
        }
        // Eliminating a proof into a universe is only possible through exfalso.
        let st = self.infer(ctx, scrut)?;
        if let Ok(Sort::Prop) = self.infer_sort(ctx, &st, rule) {
            return Err(TypeError {
                kind: ErrorKind::PropElimRestriction,
                rule,
                message: "a proof cannot be eliminated by catch; only exfalso eliminates propositions".into(),
                term: scrut.clone(),
                expected: Some(data.clone()),
                actual: Some(st),
                names: ctx.names(),
            });
        }
        if !self.conv_types(ctx, &st, &data)? {
            return Err(mismatch(rule, ctx, scrut, &data, &st));
        }

        let p_at = |v: &Tm| subst(mbody, 0, v);
        // `P` shifted under `k` fresh binders, applied to `v`.
        let p_under = |k: usize, v: &Tm| subst(&shift(mbody, 1, k as isize), 0, v);
        let quant = |x: &str, a: Tm, b: Tm| if *is_prop { all(x, a, b) } else { pi(x, a, b) };
        let expected: Vec<Tm> = match ind {
            Ind::List => {
                let a = param();
                vec![
                    p_at(&nil(a.clone())),
                    quant(
                        "a",
                        a.clone(),
                        quant(
                            "l",
                            list(shift(&a, 0, 1)),
                            quant(
                                "r",
                                p_under(2, &var(0)),
                                p_under(3, &cons(shift(&a, 0, 3), var(2), var(1))),
                            ),
                        ),
                    ),
                ]
            }
            Ind::Nat => vec![
                p_at(&zero()),
                quant("n", nat(), quant("r", p_under(1, &var(0)), p_under(2, &succ(var(1))))),
            ],
            Ind::Bool => vec![p_at(&tru()), p_at(&fls())],
            Ind::Unit => vec![p_at(&tt())],
            Ind::Empty => vec![],
            Ind::Sigma => {
                let s = param();
                let Term::Sigma(_, fa, fb) = &*self.whnf(ctx, &s)? else {
                    unreachable!()
                };
                let s2 = shift(&s, 0, 2);
                vec![quant(
                    "a",
                    fa.clone(),
                    quant("b", fb.clone(), p_under(2, &pair(s2, var(1), var(0)))),
                )]
            }
            Ind::Box => {
                let p = param();
                vec![quant(
                    "p",
                    p.clone(),
                    p_under(1, &box_intro(shift(&p, 0, 1), var(0))),
                )]
            }
        };
        if branches.len() != expected.len() {
            return fail(
                ErrorKind::SortMismatch,
                rule,
                ctx,
                t,
                format!("expected {} branches, found {}", expected.len(), branches.len()),
            );
        }
        for (b, ty) in branches.iter().zip(&expected) {
            self.check(ctx, b, ty, rule)?;
        }
        self.check(ctx, on_err, &p_at(&err(data.clone())), rule)?;
        self.check(ctx, on_unk, &p_at(&unk(data.clone())), rule)?;

        if self.env.grip_up && !is_prop {
            // up to conversion, so that reducing the branches preserves typing
            let e_ty = p_at(&err(data.clone()));
            let u_ty = p_at(&unk(data.clone()));
            let conv = |a: &Tm, b: &Tm, ty: &Tm| {
                Conv { cx: self }.typed(ctx, a, b, ty).map_err(|e| fuel_err(ctx, a, e))
            };
            let ok_err = matches!(&**on_err, Term::Err(_)) || conv(on_err, &err(e_ty.clone()), &e_ty)?;
            let ok_unk = matches!(&**on_unk, Term::Unk(_)) || conv(on_unk, &unk(u_ty.clone()), &u_ty)?;
            if !ok_err || !ok_unk {
                return fail(
                    ErrorKind::GripUpViolation,
                    "Ind-GRIP-up",
                    ctx,
                    t,
                    "catch must propagate exceptions (error branch `err`, unknown branch `?`)",
                );
            }
        }
        Ok(p_at(scrut))
    }
}

/// Conversion checker.
struct Conv<'a, 'e> {
    cx: &'a Cx<'e>,
}

impl Conv<'_, '_> {
    fn whnf(&self, t: &Tm) -> Result<Tm, EvalError> {
        eval::whnf(t, self.cx.env.fuel)
    }

    fn is_proof(&self, ctx: &Context, t: &Tm) -> bool {
        let Ok(ty) = self.cx.infer(ctx, t) else {
            return false;
        };
        if let Ok(w) = self.whnf(&ty) {
            if is_prop_former(&w) {
                return true;
            }
        }
        matches!(self.cx.infer_sort(ctx, &ty, "Conv"), Ok(Sort::Prop))
    }

    fn typed(&self, ctx: &Context, a: &Tm, b: &Tm, ty: &Tm) -> Result<bool, EvalError> {
        if a == b {
            return Ok(true);
        }
        let wt = self.whnf(ty)?;
        if is_prop_former(&wt) {
            return Ok(true);
        }
        match &*wt {
            Term::Pi(x, dom, cod) => {
                let inner = ctx.extend(x.clone(), dom.clone());
                let a2 = app(shift(a, 0, 1), var(0));
                let b2 = app(shift(b, 0, 1), var(0));
                self.typed(&inner, &a2, &b2, cod)
            }
            Term::Cum(inner) => self.typed(ctx, &down(a.clone()), &down(b.clone()), inner),
            _ => {
                if matches!(self.cx.infer_sort(ctx, &wt, "Conv"), Ok(Sort::Prop)) {
                    return Ok(true);
                }
                self.untyped(ctx, a, b, true)
            }
        }
    }

    /// Structural comparison of weak-head normal forms, with eta for
    /// functions, the coercion section law, and proof irrelevance on
    /// mismatches. `retry` enables a final comparison of full normal forms.
    fn untyped(&self, ctx: &Context, a: &Tm, b: &Tm, retry: bool) -> Result<bool, EvalError> {
        if a == b {
            return Ok(true);
        }
        let wa = self.whnf(a)?;
        let wb = self.whnf(b)?;
        if wa == wb {
            return Ok(true);
        }
        if self.structural(ctx, &wa, &wb)? {
            return Ok(true);
        }
        if self.is_proof(ctx, &wa) && self.is_proof(ctx, &wb) {
            return Ok(true);
        }
        if retry {
            let na = eval::normalize(&wa, self.cx.env.fuel)?;
            let nb = eval::normalize(&wb, self.cx.env.fuel)?;
            if na == nb {
                return Ok(true);
            }
            if (na != wa || nb != wb) && self.structural(ctx, &na, &nb)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn structural(&self, ctx: &Context, a: &Tm, b: &Tm) -> Result<bool, EvalError> {
        use Term::*;
        match (&**a, &**b) {
            (Lam(x, dom, body), other) | (other, Lam(x, dom, body)) if !matches!(other, Lam(..)) => {
                let inner = ctx.extend(x.clone(), dom.clone());
                let o = app(shift(&Arc::new(other.clone()), 0, 1), var(0));
                return self.untyped(&inner, body, &o, false);
            }
            (Up(x), other) | (other, Up(x)) if !matches!(other, Up(_)) => {
                return self.untyped(ctx, x, &down(Arc::new(other.clone())), false);
            }
            _ => {}
        }
        if std::mem::discriminant(&**a) != std::mem::discriminant(&**b) {
            return Ok(false);
        }
        if !same_shell(a, b) {
            return Ok(false);
        }
        let ca = a.children();
        let cb = b.children();
        if ca.len() != cb.len() {
            return Ok(false);
        }
        // Binder domains are the child just before the binding child.
        let mut prev: Option<&Tm> = None;
        for ((x, bx), (y, _)) in ca.iter().zip(cb.iter()) {
            let ok = if *bx == 1 {
                let dom = prev.cloned().unwrap_or_else(|| univ(0));
                let inner = ctx.extend(Name::anon(), dom);
                self.untyped(&inner, x, y, false)?
            } else {
                self.untyped(ctx, x, y, false)?
            };
            if !ok {
                return Ok(false);
            }
            prev = Some(x);
        }
        Ok(true)
    }
}

/// Whether two terms with the same constructor agree on their non-term data.
fn same_shell(a: &Term, b: &Term) -> bool {
    use Term::*;
    match (a, b) {
        (Var(i), Var(j)) => i == j,
        (Sort(s), Sort(t)) => s == t,
        (TyPrec(i, ..), TyPrec(j, ..)) => i == j,
        (Const(n, xs), Const(m, ys)) => n == m && xs.len() == ys.len(),
        (
            Catch {
                ind: i1,
                prop: p1,
                branches: b1,
                param: q1,
                ..
            },
            Catch {
                ind: i2,
                prop: p2,
                branches: b2,
                param: q2,
                ..
            },
        ) => i1 == i2 && p1 == p2 && b1.len() == b2.len() && q1.is_some() == q2.is_some(),
        _ => true,
    }
}

// ---------------------------------------------------------------- public API

pub fn infer(env: &Env, ctx: &Context, t: &Tm) -> TResult<Tm> {
    Cx { env }.infer(ctx, t)
}

pub fn check(env: &Env, ctx: &Context, t: &Tm, expected: &Tm) -> TResult<()> {
    Cx { env }.check(ctx, t, expected, "Conv")
}

/// Sort of a type.
pub fn sort_of(env: &Env, ctx: &Context, ty: &Tm) -> TResult<Sort> {
    Cx { env }.infer_sort(ctx, ty, "Conv")
}

/// Type-directed conversion of `a` and `b` at `ty`.
pub fn convertible(env: &Env, ctx: &Context, a: &Tm, b: &Tm, ty: &Tm) -> Result<bool, EvalError> {
    let cx = Cx { env };
    Conv { cx: &cx }.typed(ctx, a, b, ty)
}

/// Conversion of two types (or of any two terms without a known type).
pub fn convertible_untyped(env: &Env, ctx: &Context, a: &Tm, b: &Tm) -> Result<bool, EvalError> {
    let cx = Cx { env };
    Conv { cx: &cx }.untyped(ctx, a, b, true)
}

/// Check one declaration: its type is a type, its body inhabits it.
/// In the monotone fragment, a declaration the full system accepts is
/// reported as a `GripUpViolation`.
pub fn check_decl(env: &Env, d: &Decl) -> TResult<TypedJudgment> {
    match check_decl_in(env, d) {
        Err(e) if env.grip_up && e.kind != ErrorKind::GripUpViolation => {
            let mut full = env.clone();
            full.grip_up = false;
            if check_decl_in(&full, d).is_ok() {
                Err(TypeError {
                    kind: ErrorKind::GripUpViolation,
                    message: format!(
                        "typable in the full system but not in the monotone fragment: {}",
                        e.message
                    ),
                    ..e
                })
            } else {
                Err(e)
            }
        }
        r => r,
    }
}

fn check_decl_in(env: &Env, d: &Decl) -> TResult<TypedJudgment> {
    let ctx = Context::new();
    sort_of(env, &ctx, &d.ty)?;
    match &d.body {
        Some(b) => {
            check(env, &ctx, b, &d.ty)?;
            Ok(TypedJudgment {
                context: ctx,
                term: b.clone(),
                ty: d.ty.clone(),
            })
        }
        None => Ok(TypedJudgment {
            context: ctx,
            term: konst(&d.name, vec![]),
            ty: d.ty.clone(),
        }),
    }
}

/// Check every declaration in order. Axioms declared in the file become
/// available to the declarations after them.
pub fn check_file(env: &Env, src: &SourceFile) -> Result<Vec<TypedJudgment>, Vec<DeclError>> {
    let mut env = env.clone();
    let mut ok = vec![];
    let mut errs = vec![];
    for d in &src.decls {
        match check_decl(&env, d) {
            Ok(j) => ok.push(j),
            Err(error) => errs.push(DeclError {
                decl: d.name.clone(),
                span: d.span,
                error,
            }),
        }
        if d.body.is_none() {
            env.add_axiom(&d.name, d.ty.clone());
        }
    }
    if errs.is_empty() {
        Ok(ok)
    } else {
        Err(errs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_term;

    fn ty(s: &str) -> Tm {
        infer(&Env::new(), &Context::new(), &parse_term(s).unwrap()).unwrap()
    }

    #[test]
    fn unk_universe() {
        assert_eq!(ty("?[Type 0]"), univ(0));
    }

    #[test]
    fn cast_type() {
        assert_eq!(ty("cast Nat Bool 0"), bool_());
    }

    #[test]
    fn identity() {
        assert_eq!(ty("fun (x : Nat) => x"), arrow(nat(), nat()));
    }

    #[test]
    fn type_precision_is_a_prop() {
        assert_eq!(ty("Nat <=[0] ?[Type 0]"), prop());
    }

    #[test]
    fn zero_is_not_bool() {
        let e = check(&Env::new(), &Context::new(), &zero(), &bool_()).unwrap_err();
        assert_eq!(e.kind, ErrorKind::ConversionFailure);
    }

    #[test]
    fn coe_retr() {
        check(&Env::new(), &Context::new(), &down(up(zero())), &nat()).unwrap();
    }

    #[test]
    fn eta() {
        let env = Env::new();
        let mut ctx = Context::new();
        ctx.push(Name::new("f"), arrow(nat(), nat()));
        let f = var(0);
        let eta_f = lam("x", nat(), app(var(1), var(0)));
        assert!(convertible(&env, &ctx, &eta_f, &f, &arrow(nat(), nat())).unwrap());
    }

    #[test]
    fn cast_levels_must_agree() {
        let t = parse_term("cast Nat (Type 0) 0").unwrap();
        let e = infer(&Env::new(), &Context::new(), &t).unwrap_err();
        assert_eq!(e.kind, ErrorKind::CastLevelMismatch);
    }
}
