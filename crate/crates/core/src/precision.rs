//! Ground decision procedures for type and term precision.
//!
//! A positive verdict carries a proof term over the prelude constants,
//! so it can be replayed through the typechecker. Products are only
//! decided up to a bound: their precision quantifies over every input.

use std::fmt;

use thiserror::Error;

use crate::eval::{is_err_type, is_unk_type, normalize, type_level, EvalError, TyLevel};
use crate::prelude::at;
use crate::surface::print;
use crate::syntax::build::*;
use crate::syntax::{occurs, scope_check, shift, subst, Context, Sort, Term, Tm};
use crate::typeck::{check, infer, sort_of, Env, TResult, TypeError};

/// Bounds for the enumerated arguments used on product types.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecBound {
    pub nat_bound: u64,
    pub list_len: usize,
}

impl Default for PrecBound {
    fn default() -> PrecBound {
        PrecBound {
            nat_bound: 3,
            list_len: 2,
        }
    }
}

/// Rule applications that justify a verdict.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Derivation {
    pub rule: String,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    fn leaf(rule: &str) -> Derivation {
        Derivation {
            rule: rule.to_string(),
            premises: vec![],
        }
    }

    fn node(rule: &str, premises: Vec<Derivation>) -> Derivation {
        Derivation {
            rule: rule.to_string(),
            premises,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:width$}{}", "", self.rule, width = depth * 2)?;
        for p in &self.premises {
            p.write(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

/// A proof of `goal`, with the rules used to build it.
#[derive(Clone, Debug)]
pub struct Witness {
    pub goal: Tm,
    pub proof: Tm,
    pub derivation: Derivation,
}

impl Witness {
    /// Check the proof against the goal in the empty context.
    pub fn replay(&self, env: &Env) -> TResult<()> {
        check(env, &Context::new(), &self.proof, &self.goal)
    }
}

#[derive(Clone, Debug)]
pub enum PrecResult {
    Holds(Witness),
    /// The path of rules leading to the violated one.
    Fails(Vec<String>),
    /// Every enumerated instance held; `checked` instances were examined.
    UnknownUpToBound { bound: PrecBound, checked: u64 },
}

impl PrecResult {
    pub fn holds(&self) -> bool {
        matches!(self, PrecResult::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self, PrecResult::Fails(_))
    }

    pub fn verdict(&self) -> &'static str {
        match self {
            PrecResult::Holds(_) => "holds",
            PrecResult::Fails(_) => "fails",
            PrecResult::UnknownUpToBound { .. } => "unknown",
        }
    }
}

#[derive(Debug, Error)]
pub enum PrecError {
    #[error("input is not closed: {0}")]
    NotClosed(String),
    #[error("input is ill-typed: {0}")]
    IllTyped(#[from] TypeError),
    #[error("{0} is not a type of a universe")]
    NotAType(String),
    #[error("types live at different levels ({0} and {1})")]
    LevelMismatch(u32, u32),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

enum Stop {
    Fail(Vec<String>),
    Unknown(u64),
}

type Step = Result<(Tm, Derivation), Stop>;

fn fail<T>(msg: impl Into<String>) -> Result<T, Stop> {
    Err(Stop::Fail(vec![msg.into()]))
}

/// Prefix a failure path with the rule that led to it.
fn via<T>(rule: &str, r: Result<T, Stop>) -> Result<T, Stop> {
    r.map_err(|s| match s {
        Stop::Fail(mut p) => {
            p.insert(0, rule.to_string());
            Stop::Fail(p)
        }
        u => u,
    })
}

fn c(name: &str, args: Vec<Tm>) -> Tm {
    konst(name, args)
}

fn cl(name: &str, level: u32, args: Vec<Tm>) -> Tm {
    konst(&at(name, level), args)
}

/// Highest level with a full set of prelude constants.
const PRELUDE_TOP: u32 = 3;

struct Decider {
    fuel: u64,
    bound: PrecBound,
}

impl Decider {
    fn nf(&self, t: &Tm) -> Result<Tm, Stop> {
        normalize(t, self.fuel).map_err(|e| Stop::Fail(vec![format!("evaluation: {e}")]))
    }

    fn level_of(&self, ty: &Tm) -> Option<u32> {
        match type_level(&mut vec![], ty)? {
            TyLevel::Univ(i) => Some(i),
            TyLevel::Prop => None,
        }
    }

    fn need_level(&self, i: u32) -> Result<(), Stop> {
        if i > PRELUDE_TOP {
            Err(Stop::Unknown(0))
        } else {
            Ok(())
        }
    }

    // ------------------------------------------------------------ types

    /// Type precision `a <=[i] b` for closed normal types.
    fn ty(&self, a: &Tm, b: &Tm, i: u32) -> Step {
        use Term::*;
        self.need_level(i)?;
        if is_unk_type(b) {
            return self.bounded(a, i);
        }
        if is_err_type(a) && is_err_type(b) {
            self.need_level(i + 1)?;
            let refl = cl("reflErr", i + 1, vec![univ(i), cl("reflUniv", i, vec![])]);
            return Ok((fst_p(refl), Derivation::leaf("err-Refl-Ty")));
        }
        if is_err_type(a) {
            let (wbb, d1) = self.ty(b, b, i)?;
            let (wbu, d2) = self.ty(b, &unk_univ(i), i)?;
            self.need_level(i + 1)?;
            let min = cl(
                "errMin",
                i + 1,
                vec![
                    univ(i),
                    univ(i),
                    cl("reflUniv", i, vec![]),
                    cl("reflUniv", i, vec![]),
                    b.clone(),
                    pair_p(wbb, wbu),
                ],
            );
            return Ok((fst_p(min), Derivation::node("err-Prec", vec![d1, d2])));
        }
        if is_unk_type(a) {
            return fail(format!("?-Max: ? is only below ?, not {}", print(b)));
        }
        if is_err_type(b) {
            return fail(format!("err-Min: only err is below err, not {}", print(a)));
        }
        match (&**a, &**b) {
            (Sort(s), Sort(t)) if s == t => Ok(match s {
                crate::syntax::Sort::Univ(j) => (
                    cl("reflUniv", j.0, vec![]),
                    Derivation::leaf("Univ-Refl-Ty"),
                ),
                crate::syntax::Sort::Prop => (c("reflProp", vec![]), Derivation::leaf("Prop-Refl-Ty")),
            }),
            (Nat, Nat) | (Bool, Bool) | (Unit, Unit) | (Empty, Empty) => {
                let bound = c(&format!("bound{}", base_name(a)), vec![]);
                Ok((
                    cl("lreflTy", 0, vec![a.clone(), unk_univ(0), bound]),
                    Derivation::node("lrefl", vec![Derivation::leaf(&format!("{}-?-Bound", base_name(a)))]),
                ))
            }
            (Cum(x), Cum(y)) => {
                let (w, d) = via("Cum-Cong-Ty", self.ty(x, y, i - 1))?;
                Ok((w, Derivation::node("Cum-Cong-Ty", vec![d])))
            }
            (List(x), List(y)) => {
                let (w, d) = via("L-Cong-Ty", self.ty(x, y, i))?;
                Ok((w, Derivation::node("L-Cong-Ty", vec![d])))
            }
            (BoxP(p), BoxP(q)) => Ok((
                c("irrProp", vec![p.clone(), q.clone()]),
                Derivation::node("Box-Cong", vec![Derivation::leaf("Prop-Prec")]),
            )),
            (Pi(_, a0, b0), Pi(_, a1, b1)) => via("Pi-Cong", self.family("Pi-Cong", a0, b0, a1, b1)),
            (Sigma(_, a0, b0), Sigma(_, a1, b1)) => {
                via("Sig-Cong", self.family("Sig-Cong", a0, b0, a1, b1))
            }
            _ => fail(format!("Head-Mismatch: {} vs {}", print(a), print(b))),
        }
    }

    /// `a <=[i] ?[Type i]`.
    fn bounded(&self, a: &Tm, i: u32) -> Step {
        use Term::*;
        let q = unk_univ(i);
        match &**a {
            Nat | Bool | Unit | Empty => {
                let n = base_name(a);
                Ok((c(&format!("bound{n}"), vec![]), Derivation::leaf(&format!("{n}-?-Bound"))))
            }
            Sort(crate::syntax::Sort::Univ(j)) => Ok((
                cl("boundUniv", j.0, vec![]),
                Derivation::leaf("Univ-?-Bound"),
            )),
            Sort(crate::syntax::Sort::Prop) => Ok((c("boundProp", vec![]), Derivation::leaf("Prop-?-Bound"))),
            Cum(x) => {
                let (w, d) = via("Cum-?-Bound", self.ty(x, x, i - 1))?;
                Ok((
                    cl("boundCum", i - 1, vec![x.clone(), w]),
                    Derivation::node("Cum-?-Bound", vec![d]),
                ))
            }
            List(x) => {
                let (w, d) = via("L-?-Bound", self.ty(x, &q, i))?;
                Ok((
                    cl("boundList", i, vec![x.clone(), w]),
                    Derivation::node("L-?-Bound", vec![d]),
                ))
            }
            Sigma(n, x, fam) => {
                let (w1, d1) = via("Sig-?-Bound", self.ty(x, &q, i))?;
                if occurs(fam, 0) {
                    let vals = self.values(x).ok_or(Stop::Unknown(0))?;
                    let mut checked = 0;
                    for v in vals {
                        if !self.tm(&v, &v, x, x, i).is_ok() {
                            continue;
                        }
                        let bv = self.nf(&subst(fam, 0, &v))?;
                        via(&format!("Sig-?-Bound at {}", print(&v)), self.ty(&bv, &q, i))?;
                        checked += 1;
                    }
                    return Result::Err(Stop::Unknown(checked));
                }
                let body = shift(fam, 0, -1);
                let (p, d2) = via("Sig-?-Bound", self.ty(&body, &q, i))?;
                let w2 = lam(
                    "a",
                    x.clone(),
                    lam("_", tm_prec(shift(x, 0, 1), shift(x, 0, 1), var(0), var(0)), shift(&p, 0, 2)),
                );
                let fam_fn = Term::Lam(n.clone(), x.clone(), fam.clone()).into();
                Ok((
                    cl("boundSigma", i, vec![x.clone(), fam_fn, w1, w2]),
                    Derivation::node("Sig-?-Bound", vec![d1, d2]),
                ))
            }
            Unk(_) => {
                self.need_level(i + 1)?;
                let refl = cl("reflUnk", i + 1, vec![univ(i), cl("reflUniv", i, vec![])]);
                Ok((fst_p(refl), Derivation::leaf("?-Refl")))
            }
            Err(_) => {
                self.need_level(i + 1)?;
                let unk_sp = cl("reflUnk", i + 1, vec![univ(i), cl("reflUniv", i, vec![])]);
                let min = cl(
                    "errMin",
                    i + 1,
                    vec![
                        univ(i),
                        univ(i),
                        cl("reflUniv", i, vec![]),
                        cl("reflUniv", i, vec![]),
                        q.clone(),
                        unk_sp,
                    ],
                );
                Ok((fst_p(min), Derivation::leaf("err-Prec")))
            }
            Pi(..) => fail("Pi-?: no rule bounds a product by ? at the same level"),
            BoxP(_) => fail("Box-?: no rule bounds Box by ?"),
            _ => fail(format!("no ?-bound for {}", print(a))),
        }
    }

    /// The conjunction produced by the Pi and Sigma congruence rules.
    fn family(&self, rule: &str, a0: &Tm, b0: &Tm, a1: &Tm, b1: &Tm) -> Step {
        let j = self.level_of(a0).ok_or_else(|| Stop::Fail(vec!["domain level".into()]))?;
        let k = {
            let mut env = vec![a0.clone()];
            match type_level(&mut env, b0) {
                Some(TyLevel::Univ(k)) => k,
                _ => return fail("codomain level"),
            }
        };
        let (wd, dd) = via("domain", self.ty(a0, a1, j))?;
        if occurs(b0, 0) || occurs(b1, 0) {
            return Err(Stop::Unknown(self.enumerate_family(a0, b0, a1, b1, k)?));
        }
        let (c0, c1) = (shift(b0, 0, -1), shift(b1, 0, -1));
        let mut fams = vec![];
        let mut ds = vec![dd];
        for (d0, d1, x0, x1) in [(a0, a0, &c0, &c0), (a1, a1, &c1, &c1), (a0, a1, &c0, &c1)] {
            let (p, d) = via("codomain", self.ty(x0, x1, k))?;
            fams.push(related_lam(d0, d1, shift(&p, 0, 3)));
            ds.push(d);
        }
        let f01 = fams.pop().unwrap();
        let f11 = fams.pop().unwrap();
        let f00 = fams.pop().unwrap();
        Ok((
            pair_p(wd, pair_p(f00, pair_p(f11, f01))),
            Derivation::node(rule, ds),
        ))
    }

    fn enumerate_family(&self, a0: &Tm, b0: &Tm, a1: &Tm, b1: &Tm, k: u32) -> Result<u64, Stop> {
        let j = self.level_of(a0).unwrap_or(0);
        let v0s = self.values(a0).ok_or(Stop::Unknown(0))?;
        let v1s = self.values(a1).ok_or(Stop::Unknown(0))?;
        let mut checked = 0;
        let cases = [
            (a0, b0, &v0s, a0, b0, &v0s),
            (a1, b1, &v1s, a1, b1, &v1s),
            (a0, b0, &v0s, a1, b1, &v1s),
        ];
        for (d0, c0, us, d1, c1, vs) in cases {
            for u in us {
                for v in vs {
                    if self.tm(u, v, d0, d1, j).is_err() {
                        continue;
                    }
                    let t0 = self.nf(&subst(c0, 0, u))?;
                    let t1 = self.nf(&subst(c1, 0, v))?;
                    via(
                        &format!("codomain at {} / {}", print(u), print(v)),
                        self.ty(&t0, &t1, k),
                    )?;
                    checked += 1;
                }
            }
        }
        Ok(checked)
    }

    // ------------------------------------------------------------ terms

    fn sp(&self, a: &Tm, ta: &Tm, i: u32) -> Step {
        self.tm(a, a, ta, ta, i)
    }

    /// Term precision `a :ta <= b :tb` for closed normal terms and types.
    fn tm(&self, a: &Tm, b: &Tm, ta: &Tm, tb: &Tm, i: u32) -> Step {
        use Term::*;
        self.need_level(i)?;
        if let (Sort(s), Sort(t)) = (&**ta, &**tb) {
            if s == t {
                return self.tm_sort(a, b, s);
            }
        }
        if let (BoxP(p), BoxP(q)) = (&**ta, &**tb) {
            return Ok((
                c("irrBox", vec![p.clone(), q.clone(), a.clone(), b.clone()]),
                Derivation::leaf("Box-Prec"),
            ));
        }
        if ta == tb {
            let refl = match (&**a, &**b) {
                (Err(_), Err(_)) => Some(("reflErr", "err-Refl")),
                (Unk(_), Unk(_)) => Some(("reflUnk", "?-Refl")),
                _ => None,
            };
            if let Some((name, rule)) = refl {
                let (w, d) = via(rule, self.ty(ta, ta, i))?;
                return Ok((cl(name, i, vec![ta.clone(), w]), Derivation::node(rule, vec![d])));
            }
        }
        if let Err(_) = &**a {
            let (wa, d1) = via("err-Prec", self.ty(ta, ta, i))?;
            let (wb, d2) = via("err-Prec", self.ty(tb, tb, i))?;
            let (sb, d3) = via("err-Prec", self.sp(b, tb, i))?;
            return Ok((
                cl("errMin", i, vec![ta.clone(), tb.clone(), wa, wb, b.clone(), sb]),
                Derivation::node("err-Prec", vec![d1, d2, d3]),
            ));
        }
        if let Unk(_) = &**b {
            let (wa, d1) = via("?-Prec", self.ty(ta, ta, i))?;
            let (sa, d2) = via("?-Prec", self.sp(a, ta, i))?;
            let (wb, d3) = via("?-Prec", self.ty(tb, tb, i))?;
            return Ok((
                cl("unkMax", i, vec![ta.clone(), wa, a.clone(), sa, tb.clone(), wb]),
                Derivation::node("?-Prec", vec![d1, d2, d3]),
            ));
        }
        if ta != tb {
            return self.hetero(a, b, ta, tb, i);
        }
        if let Unk(_) = &**a {
            return fail(format!("?-Max: ? is only below ?, not {}", print(b)));
        }
        if let Err(_) = &**b {
            return fail(format!("err-Min: only err is below err, not {}", print(a)));
        }
        match &**ta {
            Nat => match (&**a, &**b) {
                (Zero, Zero) => Ok((c("congZero", vec![]), Derivation::leaf("Zero-Cong"))),
                (Succ(n), Succ(m)) => {
                    let (w, d) = via("Nat-Prec-Succ", self.tm(n, m, ta, ta, i))?;
                    Ok((w, Derivation::node("Nat-Prec-Succ", vec![d])))
                }
                (Zero, Succ(_)) => fail("NoConf-Zero-Succ"),
                (Succ(_), Zero) => fail("NoConf-Succ-Zero"),
                _ => fail(format!("stuck natural {} / {}", print(a), print(b))),
            },
            Bool => match (&**a, &**b) {
                (True, True) => Ok((c("congTrue", vec![]), Derivation::leaf("True-Cong"))),
                (False, False) => Ok((c("congFalse", vec![]), Derivation::leaf("False-Cong"))),
                (True, False) => fail("NoConf-True-False"),
                (False, True) => fail("NoConf-False-True"),
                _ => fail(format!("stuck boolean {} / {}", print(a), print(b))),
            },
            Unit => match (&**a, &**b) {
                (Tt, Tt) => Ok((c("congTt", vec![]), Derivation::leaf("Tt-Cong"))),
                _ => fail(format!("stuck unit {} / {}", print(a), print(b))),
            },
            Empty => fail(format!("Empty has no constructors: {} / {}", print(a), print(b))),
            List(x) => match (&**a, &**b) {
                (Nil(_), Nil(_)) => Ok((cl("congNil", i, vec![x.clone()]), Derivation::leaf("L-Prec-Nil"))),
                (Cons(_, h0, t0), Cons(_, h1, t1)) => {
                    let (wh, d1) = via("L-Prec-Cons", self.tm(h0, h1, x, x, i))?;
                    let (wt, d2) = via("L-Prec-Cons", self.tm(t0, t1, ta, ta, i))?;
                    Ok((pair_p(wh, wt), Derivation::node("L-Prec-Cons", vec![d1, d2])))
                }
                (Nil(_), Cons(..)) => fail("NoConf-Nil-Cons"),
                (Cons(..), Nil(_)) => fail("NoConf-Cons-Nil"),
                _ => fail(format!("stuck list {} / {}", print(a), print(b))),
            },
            Sigma(_, x, fam) => match (&**a, &**b) {
                (Pair(_, u0, v0), Pair(_, u1, v1)) => {
                    let (wu, d1) = via("Sig-Prec-Pair", self.tm(u0, u1, x, x, i))?;
                    let f0 = self.nf(&subst(fam, 0, u0))?;
                    let f1 = self.nf(&subst(fam, 0, u1))?;
                    let (wv, d2) = via("Sig-Prec-Pair", self.tm(v0, v1, &f0, &f1, i))?;
                    Ok((pair_p(wu, wv), Derivation::node("Sig-Prec-Pair", vec![d1, d2])))
                }
                _ => fail(format!("stuck pair {} / {}", print(a), print(b))),
            },
            Cum(x) => {
                let a2 = self.nf(&down(a.clone()))?;
                let b2 = self.nf(&down(b.clone()))?;
                let (w, d) = via("Cum-Prec", self.tm(&a2, &b2, x, x, i - 1))?;
                Ok((w, Derivation::node("Cum-Prec", vec![d])))
            }
            Pi(..) => Result::Err(Stop::Unknown(self.enumerate_pi(a, b, ta, tb, i)?)),
            Unk(_) => self.tm_unk(a, b, ta, i),
            _ => fail(format!("no precision rule at type {}", print(ta))),
        }
    }

    fn tm_sort(&self, a: &Tm, b: &Tm, s: &Sort) -> Step {
        match s {
            Sort::Prop => Ok((
                c("irrProp", vec![a.clone(), b.clone()]),
                Derivation::leaf("Prop-Prec"),
            )),
            Sort::Univ(j) => {
                let j = j.0;
                let (w1, d1) = via("Univ-Prec", self.ty(a, b, j))?;
                let (w2, d2) = via("Univ-Prec", self.ty(b, &unk_univ(j), j))?;
                Ok((pair_p(w1, w2), Derivation::node("Univ-Prec", vec![d1, d2])))
            }
        }
    }

    /// Values of the unknown type: casts out of germs.
    fn tm_unk(&self, a: &Tm, b: &Tm, q: &Tm, i: u32) -> Step {
        use Term::*;
        match (&**a, &**b) {
            (Cast(g0, _, v0), Cast(g1, _, v1)) => {
                let (wg, d1) = via("Cast-Mon", self.ty(g0, g1, i))?;
                let (wq, d2) = via("Cast-Mon", self.ty(q, q, i))?;
                let (wv, d3) = via("Cast-Mon", self.tm(v0, v1, g0, g1, i))?;
                Ok((
                    cl(
                        "castMon",
                        i,
                        vec![g0.clone(), g1.clone(), wg, q.clone(), q.clone(), wq, v0.clone(), v1.clone(), wv],
                    ),
                    Derivation::node("Cast-Mon", vec![d1, d2, d3]),
                ))
            }
            _ => fail(format!("stuck value of ? {} / {}", print(a), print(b))),
        }
    }

    /// Heterogeneous precision through the downcast characterisation.
    fn hetero(&self, a: &Tm, b: &Tm, ta: &Tm, tb: &Tm, i: u32) -> Step {
        let (wa, d1) = via("Het-Prec", self.ty(ta, ta, i))?;
        let (wb, d2) = via("Het-Prec", self.ty(tb, tb, i))?;
        let down = self.nf(&cast(tb.clone(), ta.clone(), b.clone()))?;
        let (p1, d3) = via("Het-Prec", self.tm(a, &down, ta, ta, i))?;
        let (p2, d4) = via("Het-Prec", self.sp(b, tb, i))?;
        let chr = cl("hetChar", i, vec![ta.clone(), tb.clone(), wa, wb, a.clone(), b.clone()]);
        Ok((
            app(snd_p(chr), pair_p(p1, p2)),
            Derivation::node("Het-Prec", vec![d1, d2, d3, d4]),
        ))
    }

    fn enumerate_pi(&self, f: &Tm, g: &Tm, tf: &Tm, tg: &Tm, i: u32) -> Result<u64, Stop> {
        let (Term::Pi(_, a0, b0), Term::Pi(_, a1, b1)) = (&**tf, &**tg) else {
            return Err(Stop::Unknown(0));
        };
        let j = self.level_of(a0).ok_or(Stop::Unknown(0))?;
        let v0s = self.values(a0).ok_or(Stop::Unknown(0))?;
        let v1s = if a0 == a1 { v0s.clone() } else { self.values(a1).ok_or(Stop::Unknown(0))? };
        let mut checked = 0;
        let cases: [(&Tm, &Tm, &Tm, &Tm, &Vec<Tm>, &Vec<Tm>, &Tm, &Tm, &str); 3] = [
            (f, f, a0, b0, &v0s, &v0s, a0, b0, "Pi-Prec monotone left"),
            (g, g, a1, b1, &v1s, &v1s, a1, b1, "Pi-Prec monotone right"),
            (f, g, a0, b0, &v0s, &v1s, a1, b1, "Pi-Prec"),
        ];
        for (h0, h1, d0, c0, us, vs, d1, c1, rule) in cases {
            for u in us {
                for v in vs {
                    if self.tm(u, v, d0, d1, j).is_err() {
                        continue;
                    }
                    let r0 = self.nf(&app(h0.clone(), u.clone()))?;
                    let r1 = self.nf(&app(h1.clone(), v.clone()))?;
                    let t0 = self.nf(&subst(c0, 0, u))?;
                    let t1 = self.nf(&subst(c1, 0, v))?;
                    match self.tm(&r0, &r1, &t0, &t1, i) {
                        Ok(_) | Err(Stop::Unknown(_)) => {}
                        Err(Stop::Fail(mut p)) => {
                            p.insert(0, format!("{rule} at {} / {}", print(u), print(v)));
                            return Err(Stop::Fail(p));
                        }
                    }
                    checked += 1;
                }
            }
        }
        Ok(checked)
    }

    /// Closed values of a first-order type, within the bounds.
    fn values(&self, ty: &Tm) -> Option<Vec<Tm>> {
        use Term::*;
        let mut out = vec![err(ty.clone()), unk(ty.clone())];
        match &**ty {
            Nat => out.extend((0..=self.bound.nat_bound).map(num)),
            Bool => out.extend([tru(), fls()]),
            Unit => out.push(tt()),
            Empty => {}
            List(x) => {
                let elems = self.values(x)?;
                let mut layer = vec![nil(x.clone())];
                out.push(nil(x.clone()));
                for _ in 0..self.bound.list_len {
                    let mut next = vec![];
                    for e in &elems {
                        for l in &layer {
                            next.push(cons(x.clone(), e.clone(), l.clone()));
                        }
                    }
                    out.extend(next.iter().cloned());
                    layer = next;
                }
            }
            Sort(crate::syntax::Sort::Univ(crate::syntax::Level(0))) => out.extend([nat(), bool_(), unit(), empty()]),
            Unk(a) if **a == Sort(crate::syntax::Sort::Univ(crate::syntax::Level(0))) => {
                for v in (0..=self.bound.nat_bound).map(num) {
                    out.push(cast(nat(), ty.clone(), v));
                }
                out.push(cast(bool_(), ty.clone(), tru()));
                out.push(cast(bool_(), ty.clone(), fls()));
                out.push(cast(unit(), ty.clone(), tt()));
            }
            _ => return None,
        }
        Some(out)
    }
}

/// `fun a0 a1 (h : a0 :d0 <= a1 :d1) => body` where `body` already
/// lives under the three binders.
pub(crate) fn related_lam(d0: &Tm, d1: &Tm, body: Tm) -> Tm {
    lam(
        "a0",
        d0.clone(),
        lam(
            "a1",
            shift(d1, 0, 1),
            lam("h", tm_prec(shift(d0, 0, 2), shift(d1, 0, 2), var(1), var(0)), body),
        ),
    )
}

fn base_name(t: &Tm) -> &'static str {
    match &**t {
        Term::Nat => "Nat",
        Term::Bool => "Bool",
        Term::Unit => "Unit",
        _ => "Empty",
    }
}

fn finish(goal: Tm, r: Step, bound: PrecBound) -> PrecResult {
    match r {
        Ok((proof, derivation)) => PrecResult::Holds(Witness {
            goal,
            proof,
            derivation,
        }),
        Err(Stop::Fail(p)) => PrecResult::Fails(p),
        Err(Stop::Unknown(checked)) => PrecResult::UnknownUpToBound { bound, checked },
    }
}

fn closed(t: &Tm) -> Result<(), PrecError> {
    if scope_check(t, 0) {
        Ok(())
    } else {
        Err(PrecError::NotClosed(print(t)))
    }
}

/// Universe level of a closed type.
fn universe_of(env: &Env, ty: &Tm) -> Result<u32, PrecError> {
    match sort_of(env, &Context::new(), ty)? {
        Sort::Univ(l) => Ok(l.0),
        Sort::Prop => Err(PrecError::NotAType(print(ty))),
    }
}

pub fn decide_type_prec(a: &Tm, b: &Tm, i: u32) -> Result<PrecResult, PrecError> {
    decide_type_prec_with(&Env::new(), PrecBound::default(), a, b, i)
}

pub fn decide_type_prec_with(
    env: &Env,
    bound: PrecBound,
    a: &Tm,
    b: &Tm,
    i: u32,
) -> Result<PrecResult, PrecError> {
    closed(a)?;
    closed(b)?;
    let ctx = Context::new();
    check(env, &ctx, a, &univ(i))?;
    check(env, &ctx, b, &univ(i))?;
    let d = Decider { fuel: env.fuel, bound };
    let na = normalize(a, env.fuel)?;
    let nb = normalize(b, env.fuel)?;
    Ok(finish(ty_prec(i, a.clone(), b.clone()), d.ty(&na, &nb, i), bound))
}

pub fn decide_term_prec(a: &Tm, b: &Tm, ta: &Tm, tb: &Tm) -> Result<PrecResult, PrecError> {
    decide_term_prec_with(&Env::new(), PrecBound::default(), a, b, ta, tb)
}

pub fn decide_term_prec_with(
    env: &Env,
    bound: PrecBound,
    a: &Tm,
    b: &Tm,
    ta: &Tm,
    tb: &Tm,
) -> Result<PrecResult, PrecError> {
    for t in [a, b, ta, tb] {
        closed(t)?;
    }
    let ctx = Context::new();
    let i = universe_of(env, ta)?;
    let j = universe_of(env, tb)?;
    if i != j {
        return Err(PrecError::LevelMismatch(i, j));
    }
    check(env, &ctx, a, ta)?;
    check(env, &ctx, b, tb)?;
    let d = Decider { fuel: env.fuel, bound };
    let [na, nb, nta, ntb] = [a, b, ta, tb].map(|t| normalize(t, env.fuel));
    let r = d.tm(&na?, &nb?, &nta?, &ntb?, i);
    Ok(finish(tm_prec(ta.clone(), tb.clone(), a.clone(), b.clone()), r, bound))
}

/// Outcome of a dynamic gradual guarantee check.
#[derive(Clone, Debug)]
pub struct DggReport {
    /// `C x` and `C y` after evaluation.
    pub lhs: Tm,
    pub rhs: Tm,
    /// Whether a self-precision proof for the context was supplied and checked.
    pub witnessed: bool,
    pub verdict: PrecResult,
}

#[derive(Debug, Error)]
pub enum DggError {
    #[error("context is not a boolean context: {0}")]
    NotBooleanContext(String),
    #[error("self-precision witness rejected: {0}")]
    BadWitness(TypeError),
    #[error("inputs are not related by precision ({0})")]
    Unrelated(String),
    #[error(transparent)]
    Prec(#[from] PrecError),
}

/// Evaluate a boolean context on two related inputs and compare the
/// results. `c` may be a plain function `A -> Bool` or a lifted one of
/// type `iota (A -> Bool)`.
pub fn check_dgg(
    env: &Env,
    c: &Tm,
    a: &Tm,
    x: &Tm,
    y: &Tm,
    witness: Option<&Tm>,
) -> Result<DggReport, DggError> {
    let ctx = Context::new();
    closed(c)?;
    let tc = infer(env, &ctx, c).map_err(PrecError::from)?;
    let tc_n = normalize(&tc, env.fuel).map_err(PrecError::from)?;
    let (fun, lifted) = match &*tc_n {
        Term::Pi(..) => (c.clone(), false),
        Term::Cum(inner) if matches!(&**inner, Term::Pi(..)) => (down(c.clone()), true),
        _ => return Err(DggError::NotBooleanContext(print(&tc))),
    };
    let expected = arrow(a.clone(), bool_());
    let pi = if lifted { down(c.clone()) } else { c.clone() };
    check(env, &ctx, &pi, &expected).map_err(|e| DggError::NotBooleanContext(e.to_string()))?;
    if let Some(w) = witness {
        check(env, &ctx, w, &tm_prec(tc.clone(), tc.clone(), c.clone(), c.clone()))
            .map_err(DggError::BadWitness)?;
    }
    match decide_term_prec_with(env, PrecBound::default(), x, y, a, a)? {
        PrecResult::Holds(_) => {}
        other => return Err(DggError::Unrelated(other.verdict().to_string())),
    }
    let lhs = normalize(&app(fun.clone(), x.clone()), env.fuel).map_err(PrecError::from)?;
    let rhs = normalize(&app(fun, y.clone()), env.fuel).map_err(PrecError::from)?;
    let verdict = decide_term_prec_with(env, PrecBound::default(), &lhs, &rhs, &bool_(), &bool_())?;
    Ok(DggReport {
        lhs,
        rhs,
        witnessed: witness.is_some(),
        verdict,
    })
}
