//! The monotone fragment: checking, the lifting translation into the full
//! system, and synthesis of self-precision proofs for translated terms.
//!
//! Self-precision is proved in a doubled context: every source variable
//! `x : A` becomes three target variables `x0 : <A>0`, `x1 : <A>1` and
//! `xe : x0 :<A>0 <= x1 :<A>1`. For source index `k` these sit at target
//! indices `3k+2`, `3k+1` and `3k`.

use std::sync::Arc;

use thiserror::Error;

use crate::eval::whnf;
use crate::prelude::at;
use crate::surface::print_in;
use crate::syntax::build::*;
use crate::syntax::{shift, Context, Ind, Name, Sort, Term, Tm};
use crate::typeck::{check, infer, sort_of, Env, ErrorKind, TResult, TypeError};

/// A typing derivation in the monotone fragment.
#[derive(Clone, Debug)]
pub struct GripUpJudgment {
    pub context: Context,
    pub term: Tm,
    pub ty: Tm,
}

/// Accept exactly the terms typable in the monotone fragment. A term that
/// the full system accepts but the fragment does not is reported as a
/// `GripUpViolation`.
pub fn check_grip_up(env: &Env, ctx: &Context, t: &Tm) -> TResult<GripUpJudgment> {
    let up = env.clone().grip_up();
    match infer(&up, ctx, t) {
        Ok(ty) => Ok(GripUpJudgment {
            context: ctx.clone(),
            term: t.clone(),
            ty,
        }),
        Err(e) if e.kind == ErrorKind::GripUpViolation => Err(e),
        Err(e) => {
            let mut full = env.clone();
            full.grip_up = false;
            if infer(&full, ctx, t).is_ok() {
                Err(TypeError {
                    kind: ErrorKind::GripUpViolation,
                    rule: e.rule,
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
    }
}

/// Replace every free variable `k` of `t` by `f(k)`, a term in the
/// target context.
pub(crate) fn subst_free(t: &Tm, f: &dyn Fn(usize) -> Tm) -> Tm {
    fn go(t: &Tm, depth: usize, f: &dyn Fn(usize) -> Tm) -> Tm {
        match &**t {
            Term::Var(i) if *i >= depth => shift(&f(i - depth), 0, depth as isize),
            Term::Var(_) => t.clone(),
            _ => Arc::new(
                t.map_children(|c, k| Ok::<_, ()>(go(c, depth + k, f)))
                    .expect("infallible"),
            ),
        }
    }
    go(t, 0, f)
}

/// Number of constructor arguments (including recursive results) bound by
/// each branch of a catch.
fn branch_arities(ind: Ind) -> &'static [usize] {
    match ind {
        Ind::List => &[0, 3],
        Ind::Nat => &[0, 2],
        Ind::Bool => &[0, 0],
        Ind::Unit => &[0],
        Ind::Empty => &[],
        Ind::Sigma => &[2],
        Ind::Box => &[1],
    }
}

/// Translation `<->` from the fragment into the full system.
struct Translator {
    env: Env,
}

impl Translator {
    fn is_pi(&self, ctx: &Context, ty: &Tm) -> TResult<bool> {
        let w = whnf(ty, self.env.fuel).map_err(|e| fuel_error(ctx, ty, e))?;
        Ok(matches!(&*w, Term::Pi(..)))
    }

    fn tr(&self, ctx: &mut Context, t: &Tm) -> TResult<Tm> {
        use Term::*;
        Ok(match &**t {
            Pi(x, a, b) => {
                let a2 = self.tr(ctx, a)?;
                ctx.push(x.clone(), a.clone());
                let b2 = self.tr(ctx, b);
                ctx.pop();
                cum(Arc::new(Pi(x.clone(), a2, b2?)))
            }
            Lam(x, a, b) => {
                let ty = infer(&self.env, ctx, t)?;
                let lifted = self.is_pi(ctx, &ty)?;
                let a2 = self.tr(ctx, a)?;
                ctx.push(x.clone(), a.clone());
                let b2 = self.tr(ctx, b);
                ctx.pop();
                let l = Arc::new(Lam(x.clone(), a2, b2?));
                if lifted {
                    up(l)
                } else {
                    l
                }
            }
            App(f, u) => {
                let ft = infer(&self.env, ctx, f)?;
                let f2 = self.tr(ctx, f)?;
                let u2 = self.tr(ctx, u)?;
                if self.is_pi(ctx, &ft)? {
                    app(down(f2), u2)
                } else {
                    app(f2, u2)
                }
            }
            Catch {
                ind,
                prop,
                param,
                motive,
                branches,
                on_err,
                on_unk,
                scrut,
            } if !prop => {
                let param2 = param.as_ref().map(|p| self.tr(ctx, p)).transpose()?;
                let motive2 = self.tr_motive(ctx, motive)?;
                let mut bs = vec![];
                for (b, &n) in branches.iter().zip(branch_arities(*ind)) {
                    bs.push(self.tr_branch(ctx, b, n)?);
                }
                Arc::new(Catch {
                    ind: *ind,
                    prop: false,
                    param: param2,
                    motive: motive2,
                    branches: bs,
                    on_err: self.tr(ctx, on_err)?,
                    on_unk: self.tr(ctx, on_unk)?,
                    scrut: self.tr(ctx, scrut)?,
                })
            }
            _ => {
                let mut err = None;
                let out = t.map_children(|c, k| {
                    if err.is_some() {
                        return Ok(c.clone());
                    }
                    // Binders other than Pi and Lam (Sig, forall) need the
                    // bound type in context; they bind the previous child.
                    let r = if k == 0 {
                        self.tr(ctx, c)
                    } else {
                        let (x, a) = binder_of(t).expect("binding former");
                        ctx.push(x, a);
                        let r = self.tr(ctx, c);
                        ctx.pop();
                        r
                    };
                    match r {
                        Ok(v) => Ok::<_, ()>(v),
                        Result::Err(e) => {
                            err = Some(e);
                            Ok(c.clone())
                        }
                    }
                });
                if let Some(e) = err {
                    return Result::Err(e);
                }
                Arc::new(out.expect("infallible"))
            }
        })
    }

    /// Motives stay plain functions so that the catch still typechecks.
    fn tr_motive(&self, ctx: &mut Context, m: &Tm) -> TResult<Tm> {
        let Term::Lam(x, a, b) = &**m else {
            return self.tr(ctx, m);
        };
        let a2 = self.tr(ctx, a)?;
        ctx.push(x.clone(), a.clone());
        let b2 = self.tr(ctx, b);
        ctx.pop();
        Ok(Arc::new(Term::Lam(x.clone(), a2, b2?)))
    }

    /// A branch binding `n` arguments becomes `n` plain lambdas around the
    /// translated body, eta-expanding the source branch if needed.
    fn tr_branch(&self, ctx: &mut Context, b: &Tm, n: usize) -> TResult<Tm> {
        let (binders, body) = peel(&self.env, ctx, b, n)?;
        self.wrap_binders(ctx, &binders, &body)
    }

    fn wrap_binders(&self, ctx: &mut Context, binders: &[(Name, Tm)], body: &Tm) -> TResult<Tm> {
        let mut doms = vec![];
        for (x, a) in binders {
            doms.push(self.tr(ctx, a));
            ctx.push(x.clone(), a.clone());
        }
        let body2 = self.tr(ctx, body);
        for _ in binders {
            ctx.pop();
        }
        let mut out = body2?;
        for ((x, _), d) in binders.iter().zip(doms).rev() {
            out = Arc::new(Term::Lam(x.clone(), d?, out));
        }
        Ok(out)
    }
}

/// The bound variable of the binding former `t` (Sig, forall).
fn binder_of(t: &Term) -> Option<(Name, Tm)> {
    match t {
        Term::Sigma(x, a, _) | Term::All(x, a, _) | Term::Pi(x, a, _) | Term::Lam(x, a, _) => {
            Some((x.clone(), a.clone()))
        }
        _ => None,
    }
}

/// Split `n` leading lambdas off `b`, eta-expanding from its type when `b`
/// is not syntactically a lambda.
fn peel(env: &Env, ctx: &Context, b: &Tm, n: usize) -> TResult<(Vec<(Name, Tm)>, Tm)> {
    let mut binders = vec![];
    let mut cur = b.clone();
    let mut local = ctx.clone();
    for _ in 0..n {
        match &*cur.clone() {
            Term::Lam(x, a, body) => {
                binders.push((x.clone(), a.clone()));
                local.push(x.clone(), a.clone());
                cur = body.clone();
            }
            _ => {
                let ty = infer(env, &local, &cur)?;
                let w = whnf(&ty, env.fuel).map_err(|e| fuel_error(&local, &ty, e))?;
                let Term::Pi(x, a, _) = &*w else {
                    return Err(TypeError {
                        kind: ErrorKind::NotAFunction,
                        rule: "Catch-Branch",
                        message: "branch does not bind its constructor arguments".into(),
                        term: cur.clone(),
                        expected: None,
                        actual: Some(ty),
                        names: local.names(),
                    });
                };
                binders.push((x.clone(), a.clone()));
                local.push(x.clone(), a.clone());
                cur = app(shift(&cur, 0, 1), var(0));
            }
        }
    }
    Ok((binders, cur))
}

fn fuel_error(ctx: &Context, t: &Tm, e: crate::eval::EvalError) -> TypeError {
    TypeError {
        kind: ErrorKind::OutOfFuel,
        rule: "Conv",
        message: e.to_string(),
        term: t.clone(),
        expected: None,
        actual: None,
        names: ctx.names(),
    }
}

/// `<t>` for a term of the fragment in context `ctx` (source types).
pub fn shift_translate(env: &Env, ctx: &Context, t: &Tm) -> TResult<Tm> {
    let tr = Translator {
        env: env.clone().grip_up(),
    };
    tr.tr(&mut ctx.clone(), t)
}

/// Translate a context pointwise.
pub fn translate_context(env: &Env, ctx: &Context) -> TResult<Context> {
    let tr = Translator {
        env: env.clone().grip_up(),
    };
    let mut src = Context::new();
    let mut out = Context::new();
    for (x, a) in ctx.entries() {
        out.push(x.clone(), tr.tr(&mut src, a)?);
        src.push(x.clone(), a.clone());
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("not in the monotone fragment: {0}")]
    NotGripUp(TypeError),
    #[error("no self-precision construction for {0}")]
    Unsupported(String),
    #[error("synthesized proof does not check (kernel bug): {0}")]
    Replay(TypeError),
}

impl From<TypeError> for SynthError {
    fn from(e: TypeError) -> SynthError {
        SynthError::NotGripUp(e)
    }
}

type SResult<T> = Result<T, SynthError>;

/// One source variable of the doubled context.
struct Entry {
    /// Universe level of the source type.
    level: u32,
    /// `<A>0` and `<A>1`, in the doubled context before this entry.
    ty0: Tm,
    ty1: Tm,
    /// Proof of `<A>0 :Type i <= <A>1 :Type i`, in the same context.
    wit: Tm,
}

/// Which copies a proof is instantiated at: both left, both right, or the
/// heterogeneous original.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Inst {
    Left,
    Right,
    Het,
}

struct Synth {
    up: Env,
    tr: Translator,
    src: Context,
    tgt: Context,
    entries: Vec<Entry>,
}

/// Self-precision proof of the translated term, in the doubled context.
/// Check it against [`selfprec_goal`] in [`doubled_context`].
pub fn synthesize_selfprec(env: &Env, j: &GripUpJudgment) -> SResult<Tm> {
    let mut s = Synth::new(env);
    for (x, a) in j.context.entries() {
        s.push(x, a)?;
    }
    s.synth(&j.term)
}

/// `<t>0 :<A>0 <= <t>1 :<A>1`, the statement synthesized proofs establish.
pub fn selfprec_goal(env: &Env, j: &GripUpJudgment) -> SResult<Tm> {
    let mut s = Synth::new(env);
    for (x, a) in j.context.entries() {
        s.push(x, a)?;
    }
    let t = s.tr.tr(&mut s.src.clone(), &j.term)?;
    let a = s.tr.tr(&mut s.src.clone(), &j.ty)?;
    Ok(tm_prec(copy(&a, 0), copy(&a, 1), copy(&t, 0), copy(&t, 1)))
}

/// The doubled context `<Γ>ε`.
pub fn doubled_context(env: &Env, ctx: &Context) -> SResult<Context> {
    let mut s = Synth::new(env);
    for (x, a) in ctx.entries() {
        s.push(x, a)?;
    }
    Ok(s.tgt)
}

/// Synthesize and replay in one go.
pub fn certify(env: &Env, j: &GripUpJudgment) -> SResult<Tm> {
    let proof = synthesize_selfprec(env, j)?;
    let goal = selfprec_goal(env, j)?;
    let ctx = doubled_context(env, &j.context)?;
    let mut full = env.clone();
    full.grip_up = false;
    check(&full, &ctx, &proof, &goal).map_err(SynthError::Replay)?;
    Ok(proof)
}

/// Copy `c` (0 or 1) of a translated term: source variable `k` becomes
/// target variable `3k + 2 - c`.
fn copy(t: &Tm, c: usize) -> Tm {
    subst_free(t, &|k| var(3 * k + 2 - c))
}

fn k(name: &str, args: Vec<Tm>) -> Tm {
    konst(name, args)
}

fn kl(name: &str, level: u32, args: Vec<Tm>) -> Tm {
    konst(&at(name, level), args)
}

impl Synth {
    fn new(env: &Env) -> Synth {
        let up = env.clone().grip_up();
        Synth {
            tr: Translator { env: up.clone() },
            up,
            src: Context::new(),
            tgt: Context::new(),
            entries: vec![],
        }
    }

    fn translate(&self, t: &Tm) -> SResult<Tm> {
        Ok(self.tr.tr(&mut self.src.clone(), t)?)
    }

    fn level(&self, ty: &Tm) -> SResult<u32> {
        match sort_of(&self.up, &self.src, ty)? {
            Sort::Univ(l) => Ok(l.0),
            Sort::Prop => Err(SynthError::Unsupported(format!(
                "proofs of {}",
                print_in(ty, &self.src.names())
            ))),
        }
    }

    fn unsupported<T>(&self, t: &Tm) -> SResult<T> {
        Err(SynthError::Unsupported(print_in(t, &self.src.names())))
    }

    fn push(&mut self, x: &Name, a: &Tm) -> SResult<()> {
        let level = self.level(a)?;
        let wit = self.synth(a)?;
        let a2 = self.translate(a)?;
        let (ty0, ty1) = (copy(&a2, 0), copy(&a2, 1));
        let n0 = Name::new(&format!("{}0", x.as_str()));
        let n1 = Name::new(&format!("{}1", x.as_str()));
        let ne = Name::new(&format!("{}e", x.as_str()));
        self.tgt.push(n0, ty0.clone());
        self.tgt.push(n1, shift(&ty1, 0, 1));
        self.tgt.push(
            ne,
            tm_prec(shift(&ty0, 0, 2), shift(&ty1, 0, 2), var(1), var(0)),
        );
        self.src.push(x.clone(), a.clone());
        self.entries.push(Entry {
            level,
            ty0,
            ty1,
            wit,
        });
        Ok(())
    }

    fn pop(&mut self) {
        self.src.pop();
        self.tgt.pop();
        self.tgt.pop();
        self.tgt.pop();
        self.entries.pop();
    }

    /// Image of target variable `m` under an instantiation, in the current
    /// doubled context.
    fn image(&self, inst: Inst, m: usize) -> Tm {
        let kk = m / 3;
        let role = m % 3;
        let n = self.entries.len();
        let (x0, x1, xe) = (var(3 * kk + 2), var(3 * kk + 1), var(3 * kk));
        match (inst, role) {
            (Inst::Het, _) => var(m),
            (Inst::Left, 2) | (Inst::Left, 1) => x0,
            (Inst::Right, 2) | (Inst::Right, 1) => x1,
            (_, _) => {
                let e = &self.entries[n - 1 - kk];
                let sh = 3 * (kk + 1) as isize;
                let (a0, a1, w) = (shift(&e.ty0, 0, sh), shift(&e.ty1, 0, sh), shift(&e.wit, 0, sh));
                let i = e.level;
                let wty = fst_p(w);
                let wa0 = kl("lreflTy", i, vec![a0.clone(), a1.clone(), wty.clone()]);
                let wa1 = kl("ureflTy", i, vec![a0.clone(), a1.clone(), wty]);
                let name = if inst == Inst::Left { "lreflTm" } else { "ureflTm" };
                kl(name, i, vec![a0, a1, wa0, wa1, x0, x1, xe])
            }
        }
    }

    /// Instantiate a term of the current doubled context, leaving the
    /// innermost `inner` variables alone.
    fn apply(&self, t: &Tm, inner: usize, inst: Inst) -> Tm {
        if inst == Inst::Het {
            return t.clone();
        }
        subst_free(t, &|m| {
            if m < inner {
                var(m)
            } else {
                shift(&self.image(inst, m - inner), 0, inner as isize)
            }
        })
    }

    /// For a body under source binders, the proofs
    /// `fun x0 x1 xe ... => wrap(P_body)` at each requested instantiation.
    fn hyps(
        &mut self,
        binders: &[(Name, Tm)],
        body: &Tm,
        insts: &[Inst],
        wrap: &dyn Fn(Tm) -> Tm,
    ) -> SResult<Vec<Tm>> {
        let base = self.tgt.len();
        let mut pushed = 0;
        let mut result = Ok(());
        for (x, a) in binders {
            if let Err(e) = self.push(x, a) {
                result = Err(e);
                break;
            }
            pushed += 1;
        }
        let proof = result.and_then(|_| self.synth(body));
        let inner_entries = self.tgt.entries()[base..].to_vec();
        for _ in 0..pushed {
            self.pop();
        }
        let p = proof?;
        let inner = 3 * binders.len();
        Ok(insts
            .iter()
            .map(|&inst| {
                let mut out = wrap(self.apply(&p, inner, inst));
                for t in (0..inner).rev() {
                    let (x, ty) = &inner_entries[t];
                    out = Arc::new(Term::Lam(x.clone(), self.apply(ty, t, inst), out));
                }
                out
            })
            .collect())
    }

    fn hyp(&mut self, binders: &[(Name, Tm)], body: &Tm, inst: Inst, wrap: &dyn Fn(Tm) -> Tm) -> SResult<Tm> {
        Ok(self.hyps(binders, body, &[inst], wrap)?.remove(0))
    }

    fn hyps3(&mut self, binders: &[(Name, Tm)], body: &Tm, wrap: &dyn Fn(Tm) -> Tm) -> SResult<Vec<Tm>> {
        self.hyps(binders, body, &[Inst::Left, Inst::Right, Inst::Het], wrap)
    }

    fn copies(&self, t: &Tm) -> SResult<(Tm, Tm)> {
        let t2 = self.translate(t)?;
        Ok((copy(&t2, 0), copy(&t2, 1)))
    }

    /// Proof of `<t>0 :<A>0 <= <t>1 :<A>1` in the doubled context.
    fn synth(&mut self, t: &Tm) -> SResult<Tm> {
        use Term::*;
        let ty = infer(&self.up, &self.src, t)?;
        match &**t {
            Var(kk) => Ok(var(3 * kk)),
            Sort(crate::syntax::Sort::Univ(j)) => {
                if j.0 > 2 {
                    return self.unsupported(t);
                }
                Ok(pair_p(kl("reflUniv", j.0, vec![]), kl("boundUniv", j.0, vec![])))
            }
            Sort(crate::syntax::Sort::Prop) => Ok(pair_p(k("reflProp", vec![]), k("boundProp", vec![]))),
            Nat | Bool | Unit | Empty => {
                let name = match &**t {
                    Nat => "Nat",
                    Bool => "Bool",
                    Unit => "Unit",
                    _ => "Empty",
                };
                let bound = k(&format!("bound{name}"), vec![]);
                Ok(pair_p(
                    kl("lreflTy", 0, vec![t.clone(), unk_univ(0), bound.clone()]),
                    bound,
                ))
            }
            List(a) => {
                let i = self.level(a)?;
                let w = self.synth(a)?;
                let (_, a1) = self.copies(a)?;
                Ok(pair_p(fst_p(w.clone()), kl("boundList", i, vec![a1, snd_p(w)])))
            }
            Cum(a) => {
                let i = self.level(a)?;
                let w = self.synth(a)?;
                let (a0, a1) = self.copies(a)?;
                let prec = fst_p(w);
                let refl = kl("ureflTy", i, vec![a0, a1.clone(), prec.clone()]);
                Ok(pair_p(prec, kl("boundCum", i, vec![a1, refl])))
            }
            Pi(x, a, b) | Sigma(x, a, b) => {
                let ja = self.level(a)?;
                let wa = self.synth(a)?;
                let binders = [(x.clone(), a.clone())];
                let [f00, f11, f01]: [Tm; 3] = self.hyps3(&binders, b, &fst_p)?.try_into().unwrap();
                let first = pair_p(fst_p(wa.clone()), pair_p(f00, pair_p(f11, f01)));
                let g = self.level(t)?;
                let is_pi = matches!(&**t, Pi(..));
                // A product lives one level above its parts in the fragment.
                let inner_level = if is_pi { g - 1 } else { g };
                let (p0, p1) = if is_pi {
                    let (c0, c1) = self.copies(t)?;
                    let strip = |c: Tm| match &*c {
                        Cum(p) => p.clone(),
                        _ => c,
                    };
                    (strip(c0), strip(c1))
                } else {
                    self.copies(t)?
                };
                if is_pi {
                    let refl = kl("ureflTy", inner_level, vec![p0, p1.clone(), first.clone()]);
                    Ok(pair_p(first, kl("boundCum", inner_level, vec![p1, refl])))
                } else {
                    let jb = {
                        let mut inner = self.src.clone();
                        inner.push(x.clone(), a.clone());
                        match sort_of(&self.up, &inner, b)? {
                            crate::syntax::Sort::Univ(l) => l.0,
                            crate::syntax::Sort::Prop => return self.unsupported(t),
                        }
                    };
                    if ja != jb {
                        return self.unsupported(t);
                    }
                    let (_, a1) = self.copies(a)?;
                    let Term::Sigma(_, _, b1) = &*p1 else {
                        return self.unsupported(t);
                    };
                    let fam = lam(x.as_str(), a1.clone(), b1.clone());
                    let wb = self.hyp(&binders, b, Inst::Right, &snd_p)?;
                    // Collapse the related pair (a0, a1, h) of the right
                    // instance onto a single self-precise argument.
                    let Lam(_, _, inner1) = &*wb else { unreachable!() };
                    let Lam(_, _, inner2) = &**inner1 else { unreachable!() };
                    let Lam(_, _, body) = &**inner2 else { unreachable!() };
                    let body2 = subst_free(body, &|m| match m {
                        0 => var(0),
                        1 | 2 => var(1),
                        m => var(m - 1),
                    });
                    let w2 = lam(
                        "a",
                        a1.clone(),
                        lam("h", tm_prec(shift(&a1, 0, 1), shift(&a1, 0, 1), var(0), var(0)), body2),
                    );
                    let bound = kl("boundSigma", g, vec![a1, fam, snd_p(wa), w2]);
                    Ok(pair_p(first, bound))
                }
            }
            Lam(x, a, b) => {
                let tyw = whnf(&ty, self.up.fuel).map_err(|e| fuel_error(&self.src, &ty, e))?;
                if !matches!(&*tyw, Pi(..)) {
                    return self.unsupported(t);
                }
                let [h00, h11, h01]: [Tm; 3] =
                    self.hyps3(&[(x.clone(), a.clone())], b, &|p| p)?.try_into().unwrap();
                Ok(pair_p(h00, pair_p(h11, h01)))
            }
            App(f, u) => {
                let ft = infer(&self.up, &self.src, f)?;
                let ftw = whnf(&ft, self.up.fuel).map_err(|e| fuel_error(&self.src, &ft, e))?;
                if !matches!(&*ftw, Pi(..)) {
                    return self.unsupported(t);
                }
                let wf = self.synth(f)?;
                let wu = self.synth(u)?;
                let (u0, u1) = self.copies(u)?;
                Ok(apps(snd_p(snd_p(wf)), [u0, u1, wu]))
            }
            Up(a) | Down(a) | Succ(a) => self.synth(a),
            Zero => Ok(k("congZero", vec![])),
            True => Ok(k("congTrue", vec![])),
            False => Ok(k("congFalse", vec![])),
            Tt => Ok(k("congTt", vec![])),
            Nil(a) => {
                let i = self.level(a)?;
                let w = self.synth(a)?;
                let (a0, a1) = self.copies(a)?;
                Ok(kl("congNilH", i, vec![a0, a1, fst_p(w)]))
            }
            Cons(_, h, tl) => Ok(pair_p(self.synth(h)?, self.synth(tl)?)),
            Pair(_, u, v) => Ok(pair_p(self.synth(u)?, self.synth(v)?)),
            Err(a) | Unk(a) => {
                let i = self.level(a)?;
                let w = self.synth(a)?;
                let (a0, a1) = self.copies(a)?;
                let prec = fst_p(w);
                let wa0 = kl("lreflTy", i, vec![a0.clone(), a1.clone(), prec.clone()]);
                let wa1 = kl("ureflTy", i, vec![a0.clone(), a1.clone(), prec]);
                if matches!(&**t, Err(_)) {
                    let refl = kl("reflErr", i, vec![a1.clone(), wa1.clone()]);
                    Ok(kl("errMin", i, vec![a0, a1.clone(), wa0, wa1, err(a1), refl]))
                } else {
                    let refl = kl("reflUnk", i, vec![a0.clone(), wa0.clone()]);
                    Ok(kl("unkMax", i, vec![a0.clone(), wa0, unk(a0), refl, a1, wa1]))
                }
            }
            Cast(a, b, x) => {
                let i = self.level(a)?;
                let wa = self.synth(a)?;
                let wb = self.synth(b)?;
                let wx = self.synth(x)?;
                let (a0, a1) = self.copies(a)?;
                let (b0, b1) = self.copies(b)?;
                let (x0, x1) = self.copies(x)?;
                Ok(kl(
                    "castMon",
                    i,
                    vec![a0, a1, fst_p(wa), b0, b1, fst_p(wb), x0, x1, wx],
                ))
            }
            Catch {
                ind,
                prop: false,
                param,
                motive,
                branches,
                scrut,
                ..
            } => self.synth_ind(t, *ind, param.as_ref(), motive, branches, scrut),
            _ => self.unsupported(t),
        }
    }

    /// The monotonicity lemma for `ind`, instantiated at the translated
    /// motive and branches.
    fn synth_ind(
        &mut self,
        t: &Tm,
        ind: Ind,
        param: Option<&Tm>,
        motive: &Tm,
        branches: &[Tm],
        scrut: &Tm,
    ) -> SResult<Tm> {
        let Term::Lam(mx, ma, mbody) = &**motive else {
            return self.unsupported(t);
        };
        let j = {
            let mut inner = self.src.clone();
            inner.push(mx.clone(), ma.clone());
            match sort_of(&self.up, &inner, mbody)? {
                Sort::Univ(l) => l.0,
                Sort::Prop => return self.unsupported(t),
            }
        };
        let name = match ind {
            Ind::Nat => at("indNatMon", j),
            Ind::Bool => at("indBoolMon", j),
            Ind::Unit => at("indUnitMon", j),
            Ind::List => {
                let i = self.level(param.expect("list parameter"))?;
                format!("indListMon{i}{j}")
            }
            Ind::Sigma => {
                let i = self.level(param.expect("sigma parameter"))?;
                format!("indSigmaMon{i}{j}")
            }
            _ => return self.unsupported(t),
        };
        let mut args = vec![];
        if let Some(p) = param {
            let (p0, p1) = self.copies(p)?;
            if ind == Ind::Sigma {
                // the lemma quantifies over the components of the sigma type
                let parts = |s: &Tm| match &**s {
                    Term::Sigma(x, a, b) => Ok((a.clone(), lam(x.as_str(), a.clone(), b.clone()))),
                    _ => self.unsupported(t),
                };
                let (a0, b0) = parts(&p0)?;
                let (a1, b1) = parts(&p1)?;
                args.extend([a0, a1, b0, b1]);
            } else {
                args.extend([p0, p1]);
            }
            args.push(self.synth(p)?);
        }
        let m2 = self.tr.tr_motive(&mut self.src.clone(), motive)?;
        args.extend([copy(&m2, 0), copy(&m2, 1)]);
        args.extend(self.hyps3(&[(mx.clone(), ma.clone())], mbody, &|p| p)?);
        for (b, &n) in branches.iter().zip(branch_arities(ind)) {
            let (binders, body) = peel(&self.up, &self.src, b, n)?;
            let b2 = self.tr.wrap_binders(&mut self.src.clone(), &binders, &body)?;
            args.extend([copy(&b2, 0), copy(&b2, 1)]);
            args.extend(self.hyps3(&binders, &body, &|p| p)?);
        }
        let (s0, s1) = self.copies(scrut)?;
        args.extend([s0, s1, self.synth(scrut)?]);
        Ok(konst(&name, args))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{parse_term, parse_term_with};

    fn certified(src: &str) -> Tm {
        let env = Env::new();
        let t = parse_term(src).unwrap();
        let j = check_grip_up(&env, &Context::new(), &t).unwrap();
        let tr = shift_translate(&env, &Context::new(), &t).unwrap();
        crate::typeck::infer(&env, &Context::new(), &tr).unwrap();
        certify(&env, &j).unwrap_or_else(|e| panic!("{e}"))
    }

    #[test]
    fn translation_shapes() {
        let env = Env::new();
        let id = parse_term("fun (x : Nat) => x").unwrap();
        assert_eq!(
            shift_translate(&env, &Context::new(), &id).unwrap(),
            up(lam("x", nat(), var(0)))
        );
        assert_eq!(shift_translate(&env, &Context::new(), &zero()).unwrap(), zero());
    }

    #[test]
    fn identity_is_self_precise() {
        certified("fun (x : Nat) => x");
    }

    #[test]
    fn successor_is_self_precise() {
        certified("fun (x : Nat) => S x");
    }

    #[test]
    fn variable_witness_is_hypothesis() {
        let env = Env::new();
        let mut ctx = Context::new();
        ctx.push(Name::new("x"), nat());
        let j = check_grip_up(&env, &ctx, &var(0)).unwrap();
        assert_eq!(synthesize_selfprec(&env, &j).unwrap(), var(0));
    }

    #[test]
    fn higher_order() {
        certified("fun (f : Nat -> Nat) (x : Nat) => f (f x)");
    }

    #[test]
    fn ind_on_nat() {
        certified(
            "fun (n : Nat) => catch_nat (fun (_ : Nat) => Bool) true (fun (m : Nat) (r : Bool) => false) err[Bool] ?[Bool] n",
        );
    }

    #[test]
    fn non_ind_catch_is_rejected() {
        let env = Env::new();
        let t = parse_term(
            "fun (b : Bool) => catch_bool (fun (_ : Bool) => Nat) 0 1 2 ?[Nat] b",
        )
        .unwrap();
        let e = check_grip_up(&env, &Context::new(), &t).unwrap_err();
        assert_eq!(e.kind, ErrorKind::GripUpViolation);
    }

    #[test]
    fn bogus_proof_is_rejected() {
        let env = Env::new();
        let t = parse_term("fun (x : Nat) => S x").unwrap();
        let j = check_grip_up(&env, &Context::new(), &t).unwrap();
        let goal = selfprec_goal(&env, &j).unwrap();
        assert!(check(&env, &Context::new(), &konst("congZero", vec![]), &goal).is_err());
    }

    #[test]
    fn list_recursion() {
        certified(
            "fun (f : Nat -> Nat) (l : List Nat) => catch_list[Nat] (fun (_ : List Nat) => List Nat) nil[Nat] (fun (a : Nat) (t : List Nat) (r : List Nat) => cons[Nat] (f a) r) err[List Nat] ?[List Nat] l",
        );
        certified(
            "fun (l : List Nat) (m : List Nat) => catch_list[Nat] (fun (_ : List Nat) => List Nat) m (fun (a : Nat) (t : List Nat) (r : List Nat) => cons[Nat] a r) err[List Nat] ?[List Nat] l",
        );
    }

    #[test]
    fn exceptions_and_casts() {
        certified("fun (x : Nat) => cast Nat ?[Type 0] x");
        certified("cast (Nat -> Nat) ?[Type 1] (fun (x : Nat) => x)");
        certified("err[Nat -> Bool]");
        certified("?[Nat]");
        certified("fun (b : Bool) => cast ?[Type 0] Bool (cast Bool ?[Type 0] b)");
    }

    #[test]
    fn types_are_self_precise() {
        certified("Nat -> Nat");
        certified("Pi (A : Type 0) -> A -> A");
        certified("List (Nat -> Bool)");
        certified("Type 0");
    }

    #[test]
    fn open_terms() {
        let env = Env::new();
        let mut ctx = Context::new();
        ctx.push(Name::new("A"), univ(0));
        ctx.push(Name::new("a"), var(0));
        let j = check_grip_up(&env, &ctx, &var(0)).unwrap();
        certify(&env, &j).unwrap();
        let t = parse_term_with("fun (f : A -> A) => f (f a)", &crate::prelude::scope(), &ctx.names()).unwrap();
        let j = check_grip_up(&env, &ctx, &t).unwrap();
        certify(&env, &j).unwrap();
    }

    #[test]
    fn polymorphic_terms() {
        certified("fun (A : Type 0) (x : A) => x");
        certified(
            "fun (A : Type 0) (B : Type 0) (f : A -> B) (l : List A) => catch_list[A] (fun (_ : List A) => List B) nil[B] (fun (a : A) (t : List A) (r : List B) => cons[B] (f a) r) err[List B] ?[List B] l",
        );
    }
}
