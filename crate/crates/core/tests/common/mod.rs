//! Support shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

pub mod gen;
pub mod goldens;
pub mod syn;

use std::time::{Duration, Instant};

use grip_core::eval::{normalize, normalize_random, step, StepResult, DEFAULT_FUEL};
use grip_core::surface::{parse_term, print};
use grip_core::syntax::build::*;
use grip_core::syntax::{shift, Name};
use grip_core::typeck::{check, convertible, infer, Env};
use grip_core::{Context, Tm};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gen::Ty;

pub fn p(s: &str) -> Tm {
    parse_term(s).unwrap_or_else(|ds| panic!("{s}: {}", ds[0]))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A deterministic runner: `cases` cases drawn from a fixed seed.
pub fn runner(cases: u32, seed: u8) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        max_shrink_iters: 64,
        max_global_rejects: 1 << 20,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// Run a property, returning the number of cases and the elapsed time.
pub fn run<S: Strategy>(
    cases: u32,
    seed: u8,
    strategy: S,
    prop: impl Fn(S::Value) -> Result<(), String>,
) -> Result<(u32, Duration), String>
where
    S::Value: std::fmt::Debug,
{
    let start = Instant::now();
    let mut r = runner(cases, seed);
    r.run(&strategy, |v| prop(v).map_err(TestCaseError::fail))
        .map_err(|e| e.to_string())?;
    Ok((cases, start.elapsed()))
}

/// Well-typed closed terms: a seed expands into a term and its type.
pub fn typed_case() -> impl Strategy<Value = (Tm, Ty, u64)> {
    any::<u64>().prop_map(|seed| {
        let mut r = rng(seed);
        let (t, ty) = gen::typed_term(&mut r, 4);
        (t, ty, seed)
    })
}

fn show(t: &Tm) -> String {
    print(t)
}

// ---------------------------------------------------------------- properties

pub fn prop_well_typed((t, ty, _): &(Tm, Ty, u64)) -> Result<(), String> {
    check(&Env::new(), &Context::new(), t, &ty.tm()).map_err(|e| format!("{}: {e}", show(t)))
}

pub fn prop_confluence((t, _, seed): (Tm, Ty, u64)) -> Result<(), String> {
    let lo = normalize(&t, DEFAULT_FUEL).map_err(|e| e.to_string())?;
    let mut r = rng(seed ^ 0x5eed);
    let rand = normalize_random(&t, DEFAULT_FUEL, &mut r).map_err(|e| e.to_string())?;
    if lo != rand {
        return Err(format!("{}: {} vs {}", show(&t), show(&lo), show(&rand)));
    }
    Ok(())
}

pub fn prop_subject_reduction((t, ty, _): (Tm, Ty, u64)) -> Result<(), String> {
    let env = Env::new();
    let ctx = Context::new();
    let a = ty.tm();
    check(&env, &ctx, &t, &a).map_err(|e| format!("{}: {e}", show(&t)))?;
    let mut cur = t.clone();
    for _ in 0..40 {
        match step(&cur) {
            StepResult::Stepped(rule, next) => {
                check(&env, &ctx, &next, &a)
                    .map_err(|e| format!("{rule} took {} to {}: {e}", show(&cur), show(&next)))?;
                cur = next;
            }
            StepResult::Stuck(_) => break,
        }
    }
    Ok(())
}

pub fn prop_normalizes((t, ty, _): (Tm, Ty, u64)) -> Result<(), String> {
    let v = normalize(&t, DEFAULT_FUEL).map_err(|e| format!("{}: {e}", show(&t)))?;
    if ty == Ty::Nat && !nat_canonical(&v) {
        return Err(format!("{} is not canonical", show(&v)));
    }
    Ok(())
}

/// Numerals, exceptions, and casts out of the unknown type that are stuck
/// on a variable-free germ value.
fn nat_canonical(v: &Tm) -> bool {
    use grip_core::Term::*;
    match &**v {
        Zero | Err(_) | Unk(_) => true,
        Succ(n) => nat_canonical(n),
        Cast(a, _, _) => grip_core::eval::is_unk_type(a),
        _ => false,
    }
}

pub fn prop_conversion(((t, ty, _), (u, _, _)): ((Tm, Ty, u64), (Tm, Ty, u64))) -> Result<(), String> {
    let env = Env::new();
    let ctx = Context::new();
    let a = ty.tm();
    let conv = |x: &Tm, y: &Tm| convertible(&env, &ctx, x, y, &a).map_err(|e| e.to_string());
    if !conv(&t, &t)? {
        return Err(format!("not reflexive: {}", show(&t)));
    }
    let nf = normalize(&t, DEFAULT_FUEL).map_err(|e| e.to_string())?;
    if !conv(&t, &nf)? || !conv(&nf, &t)? {
        return Err(format!("not convertible to its normal form: {}", show(&t)));
    }
    // a second term at the same type, when the generator produced one
    if check(&env, &ctx, &u, &a).is_ok() && conv(&t, &u)? != conv(&u, &t)? {
        return Err(format!("not symmetric: {} and {}", show(&t), show(&u)));
    }
    Ok(())
}

/// Closed propositions built from precision between generated terms.
pub fn prop_case() -> impl Strategy<Value = Tm> {
    any::<u64>().prop_map(|seed| {
        let mut r = rng(seed);
        gen_prop(&mut r, 2)
    })
}

fn gen_prop(r: &mut ChaCha8Rng, depth: u32) -> Tm {
    use rand::Rng;
    let mut g = gen::Gen::new(r);
    let pick = g.rng.random_range(0..if depth == 0 { 3 } else { 7 });
    match pick {
        0 => bot(),
        1 => {
            let a = g.ty(1);
            let b = g.ty(1);
            ty_prec(0, a.tm(), b.tm())
        }
        2 => {
            let a = g.ty(0);
            let x = g.term(&a, 2);
            let y = g.term(&a, 2);
            tm_prec(a.tm(), a.tm(), x, y)
        }
        3 => and(gen_prop(r, depth - 1), gen_prop(r, depth - 1)),
        4 => imp(gen_prop(r, depth - 1), gen_prop(r, depth - 1)),
        5 => {
            let a = g.ty(0);
            all("x", a.tm(), shift(&gen_prop(r, depth - 1), 0, 1))
        }
        _ => box_p_prop(gen_prop(r, depth - 1)),
    }
}

/// `Box P <=[0] Box P`, a proposition about boxed propositions.
fn box_p_prop(q: Tm) -> Tm {
    ty_prec(0, box_p(q.clone()), box_p(q))
}

/// Two hypotheses of the same proposition are convertible.
pub fn prop_irrelevance(prop_t: Tm) -> Result<(), String> {
    let env = Env::new();
    let mut ctx = Context::new();
    let s = infer(&env, &ctx, &prop_t).map_err(|e| format!("{}: {e}", show(&prop_t)))?;
    if normalize(&s, DEFAULT_FUEL).map_err(|e| e.to_string())? != prop() {
        return Err(format!("{} is not a proposition", show(&prop_t)));
    }
    ctx.push(Name::new("p"), prop_t.clone());
    ctx.push(Name::new("q"), shift(&prop_t, 0, 1));
    let at = shift(&prop_t, 0, 2);
    let ok = convertible(&env, &ctx, &var(1), &var(0), &at).map_err(|e| e.to_string())?;
    if !ok {
        return Err(format!("proofs of {} are not convertible", show(&prop_t)));
    }
    Ok(())
}

// ------------------------------------------------------------ the decider

/// Closed level-0 types from the generator, sometimes with exceptions.
pub fn type_case() -> impl Strategy<Value = Tm> {
    any::<u64>().prop_map(|seed| {
        use rand::Rng;
        let mut r = rng(seed);
        match r.random_range(0..8) {
            0 => err(univ(0)),
            1 => unk_univ(0),
            _ => gen::Gen::new(&mut r).ty(2).tm(),
        }
    })
}

fn holds_replayed(r: &grip_core::precision::PrecResult) -> Result<bool, String> {
    use grip_core::precision::PrecResult;
    match r {
        PrecResult::Holds(w) => {
            w.replay(&Env::new()).map_err(|e| format!("witness for {} rejected: {e}", show(&w.goal)))?;
            Ok(true)
        }
        _ => Ok(false),
    }
}

fn ty_holds(a: &Tm, b: &Tm) -> Result<bool, String> {
    let r = grip_core::precision::decide_type_prec(a, b, 0).map_err(|e| e.to_string())?;
    holds_replayed(&r)
}

/// Types without the unknown type at negative positions are self-precise.
fn arrow_free_of_unk_domain(t: &Tm) -> bool {
    use grip_core::Term::*;
    match &**t {
        Pi(_, a, b) => !grip_core::eval::is_unk_type(a) && arrow_free_of_unk_domain(a) && arrow_free_of_unk_domain(b),
        _ => true,
    }
}

pub fn prop_type_prec_reflexive(a: Tm) -> Result<(), String> {
    if arrow_free_of_unk_domain(&a) && !ty_holds(&a, &a)? {
        return Err(format!("{} is not self-precise", show(&a)));
    }
    Ok(())
}

pub fn prop_type_prec_transitive((a, b, c): (Tm, Tm, Tm)) -> Result<(), String> {
    if ty_holds(&a, &b)? && ty_holds(&b, &c)? && !ty_holds(&a, &c)? {
        return Err(format!("{} <= {} <= {} but not the composite", show(&a), show(&b), show(&c)));
    }
    Ok(())
}

/// `?` bounds every first-order type, and `err` is below every type that
/// is self-precise and bounded.
pub fn prop_type_prec_bounds(a: Tm) -> Result<(), String> {
    let first_order = !matches!(&*normalize(&a, DEFAULT_FUEL).map_err(|e| e.to_string())?, grip_core::Term::Pi(..));
    let bounded = ty_holds(&a, &unk_univ(0))?;
    if first_order && !bounded {
        return Err(format!("{} is not below ?", show(&a)));
    }
    if bounded && ty_holds(&a, &a)? && !ty_holds(&err(univ(0)), &a)? {
        return Err(format!("err is not below {}", show(&a)));
    }
    Ok(())
}

/// Related values `lo <= hi` at a first-order type.
pub fn related_case() -> impl Strategy<Value = (Ty, Tm, Tm)> {
    any::<u64>().prop_map(|seed| {
        use rand::Rng;
        let mut r = rng(seed);
        let ty = [Ty::Nat, Ty::Bool, Ty::Unit, Ty::ListNat][r.random_range(0..4)].clone();
        let (lo, hi) = gen::related_values(&mut r, &ty, 3);
        (ty, lo, hi)
    })
}

fn tm_verdict(a: &Tm, x: &Tm, y: &Tm) -> Result<grip_core::precision::PrecResult, String> {
    grip_core::precision::decide_term_prec(x, y, a, a).map_err(|e| e.to_string())
}

pub fn prop_term_prec_bounds((ty, lo, hi): (Ty, Tm, Tm)) -> Result<(), String> {
    let a = ty.tm();
    for v in [&lo, &hi] {
        if !holds_replayed(&tm_verdict(&a, &err(a.clone()), v)?)? {
            return Err(format!("err is not below {}", show(v)));
        }
        if !holds_replayed(&tm_verdict(&a, v, &unk(a.clone()))?)? {
            return Err(format!("{} is not below ?", show(v)));
        }
        if !holds_replayed(&tm_verdict(&a, v, v)?)? {
            return Err(format!("{} is not self-precise", show(v)));
        }
    }
    if !holds_replayed(&tm_verdict(&a, &lo, &hi)?)? {
        return Err(format!("{} <= {} was not derived", show(&lo), show(&hi)));
    }
    Ok(())
}

/// The decider and the model agree on every pair drawn from two related
/// chains, in both directions.
pub fn prop_decider_matches_model(((ty, lo, hi), (_, lo2, hi2)): ((Ty, Tm, Tm), (Ty, Tm, Tm))) -> Result<(), String> {
    use grip_core::oracle::{decode_code, decode_val, Model};
    let m = Model::default();
    let a = ty.tm();
    let code = decode_code(&a).ok_or("no code")?;
    let vals = [lo, hi, lo2, hi2];
    for x in &vals {
        for y in &vals {
            // the second chain may live at another type
            if check(&Env::new(), &Context::new(), y, &a).is_err() || check(&Env::new(), &Context::new(), x, &a).is_err() {
                continue;
            }
            let r = tm_verdict(&a, x, y)?;
            let (Some(vx), Some(vy)) = (decode_val(&m, &code, x), decode_val(&m, &code, y)) else {
                continue;
            };
            let model = m.prec(&code, &vx, &vy).map_err(|e| e.to_string())?;
            let agrees = match r.verdict() {
                "holds" => model,
                "fails" => !model,
                _ => true,
            };
            if !agrees {
                return Err(format!("{} <= {}: decider {}, model {model}", show(x), show(y), r.verdict()));
            }
        }
    }
    Ok(())
}

pub fn prop_type_decider_matches_model((a, b): (Tm, Tm)) -> Result<(), String> {
    use grip_core::oracle::{decode_code, Model};
    let m = Model::default();
    let (Some(ca), Some(cb)) = (decode_code(&a), decode_code(&b)) else {
        return Ok(());
    };
    let r = grip_core::precision::decide_type_prec(&a, &b, 0).map_err(|e| e.to_string())?;
    let model = m.ty_prec(&ca, &cb).map_err(|e| e.to_string())?;
    let agrees = match r.verdict() {
        "holds" => model,
        "fails" => !model,
        _ => true,
    };
    if !agrees {
        return Err(format!("{} <= {}: decider {}, model {model}", show(&a), show(&b), r.verdict()));
    }
    Ok(())
}

// ------------------------------------------------------ reduction and conversion

pub fn prop_step_deterministic((t, _, _): (Tm, Ty, u64)) -> Result<(), String> {
    let mut cur = t;
    for _ in 0..40 {
        let (r1, r2) = (step(&cur), step(&cur));
        match (r1, r2) {
            (StepResult::Stepped(a, x), StepResult::Stepped(b, y)) if a == b && x == y => cur = x,
            (StepResult::Stuck(_), StepResult::Stuck(_)) => return Ok(()),
            _ => return Err(format!("step is not deterministic on {}", show(&cur))),
        }
    }
    Ok(())
}

/// Reducing at a random redex gives a term convertible with both the
/// original and its normal form, and conversion composes.
pub fn prop_conversion_transitive((t, ty, seed): (Tm, Ty, u64)) -> Result<(), String> {
    use rand::Rng;
    let env = Env::new();
    let ctx = Context::new();
    let a = ty.tm();
    let mut r = rng(seed);
    let mut mid = t.clone();
    for _ in 0..r.random_range(1..6) {
        let paths = grip_core::eval::redex_paths(&mid);
        if paths.is_empty() {
            break;
        }
        let path = &paths[r.random_range(0..paths.len())];
        mid = grip_core::eval::step_at(&mid, path).ok_or("no redex at path")?.1;
    }
    let nf = normalize(&t, DEFAULT_FUEL).map_err(|e| e.to_string())?;
    let conv = |x: &Tm, y: &Tm| convertible(&env, &ctx, x, y, &a).map_err(|e| e.to_string());
    if conv(&t, &mid)? && conv(&mid, &nf)? && !conv(&t, &nf)? {
        return Err(format!("{} ~ {} ~ {} but not transitively", show(&t), show(&mid), show(&nf)));
    }
    if !conv(&t, &mid)? {
        return Err(format!("{} is not convertible with its reduct {}", show(&t), show(&mid)));
    }
    Ok(())
}

/// Generated terms that the monotone fragment accepts.
pub fn grip_up_case() -> impl Strategy<Value = (Tm, Ty, u64)> {
    typed_case().prop_filter("outside the monotone fragment", |(t, _, _)| {
        grip_core::grip_up::check_grip_up(&Env::new(), &Context::new(), t).is_ok()
    })
}

/// `t ~> t'` in the monotone fragment implies `<t> ~ <t'>` at `<A>`.
pub fn prop_simulation((t, _, _): (Tm, Ty, u64)) -> Result<(), String> {
    use grip_core::grip_up::{check_grip_up, shift_translate};
    let env = Env::new();
    let ctx = Context::new();
    let j = check_grip_up(&env, &ctx, &t).map_err(|e| format!("{}: {e}", show(&t)))?;
    let ta = shift_translate(&env, &ctx, &j.ty).map_err(|e| e.to_string())?;
    let mut cur = t;
    for _ in 0..10 {
        let StepResult::Stepped(rule, next) = step(&cur) else {
            break;
        };
        let lhs = shift_translate(&env, &ctx, &cur).map_err(|e| e.to_string())?;
        let rhs = shift_translate(&env, &ctx, &next).map_err(|e| format!("{rule} gave {}: {e}", show(&next)))?;
        if !convertible(&env, &ctx, &lhs, &rhs, &ta).map_err(|e| e.to_string())? {
            return Err(format!("{rule}: <{}> and <{}> are not convertible", show(&cur), show(&next)));
        }
        cur = next;
    }
    Ok(())
}
