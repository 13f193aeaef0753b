//! Arbitrary well-scoped (not necessarily well-typed) terms.

use std::sync::Arc;

use grip_core::syntax::build::*;
use grip_core::syntax::{Ind, Level, Sort, Term};
use grip_core::Tm;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Tm> {
    prop_oneof![
        (0usize..4).prop_map(var),
        (0u32..3).prop_map(univ),
        Just(prop()),
        Just(nat()),
        Just(bool_()),
        Just(unit()),
        Just(empty()),
        Just(tru()),
        Just(fls()),
        Just(tt()),
        Just(bot()),
        (0u64..5).prop_map(num),
        Just(konst("congZero", vec![])),
    ]
}

fn catch_of(ind: Ind, prop: bool, kids: Vec<Tm>) -> Tm {
    let mut it = kids.into_iter().cycle();
    let mut next = || it.next().unwrap();
    let param = ind.has_param().then(&mut next);
    let motive = lam("x", next(), next());
    let branches = (0..ind.arity()).map(|_| next()).collect();
    catch(ind, prop, param, motive, branches, next(), next(), next())
}

/// Raw terms; variables are brought into scope by [`close`].
pub fn raw_term() -> impl Strategy<Value = Tm> {
    leaf().prop_recursive(5, 64, 4, |inner| {
        let two = (inner.clone(), inner.clone());
        let three = (inner.clone(), inner.clone(), inner.clone());
        prop_oneof![
            two.clone().prop_map(|(a, b)| pi("x", a, b)),
            two.clone().prop_map(|(a, b)| lam("x", a, b)),
            two.clone().prop_map(|(a, b)| app(a, b)),
            inner.clone().prop_map(list),
            inner.clone().prop_map(nil),
            three.clone().prop_map(|(a, b, c)| cons(a, b, c)),
            inner.clone().prop_map(succ),
            two.clone().prop_map(|(a, b)| sigma("x", a, b)),
            three.clone().prop_map(|(a, b, c)| pair(a, b, c)),
            inner.clone().prop_map(unk),
            inner.clone().prop_map(err),
            three.clone().prop_map(|(a, b, c)| cast(a, b, c)),
            inner.clone().prop_map(cum),
            inner.clone().prop_map(up),
            inner.clone().prop_map(down),
            two.clone().prop_map(|(a, b)| exfalso(a, b)),
            two.clone().prop_map(|(a, b)| all("x", a, b)),
            two.clone().prop_map(|(a, b)| and(a, b)),
            two.clone().prop_map(|(a, b)| pair_p(a, b)),
            inner.clone().prop_map(fst_p),
            inner.clone().prop_map(snd_p),
            inner.clone().prop_map(box_p),
            two.clone().prop_map(|(a, b)| box_intro(a, b)),
            (0u32..3, inner.clone(), inner.clone()).prop_map(|(i, a, b)| ty_prec(i, a, b)),
            (three.clone(), inner.clone()).prop_map(|((a, b, c), d)| tm_prec(a, b, c, d)),
            (0usize..7, any::<bool>(), prop::collection::vec(inner.clone(), 3))
                .prop_map(|(k, p, kids)| catch_of(Ind::ALL[k], p, kids)),
            inner.prop_map(|a| konst("reflErr0", vec![a])),
        ]
    })
}

/// Rewrite out-of-scope indices so that the term is closed.
pub fn close(t: &Tm) -> Tm {
    fn go(t: &Tm, depth: usize) -> Tm {
        match &**t {
            Term::Var(k) if *k >= depth => {
                if depth == 0 {
                    zero()
                } else {
                    var(k % depth)
                }
            }
            _ => Arc::new(
                t.map_children(&mut |c: &Tm, k: usize| -> Result<Tm, ()> { Ok(go(c, depth + k)) })
                    .unwrap(),
            ),
        }
    }
    go(t, 0)
}

pub fn closed_term() -> impl Strategy<Value = Tm> {
    raw_term().prop_map(|t| close(&t))
}

/// Terms with free variables below `n`.
pub fn open_term(n: usize) -> impl Strategy<Value = Tm> {
    raw_term().prop_map(move |t| {
        fn go(t: &Tm, depth: usize, n: usize) -> Tm {
            match &**t {
                Term::Var(k) if *k >= depth + n => var(depth + k % n.max(1)),
                _ => Arc::new(
                    t.map_children(&mut |c: &Tm, k: usize| -> Result<Tm, ()> { Ok(go(c, depth + k, n)) })
                        .unwrap(),
                ),
            }
        }
        go(&t, 0, n)
    })
}

/// A named-variable mirror of [`Term`] restricted to the binding
/// structure, used as a reference for substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Named {
    Var(String),
    Node(String, Vec<Named>),
    Bind(String, String, Vec<Named>, Box<Named>),
}

fn label(t: &Term) -> String {
    match t {
        Term::Sort(Sort::Univ(Level(i))) => format!("Type{i}"),
        Term::TyPrec(Level(i), ..) => format!("TyPrec{i}"),
        Term::Const(n, _) => format!("Const{n}"),
        Term::Catch { ind, prop, param, .. } => format!("{ind:?}{prop}{}", param.is_some()),
        other => {
            let s = format!("{other:?}");
            s.split(['(', ' ', '{']).next().unwrap().to_string()
        }
    }
}

/// Convert to named form; `env` holds the names of the enclosing binders,
/// innermost last.
pub fn to_named(t: &Tm, env: &mut Vec<String>, fresh: &mut usize) -> Named {
    if let Term::Var(k) = &**t {
        return Named::Var(env[env.len() - 1 - k].clone());
    }
    let kids = t.children();
    if let Some(pos) = kids.iter().position(|(_, k)| *k > 0) {
        // one binder: the child at `pos` is under it
        let x = format!("v{fresh}");
        *fresh += 1;
        let mut outside = vec![];
        for (i, (c, _)) in kids.iter().enumerate() {
            if i != pos {
                outside.push(to_named(c, env, fresh));
            }
        }
        env.push(x.clone());
        let body = to_named(kids[pos].0, env, fresh);
        env.pop();
        return Named::Bind(label(t), x, outside, Box::new(body));
    }
    Named::Node(label(t), kids.iter().map(|(c, _)| to_named(c, env, fresh)).collect())
}

fn free_in(n: &Named, x: &str) -> bool {
    match n {
        Named::Var(y) => x == y,
        Named::Node(_, ks) => ks.iter().any(|k| free_in(k, x)),
        Named::Bind(_, y, ks, body) => ks.iter().any(|k| free_in(k, x)) || (y != x && free_in(body, x)),
    }
}

fn rename(n: &Named, from: &str, to: &str) -> Named {
    named_subst(n, from, &Named::Var(to.to_string()), &mut 0)
}

/// Capture-avoiding substitution on named terms.
pub fn named_subst(n: &Named, x: &str, u: &Named, fresh: &mut usize) -> Named {
    match n {
        Named::Var(y) if y == x => u.clone(),
        Named::Var(_) => n.clone(),
        Named::Node(l, ks) => Named::Node(l.clone(), ks.iter().map(|k| named_subst(k, x, u, fresh)).collect()),
        Named::Bind(l, y, ks, body) => {
            let ks2 = ks.iter().map(|k| named_subst(k, x, u, fresh)).collect();
            if y == x {
                return Named::Bind(l.clone(), y.clone(), ks2, body.clone());
            }
            if free_in(u, y) {
                let z = format!("w{fresh}");
                *fresh += 1;
                let body2 = rename(body, y, &z);
                return Named::Bind(l.clone(), z, ks2, Box::new(named_subst(&body2, x, u, fresh)));
            }
            Named::Bind(l.clone(), y.clone(), ks2, Box::new(named_subst(body, x, u, fresh)))
        }
    }
}

/// Alpha-equivalence of named terms.
pub fn alpha_eq(a: &Named, b: &Named) -> bool {
    fn go(a: &Named, b: &Named, env: &mut Vec<(String, String)>) -> bool {
        match (a, b) {
            (Named::Var(x), Named::Var(y)) => {
                for (l, r) in env.iter().rev() {
                    if l == x || r == y {
                        return l == x && r == y;
                    }
                }
                x == y
            }
            (Named::Node(l1, k1), Named::Node(l2, k2)) => {
                l1 == l2 && k1.len() == k2.len() && k1.iter().zip(k2).all(|(p, q)| go(p, q, env))
            }
            (Named::Bind(l1, x, k1, b1), Named::Bind(l2, y, k2, b2)) => {
                if l1 != l2 || k1.len() != k2.len() || !k1.iter().zip(k2).all(|(p, q)| go(p, q, env)) {
                    return false;
                }
                env.push((x.clone(), y.clone()));
                let r = go(b1, b2, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut vec![])
}
