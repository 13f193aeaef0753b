//! Random well-typed closed terms of first-order types, with casts,
//! exceptions, catches and redexes mixed in.

use grip_core::syntax::build::*;
use grip_core::Tm;
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Nat,
    Bool,
    Unit,
    ListNat,
    Unk,
    /// `Sig (_ : Nat) Bool`
    Pair,
    Arrow(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn tm(&self) -> Tm {
        match self {
            Ty::Nat => nat(),
            Ty::Bool => bool_(),
            Ty::Unit => unit(),
            Ty::ListNat => list(nat()),
            Ty::Unk => unk_univ(0),
            Ty::Pair => sigma("_", nat(), bool_()),
            Ty::Arrow(a, b) => arrow(a.tm(), b.tm()),
        }
    }

    fn arrow(a: Ty, b: Ty) -> Ty {
        Ty::Arrow(Box::new(a), Box::new(b))
    }
}

pub fn base_types() -> Vec<Ty> {
    vec![Ty::Nat, Ty::Bool, Ty::Unit, Ty::ListNat, Ty::Unk, Ty::Pair]
}

pub struct Gen<'r, R: Rng> {
    pub rng: &'r mut R,
    /// Types of the bound variables, innermost last.
    vars: Vec<Ty>,
}

impl<'r, R: Rng> Gen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        Gen { rng, vars: vec![] }
    }

    pub fn ty(&mut self, depth: u32) -> Ty {
        let bases = base_types();
        if depth == 0 || self.rng.random_bool(0.7) {
            bases[self.rng.random_range(0..bases.len())].clone()
        } else {
            Ty::arrow(self.ty(0), self.ty(depth - 1))
        }
    }

    fn var_of(&mut self, ty: &Ty) -> Option<Tm> {
        let hits: Vec<usize> = (0..self.vars.len()).filter(|&k| self.vars[k] == *ty).collect();
        if hits.is_empty() {
            return None;
        }
        let k = hits[self.rng.random_range(0..hits.len())];
        Some(var(self.vars.len() - 1 - k))
    }

    fn under<T>(&mut self, tys: &[Ty], f: impl FnOnce(&mut Self) -> T) -> T {
        let n = self.vars.len();
        self.vars.extend(tys.iter().cloned());
        let r = f(self);
        self.vars.truncate(n);
        r
    }

    fn leaf(&mut self, ty: &Ty) -> Tm {
        if self.rng.random_bool(0.3) {
            if let Some(v) = self.var_of(ty) {
                return v;
            }
        }
        match self.rng.random_range(0..10) {
            0 => return err(ty.tm()),
            1 => return unk(ty.tm()),
            _ => {}
        }
        match ty {
            Ty::Nat => num(self.rng.random_range(0..4)),
            Ty::Bool => {
                if self.rng.random() {
                    tru()
                } else {
                    fls()
                }
            }
            Ty::Unit => tt(),
            Ty::ListNat => {
                let n = self.rng.random_range(0..3);
                (0..n).fold(nil(nat()), |l, _| {
                    let h = self.leaf(&Ty::Nat);
                    cons(nat(), h, l)
                })
            }
            Ty::Unk => {
                let g = [Ty::Nat, Ty::Bool, Ty::ListNat][self.rng.random_range(0..3)].clone();
                let v = self.leaf(&g);
                cast(g.tm(), unk_univ(0), v)
            }
            Ty::Pair => {
                let a = self.leaf(&Ty::Nat);
                let b = self.leaf(&Ty::Bool);
                pair(ty.tm(), a, b)
            }
            Ty::Arrow(a, b) => {
                let a = (**a).clone();
                let b = (**b).clone();
                let body = self.under(&[a.clone()], |g| g.leaf(&b));
                lam("x", a.tm(), body)
            }
        }
    }

    /// A closed (relative to the current binders) term of type `ty`.
    pub fn term(&mut self, ty: &Ty, depth: u32) -> Tm {
        if depth == 0 || self.rng.random_bool(0.25) {
            return self.leaf(ty);
        }
        let d = depth - 1;
        match self.rng.random_range(0..9) {
            0 => {
                let a = self.ty(0);
                let arg = self.term(&a, d);
                let body = self.under(&[a.clone()], |g| g.term(ty, d));
                app(lam("y", a.tm(), body), arg)
            }
            1 => {
                let a = self.ty(0);
                let f = self.term(&Ty::arrow(a.clone(), ty.clone()), d);
                let x = self.term(&a, d);
                app(f, x)
            }
            2 => {
                let a = self.ty(0);
                let x = self.term(&a, d);
                cast(a.tm(), ty.tm(), x)
            }
            3 => {
                let t = self.term(ty, d);
                let f = self.term(ty, d);
                let (e, u) = self.exc_branches(ty, d);
                let s = self.term(&Ty::Bool, d);
                catch(
                    grip_core::syntax::Ind::Bool,
                    false,
                    None,
                    lam("_", bool_(), ty.tm()),
                    vec![t, f],
                    e,
                    u,
                    s,
                )
            }
            4 => {
                let z = self.term(ty, d);
                let s = self.under(&[Ty::Nat, ty.clone()], |g| g.term(ty, d));
                let (e, u) = self.exc_branches(ty, d);
                let n = self.term(&Ty::Nat, d);
                catch(
                    grip_core::syntax::Ind::Nat,
                    false,
                    None,
                    lam("_", nat(), ty.tm()),
                    vec![z, lam("k", nat(), lam("r", ty.tm(), s))],
                    e,
                    u,
                    n,
                )
            }
            5 => {
                let z = self.term(ty, d);
                let c = self.under(&[Ty::Nat, Ty::ListNat, ty.clone()], |g| g.term(ty, d));
                let (e, u) = self.exc_branches(ty, d);
                let l = self.term(&Ty::ListNat, d);
                catch(
                    grip_core::syntax::Ind::List,
                    false,
                    Some(nat()),
                    lam("_", list(nat()), ty.tm()),
                    vec![z, lam("a", nat(), lam("t", list(nat()), lam("r", ty.tm(), c)))],
                    e,
                    u,
                    l,
                )
            }
            _ => self.intro(ty, d),
        }
    }

    fn exc_branches(&mut self, ty: &Ty, d: u32) -> (Tm, Tm) {
        if self.rng.random_bool(0.6) {
            (err(ty.tm()), unk(ty.tm()))
        } else {
            (self.term(ty, d), self.term(ty, d))
        }
    }

    fn intro(&mut self, ty: &Ty, d: u32) -> Tm {
        match ty {
            Ty::Nat => succ(self.term(ty, d)),
            Ty::ListNat => {
                let h = self.term(&Ty::Nat, d);
                let t = self.term(ty, d);
                cons(nat(), h, t)
            }
            Ty::Pair => {
                let a = self.term(&Ty::Nat, d);
                let b = self.term(&Ty::Bool, d);
                pair(ty.tm(), a, b)
            }
            Ty::Unk => {
                let g = [Ty::Nat, Ty::Bool, Ty::ListNat, Ty::Pair][self.rng.random_range(0..4)].clone();
                let v = self.term(&g, d);
                cast(g.tm(), unk_univ(0), v)
            }
            Ty::Arrow(a, b) => {
                let a = (**a).clone();
                let b = (**b).clone();
                let body = self.under(&[a.clone()], |g| g.term(&b, d));
                lam("x", a.tm(), body)
            }
            Ty::Bool | Ty::Unit => self.leaf(ty),
        }
    }
}

/// A closed term and its type.
pub fn typed_term<R: Rng>(rng: &mut R, depth: u32) -> (Tm, Ty) {
    let mut g = Gen::new(rng);
    let ty = g.ty(1);
    let t = g.term(&ty, depth);
    (t, ty)
}

/// A closed value of a first-order type together with a less precise and
/// a more precise variant: `lo ⊑ v ⊑ hi`.
pub fn related_values<R: Rng>(rng: &mut R, ty: &Ty, size: u32) -> (Tm, Tm) {
    let v = canonical(rng, ty, size);
    (degrade(rng, ty, &v, true), degrade(rng, ty, &v, false))
}

#[derive(Clone)]
enum Val {
    Nat(u64),
    Bool(bool),
    Unit,
    List(Vec<Val>),
}

fn canonical<R: Rng>(rng: &mut R, ty: &Ty, size: u32) -> Val {
    match ty {
        Ty::Nat => Val::Nat(rng.random_range(0..=size as u64)),
        Ty::Bool => Val::Bool(rng.random()),
        Ty::Unit => Val::Unit,
        Ty::ListNat => {
            let n = rng.random_range(0..=size);
            Val::List((0..n).map(|_| canonical(rng, &Ty::Nat, size)).collect())
        }
        _ => panic!("no canonical values at {ty:?}"),
    }
}

/// Replace some subvalues by `err` (when `down`) or `?`.
fn degrade<R: Rng>(rng: &mut R, ty: &Ty, v: &Val, down: bool) -> Tm {
    if rng.random_bool(0.2) {
        return if down { err(ty.tm()) } else { unk(ty.tm()) };
    }
    match v {
        Val::Nat(n) => num(*n),
        Val::Bool(true) => tru(),
        Val::Bool(false) => fls(),
        Val::Unit => tt(),
        Val::List(items) => {
            let exc = if down { err(list(nat())) } else { unk(list(nat())) };
            let mut out = if rng.random_bool(0.1) { exc } else { nil(nat()) };
            for h in items.iter().rev() {
                let h = degrade(rng, &Ty::Nat, h, down);
                out = cons(nat(), h, out);
            }
            out
        }
    }
}
