//! One hand-written redex per named reduction rule.

use grip_core::eval::Rule;

pub struct Golden {
    pub rule: Rule,
    pub redex: &'static str,
    /// The contractum, when short enough to state.
    pub contractum: Option<&'static str>,
}

const fn g(rule: Rule, redex: &'static str, contractum: Option<&'static str>) -> Golden {
    Golden { rule, redex, contractum }
}

pub fn core() -> Vec<Golden> {
    use Rule::*;
    vec![
        g(PiBeta, "(fun (x : Nat) => S x) 0", Some("1")),
        g(
            CatchNil,
            "catch_list[Nat] (fun (_ : List Nat) => Nat) 0 (fun (a : Nat) (t : List Nat) (r : Nat) => S r) err[Nat] ?[Nat] nil[Nat]",
            Some("0"),
        ),
        g(
            CatchCons,
            "catch_list[Nat] (fun (_ : List Nat) => Nat) 0 (fun (a : Nat) (t : List Nat) (r : Nat) => S r) err[Nat] ?[Nat] (cons[Nat] 5 nil[Nat])",
            Some("(fun (a : Nat) (t : List Nat) (r : Nat) => S r) 5 nil[Nat] (catch_list[Nat] (fun (_ : List Nat) => Nat) 0 (fun (a : Nat) (t : List Nat) (r : Nat) => S r) err[Nat] ?[Nat] nil[Nat])"),
        ),
        g(PiUnk, "?[Nat -> Nat]", Some("fun (x : Nat) => ?[Nat]")),
        g(PiErr, "err[Nat -> Nat]", Some("fun (x : Nat) => err[Nat]")),
        g(CumUnk, "?[iota Nat]", Some("up ?[Nat]")),
        g(CumErr, "err[iota Nat]", Some("up err[Nat]")),
        g(
            CatchUnk,
            "catch_nat (fun (_ : Nat) => Nat) 0 (fun (k : Nat) (r : Nat) => r) 3 7 ?[Nat]",
            Some("7"),
        ),
        g(
            CatchErr,
            "catch_nat (fun (_ : Nat) => Nat) 0 (fun (k : Nat) (r : Nat) => r) 3 7 err[Nat]",
            Some("3"),
        ),
        g(LCastUnk, "cast (List Nat) (List Bool) ?[List Nat]", Some("?[List Bool]")),
        g(LCastErr, "cast (List Nat) (List Bool) err[List Nat]", Some("err[List Bool]")),
        g(DownUnk, "cast ?[Type 0] Nat ?[?[Type 0]]", Some("?[Nat]")),
        g(DownErr, "cast ?[Type 0] Nat err[?[Type 0]]", Some("err[Nat]")),
        g(
            PiPi,
            "cast (Nat -> Nat) (Nat -> Bool) (fun (x : Nat) => x)",
            Some("fun (y : Nat) => cast Nat Bool ((fun (x : Nat) => x) (cast Nat Nat y))"),
        ),
        g(CumCum, "cast (iota Nat) (iota Bool) (up 0)", Some("up (cast Nat Bool 0)")),
        g(UnivUniv, "cast (Type 0) (Type 0) Nat", Some("Nat")),
        g(LLNil, "cast (List Nat) (List Bool) nil[Nat]", Some("nil[Bool]")),
        g(
            LLCons,
            "cast (List Nat) (List Bool) (cons[Nat] 0 nil[Nat])",
            Some("cons[Bool] (cast Nat Bool 0) (cast (List Nat) (List Bool) nil[Nat])"),
        ),
        g(HeadErr, "cast Bool Nat true", Some("err[Nat]")),
        g(DomErr, "cast err[Type 0] Nat ?[err[Type 0]]", Some("err[Nat]")),
        g(CodErr, "cast Nat err[Type 0] 3", Some("err[err[Type 0]]")),
        g(CastPiErr, "cast (Nat -> Nat) ?[Type 0] (fun (x : Nat) => x)", Some("err[?[Type 0]]")),
        g(UpDown, "cast ?[Type 0] Bool (cast Nat ?[Type 0] 3)", Some("cast Nat Bool 3")),
        g(
            LDec,
            "cast (List Nat) ?[Type 0] (cons[Nat] 1 nil[Nat])",
            Some("cast (List ?[Type 0]) ?[Type 0] (cast (List Nat) (List ?[Type 0]) (cons[Nat] 1 nil[Nat]))"),
        ),
        g(BoxBox, "cast (Box Bot) (Box Bot) ?[Box Bot]", Some("err[Box Bot]")),
    ]
}

pub fn precision() -> Vec<Golden> {
    use Rule::*;
    vec![
        g(CumCongTy, "iota Nat <=[1] iota Bool", Some("Nat <=[0] Bool")),
        g(LCongTy, "List Nat <=[0] List Bool", Some("Nat <=[0] Bool")),
        g(PiCong, "(Nat -> Nat) <=[0] (Nat -> Bool)", None),
        g(
            UnivPrec,
            "Nat :Type 0 <= Bool :Type 0",
            Some("Nat <=[0] Bool /\\ Bool <=[0] ?[Type 0]"),
        ),
        g(
            PiPrec,
            "(fun (x : Nat) => x) :(Nat -> Nat) <= (fun (x : Nat) => 0) :(Nat -> Nat)",
            None,
        ),
        g(
            CumPrec,
            "up 0 :iota Nat <= up 1 :iota Nat",
            Some("down (up 0) :Nat <= down (up 1) :Nat"),
        ),
        g(
            LPrecCons,
            "cons[Nat] 0 nil[Nat] :List Nat <= cons[Nat] 1 nil[Nat] :List Nat",
            Some("0 :Nat <= 1 :Nat /\\ nil[Nat] :List Nat <= nil[Nat] :List Nat"),
        ),
        g(
            NoConfNilCons,
            "nil[Nat] :List Nat <= cons[Nat] 0 nil[Nat] :List Nat",
            Some("Bot"),
        ),
        g(
            NoConfConsNil,
            "cons[Nat] 0 nil[Nat] :List Nat <= nil[Nat] :List Nat",
            Some("Bot"),
        ),
        g(BoxCong, "Box Bot <=[0] Box Bot", Some("Bot :Prop <= Bot :Prop")),
    ]
}

/// Rules for the inductives beyond lists, and the other additions.
pub fn extensions() -> Vec<Golden> {
    use Rule::*;
    vec![
        g(CatchZero, "catch_nat (fun (_ : Nat) => Nat) 4 (fun (k : Nat) (r : Nat) => r) 3 7 0", Some("4")),
        g(CatchTrue, "catch_bool (fun (_ : Bool) => Nat) 1 2 3 4 true", Some("1")),
        g(CatchFalse, "catch_bool (fun (_ : Bool) => Nat) 1 2 3 4 false", Some("2")),
        g(CatchTt, "catch_unit (fun (_ : Unit) => Nat) 1 3 4 tt", Some("1")),
        g(NatNatZero, "cast Nat Nat 0", Some("0")),
        g(NatNatSucc, "cast Nat Nat 2", Some("S (cast Nat Nat 1)")),
        g(BoolBool, "cast Bool Bool true", Some("true")),
        g(UnitUnit, "cast Unit Unit tt", Some("tt")),
        g(IndCastUnk, "cast Nat Nat ?[Nat]", Some("?[Nat]")),
        g(IndCastErr, "cast Bool Bool err[Bool]", Some("err[Bool]")),
        g(UnkUnk, "cast ?[Type 0] ?[Type 0] ?[?[Type 0]]", Some("?[?[Type 0]]")),
        g(BoxGermErr, "cast (Box Bot) ?[Type 0] ?[Box Bot]", Some("err[?[Type 0]]")),
        g(CoeRetr, "down (up 0)", Some("0")),
        g(NatPrecSucc, "1 :Nat <= 2 :Nat", Some("0 :Nat <= 1 :Nat")),
        g(NoConfZeroSucc, "0 :Nat <= 1 :Nat", Some("Bot")),
        g(NoConfSuccZero, "1 :Nat <= 0 :Nat", Some("Bot")),
        g(NoConfTrueFalse, "true :Bool <= false :Bool", Some("Bot")),
        g(NoConfFalseTrue, "false :Bool <= true :Bool", Some("Bot")),
        g(
            SigDec,
            "cast (Sig (_ : Nat) Bool) ?[Type 0] ((0 , true)[Sig (_ : Nat) Bool])",
            None,
        ),
        g(SigSig, "cast (Sig (_ : Nat) Bool) (Sig (_ : Nat) Bool) ((0 , true)[Sig (_ : Nat) Bool])", None),
        g(SigCong, "(Sig (_ : Nat) Bool) <=[0] (Sig (_ : Nat) Bool)", None),
        g(
            SigPrecPair,
            "(0 , true)[Sig (_ : Nat) Bool] :(Sig (_ : Nat) Bool) <= (0 , true)[Sig (_ : Nat) Bool] :(Sig (_ : Nat) Bool)",
            Some("0 :Nat <= 0 :Nat /\\ true :Bool <= true :Bool"),
        ),
        g(
            CatchPair,
            "catch_sigma[Sig (_ : Nat) Bool] (fun (_ : Sig (_ : Nat) Bool) => Nat) (fun (n : Nat) (b : Bool) => n) 3 4 ((5 , true)[Sig (_ : Nat) Bool])",
            Some("(fun (n : Nat) (b : Bool) => n) 5 true"),
        ),
        g(CatchSucc, "catch_nat (fun (_ : Nat) => Nat) 4 (fun (k : Nat) (r : Nat) => k) 3 7 1", None),
        g(
            CatchBox,
            "catch_box[Prop <=[0] Prop] (fun (_ : Box (Prop <=[0] Prop)) => Nat) (fun (p : Prop <=[0] Prop) => 1) 3 4 (box[Prop <=[0] Prop] reflProp)",
            Some("(fun (p : Prop <=[0] Prop) => 1) reflProp"),
        ),
    ]
}

/// The redex typechecks and steps at the root by the named rule to the
/// stated contractum, which typechecks at the same type.
pub fn check(g: &Golden) -> Result<(), String> {
    use grip_core::eval::{step, StepResult};
    use grip_core::surface::{parse_term, print};
    use grip_core::typeck::{check, convertible_untyped, infer, Env};
    use grip_core::Context;

    let env = Env::new();
    let ctx = Context::new();
    let parse = |s: &str| parse_term(s).map_err(|ds| format!("{s}: {}", ds[0]));
    let t = parse(g.redex)?;
    let ty = infer(&env, &ctx, &t).map_err(|e| format!("{}: {e}", g.rule))?;
    let after = match step(&t) {
        StepResult::Stepped(rule, after) if rule == g.rule => after,
        StepResult::Stepped(rule, _) => return Err(format!("{}: stepped by {rule}", g.rule)),
        StepResult::Stuck(r) => return Err(format!("{}: stuck ({r:?})", g.rule)),
    };
    if let Some(c) = g.contractum {
        let expected = parse(c)?;
        if after != expected {
            return Err(format!("{}: got {}, expected {c}", g.rule, print(&after)));
        }
    }
    // subject reduction for the step; types of propositions may unfold
    match check(&env, &ctx, &after, &ty) {
        Ok(()) => Ok(()),
        Err(_) if convertible_untyped(&env, &ctx, &t, &after).unwrap_or(false) => Ok(()),
        Err(e) => Err(format!("{}: contractum {} is ill-typed: {e}", g.rule, print(&after))),
    }
}
