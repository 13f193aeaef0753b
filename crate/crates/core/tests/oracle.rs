//! Laws of the enumerated model. The full sweep over every shipped code
//! runs in the acceptance suite; these are the quick ones.

use grip_core::oracle::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn universe_codes_form_preorders() {
    let m = Model::default();
    for c in [Code::Univ, Code::cum(Code::Nat), Code::cum(Code::UnkU(0)), Code::list(Code::UnkU(0))] {
        let r = m.check_partial_preorder(&c).unwrap();
        assert!(r.passed(), "{c}: {:?}", r.violations.first());
        assert!(r.values > 0);
    }
}

#[test]
fn first_order_embeddings_are_ep_pairs() {
    let m = Model::default();
    for (a, b) in [
        (Code::Nat, Code::UnkU(0)),
        (Code::list(Code::Nat), Code::list(Code::UnkU(0))),
        (Code::ErrU(0), Code::Bool),
        (Code::arrow(Code::Bool, Code::ErrU(0)), Code::arrow(Code::Bool, Code::Bool)),
    ] {
        let r = m.check_ep_pair(&a, &b).unwrap();
        assert!(r.passed(), "{a} <= {b}: {:?}", r.violations.first());
        assert!(r.checked() > 0);
    }
}

#[test]
fn every_related_pair_is_related() {
    let m = Model::default();
    for (a, b) in m.related_pairs().unwrap() {
        assert!(m.ty_prec(&a, &b).unwrap(), "{a} <= {b}");
    }
}

#[test]
fn casting_through_the_meet_loses_information() {
    let r = check_beck_chevalley_failure(&Model::default()).unwrap();
    assert_eq!(r.direct, MVal::Nat(5));
    assert_eq!(r.via_meet, MVal::Err);
    assert!(!r.equiprecise);
}

#[test]
fn kernel_casts_agree_with_the_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let r = check_kernel_agreement(&Model::default(), 300, 100_000, &mut rng).unwrap();
    assert!(r.passed(), "{:?}", r.disagreements.first());
    assert_eq!(r.samples, 300);
}

#[test]
fn arrow_types_are_unbounded_at_their_level() {
    let m = Model::default();
    let nn = Code::arrow(Code::Nat, Code::Nat);
    assert!(!m.ty_prec(&nn, &Code::UnkU(0)).unwrap());
    assert!(!m.ty_prec(&Code::ErrU(0), &nn).unwrap());
    assert!(m.ty_prec(&Code::cum(nn.clone()), &Code::UnkU(1)).unwrap());
    assert!(m.ty_prec(&Code::ErrU(1), &Code::cum(nn)).unwrap());
}
