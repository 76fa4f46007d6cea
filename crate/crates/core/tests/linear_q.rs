//! One pair constrained by the position operator itself.

use effcon::constraint_factory::*;
use effcon::reduction_engine::*;
use effcon::symbolic_ring::*;
use effcon::weyl_algebra::parse_operator;

fn labels() -> Labels {
    Labels::numbered(1)
}

fn e(s: &str) -> ScalarExpr {
    parse_expr(s, &labels()).unwrap()
}

fn set(weight: u32, order: u32) -> ConstraintSet {
    let c = parse_operator("qhat(0)", &labels()).unwrap();
    ConstraintSet::from_labels(&c, &hierarchy(&vocabulary(1, (0, Canon::P), 1), weight), order).unwrap()
}

fn policy() -> ElimPolicy {
    ElimPolicy { pairs: vec![0], physical: None }
}

fn system(order: u32, mode: TruncationMode, weight: u32) -> TruncatedSystem {
    let s = set(weight, order);
    TruncatedSystem::build(&s, &ReductionConfig { order, mode, policy: policy() }).unwrap()
}

#[test]
fn momentum_constraint_fixes_covariance() {
    let s = system(2, TruncationMode::Graded, 2);
    let c = s.entry(&Label::parse("C[f=p,n=1]", &labels()).unwrap()).unwrap();
    assert!(c.raw.equals(&e("q*p + G[1,1] - i*hbar/2")));
    assert!(s.weak_reduce(&e("G[1,1]")).unwrap().equals(&e("i*hbar/2")));
    assert!(s.weak_reduce(&e("q")).unwrap().is_zero());
    assert!(s.weak_reduce(&e("G[0,2]")).unwrap().is_zero());
}

#[test]
fn uncertainty_is_saturated() {
    let s = system(2, TruncationMode::Graded, 2);
    let u = check_uncertainty(&s, 0).unwrap();
    assert_eq!(u.class, UncertaintyClass::Saturated, "{}", u.value.to_text(&labels()));
}

#[test]
fn sharp_truncations_are_consistent() {
    // Constraints of weight above N bring in moments the truncation has already removed.
    for n in 0..=5 {
        let s = system(n, TruncationMode::Sharp, n.max(1));
        let r = detect_inconsistency(&s);
        assert!(r.is_consistent() && r.unresolved.is_empty(), "N={n}: {:?}", r.lines(&labels()));
    }
}

#[test]
fn set_is_first_class_and_closed() {
    for n in 2..=3 {
        let s = set(n, n);
        let cfg = ReductionConfig::graded(n, policy());
        assert!(check_first_class(&s, &cfg).unwrap().is_empty());
        let r = close_constraint_set(&s, &cfg, 3).unwrap();
        assert!(r.closed && r.added.is_empty(), "{:?}", r.added);
    }
}

#[test]
fn seed_pair_is_already_closed() {
    let l = labels();
    let c = parse_operator("qhat(0)", &l).unwrap();
    let lab = |s: &str| Label::parse(s, &l).unwrap();
    let s = ConstraintSet::from_labels(&c, &[lab("C[f=1,n=1]"), lab("C[f=p,n=1]")], 3).unwrap();
    let cfg = ReductionConfig::graded(3, policy());
    let r = close_constraint_set(&s, &cfg, 4).unwrap();
    assert!(r.closed && r.added.is_empty(), "{:?}", r.added);
    assert_eq!(r.rounds, 1);
}
