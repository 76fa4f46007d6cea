//! Randomized and exhaustive properties of the ring, the operator algebra, the bracket
//! and the reduction engine.

use effcon::constraint_factory::*;
use effcon::moment_space::{moments_of_order, poisson_bracket};
use effcon::reduction_engine::*;
use effcon::symbolic_ring::*;
use effcon::weyl_algebra::*;
use num_bigint::BigUint;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::sync::OnceLock;

fn pool() -> Vec<Var> {
    vec![
        Var::q(0),
        Var::p(0),
        Var::q(1),
        Var::p(1),
        Var::Hbar,
        Var::param("M"),
        Var::moment(&[(2, 0), (0, 0)]),
        Var::moment(&[(1, 1), (0, 0)]),
        Var::moment(&[(0, 1), (0, 1)]),
    ]
}

fn labels() -> Labels {
    Labels::new(&[("q", "p"), ("t", "p_t")])
}

prop_compose! {
    fn coeff()(re in -4i64..5, im in -2i64..3, d in 1i64..4) -> GaussianRational {
        &GaussianRational::from_ratio(re, d) + &(&GaussianRational::from_ratio(im, d) * &GaussianRational::i())
    }
}

prop_compose! {
    fn term()(c in coeff(), f in prop::collection::vec((0usize..9, 1u32..3), 0..3)) -> ScalarExpr {
        let vars = pool();
        let mono = Mono::from_factors(f.into_iter().map(|(i, k)| (vars[i], k)).collect());
        ScalarExpr::from_poly(Poly::term(mono, c))
    }
}

/// Polynomial of at most three terms.
fn poly() -> impl Strategy<Value = ScalarExpr> {
    prop::collection::vec(term(), 1..=3).prop_map(|ts| ts.iter().fold(ScalarExpr::zero(), |a, t| a.add(t)))
}

/// Polynomial, possibly over a nonzero polynomial denominator.
fn rational() -> impl Strategy<Value = ScalarExpr> {
    (poly(), prop::option::of(poly())).prop_map(|(n, d)| match d {
        Some(d) if !d.is_zero() => n.div(&d).unwrap(),
        _ => n,
    })
}

/// Polynomial in phase-space symbols only, for bracket tests.
fn phase_poly() -> impl Strategy<Value = ScalarExpr> {
    let gens: Vec<Var> = [Var::q(0), Var::p(0), Var::q(1), Var::p(1)]
        .into_iter()
        .chain(moments_of_order(2..=3, 2))
        .collect();
    let n = gens.len();
    prop::collection::vec((coeff(), prop::collection::vec((0..n, 1u32..3), 0..3)), 1..=2).prop_map(move |ts| {
        Poly::from_terms(ts.into_iter().map(|(c, f)| (Mono::from_factors(f.into_iter().map(|(i, k)| (gens[i], k)).collect()), c)))
            .into()
    })
}

fn op_monomial() -> impl Strategy<Value = NormalMonomial> {
    (0u8..3, 0u8..3, 0u8..3, 0u8..3)
        .prop_filter("degree at most four", |(a, b, c, d)| a + b + c + d <= 4)
        .prop_map(|(a, b, c, d)| NormalMonomial::from_pairs(&[(a, b), (c, d)]))
}

fn op_poly() -> impl Strategy<Value = OperatorPoly> {
    prop::collection::vec((op_monomial(), -3i64..4), 1..=2).prop_map(|ts| {
        ts.into_iter().fold(OperatorPoly::zero(2), |acc, (m, c)| {
            acc.add(&OperatorPoly::monomial(m, ScalarExpr::int(c), 2)).unwrap()
        })
    })
}

fn op_eq(a: &OperatorPoly, b: &OperatorPoly) -> bool {
    a.sub(b).unwrap().is_zero()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ring_axioms(a in rational(), b in rational(), c in rational()) {
        prop_assert!(a.add(&b).add(&c).equals(&a.add(&b.add(&c))));
        prop_assert!(a.mul(&b).mul(&c).equals(&a.mul(&b.mul(&c))));
        prop_assert!(a.add(&b).equals(&b.add(&a)));
        prop_assert!(a.mul(&b).equals(&b.mul(&a)));
        prop_assert!(a.mul(&b.add(&c)).equals(&a.mul(&b).add(&a.mul(&c))));
    }

    #[test]
    fn equality_is_difference_zero(a in rational(), b in rational()) {
        prop_assert_eq!(a.equals(&b), a.sub(&b).is_zero());
        prop_assert!(a.equals(&a.add(&b).sub(&b)));
    }

    #[test]
    fn substitution_commutes_with_disjoint_derivative(a in rational(), b in poly(), k in 0usize..9) {
        let d = pool()[k];
        let bound = if d == Var::Hbar { Var::q(0) } else { Var::Hbar };
        prop_assume!(!b.contains(&d));
        let mut m = BTreeMap::new();
        m.insert(bound, b);
        prop_assume!(a.substitute(&m).is_ok());
        let x = a.substitute(&m).unwrap().derivative(&d);
        let y = a.derivative(&d).substitute(&m).unwrap();
        prop_assert!(x.equals(&y));
    }

    #[test]
    fn grade_truncation_is_a_linear_projection(a in poly(), b in poly(), n in 0u32..6) {
        let t = |e: &ScalarExpr| e.truncate_by_grade(n).unwrap();
        prop_assert!(t(&t(&a)).equals(&t(&a)));
        prop_assert!(t(&a.add(&b)).equals(&t(&a).add(&t(&b))));
    }

    #[test]
    fn printing_round_trips(a in rational()) {
        let l = labels();
        let text = a.to_text(&l);
        let back = parse_expr(&text, &l).unwrap();
        prop_assert!(back.equals(&a), "{}", text);
        prop_assert_eq!(back.to_text(&l), text);
    }

    #[test]
    fn operator_product_is_associative(x in op_monomial(), y in op_monomial(), z in op_monomial()) {
        let m = |n| OperatorPoly::monomial(n, ScalarExpr::one(), 2);
        let (a, b, c) = (m(x), m(y), m(z));
        prop_assert!(op_eq(&a.mul(&b).unwrap().mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()));
    }

    #[test]
    fn commutator_is_a_lie_bracket(a in op_poly(), b in op_poly(), c in op_poly(), k in -3i64..4) {
        let br = |x: &OperatorPoly, y: &OperatorPoly| x.commutator(y).unwrap();
        prop_assert!(op_eq(&br(&a, &b), &br(&b, &a).neg()));
        let s = ScalarExpr::int(k);
        let lin = br(&a.scale(&s).add(&b).unwrap(), &c);
        prop_assert!(op_eq(&lin, &br(&a, &c).scale(&s).add(&br(&b, &c)).unwrap()));
        let j = br(&a, &br(&b, &c)).add(&br(&b, &br(&c, &a))).unwrap().add(&br(&c, &br(&a, &b))).unwrap();
        prop_assert!(j.is_zero());
    }

    #[test]
    fn classical_limit_is_commutative(x in op_monomial(), y in op_monomial()) {
        let m = |n| OperatorPoly::monomial(n, ScalarExpr::one(), 2);
        let zero = ScalarExpr::zero();
        let limit = m(x).mul(&m(y)).unwrap().map_coeffs(|c| c.subst1(Var::Hbar, &zero).unwrap());
        prop_assert!(op_eq(&limit, &m(x.times(&y))));
    }

    #[test]
    fn bracket_obeys_leibniz(a in phase_poly(), b in phase_poly(), c in phase_poly()) {
        let lhs = poisson_bracket(&a.mul(&b), &c);
        let rhs = a.mul(&poisson_bracket(&b, &c)).add(&poisson_bracket(&a, &c).mul(&b));
        prop_assert!(lhs.equals(&rhs));
        prop_assert!(poisson_bracket(&a, &b).equals(&poisson_bracket(&b, &a).neg()));
    }
}

fn two_pair_generators() -> Vec<ScalarExpr> {
    [Var::q(0), Var::p(0), Var::q(1), Var::p(1)]
        .into_iter()
        .chain(moments_of_order(2..=4, 2))
        .map(ScalarExpr::var)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jacobi_two_pairs(i in 0usize..69, j in 0usize..69, k in 0usize..69) {
        let g = two_pair_generators();
        prop_assert_eq!(g.len(), 69);
        let (a, b, c) = (&g[i], &g[j], &g[k]);
        let t = poisson_bracket(a, &poisson_bracket(b, c))
            .add(&poisson_bracket(b, &poisson_bracket(c, a)))
            .add(&poisson_bracket(c, &poisson_bracket(a, b)));
        prop_assert!(t.is_zero());
    }
}

fn permutations(v: &[(usize, Canon)]) -> Vec<Vec<(usize, Canon)>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

#[test]
fn weyl_symbol_is_independent_of_peel_order() {
    let mut checked = 0;
    for a in 0u8..=4 {
        for b in 0..=4 - a {
            for c in 0..=4 - a - b {
                for d in 0..=4 - a - b - c {
                    let m = NormalMonomial::from_pairs(&[(a, b), (c, d)]);
                    let w = weyl_monomial(&m, 2);
                    for seq in permutations(&peel_sequence(&m)) {
                        assert!(op_eq(&weyl_from_sequence(&seq, 2), &w), "{m:?} {seq:?}");
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 70);
}

fn brute_force(m: u32, slots: u32, free_first: bool) -> u64 {
    fn go(left: u32, slots: u32, first: bool, free_first: bool) -> u64 {
        if slots == 1 {
            return u64::from(!(first && !free_first && left > 0));
        }
        let top = if first && !free_first { 0 } else { left };
        (0..=top).map(|k| go(left - k, slots - 1, false, free_first)).sum()
    }
    go(m, slots, true, free_first)
}

#[test]
fn counting_matches_enumeration() {
    for pairs in 1..=3u32 {
        for m in 0..=8u32 {
            assert_eq!(count_moments(m, pairs), BigUint::from(brute_force(m, 2 * pairs, true)), "M={m} P={pairs}");
            assert_eq!(count_unrestricted(m, pairs), BigUint::from(brute_force(m, 2 * pairs, false)), "M={m} P={pairs}");
        }
    }
}

struct Case {
    set: ConstraintSet,
    cfg: ReductionConfig,
}

fn linear_q() -> &'static Case {
    static C: OnceLock<Case> = OnceLock::new();
    C.get_or_init(|| {
        let l = Labels::numbered(1);
        let c = parse_operator("qhat(0)", &l).unwrap();
        let set = ConstraintSet::from_labels(&c, &hierarchy(&vocabulary(1, (0, Canon::P), 1), 3), 3).unwrap();
        Case { set, cfg: ReductionConfig::graded(3, ElimPolicy { pairs: vec![0], physical: None }) }
    })
}

fn two_component() -> &'static Case {
    static C: OnceLock<Case> = OnceLock::new();
    C.get_or_init(|| {
        let l = Labels::new(&[("q", "p"), ("q1", "p1")]);
        let c = parse_operator("phat(1) - phat(0)", &l).unwrap();
        let set = ConstraintSet::from_labels(&c, &hierarchy(&vocabulary(2, (0, Canon::P), 0), 4), 2).unwrap();
        Case { set, cfg: ReductionConfig::graded(2, ElimPolicy::time(1)) }
    })
}

/// Every constraint of `a` vanishes on the surface of `b`.
fn surface_contains(a: &TruncatedSystem, b: &TruncatedSystem) -> bool {
    a.entries.iter().all(|e| b.weak_reduce(&e.truncated).unwrap().is_zero())
}

/// Reorder entries within each hierarchy level `(n, deg f)` by sorting on `keys`.
fn shuffled_solve(case: &Case, keys: &[u32]) -> (TruncatedSystem, TruncatedSystem) {
    let base = truncate_system(&case.set, case.cfg.order, case.cfg.mode).unwrap();
    let mut idx: Vec<usize> = (0..base.entries.len()).collect();
    let level = |i: usize| (base.entries[i].label.n, base.entries[i].label.word.degree());
    idx.sort_by_key(|&i| (level(i), keys[i % keys.len()]));
    let mut shuffled = base.clone();
    shuffled.entries = idx.iter().map(|&i| base.entries[i].clone()).collect();
    (
        solve_constraints(&base, &case.cfg.policy).unwrap(),
        solve_constraints(&shuffled, &case.cfg.policy).unwrap(),
    )
}

fn keys() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(any::<u32>(), 32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solving_order_does_not_change_the_surface_linear_q(k in keys()) {
        let (a, b) = shuffled_solve(linear_q(), &k);
        prop_assert!(surface_contains(&a, &b) && surface_contains(&b, &a));
    }

    #[test]
    fn solving_order_does_not_change_the_surface_two_component(k in keys()) {
        let (a, b) = shuffled_solve(two_component(), &k);
        prop_assert!(surface_contains(&a, &b) && surface_contains(&b, &a));
    }
}

#[test]
fn dirac_bracket_is_degenerate_along_the_constraints() {
    let case = two_component();
    let l = Labels::new(&[("q", "p"), ("q1", "p1")]);
    let sys = TruncatedSystem::build(&case.set, &case.cfg).unwrap();
    let get = |w: &str| sys.entry(&Label::parse(w, &l).unwrap()).unwrap().truncated.clone();
    let sc = vec![
        ("phi1".to_string(), get("C[f=p,n=1]")),
        ("phi2".to_string(), get("C[f=q,n=1]").neg()),
        ("phi3".to_string(), get("C[f=p1,n=1]").neg()),
    ];
    let gauge: Vec<(String, ScalarExpr)> = [("phi4", "G[0,0;1,1] + i*hbar/2"), ("phi5", "G[0,0;0,2]"), ("phi6", "G[0,1;0,1]")]
        .iter()
        .map(|(n, t)| (n.to_string(), parse_expr(t, &l).unwrap()))
        .collect();
    let d = gauge_fix_and_dirac(&sys, &sc, &gauge).unwrap();
    let gens: Vec<ScalarExpr> =
        [Var::q(0), Var::p(0)].into_iter().chain(moments_of_order(2..=2, 2)).map(ScalarExpr::var).collect();
    for (name, phi) in &d.phis {
        for g in &gens {
            let r = d.bracket(phi, g).unwrap();
            assert!(r.is_zero(), "{name} with {}: {}", g.to_text(&l), r.to_text(&l));
        }
    }
}

#[test]
fn gauge_flows_are_tangent_to_the_surface() {
    for case in [linear_q(), two_component()] {
        let sys = TruncatedSystem::build(&case.set, &case.cfg).unwrap();
        let ind: Vec<Label> = sys.independent().iter().map(|e| e.label).collect();
        for a in &ind {
            for b in &ind {
                let target = sys.entry(b).unwrap().truncated.clone();
                let gens: Vec<Var> = target.vars().into_iter().filter(|v| v.is_phase_space()).collect();
                let flow = gauge_flow(&sys, a, &gens).unwrap();
                let change = flow
                    .flows
                    .iter()
                    .fold(ScalarExpr::zero(), |acc, (v, dv)| acc.add(&target.derivative(v).mul(dv)));
                assert!(sys.weak_reduce(&change).unwrap().is_zero(), "{a:?} along {b:?}");
            }
        }
    }
}
