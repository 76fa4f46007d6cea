use super::*;
use crate::constraint_factory::{hierarchy, vocabulary, ConstraintSet};
use crate::symbolic_ring::{parse_expr, Canon};
use crate::weyl_algebra::parse_operator;

fn fp() -> Labels {
    Labels::new(&[("q", "p"), ("t", "p_t")])
}

fn free_particle(order: u32, mode: TruncationMode, weight: u32) -> TruncatedSystem {
    let l = fp();
    let c = parse_operator("phat(1) + phat(0)^2/(2*M)", &l).unwrap();
    let labels = hierarchy(&vocabulary(2, (0, Canon::P), 1), weight);
    let set = ConstraintSet::from_labels(&c, &labels, order).unwrap();
    let cfg = ReductionConfig { order, mode, policy: ElimPolicy::time(1) };
    TruncatedSystem::build(&set, &cfg).unwrap()
}

#[test]
fn free_particle_second_order_pivots() {
    let l = fp();
    let sys = free_particle(2, TruncationMode::Graded, 4);
    for t in sys.table_text(&l) {
        eprintln!("{t}");
    }
    let solved: Vec<Var> = sys.table.iter().map(|s| s.var).collect();
    let want = ["p_t", "G[0,1;1,0]", "G[1,0;0,1]", "G[1,0;1,0]", "G[0,0;2,0]"];
    let want: Vec<Var> = want.iter().map(|w| *parse_expr(w, &l).unwrap().vars().iter().next().unwrap()).collect();
    assert_eq!(solved, want);
    assert!(detect_inconsistency(&sys).is_consistent());
}

#[test]
fn free_particle_sharp_zero_is_inconsistent() {
    let l = fp();
    let sys = free_particle(0, TruncationMode::Sharp, 2);
    let rep = detect_inconsistency(&sys);
    assert!(!rep.hard.is_empty());
    assert!(rep.hard.iter().any(|(_, e)| e.equals(&parse_expr("i*hbar/2", &l).unwrap())), "{:?}", rep.lines(&l));
}
