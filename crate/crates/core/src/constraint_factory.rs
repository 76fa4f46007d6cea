//! Effective constraints `C_f^(n) = ⟨f̂ Ĉⁿ⟩`, closure under brackets, and counting.

use crate::moment_space::expectation;
use crate::reduction_engine::{ReductionConfig, TruncatedSystem};
use crate::symbolic_ring::{Canon, Labels, ScalarExpr};
use crate::weyl_algebra::{NormalMonomial, OperatorPoly};
use crate::Error;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use std::collections::BTreeSet;

/// Left multiplier of `Ĉⁿ`, unsymmetrized.
pub type MultiplierWord = NormalMonomial;

/// Constraint label `(f, n)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Label {
    pub word: MultiplierWord,
    pub n: u32,
}

impl Label {
    pub fn new(word: MultiplierWord, n: u32) -> Label {
        Label { word, n }
    }

    pub fn principal() -> Label {
        Label { word: NormalMonomial::one(), n: 1 }
    }

    /// `C[f=<word>,n=<k>]`.
    pub fn to_text(&self, labels: &Labels) -> String {
        format!("C[f={},n={}]", self.word.word_text(labels), self.n)
    }

    /// Parse `C[f=q*p,n=1]` or the short forms `q*p` / `q*p,1`.
    pub fn parse(text: &str, labels: &Labels) -> Result<Label, Error> {
        let t = text.trim();
        let inner = t.strip_prefix("C[").and_then(|x| x.strip_suffix(']')).unwrap_or(t);
        let (w, n) = match inner.split_once(',') {
            Some((w, n)) => (w.trim(), n.trim()),
            None => (inner, "1"),
        };
        let w = w.strip_prefix("f=").unwrap_or(w).trim();
        let n = n.strip_prefix("n=").unwrap_or(n).trim();
        let n: u32 = n.parse().map_err(|_| Error::Parse(format!("bad constraint power in {text:?}")))?;
        Ok(Label { word: parse_word(w, labels)?, n })
    }
}

/// Hierarchy order: n ascending, then word degree, then word order.
impl Ord for Label {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.n.cmp(&o.n).then_with(|| self.word.cmp(&o.word))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Parse a word such as `q*p^2` or `1`.
pub fn parse_word(text: &str, labels: &Labels) -> Result<MultiplierWord, Error> {
    let mut m = NormalMonomial::one();
    let t = text.trim();
    if t == "1" {
        return Ok(m);
    }
    for f in t.split('*') {
        let (name, k) = match f.split_once('^') {
            Some((a, b)) => (a.trim(), b.trim().parse::<u8>().map_err(|_| Error::Parse(format!("bad power in {f:?}")))?),
            None => (f.trim(), 1),
        };
        let (i, c) = labels.basic(name).ok_or_else(|| Error::Parse(format!("unknown variable {name:?} in word")))?;
        m = m.times(&NormalMonomial::from_pairs(&{
            let mut v = vec![(0u8, 0u8); i + 1];
            v[i] = if c == Canon::Q { (k, 0) } else { (0, k) };
            v
        }));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Declared,
    /// Produced while closing the bracket of two constraints, by the named term of the
    /// commutator identity for `[f̂Ĉⁿ, ĝĈᵐ]`.
    Closure { parents: (Label, Label), term: &'static str },
}

#[derive(Clone, Debug)]
pub struct EffectiveConstraint {
    pub label: Label,
    pub expr: ScalarExpr,
    pub provenance: Provenance,
}

/// Ordered set of effective constraints for one constraint operator.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    pub constraints: Vec<EffectiveConstraint>,
    pub operator: OperatorPoly,
    pub order: u32,
}

impl ConstraintSet {
    pub fn new(operator: OperatorPoly, order: u32) -> Self {
        ConstraintSet { constraints: Vec::new(), operator, order }
    }

    /// Generate the given labels, kept in hierarchy order.
    pub fn from_labels(operator: &OperatorPoly, labels: &[Label], order: u32) -> Result<Self, Error> {
        let mut s = ConstraintSet::new(operator.clone(), order);
        for l in labels {
            s.insert(generate_constraint(operator, &l.word, l.n)?);
        }
        Ok(s)
    }

    pub fn get(&self, l: &Label) -> Option<&EffectiveConstraint> {
        self.constraints.iter().find(|c| c.label == *l)
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.get(l).is_some()
    }

    /// Insert keeping labels unique and the hierarchy order.
    pub fn insert(&mut self, c: EffectiveConstraint) -> bool {
        if self.contains(&c.label) {
            return false;
        }
        let pos = self.constraints.partition_point(|x| x.label < c.label);
        self.constraints.insert(pos, c);
        true
    }

    pub fn labels(&self) -> Vec<Label> {
        self.constraints.iter().map(|c| c.label).collect()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// `C_f^(n) = ⟨f̂ Ĉⁿ⟩`.
pub fn generate_constraint(c: &OperatorPoly, f: &MultiplierWord, n: u32) -> Result<EffectiveConstraint, Error> {
    if n == 0 {
        return Err(Error::Invalid("constraint power must be positive".into()));
    }
    let fo = OperatorPoly::monomial(*f, ScalarExpr::one(), c.npairs());
    let op = fo.mul(&c.pow(n)?)?;
    Ok(EffectiveConstraint { label: Label::new(*f, n), expr: expectation(&op), provenance: Provenance::Declared })
}

/// The symmetrized covariance `G^{Cⁿ,f} = ½⟨Ĉⁿf̂ + f̂Ĉⁿ⟩ − ⟨Ĉⁿ⟩⟨f̂⟩` (and `⟨Ĉⁿ⟩` for
/// `f = 1`) in place of every constraint of `set`. Not used for reduction; it serves as a
/// fixture for first-class checks.
pub fn symmetrized_variant(set: &ConstraintSet) -> Result<ConstraintSet, Error> {
    let c = &set.operator;
    let mut out = ConstraintSet::new(c.clone(), set.order);
    for x in &set.constraints {
        let f = OperatorPoly::monomial(x.label.word, ScalarExpr::one(), c.npairs());
        let cn = c.pow(x.label.n)?;
        let half = ScalarExpr::ratio(1, 2);
        let mut e = expectation(&f.mul(&cn)?.add(&cn.mul(&f)?)?.scale(&half));
        if x.label.word.degree() > 0 {
            e = e.sub(&expectation(&cn).mul(&expectation(&f)));
        }
        out.insert(EffectiveConstraint { label: x.label, expr: e, provenance: Provenance::Declared });
    }
    Ok(out)
}

/// Words `{1} ∪ {x} ∪ {x·pᵏ : k ≤ kmax}` for basic variables x and the chosen momentum p.
pub fn vocabulary(npairs: usize, power: (usize, Canon), kmax: u32) -> Vec<MultiplierWord> {
    let mut out = BTreeSet::new();
    out.insert(NormalMonomial::one());
    let pw = NormalMonomial::basic(power.0, power.1);
    for i in 0..npairs {
        for c in [Canon::Q, Canon::P] {
            let mut w = NormalMonomial::basic(i, c);
            out.insert(w);
            for _ in 0..kmax {
                w = w.times(&pw);
                out.insert(w);
            }
        }
    }
    out.into_iter().collect()
}

/// Labels `(f, n)` from a vocabulary with `deg f + n ≤ weight`.
pub fn hierarchy(words: &[MultiplierWord], weight: u32) -> Vec<Label> {
    let mut out = Vec::new();
    for n in 1..=weight {
        for w in words {
            if w.degree() + n <= weight {
                out.push(Label::new(*w, n));
            }
        }
    }
    out.sort();
    out
}

/// Outcome of a closure run.
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub set: ConstraintSet,
    pub rounds: u32,
    pub added: Vec<Label>,
    pub closed: bool,
}

/// Bracket all pairs; add constraints from the commutator identity until nothing new appears.
pub fn close_constraint_set(set: &ConstraintSet, cfg: &ReductionConfig, max_rounds: u32) -> Result<ClosureReport, Error> {
    if set.is_empty() {
        return Err(Error::Invalid("empty constraint set".into()));
    }
    let mut cur = set.clone();
    let mut added = Vec::new();
    for round in 1..=max_rounds {
        let sys = TruncatedSystem::build(&cur, cfg)?;
        let mut new = Vec::new();
        for (i, a) in cur.constraints.iter().enumerate() {
            for b in &cur.constraints[i + 1..] {
                let r = sys.weak_reduce(&sys.bracket(&a.expr, &b.expr)?)?;
                if r.is_zero() {
                    continue;
                }
                for c in identity_terms(&cur.operator, &a.label, &b.label)? {
                    if cur.contains(&c.label) || new.iter().any(|x: &EffectiveConstraint| x.label == c.label) {
                        continue;
                    }
                    if !sys.weak_reduce(&c.expr)?.is_zero() {
                        new.push(c);
                    }
                }
            }
        }
        if new.is_empty() {
            return Ok(ClosureReport { set: cur, rounds: round, added, closed: true });
        }
        for c in new {
            added.push(c.label);
            cur.insert(c);
        }
    }
    Ok(ClosureReport { set: cur, rounds: max_rounds, added, closed: false })
}

/// Constraints named by `[f̂Ĉⁿ, ĝĈᵐ] = [f̂,ĝ]Ĉ^{n+m} + f̂[Ĉⁿ,ĝ]Ĉᵐ + ĝ[f̂,Ĉᵐ]Ĉⁿ`, one per monomial word.
fn identity_terms(c: &OperatorPoly, a: &Label, b: &Label) -> Result<Vec<EffectiveConstraint>, Error> {
    let np = c.npairs();
    let f = OperatorPoly::monomial(a.word, ScalarExpr::one(), np);
    let g = OperatorPoly::monomial(b.word, ScalarExpr::one(), np);
    let parts = [
        (f.commutator(&g)?, a.n + b.n, "[f,g]C^(n+m)"),
        (f.mul(&c.pow(a.n)?.commutator(&g)?)?, b.n, "f[C^n,g]C^m"),
        (g.mul(&f.commutator(&c.pow(b.n)?)?)?, a.n, "g[f,C^m]C^n"),
    ];
    let mut out = Vec::new();
    for (op, n, term) in parts {
        for w in op.terms().keys() {
            let mut e = generate_constraint(c, w, n)?;
            e.provenance = Provenance::Closure { parents: (*a, *b), term };
            out.push(e);
        }
    }
    Ok(out)
}

/// A pair of constraints whose bracket does not vanish weakly.
#[derive(Clone, Debug)]
pub struct FirstClassFailure {
    pub a: Label,
    pub b: Label,
    pub residue: ScalarExpr,
}

/// Check that all pairwise brackets vanish on the constraint surface at grade `N`.
pub fn check_first_class(set: &ConstraintSet, cfg: &ReductionConfig) -> Result<Vec<FirstClassFailure>, Error> {
    let sys = TruncatedSystem::build(set, cfg)?;
    check_first_class_with(&sys, &set.constraints.iter().map(|c| (c.label, c.expr.clone())).collect::<Vec<_>>())
}

/// Pairwise weak brackets of arbitrary labelled expressions against a solved system.
pub fn check_first_class_with(
    sys: &TruncatedSystem,
    exprs: &[(Label, ScalarExpr)],
) -> Result<Vec<FirstClassFailure>, Error> {
    let mut out = Vec::new();
    for (i, (la, a)) in exprs.iter().enumerate() {
        for (lb, b) in &exprs[i + 1..] {
            let r = sys.weak_reduce(&sys.bracket(a, b)?)?;
            if !r.is_zero() {
                out.push(FirstClassFailure { a: *la, b: *lb, residue: r });
            }
        }
    }
    Ok(out)
}

/// Moments of order `m` over `pairs` canonical pairs: C(m+2P−1, 2P−1).
pub fn count_moments(m: u32, pairs: u32) -> BigUint {
    binom_big(m + 2 * pairs - 1, 2 * pairs - 1)
}

/// Moments of order `m` not restricted by one linear constraint: ((2P−1)/m)·C(m+2P−2, 2P−1).
pub fn count_unrestricted(m: u32, pairs: u32) -> BigUint {
    if m == 0 {
        return BigUint::one();
    }
    let x = BigUint::from(2 * pairs - 1) * binom_big(m + 2 * pairs - 2, 2 * pairs - 1);
    let (q, r) = (x.clone() / m, x % m);
    assert!(r.is_zero(), "closed form must be integral");
    q
}

fn binom_big(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut r = BigUint::one();
    for j in 0..k {
        r = r * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic_ring::parse_expr;
    use crate::weyl_algebra::parse_operator;

    #[test]
    fn generation_examples() {
        let l = Labels::numbered(1);
        let c = parse_operator("qhat(0)", &l).unwrap();
        let e = generate_constraint(&c, &parse_word("p", &l).unwrap(), 1).unwrap();
        assert_eq!(e.expr, parse_expr("q*p + G[1,1] - i*hbar/2", &l).unwrap());
        let fl = Labels::new(&[("q", "p"), ("t", "p_t")]);
        let c = parse_operator("phat(1) + phat(0)^2/(2*M)", &fl).unwrap();
        let e = generate_constraint(&c, &NormalMonomial::one(), 1).unwrap();
        assert_eq!(e.expr, parse_expr("p_t + p^2/(2*M) + G[2,0;0,0]/(2*M)", &fl).unwrap());
    }

    #[test]
    fn counting_examples() {
        assert_eq!(count_moments(2, 2), BigUint::from(10u32));
        assert_eq!(count_moments(2, 1), BigUint::from(3u32));
        assert_eq!(count_unrestricted(2, 2), BigUint::from(6u32));
    }

    #[test]
    fn label_text_round_trip() {
        let l = Labels::new(&[("q", "p"), ("t", "p_t")]);
        let lab = Label::new(parse_word("t*p^2", &l).unwrap(), 2);
        assert_eq!(lab.to_text(&l), "C[f=t*p^2,n=2]");
        assert_eq!(Label::parse(&lab.to_text(&l), &l).unwrap(), lab);
    }

    #[test]
    fn vocabulary_size() {
        // 1, q, p, t, p_t, and q·p^k, t·p^k, p_t·p^k, p^(k+1) for k = 1..3.
        let v = vocabulary(2, (0, Canon::P), 3);
        assert_eq!(v.len(), 1 + 4 + 4 * 3);
    }
}
