//! Truncation, order-by-order solving, gauge flows, observables and Dirac brackets.

mod dirac;
mod linalg;
mod observables;
mod physical;

pub use dirac::{gauge_fix_and_dirac, DiracStructure};
pub use linalg::{solve_linear, Matrix};
pub use observables::{find_observables, in_span, verify_observable, ObservableAnsatz, ObservableRecord};
pub use physical::{
    check_uncertainty, reality_condition, relational_solution, verify_appendix_expansion, AppendixReport,
    RealityReport, UncertaintyClass, UncertaintyReport,
};

use crate::constraint_factory::{ConstraintSet, Label};
use crate::moment_space::{moments_of_order, poisson_bracket};
use crate::symbolic_ring::{Labels, Mono, Poly, ScalarExpr, Var};
use crate::Error;
use std::cmp::Reverse;
use std::collections::BTreeMap;

/// How higher moments are discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TruncationMode {
    /// Moments of order above `N` are set to zero; products are kept.
    Sharp,
    /// Terms of λ-grade above `N` are dropped (moments weigh their order, ħ weighs 2).
    Graded,
}

impl TruncationMode {
    pub fn name(&self) -> &'static str {
        match self {
            TruncationMode::Sharp => "sharp",
            TruncationMode::Graded => "graded",
        }
    }
}

/// Which canonical pairs are eliminated: their expectation values, their moments and
/// their cross-moments are solved for first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElimPolicy {
    pub pairs: Vec<usize>,
    /// Moments the scenario declares physical; `None` means all moments free of the
    /// eliminated pairs.
    pub physical: Option<Vec<Var>>,
}

impl ElimPolicy {
    pub fn time(pair: usize) -> Self {
        ElimPolicy { pairs: vec![pair], physical: None }
    }

    fn weight(&self, v: &Var) -> u32 {
        match v {
            Var::Expect(i, _) if self.pairs.contains(&(*i as usize)) => 1,
            Var::Moment(e) => self.pairs.iter().map(|&i| e.mom(i) as u32 + e.pos(i) as u32).sum(),
            _ => 0,
        }
    }

    pub fn is_eliminable(&self, v: &Var) -> bool {
        self.weight(v) > 0
    }

    /// Eliminable moment that also involves a kept pair.
    pub fn is_cross(&self, v: &Var) -> bool {
        match v {
            Var::Moment(e) => self.weight(v) > 0 && self.weight(v) < e.order(),
            _ => false,
        }
    }

    pub fn is_physical(&self, v: &Var) -> bool {
        match &self.physical {
            Some(list) => list.contains(v),
            None => v.is_moment() && !self.is_eliminable(v),
        }
    }

    /// Pivot preference: lower order, cross-moments before pure ones, more eliminated
    /// exponents, then symbol order.
    fn rank(&self, v: &Var) -> (u32, bool, Reverse<u32>, Var) {
        let order = match v {
            Var::Moment(e) => e.order(),
            _ => 0,
        };
        (order, !self.is_cross(v), Reverse(self.weight(v)), *v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionConfig {
    pub order: u32,
    pub mode: TruncationMode,
    pub policy: ElimPolicy,
}

impl ReductionConfig {
    pub fn graded(order: u32, policy: ElimPolicy) -> Self {
        ReductionConfig { order, mode: TruncationMode::Graded, policy }
    }

    pub fn sharp(order: u32, policy: ElimPolicy) -> Self {
        ReductionConfig { order, mode: TruncationMode::Sharp, policy }
    }
}

/// State of one constraint after truncation and solving.
#[derive(Clone, Debug)]
pub enum Status {
    Pending,
    Solved(Var),
    /// Reduces to zero on the surface of the earlier entries.
    Dependent,
    /// Truncates to the same expression as an earlier constraint.
    Duplicate(Label),
    /// Nonzero constant.
    Hard(ScalarExpr),
    /// Forces a physical moment to vanish.
    Soft(Var, ScalarExpr),
    /// No linear pivot available.
    Unresolved(ScalarExpr),
}

#[derive(Clone, Debug)]
pub struct Entry {
    pub label: Label,
    pub raw: ScalarExpr,
    pub truncated: ScalarExpr,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Constraint(Label),
    Condition(String),
}

/// One row of the triangular table: `var = rhs`, with `rhs` free of earlier solved symbols.
#[derive(Clone, Debug)]
pub struct Solution {
    pub var: Var,
    pub rhs: ScalarExpr,
    pub source: Source,
    /// The reduced equation the row was solved from.
    pub equation: ScalarExpr,
}

#[derive(Clone, Debug)]
pub struct TruncatedSystem {
    pub config: ReductionConfig,
    pub npairs: usize,
    pub entries: Vec<Entry>,
    pub table: Vec<Solution>,
    /// Nonzero divisors introduced while solving.
    pub assumptions: Vec<ScalarExpr>,
    closed: BTreeMap<Var, ScalarExpr>,
    /// Table right sides never lower the grade, so inputs may be truncated first.
    monotone: bool,
}

/// Truncate every constraint of `set`; identical or vanishing results are marked.
pub fn truncate_system(set: &ConstraintSet, n: u32, mode: TruncationMode) -> Result<TruncatedSystem, Error> {
    let mut sys = TruncatedSystem {
        config: ReductionConfig { order: n, mode, policy: ElimPolicy::default() },
        npairs: set.operator.npairs(),
        entries: Vec::new(),
        table: Vec::new(),
        assumptions: Vec::new(),
        closed: BTreeMap::new(),
        monotone: true,
    };
    for c in &set.constraints {
        let t = sys.truncate(&c.expr)?;
        let status = if t.is_zero() {
            Status::Dependent
        } else if let Some(e) = sys.entries.iter().find(|e| e.truncated.equals(&t)) {
            Status::Duplicate(e.label)
        } else {
            Status::Pending
        };
        sys.entries.push(Entry { label: c.label, raw: c.expr.clone(), truncated: t, status });
    }
    Ok(sys)
}

/// Solve the pending constraints in hierarchy order.
pub fn solve_constraints(sys: &TruncatedSystem, policy: &ElimPolicy) -> Result<TruncatedSystem, Error> {
    let mut s = sys.clone();
    s.config.policy = policy.clone();
    for i in 0..s.entries.len() {
        if !matches!(s.entries[i].status, Status::Pending) {
            continue;
        }
        let r = s.weak_reduce(&s.entries[i].truncated)?;
        let label = s.entries[i].label;
        s.entries[i].status = s.classify_and_solve(&r, Source::Constraint(label))?;
    }
    Ok(s)
}

impl TruncatedSystem {
    pub fn build(set: &ConstraintSet, cfg: &ReductionConfig) -> Result<TruncatedSystem, Error> {
        solve_constraints(&truncate_system(set, cfg.order, cfg.mode)?, &cfg.policy)
    }

    pub fn order(&self) -> u32 {
        self.config.order
    }

    /// Apply the truncation of the configured mode at grade `n`.
    pub fn truncate_at(&self, e: &ScalarExpr, n: u32) -> Result<ScalarExpr, Error> {
        match self.config.mode {
            TruncationMode::Graded => e.truncate_by_grade(n),
            TruncationMode::Sharp => {
                if e.den().vars().iter().any(|v| v.grade() > n && v.is_moment()) {
                    return Err(Error::NonPolynomialGrade);
                }
                Ok(e.filter_terms(|m| m.factors().iter().all(|(v, _)| !v.is_moment() || v.grade() <= n)))
            }
        }
    }

    pub fn truncate(&self, e: &ScalarExpr) -> Result<ScalarExpr, Error> {
        self.truncate_at(e, self.config.order)
    }

    /// Substitute the solved table, then truncate.
    pub fn weak_reduce(&self, e: &ScalarExpr) -> Result<ScalarExpr, Error> {
        let e = if self.monotone { self.truncate(e)? } else { e.clone() };
        self.truncate(&e.substitute(&self.closed)?)
    }

    /// Substitute the solved table without truncating.
    pub fn reduce_exact(&self, e: &ScalarExpr) -> Result<ScalarExpr, Error> {
        e.substitute(&self.closed)
    }

    /// Bracket of two phase-space functions; inputs are cut at grade `N + 2`, which
    /// loses nothing at grade `N` since a bracket lowers the grade by at most 2.
    pub fn bracket(&self, a: &ScalarExpr, b: &ScalarExpr) -> Result<ScalarExpr, Error> {
        let n = self.config.order.saturating_add(2);
        let (a, b) = match self.config.mode {
            TruncationMode::Graded => (a.truncate_by_grade(n)?, b.truncate_by_grade(n)?),
            TruncationMode::Sharp => (self.truncate(a)?, self.truncate(b)?),
        };
        Ok(poisson_bracket(&a, &b))
    }

    /// Fully reduced value of a solved symbol.
    pub fn solved_value(&self, v: &Var) -> Option<&ScalarExpr> {
        self.closed.get(v)
    }

    pub fn is_solved(&self, v: &Var) -> bool {
        self.closed.contains_key(v)
    }

    pub fn entry(&self, l: &Label) -> Option<&Entry> {
        self.entries.iter().find(|e| e.label == *l)
    }

    /// Constraints that determined a table row.
    pub fn independent(&self) -> Vec<&Entry> {
        self.entries.iter().filter(|e| matches!(e.status, Status::Solved(_))).collect()
    }

    /// Expectation symbols and moments up to the truncation order (capped for `N = ∞`).
    pub fn generators(&self, max_order: u32) -> Vec<Var> {
        let top = max_order.min(self.config.order);
        let mut g = Vec::new();
        for i in 0..self.npairs as u8 {
            g.push(Var::q(i));
            g.push(Var::p(i));
        }
        g.extend(moments_of_order(2..=top.max(1), self.npairs).into_iter().filter(|v| v.grade() <= top));
        g
    }

    /// Generators not fixed by the table.
    pub fn free_generators(&self, max_order: u32) -> Vec<Var> {
        self.generators(max_order).into_iter().filter(|v| !self.is_solved(v)).collect()
    }

    /// Add extra conditions such as gauge choices, each solved for its preferred moment.
    pub fn with_conditions(&self, conds: &[(String, ScalarExpr)]) -> Result<TruncatedSystem, Error> {
        let mut s = self.clone();
        for (name, c) in conds {
            let r = s.weak_reduce(c)?;
            match s.classify_and_solve(&r, Source::Condition(name.clone()))? {
                Status::Solved(_) => {}
                Status::Dependent => {}
                other => return Err(Error::Invalid(format!("condition {name} cannot be imposed: {other:?}"))),
            }
        }
        Ok(s)
    }

    fn pivot(&self, r: &ScalarExpr, any_moment: bool) -> Option<(Var, Poly, Poly)> {
        let pol = &self.config.policy;
        let mut best: Option<(Var, Poly, Poly)> = None;
        for v in r.num().vars() {
            let ok = if any_moment { v.is_moment() || pol.is_eliminable(&v) } else { pol.is_eliminable(&v) };
            if !ok {
                continue;
            }
            let mut cs = r.num().coefficients_in(&v);
            if cs.keys().max() != Some(&1) {
                continue;
            }
            let c = cs.remove(&1).expect("linear");
            if c.max_grade() > 0 || c.vars().iter().any(|x| x.is_moment()) {
                continue;
            }
            let better = match &best {
                None => true,
                Some((b, _, _)) => {
                    if any_moment {
                        (!pol.is_eliminable(&v), pol.rank(&v)) < (!pol.is_eliminable(b), pol.rank(b))
                    } else {
                        pol.rank(&v) < pol.rank(b)
                    }
                }
            };
            if better {
                let rest = cs.remove(&0).unwrap_or_else(Poly::zero);
                best = Some((v, c, rest));
            }
        }
        best
    }

    fn classify_and_solve(&mut self, r: &ScalarExpr, source: Source) -> Result<Status, Error> {
        if r.is_zero() {
            return Ok(Status::Dependent);
        }
        if !r.vars().iter().any(Var::is_phase_space) {
            return Ok(Status::Hard(r.clone()));
        }
        let any = matches!(source, Source::Condition(_));
        let Some((v, c, rest)) = self.pivot(r, any) else {
            return Ok(self.unsolvable(r));
        };
        let rhs = ScalarExpr::from_parts(rest.neg(), c.clone())?;
        let rhs = self.truncate(&rhs)?;
        let divisor = ScalarExpr::from_poly(c);
        if divisor.as_constant().is_none() && !self.assumptions.iter().any(|a| a.equals(&divisor)) {
            self.assumptions.push(divisor);
        }
        if rhs.num().terms().iter().any(|(m, _)| m.grade() < v.grade()) {
            self.monotone = false;
        }
        let mut closed = BTreeMap::new();
        for (k, e) in &self.closed {
            let e2 = if e.contains(&v) { self.truncate(&e.subst1(v, &rhs)?)? } else { e.clone() };
            closed.insert(*k, e2);
        }
        closed.insert(v, rhs.clone());
        self.closed = closed;
        self.table.push(Solution { var: v, rhs, source, equation: r.clone() });
        Ok(Status::Solved(v))
    }

    fn unsolvable(&self, r: &ScalarExpr) -> Status {
        let by = r.num().collect_by(|v| v.is_moment());
        if by.len() == 1 {
            let (m, coeff) = by.iter().next().expect("one");
            let pol = &self.config.policy;
            if !m.is_one() && !coeff.is_zero() && m.factors().iter().all(|(v, _)| pol.is_physical(v)) {
                return Status::Soft(m.factors()[0].0, r.clone());
            }
        }
        Status::Unresolved(r.clone())
    }

    pub fn table_text(&self, labels: &Labels) -> Vec<String> {
        self.table.iter().map(|s| format!("{} = {}", labels.var_text(&s.var), s.rhs.to_text(labels))).collect()
    }
}

/// Inconsistencies found after linear elimination.
#[derive(Clone, Debug, Default)]
pub struct InconsistencyReport {
    pub hard: Vec<(Label, ScalarExpr)>,
    pub soft: Vec<(Label, Var, ScalarExpr)>,
    pub unresolved: Vec<(Label, ScalarExpr)>,
}

impl InconsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.hard.is_empty() && self.soft.is_empty()
    }

    pub fn lines(&self, labels: &Labels) -> Vec<String> {
        let mut out = Vec::new();
        for (l, e) in &self.hard {
            out.push(format!("hard inconsistency: {} = 0 [{}]", e.to_text(labels), l.to_text(labels)));
        }
        for (l, v, e) in &self.soft {
            out.push(format!(
                "soft inconsistency: {} = 0 forced by {} = 0 [{}]",
                labels.var_text(v),
                e.to_text(labels),
                l.to_text(labels)
            ));
        }
        for (l, e) in &self.unresolved {
            out.push(format!("unresolved: {} = 0 [{}]", e.to_text(labels), l.to_text(labels)));
        }
        out
    }
}

pub fn detect_inconsistency(sys: &TruncatedSystem) -> InconsistencyReport {
    let mut rep = InconsistencyReport::default();
    for e in &sys.entries {
        match &e.status {
            Status::Hard(x) => rep.hard.push((e.label, x.clone())),
            Status::Soft(v, x) => rep.soft.push((e.label, *v, x.clone())),
            Status::Unresolved(x) => rep.unresolved.push((e.label, x.clone())),
            _ => {}
        }
    }
    rep
}

/// Flow of one constraint on a list of generators, on the constraint surface.
#[derive(Clone, Debug)]
pub struct GaugeFlowRecord {
    pub label: Label,
    pub flows: Vec<(Var, ScalarExpr)>,
}

/// `δg = {g, C}` reduced on the surface. An empty generator list means all free ones.
pub fn gauge_flow(sys: &TruncatedSystem, label: &Label, generators: &[Var]) -> Result<GaugeFlowRecord, Error> {
    let e = sys.entry(label).ok_or_else(|| Error::Invalid("constraint not in system".into()))?;
    let gens = if generators.is_empty() { sys.free_generators(sys.order()) } else { generators.to_vec() };
    let mut flows = Vec::new();
    for g in gens {
        flows.push((g, sys.weak_reduce(&sys.bracket(&ScalarExpr::var(g), &e.raw)?)?));
    }
    Ok(GaugeFlowRecord { label: *label, flows })
}

/// Rank of the flow vectors of `labels` over `generators`.
pub fn flow_rank(sys: &TruncatedSystem, labels: &[Label], generators: &[Var]) -> Result<usize, Error> {
    let mut rows = Vec::new();
    for l in labels {
        rows.push(gauge_flow(sys, l, generators)?.flows.into_iter().map(|(_, e)| e).collect());
    }
    Ok(Matrix::from_rows(rows).rank())
}

/// Numerator grouped by monomials in phase-space symbols and ħ; coefficients are
/// polynomials in the parameters.
pub(crate) fn phase_coefficients(num: &Poly) -> BTreeMap<Mono, Poly> {
    num.collect_by(|v| v.is_phase_space() || *v == Var::Hbar)
}

/// Free of phase-space symbols and ħ.
pub(crate) fn graded_constant(e: &ScalarExpr) -> bool {
    !e.vars().iter().any(|v| v.is_phase_space() || *v == Var::Hbar)
}

pub(crate) fn field_only(e: &ScalarExpr) -> bool {
    !e.vars().iter().any(Var::is_phase_space)
}

pub(crate) fn dedupe(exprs: Vec<ScalarExpr>) -> Vec<ScalarExpr> {
    let mut out: Vec<ScalarExpr> = Vec::new();
    for e in exprs {
        if !out.iter().any(|x| x.equals(&e)) {
            out.push(e);
        }
    }
    out
}

#[cfg(test)]
mod tests;
