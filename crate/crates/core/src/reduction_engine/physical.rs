//! Uncertainty and reality checks, relational solutions and expansion checks.

use super::{field_only, TruncatedSystem};
use crate::constraint_factory::{generate_constraint, MultiplierWord};
use crate::symbolic_ring::{GaussianRational, Mono, Poly, ScalarExpr, Var};
use crate::weyl_algebra::OperatorPoly;
use crate::Error;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UncertaintyClass {
    /// `G^{qq}G^{pp} − (G^{qp})² − ħ²/4` vanishes on the surface.
    Saturated,
    /// The combination is a negative constant, so no real values satisfy the relation.
    ViolatedAsReal,
    /// Sign depends on free variables.
    Conditional,
}

#[derive(Clone, Debug)]
pub struct UncertaintyReport {
    pub pair: usize,
    pub value: ScalarExpr,
    pub class: UncertaintyClass,
}

/// Evaluate the uncertainty combination of one pair on the surface.
pub fn check_uncertainty(sys: &TruncatedSystem, pair: usize) -> Result<UncertaintyReport, Error> {
    let m = |mom: u8, pos: u8| {
        let mut v = vec![(0u8, 0u8); pair + 1];
        v[pair] = (mom, pos);
        ScalarExpr::var(Var::moment(&v))
    };
    let u = m(0, 2).mul(&m(2, 0)).sub(&m(1, 1).pow(2)).sub(&ScalarExpr::hbar().pow(2).mul(&ScalarExpr::ratio(1, 4)));
    let value = sys.reduce_exact(&u)?;
    let class = if value.is_zero() {
        UncertaintyClass::Saturated
    } else if field_only(&value)
        && value.den().as_constant().is_some()
        && value.num().terms().iter().all(|(_, c)| c.im.is_zero() && c.re.is_negative())
    {
        UncertaintyClass::ViolatedAsReal
    } else {
        UncertaintyClass::Conditional
    };
    Ok(UncertaintyReport { pair, value, class })
}

/// Reality of an observable `L + c`, with `c` free of phase-space symbols, amounts to
/// `Im(L) = required_imaginary`.
#[derive(Clone, Debug)]
pub struct RealityReport {
    pub linear: ScalarExpr,
    pub required_imaginary: ScalarExpr,
    /// Whether `L` has real coefficients, so the condition is on `Im` of its symbols alone.
    pub real_coefficients: bool,
}

pub fn reality_condition(sys: &TruncatedSystem, expr: &ScalarExpr) -> Result<RealityReport, Error> {
    let e = sys.reduce_exact(expr)?;
    let den = ScalarExpr::from_poly(e.den().clone());
    let (mut lin, mut imag) = (Poly::zero(), Poly::zero());
    for (m, c) in e.num().terms() {
        if m.factors().iter().any(|(v, _)| v.is_phase_space()) {
            lin = lin.add(&Poly::term(m.clone(), c.clone()));
        } else if !c.im.is_zero() {
            imag = imag.add(&Poly::term(m.clone(), GaussianRational::from_rational(-c.im.clone())));
        }
    }
    let real_coefficients =
        lin.terms().iter().all(|(_, c)| c.im.is_zero()) && e.den().terms().iter().all(|(_, c)| c.im.is_zero());
    Ok(RealityReport {
        linear: ScalarExpr::from_poly(lin).div(&den)?,
        required_imaginary: ScalarExpr::from_poly(imag).div(&den)?,
        real_coefficients,
    })
}

/// Express `target` through the internal time, observable symbols and the kept generators,
/// by solving the observable definitions `symbol = definition` one unknown at a time.
pub fn relational_solution(
    sys: &TruncatedSystem,
    time: Var,
    target: Var,
    observables: &[(Var, ScalarExpr)],
    keep: &[Var],
) -> Result<ScalarExpr, Error> {
    if target == time {
        return Ok(ScalarExpr::var(time));
    }
    let unknown = |v: &Var| v.is_phase_space() && *v != time && !keep.contains(v);
    let mut eqs: Vec<Option<ScalarExpr>> = observables
        .iter()
        .map(|(s, d)| Ok(Some(ScalarExpr::var(*s).sub(&sys.weak_reduce(d)?))))
        .collect::<Result<_, Error>>()?;
    let mut bind: BTreeMap<Var, ScalarExpr> = BTreeMap::new();
    loop {
        let mut progress = false;
        for slot in eqs.iter_mut() {
            let Some(eq) = slot.as_ref() else { continue };
            let e = eq.substitute(&bind)?;
            let us: Vec<Var> = e.vars().into_iter().filter(|v| unknown(v)).collect();
            if us.is_empty() {
                *slot = None;
                continue;
            }
            if us.len() != 1 || e.den().contains(&us[0]) {
                continue;
            }
            let u = us[0];
            let cs = e.num().coefficients_in(&u);
            if cs.keys().max() != Some(&1) {
                continue;
            }
            let c = cs.get(&1).cloned().expect("linear");
            let rest = cs.get(&0).cloned().unwrap_or_else(Poly::zero);
            let sol = ScalarExpr::from_parts(rest.neg(), c)?;
            for v in bind.values_mut() {
                *v = v.subst1(u, &sol)?;
            }
            bind.insert(u, sol);
            *slot = None;
            progress = true;
        }
        if !progress {
            break;
        }
    }
    let r = sys.weak_reduce(&ScalarExpr::var(target))?.substitute(&bind)?;
    if r.vars().iter().any(unknown) {
        return Err(Error::Unresolvable(format!("{target:?} still depends on unsolved generators")));
    }
    Ok(r)
}

#[derive(Clone, Debug)]
pub struct AppendixReport {
    pub generated: ScalarExpr,
    pub difference: ScalarExpr,
}

impl AppendixReport {
    pub fn matches(&self) -> bool {
        self.difference.is_zero()
    }
}

/// Generate `⟨f̂Ĉⁿ⟩`, apply `bind` (e.g. `p_t ↦ C_class − p²/2M`) and compare with a
/// transcription after dropping every term with a moment of order above `keep_order`.
pub fn verify_appendix_expansion(
    op: &OperatorPoly,
    word: &MultiplierWord,
    n: u32,
    bind: &BTreeMap<Var, ScalarExpr>,
    transcription: &ScalarExpr,
    keep_order: u32,
) -> Result<AppendixReport, Error> {
    let low = |e: &ScalarExpr| e.filter_terms(|m: &Mono| m.factors().iter().all(|(v, _)| v.grade() <= keep_order || !v.is_moment()));
    let generated = low(&generate_constraint(op, word, n)?.expr.substitute(bind)?);
    let difference = generated.sub(&low(&transcription.substitute(bind)?));
    Ok(AppendixReport { generated, difference })
}
