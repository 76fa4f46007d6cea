//! Linear search for functions commuting weakly with every independent constraint.

use super::{dedupe, graded_constant, phase_coefficients, Matrix, TruncatedSystem};
use crate::constraint_factory::Label;
use crate::symbolic_ring::{Poly, ScalarExpr};
use crate::Error;
use std::collections::BTreeMap;

/// Candidates are `m·g` for multipliers `m` and free generators `g` of order at most `grade`,
/// including `g = 1` and, from grade 2 on, `g = ħ`. Coefficients are rational functions of
/// the parameters; ħ stays graded so products never exceed the truncation.
#[derive(Clone, Debug)]
pub struct ObservableAnsatz {
    pub grade: u32,
    pub multipliers: Vec<ScalarExpr>,
}

impl ObservableAnsatz {
    pub fn plain(grade: u32) -> Self {
        ObservableAnsatz { grade, multipliers: vec![ScalarExpr::one()] }
    }
}

#[derive(Clone, Debug)]
pub struct ObservableRecord {
    pub name: String,
    pub expr: ScalarExpr,
    pub verified_to: u32,
}

fn candidates(sys: &TruncatedSystem, ansatz: &ObservableAnsatz) -> Vec<ScalarExpr> {
    let mut c = Vec::new();
    let mut gens: Vec<ScalarExpr> = vec![ScalarExpr::one()];
    if ansatz.grade >= 2 {
        gens.push(ScalarExpr::hbar());
    }
    gens.extend(sys.free_generators(ansatz.grade).into_iter().map(ScalarExpr::var));
    for m in &ansatz.multipliers {
        for g in &gens {
            let x = m.mul(g);
            if !graded_constant(&x) {
                c.push(x);
            }
        }
    }
    dedupe(c)
}

/// Linear equations over the coefficient field: rows indexed by (constraint, phase monomial).
fn bracket_rows(sys: &TruncatedSystem, cands: &[ScalarExpr]) -> Result<Vec<Vec<ScalarExpr>>, Error> {
    let mut rows = Vec::new();
    for e in sys.independent() {
        let mut br = Vec::with_capacity(cands.len());
        for c in cands {
            br.push(sys.weak_reduce(&sys.bracket(c, &e.raw)?)?);
        }
        rows.extend(linear_rows(&br)?);
    }
    Ok(rows)
}

/// Rows expressing `Σ x_k e_k = 0` with `x_k` free of phase-space symbols and ħ.
pub(crate) fn linear_rows(es: &[ScalarExpr]) -> Result<Vec<Vec<ScalarExpr>>, Error> {
    let mut dens: Vec<Poly> = Vec::new();
    for e in es {
        if !e.is_zero() && !e.den().is_one() && !dens.iter().any(|d| d == e.den()) {
            dens.push(e.den().clone());
        }
    }
    let common = dens.iter().fold(Poly::one(), |a, d| a.mul(d));
    let mut table: BTreeMap<_, Vec<ScalarExpr>> = BTreeMap::new();
    for (k, e) in es.iter().enumerate() {
        if e.is_zero() {
            continue;
        }
        let scaled = common.div_exact(e.den()).ok_or(Error::ZeroDivisor)?.mul(e.num());
        for (m, coeff) in phase_coefficients(&scaled) {
            let row = table.entry(m).or_insert_with(|| vec![ScalarExpr::zero(); es.len()]);
            row[k] = ScalarExpr::from_poly(coeff);
        }
    }
    Ok(table.into_values().collect())
}

/// Basis of observables within the ansatz, each normalized to leading coefficient 1.
pub fn find_observables(sys: &TruncatedSystem, ansatz: &ObservableAnsatz) -> Result<Vec<ObservableRecord>, Error> {
    let cands = candidates(sys, ansatz);
    let rows = bracket_rows(sys, &cands)?;
    let m = if rows.is_empty() { Matrix::zeros(0, cands.len()) } else { Matrix::from_rows(rows) };
    let mut out = Vec::new();
    for v in m.nullspace() {
        let lead = v.iter().find(|x| !x.is_zero()).expect("nonzero null vector").inv()?;
        let mut e = ScalarExpr::zero();
        for (x, c) in v.iter().zip(&cands) {
            if !x.is_zero() {
                e = e.add(&x.mul(&lead).mul(c));
            }
        }
        out.push(ObservableRecord { name: format!("O{}", out.len() + 1), expr: e, verified_to: sys.order() });
    }
    Ok(out)
}

/// Weak brackets with the independent constraints that fail to vanish.
pub fn verify_observable(sys: &TruncatedSystem, expr: &ScalarExpr) -> Result<Vec<(Label, ScalarExpr)>, Error> {
    let mut out = Vec::new();
    for e in sys.independent() {
        let r = sys.weak_reduce(&sys.bracket(expr, &e.raw)?)?;
        if !r.is_zero() {
            out.push((e.label, r));
        }
    }
    Ok(out)
}

/// Whether `expr`, reduced on the surface, is a combination of `basis` plus a constant,
/// with coefficients free of phase-space symbols and ħ.
pub fn in_span(sys: &TruncatedSystem, basis: &[ScalarExpr], expr: &ScalarExpr) -> Result<bool, Error> {
    let mut es = vec![ScalarExpr::one(), ScalarExpr::hbar(), ScalarExpr::hbar().pow(2)];
    for b in basis {
        es.push(sys.weak_reduce(b)?);
    }
    let target = sys.weak_reduce(expr)?;
    let mut all = es.clone();
    all.push(target);
    let rows = linear_rows(&all)?;
    if rows.is_empty() {
        return Ok(true);
    }
    let full = Matrix::from_rows(rows);
    let mut left = Matrix::zeros(full.rows, es.len());
    for i in 0..full.rows {
        for j in 0..es.len() {
            left.set(i, j, full.get(i, j).clone());
        }
    }
    Ok(left.rank() == full.rank())
}
