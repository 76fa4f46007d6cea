//! Rational functions `num/den` over Q(i) with nonzero-assumption tracking.

use super::coeff::GaussianRational;
use super::poly::{Mono, Poly};
use super::var::{Labels, Var};
use crate::Error;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact rational function. Equality is decided by cross-multiplication.
#[derive(Clone, Debug)]
pub struct ScalarExpr {
    num: Poly,
    den: Poly,
    assumptions: BTreeSet<Var>,
}

/// Expressions on the quantum phase space share the scalar representation.
pub type PhaseExpression = ScalarExpr;

impl Default for ScalarExpr {
    fn default() -> Self {
        ScalarExpr::zero()
    }
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr { num: Poly::zero(), den: Poly::one(), assumptions: BTreeSet::new() }
    }

    pub fn one() -> Self {
        Self::from_poly(Poly::one())
    }

    pub fn from_poly(p: Poly) -> Self {
        ScalarExpr { num: p, den: Poly::one(), assumptions: BTreeSet::new() }
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn int(n: i64) -> Self {
        Self::constant(GaussianRational::from_int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(GaussianRational::from_ratio(n, d))
    }

    pub fn i() -> Self {
        Self::constant(GaussianRational::i())
    }

    pub fn var(v: Var) -> Self {
        Self::from_poly(Poly::var(v))
    }

    pub fn hbar() -> Self {
        Self::var(Var::Hbar)
    }

    /// `iħ/2`, ubiquitous in ordering corrections.
    pub fn i_hbar_half() -> Self {
        Self::from_poly(Poly::term(Mono::var(Var::Hbar), &GaussianRational::i() * &GaussianRational::from_ratio(1, 2)))
    }

    /// Build and normalize `num/den`.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let mut assumptions = BTreeSet::new();
        if den.as_constant().is_none() {
            assumptions.extend(den.vars());
        }
        Ok(ScalarExpr { num, den, assumptions }.normalized())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn assumptions(&self) -> &BTreeSet<Var> {
        &self.assumptions
    }

    pub fn with_assumptions(mut self, a: &BTreeSet<Var>) -> Self {
        self.assumptions.extend(a.iter().copied());
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// Polynomial view, if the denominator is 1.
    pub fn as_poly(&self) -> Option<&Poly> {
        if self.den.is_one() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        n.div(&d)
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.den = Poly::one();
            return self;
        }
        if self.den.is_one() {
            return self;
        }
        let g = self.num.monomial_content().gcd(&self.den.monomial_content());
        if !g.is_one() {
            self.num = self.num.div_mono(&g);
            self.den = self.den.div_mono(&g);
        }
        let lc = self.den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = lc.inv().expect("nonzero");
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        if self.den.is_one() {
            return self;
        }
        if let Some(q) = self.num.div_exact(&self.den) {
            self.num = q;
            self.den = Poly::one();
        } else if self.den.len() > 1 && self.num.len() > 1 {
            if let Some(d2) = self.den.div_exact(&self.num) {
                let lc = d2.leading().expect("nonzero").1.clone();
                let inv = lc.inv().expect("nonzero");
                self.num = Poly::constant(inv.clone());
                self.den = d2.scale(&inv);
            }
        }
        self
    }

    fn union(&self, o: &ScalarExpr) -> BTreeSet<Var> {
        if o.assumptions.is_empty() {
            return self.assumptions.clone();
        }
        let mut a = self.assumptions.clone();
        a.extend(o.assumptions.iter().copied());
        a
    }

    fn combine(&self, o: &ScalarExpr, negate: bool) -> ScalarExpr {
        let assumptions = self.union(o);
        let op = |a: &Poly, b: &Poly| if negate { a.sub(b) } else { a.add(b) };
        if self.den == o.den {
            let r = ScalarExpr { num: op(&self.num, &o.num), den: self.den.clone(), assumptions };
            return if r.den.is_one() { r } else { r.normalized() };
        }
        if self.den.is_monomial() && o.den.is_monomial() {
            // Both denominators are monic monomials after normalization.
            let (m1, m2) = (&self.den.terms()[0].0, &o.den.terms()[0].0);
            let l = m1.lcm(m2);
            let one = GaussianRational::one();
            let a = self.num.mul_mono(&l.div(m1).expect("lcm"), &one);
            let b = o.num.mul_mono(&l.div(m2).expect("lcm"), &one);
            return ScalarExpr { num: op(&a, &b), den: Poly::term(l, one), assumptions }.normalized();
        }
        let num = op(&self.num.mul(&o.den), &o.num.mul(&self.den));
        ScalarExpr { num, den: self.den.mul(&o.den), assumptions }.normalized()
    }

    pub fn add(&self, o: &ScalarExpr) -> ScalarExpr {
        if o.is_zero() {
            return self.clone().with_assumptions(&o.assumptions);
        }
        if self.is_zero() {
            return o.clone().with_assumptions(&self.assumptions);
        }
        self.combine(o, false)
    }

    pub fn sub(&self, o: &ScalarExpr) -> ScalarExpr {
        if o.is_zero() {
            return self.clone().with_assumptions(&o.assumptions);
        }
        self.combine(o, true)
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr { num: self.num.neg(), den: self.den.clone(), assumptions: self.assumptions.clone() }
    }

    pub fn mul(&self, o: &ScalarExpr) -> ScalarExpr {
        let assumptions = self.union(o);
        if self.is_zero() || o.is_zero() {
            return ScalarExpr { assumptions, ..ScalarExpr::zero() };
        }
        if self.den.is_one() && o.den.is_one() {
            return ScalarExpr { num: self.num.mul(&o.num), den: Poly::one(), assumptions };
        }
        ScalarExpr { num: self.num.mul(&o.num), den: self.den.mul(&o.den), assumptions }.normalized()
    }

    pub fn scale(&self, c: &GaussianRational) -> ScalarExpr {
        ScalarExpr { num: self.num.scale(c), den: self.den.clone(), assumptions: self.assumptions.clone() }.normalized()
    }

    pub fn div(&self, o: &ScalarExpr) -> Result<ScalarExpr, Error> {
        if o.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let mut assumptions = self.union(o);
        if o.num.as_constant().is_none() {
            assumptions.extend(o.num.vars());
        }
        Ok(ScalarExpr { num: self.num.mul(&o.den), den: self.den.mul(&o.num), assumptions }.normalized())
    }

    pub fn pow(&self, k: u32) -> ScalarExpr {
        let mut r = ScalarExpr::one().with_assumptions(&self.assumptions);
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn inv(&self) -> Result<ScalarExpr, Error> {
        ScalarExpr::one().div(self)
    }

    /// Equality by cross-multiplication.
    pub fn equals(&self, o: &ScalarExpr) -> bool {
        if self.den == o.den {
            return self.num == o.num;
        }
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.num.contains(v) || self.den.contains(v)
    }

    /// Quotient-rule derivative.
    pub fn derivative(&self, v: &Var) -> ScalarExpr {
        let dn = self.num.derivative(v);
        if !self.den.contains(v) {
            return ScalarExpr { num: dn, den: self.den.clone(), assumptions: self.assumptions.clone() }.normalized();
        }
        let dd = self.den.derivative(v);
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        ScalarExpr { num, den: self.den.mul(&self.den), assumptions: self.assumptions.clone() }.normalized()
    }

    /// Simultaneous substitution of expressions for symbols.
    pub fn substitute(&self, bind: &BTreeMap<Var, ScalarExpr>) -> Result<ScalarExpr, Error> {
        if bind.is_empty() || !self.vars().iter().any(|v| bind.contains_key(v)) {
            return Ok(self.clone());
        }
        let mut assumptions = self.assumptions.clone();
        for b in bind.values() {
            assumptions.extend(b.assumptions.iter().copied());
        }
        let (nn, nd) = subst_poly(&self.num, bind);
        let (dn, dd) = subst_poly(&self.den, bind);
        if dn.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let num = nn.mul(&dd);
        let den = nd.mul(&dn);
        let r = ScalarExpr { num, den, assumptions }.normalized();
        Ok(r)
    }

    /// Substitute a single symbol.
    pub fn subst1(&self, v: Var, e: &ScalarExpr) -> Result<ScalarExpr, Error> {
        let mut m = BTreeMap::new();
        m.insert(v, e.clone());
        self.substitute(&m)
    }

    /// Drop terms of λ-grade above `n`; the denominator must have grade 0.
    pub fn truncate_by_grade(&self, n: u32) -> Result<ScalarExpr, Error> {
        if self.den.max_grade() > 0 {
            return Err(Error::NonPolynomialGrade);
        }
        Ok(ScalarExpr { num: self.num.truncate_grade(n), den: self.den.clone(), assumptions: self.assumptions.clone() }
            .normalized())
    }

    /// Keep numerator terms satisfying a predicate.
    pub fn filter_terms(&self, f: impl Fn(&Mono) -> bool) -> ScalarExpr {
        ScalarExpr { num: self.num.filter(f), den: self.den.clone(), assumptions: self.assumptions.clone() }.normalized()
    }

    pub fn max_grade(&self) -> u32 {
        self.num.max_grade()
    }

    pub fn to_text(&self, labels: &Labels) -> String {
        if self.den.is_one() {
            return self.num.to_text(labels);
        }
        let n = self.num.to_text(labels);
        let n = if self.num.len() > 1 { format!("({n})") } else { n };
        let simple_den = self.den.len() == 1 && self.den.terms()[0].1.is_one() && self.den.terms()[0].0.factors().len() == 1;
        let d = self.den.to_text(labels);
        if simple_den {
            format!("{n}/{d}")
        } else {
            format!("{n}/({d})")
        }
    }
}

/// Substitute into a polynomial, returning (numerator, denominator).
fn subst_poly(p: &Poly, bind: &BTreeMap<Var, ScalarExpr>) -> (Poly, Poly) {
    let used: Vec<(Var, u32)> = p
        .vars()
        .into_iter()
        .filter(|v| bind.contains_key(v))
        .map(|v| (v, p.degree_in(&v)))
        .collect();
    if used.iter().all(|(v, _)| bind[v].den.is_one()) {
        let poly_bind: BTreeMap<Var, Poly> = used.iter().map(|(v, _)| (*v, bind[v].num.clone())).collect();
        return (p.substitute(&poly_bind), Poly::one());
    }
    // Clear denominators: Σ c Π n^k d^(K-k) / Π d^K.
    let rational: Vec<(Var, u32)> = used.iter().filter(|(v, _)| !bind[v].den.is_one()).copied().collect();
    let mut total_den = Poly::one();
    for (v, k) in &rational {
        total_den = total_den.mul(&bind[v].den.pow(*k));
    }
    let mut acc = Poly::zero();
    for (m, c) in p.terms() {
        let mut t = Poly::constant(c.clone());
        let mut rest = Vec::new();
        for &(v, k) in m.factors() {
            match bind.get(&v) {
                Some(b) => {
                    t = t.mul(&b.num.pow(k));
                    if !b.den.is_one() {
                        let kmax = p.degree_in(&v);
                        t = t.mul(&b.den.pow(kmax - k));
                    }
                }
                None => rest.push((v, k)),
            }
        }
        for (v, kmax) in &rational {
            if m.exp(v) == 0 {
                t = t.mul(&bind[v].den.pow(*kmax));
            }
        }
        acc = acc.add(&t.mul_mono(&Mono::from_factors(rest), &GaussianRational::one()));
    }
    (acc, total_den)
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl Eq for ScalarExpr {}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text(&Labels::default()))
    }
}

impl From<Poly> for ScalarExpr {
    fn from(p: Poly) -> Self {
        ScalarExpr::from_poly(p)
    }
}

impl From<Var> for ScalarExpr {
    fn from(v: Var) -> Self {
        ScalarExpr::var(v)
    }
}

impl From<i64> for ScalarExpr {
    fn from(n: i64) -> Self {
        ScalarExpr::int(n)
    }
}

impl<'a> Add<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, o: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::add(self, o)
    }
}

impl<'a> Sub<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, o: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::sub(self, o)
    }
}

impl<'a> Mul<&'a ScalarExpr> for &'a ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, o: &ScalarExpr) -> ScalarExpr {
        ScalarExpr::mul(self, o)
    }
}

impl Neg for &ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> ScalarExpr {
        ScalarExpr::neg(self)
    }
}
