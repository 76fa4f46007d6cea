//! Canonical commutation relations `[q̂ᵢ, p̂ⱼ] = iħ δᵢⱼ` on normal-ordered polynomials.
//!
//! Within a pair, positions stand left of momenta; distinct pairs commute.

use crate::symbolic_ring::{parse_ast, Ast, Canon, GaussianRational, Labels, Mono, Poly, ScalarExpr, Var, MAX_PAIRS};
use crate::Error;
use num_bigint::BigInt;
use num_traits::One;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Normal-ordered monomial: per pair (position exponent, momentum exponent).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NormalMonomial([u8; 2 * MAX_PAIRS]);

impl NormalMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// From (position, momentum) exponents per pair.
    pub fn from_pairs(pairs: &[(u8, u8)]) -> Self {
        assert!(pairs.len() <= MAX_PAIRS, "too many pairs");
        let mut e = [0u8; 2 * MAX_PAIRS];
        for (i, (a, b)) in pairs.iter().enumerate() {
            e[2 * i] = *a;
            e[2 * i + 1] = *b;
        }
        NormalMonomial(e)
    }

    pub fn basic(pair: usize, c: Canon) -> Self {
        let mut m = Self::one();
        match c {
            Canon::Q => m.0[2 * pair] = 1,
            Canon::P => m.0[2 * pair + 1] = 1,
        }
        m
    }

    pub fn pos(&self, i: usize) -> u8 {
        self.0[2 * i]
    }

    pub fn mom(&self, i: usize) -> u8 {
        self.0[2 * i + 1]
    }

    pub fn set(&mut self, i: usize, pos: u8, mom: u8) {
        self.0[2 * i] = pos;
        self.0[2 * i + 1] = mom;
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&x| x as u32).sum()
    }

    pub fn used_pairs(&self) -> usize {
        (0..MAX_PAIRS).rev().find(|&i| self.pos(i) + self.mom(i) > 0).map_or(0, |i| i + 1)
    }

    /// Exponent of a basic variable.
    pub fn exp(&self, pair: usize, c: Canon) -> u8 {
        match c {
            Canon::Q => self.pos(pair),
            Canon::P => self.mom(pair),
        }
    }

    /// Product of commuting exponent records.
    pub fn times(&self, o: &NormalMonomial) -> NormalMonomial {
        let mut r = *self;
        for k in 0..2 * MAX_PAIRS {
            r.0[k] += o.0[k];
        }
        r
    }

    /// Word text such as `q*p^2`; positions of all pairs first, then momenta.
    pub fn word_text(&self, labels: &Labels) -> String {
        let mut parts = Vec::new();
        for c in [Canon::Q, Canon::P] {
            for i in 0..MAX_PAIRS {
                let k = self.exp(i, c);
                if k > 0 {
                    let n = labels.name_of(i as u8, c);
                    parts.push(if k == 1 { n } else { format!("{n}^{k}") });
                }
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Sort key: degree, then positions (pair order) before momenta.
    fn key(&self) -> (u32, [u8; 2 * MAX_PAIRS]) {
        let mut k = [0u8; 2 * MAX_PAIRS];
        for i in 0..MAX_PAIRS {
            k[i] = self.pos(i);
            k[MAX_PAIRS + i] = self.mom(i);
        }
        (self.degree(), k)
    }
}

impl Ord for NormalMonomial {
    fn cmp(&self, o: &Self) -> Ordering {
        let (d1, k1) = self.key();
        let (d2, k2) = o.key();
        d1.cmp(&d2).then_with(|| k2.cmp(&k1))
    }
}

impl PartialOrd for NormalMonomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for NormalMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.word_text(&Labels::numbered(MAX_PAIRS)))
    }
}

/// Noncommutative polynomial in normal order with scalar coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct OperatorPoly {
    npairs: usize,
    terms: BTreeMap<NormalMonomial, ScalarExpr>,
}

pub(crate) fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut r = BigInt::one();
    for j in 0..k {
        r = r * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    r
}

pub(crate) fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, j| a * BigInt::from(j))
}

/// `(iħ)^k · c` as a scalar.
pub(crate) fn i_hbar_pow(k: u32, c: GaussianRational) -> ScalarExpr {
    let ik = GaussianRational::i().pow(k);
    ScalarExpr::from_poly(Poly::term(Mono::var_pow(Var::Hbar, k), &ik * &c))
}

impl OperatorPoly {
    pub fn zero(npairs: usize) -> Self {
        OperatorPoly { npairs, terms: BTreeMap::new() }
    }

    pub fn scalar(c: ScalarExpr, npairs: usize) -> Self {
        Self::monomial(NormalMonomial::one(), c, npairs)
    }

    pub fn one(npairs: usize) -> Self {
        Self::scalar(ScalarExpr::one(), npairs)
    }

    pub fn monomial(m: NormalMonomial, c: ScalarExpr, npairs: usize) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        OperatorPoly { npairs, terms }
    }

    pub fn basic(pair: usize, c: Canon, npairs: usize) -> Self {
        Self::monomial(NormalMonomial::basic(pair, c), ScalarExpr::one(), npairs)
    }

    pub fn q(pair: usize, npairs: usize) -> Self {
        Self::basic(pair, Canon::Q, npairs)
    }

    pub fn p(pair: usize, npairs: usize) -> Self {
        Self::basic(pair, Canon::P, npairs)
    }

    pub fn npairs(&self) -> usize {
        self.npairs
    }

    pub fn terms(&self) -> &BTreeMap<NormalMonomial, ScalarExpr> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    fn insert_add(&mut self, m: NormalMonomial, c: ScalarExpr) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                let s = x.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, o: &OperatorPoly) -> Result<OperatorPoly, Error> {
        self.check(o)?;
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.insert_add(*m, c.clone());
        }
        Ok(r)
    }

    pub fn sub(&self, o: &OperatorPoly) -> Result<OperatorPoly, Error> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> OperatorPoly {
        self.scale(&ScalarExpr::int(-1))
    }

    pub fn scale(&self, c: &ScalarExpr) -> OperatorPoly {
        let mut r = OperatorPoly::zero(self.npairs);
        for (m, x) in &self.terms {
            r.insert_add(*m, x.mul(c));
        }
        r
    }

    fn check(&self, o: &OperatorPoly) -> Result<(), Error> {
        if self.npairs != o.npairs {
            Err(Error::PairMismatch)
        } else {
            Ok(())
        }
    }

    /// Normal-ordered product.
    pub fn mul(&self, o: &OperatorPoly) -> Result<OperatorPoly, Error> {
        self.check(o)?;
        let mut r = OperatorPoly::zero(self.npairs);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let c = c1.mul(c2);
                for (m, k) in mono_product(m1, m2, self.npairs) {
                    r.insert_add(m, c.mul(&k));
                }
            }
        }
        Ok(r)
    }

    pub fn pow(&self, n: u32) -> Result<OperatorPoly, Error> {
        let mut r = OperatorPoly::one(self.npairs);
        for _ in 0..n {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    pub fn commutator(&self, o: &OperatorPoly) -> Result<OperatorPoly, Error> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    /// Map coefficients through a function.
    pub fn map_coeffs(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> OperatorPoly {
        let mut r = OperatorPoly::zero(self.npairs);
        for (m, c) in &self.terms {
            r.insert_add(*m, f(c));
        }
        r
    }

    pub fn to_text(&self, labels: &Labels) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mut f = Vec::new();
            for i in 0..self.npairs {
                for (cn, name) in [(Canon::Q, "qhat"), (Canon::P, "phat")] {
                    let k = m.exp(i, cn);
                    if k == 1 {
                        f.push(format!("{name}({i})"));
                    } else if k > 1 {
                        f.push(format!("{name}({i})^{k}"));
                    }
                }
            }
            let ops = f.join("*");
            let ct = c.to_text(labels);
            let coef = if c.num().len() > 1 { format!("({ct})") } else { ct };
            parts.push(if ops.is_empty() {
                coef
            } else if c.equals(&ScalarExpr::one()) {
                ops
            } else {
                format!("{coef}*{ops}")
            });
        }
        parts.join(" + ")
    }
}

/// Product of two normal monomials as (monomial, scalar) terms.
fn mono_product(a: &NormalMonomial, b: &NormalMonomial, npairs: usize) -> Vec<(NormalMonomial, ScalarExpr)> {
    // Per pair: Σ_k k!·C(b₁,k)·C(a₂,k)·(−iħ)^k q^{a₁+a₂−k} p^{b₁+b₂−k}.
    let mut acc: Vec<(NormalMonomial, u32, BigInt)> = vec![(NormalMonomial::one(), 0, BigInt::one())];
    for i in 0..npairs {
        let (a1, b1, a2, b2) = (a.pos(i) as u32, a.mom(i) as u32, b.pos(i) as u32, b.mom(i) as u32);
        let kmax = b1.min(a2);
        let mut next = Vec::with_capacity(acc.len() * (kmax as usize + 1));
        for (m, h, c) in &acc {
            for k in 0..=kmax {
                let w = factorial(k) * binom(b1, k) * binom(a2, k);
                let mut m2 = *m;
                m2.set(i, (a1 + a2 - k) as u8, (b1 + b2 - k) as u8);
                next.push((m2, h + k, c * w));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(m, h, c)| {
            let sign = if h % 2 == 1 { -c } else { c };
            (m, i_hbar_pow(h, GaussianRational::from_bigint(sign)))
        })
        .collect()
}

/// Basic-operator sequence for a monomial: pair by pair, positions then momenta.
pub fn peel_sequence(m: &NormalMonomial) -> Vec<(usize, Canon)> {
    let mut s = Vec::new();
    for i in 0..MAX_PAIRS {
        s.extend(std::iter::repeat_n((i, Canon::Q), m.pos(i) as usize));
        s.extend(std::iter::repeat_n((i, Canon::P), m.mom(i) as usize));
    }
    s
}

/// Weyl-symmetrized monomial built by the anticommutator recursion in the given order.
pub fn weyl_from_sequence(seq: &[(usize, Canon)], npairs: usize) -> OperatorPoly {
    let half = ScalarExpr::ratio(1, 2);
    let mut w = OperatorPoly::one(npairs);
    for &(i, c) in seq {
        let x = OperatorPoly::basic(i, c, npairs);
        let s = w.mul(&x).and_then(|a| a.add(&x.mul(&w)?)).expect("same pair table");
        w = s.scale(&half);
    }
    w
}

/// Totally symmetrized product of basic operators, in normal order.
pub fn weyl_monomial(m: &NormalMonomial, npairs: usize) -> OperatorPoly {
    weyl_from_sequence(&peel_sequence(m), npairs)
}

/// Rewrite in centered operators `δx̂ = x̂ − x`; monomials of the result denote δ-products.
pub fn shift_by_expectations(a: &OperatorPoly) -> OperatorPoly {
    let n = a.npairs;
    let mut r = OperatorPoly::zero(n);
    for (m, c) in &a.terms {
        // (q + δq)^a (p + δp)^b per pair; scalars commute so normal order is kept.
        let mut acc: Vec<(NormalMonomial, ScalarExpr)> = vec![(NormalMonomial::one(), c.clone())];
        for i in 0..n {
            let (ea, eb) = (m.pos(i) as u32, m.mom(i) as u32);
            if ea + eb == 0 {
                continue;
            }
            let mut next = Vec::new();
            for (mm, cc) in &acc {
                for x in 0..=ea {
                    for y in 0..=eb {
                        let w = binom(ea, x) * binom(eb, y);
                        let mono = Mono::from_factors(vec![(Var::q(i as u8), ea - x), (Var::p(i as u8), eb - y)]);
                        let s = ScalarExpr::from_poly(Poly::term(mono, GaussianRational::from_bigint(w)));
                        let mut m2 = *mm;
                        m2.set(i, x as u8, y as u8);
                        next.push((m2, cc.mul(&s)));
                    }
                }
            }
            acc = next;
        }
        for (mm, cc) in acc {
            r.insert_add(mm, cc);
        }
    }
    r
}

/// Evaluate a syntax tree as an operator; scalar atoms are parameters, `hbar`, `i`.
pub fn eval_operator(ast: &Ast, labels: &Labels) -> Result<OperatorPoly, Error> {
    let n = labels.npairs();
    Ok(match ast {
        Ast::Hat(i, c) => {
            if *i >= n {
                return Err(Error::Parse(format!("pair index {i} not declared")));
            }
            OperatorPoly::basic(*i, *c, n)
        }
        Ast::Ident(s) => {
            if let Some((i, c)) = s.strip_suffix("hat").and_then(|b| labels.basic(b)) {
                OperatorPoly::basic(i, c, n)
            } else {
                match labels.resolve(s) {
                    Some(v @ (Var::Hbar | Var::Param(_))) => OperatorPoly::scalar(ScalarExpr::var(v), n),
                    _ => return Err(Error::Parse(format!("symbol {s:?} is not allowed in an operator"))),
                }
            }
        }
        Ast::Num(_) | Ast::I => OperatorPoly::scalar(crate::symbolic_ring::eval_scalar(ast, labels)?, n),
        Ast::Moment(_) | Ast::F(_) | Ast::Bracket(..) => {
            return Err(Error::Parse("moment symbols are not operators".into()))
        }
        Ast::Add(a, b) => eval_operator(a, labels)?.add(&eval_operator(b, labels)?)?,
        Ast::Sub(a, b) => eval_operator(a, labels)?.sub(&eval_operator(b, labels)?)?,
        Ast::Mul(a, b) => eval_operator(a, labels)?.mul(&eval_operator(b, labels)?)?,
        Ast::Div(a, b) => {
            let d = eval_operator(b, labels)?;
            let dc = match d.terms.iter().next() {
                None => return Err(Error::ZeroDivisor),
                Some((m, c)) if d.terms.len() == 1 && *m == NormalMonomial::one() => c.clone(),
                _ => return Err(Error::Parse("division by an operator".into())),
            };
            eval_operator(a, labels)?.scale(&dc.inv()?)
        }
        Ast::Neg(a) => eval_operator(a, labels)?.neg(),
        Ast::Pow(a, k) => {
            if *k < 0 {
                return Err(Error::Parse("negative operator power".into()));
            }
            eval_operator(a, labels)?.pow(*k as u32)?
        }
    })
}

/// Parse operator text such as `phat(1) + phat(0)^2/(2*M)`.
pub fn parse_operator(text: &str, labels: &Labels) -> Result<OperatorPoly, Error> {
    eval_operator(&parse_ast(text)?, labels)
}
