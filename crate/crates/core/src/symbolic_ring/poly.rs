//! Sparse multivariate polynomials over Q(i) in graded-lexicographic order.

use super::coeff::GaussianRational;
use super::var::{Labels, Var};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A monomial: sorted (symbol, exponent) list with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono(Vec<(Var, u32)>);

impl Mono {
    pub fn one() -> Mono {
        Mono(Vec::new())
    }

    pub fn var(v: Var) -> Mono {
        Mono(vec![(v, 1)])
    }

    pub fn var_pow(v: Var, k: u32) -> Mono {
        if k == 0 {
            Mono::one()
        } else {
            Mono(vec![(v, k)])
        }
    }

    pub fn from_factors(mut f: Vec<(Var, u32)>) -> Mono {
        f.retain(|x| x.1 > 0);
        f.sort_by_key(|x| x.0);
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(f.len());
        for (v, k) in f {
            match out.last_mut() {
                Some(l) if l.0 == v => l.1 += k,
                _ => out.push((v, k)),
            }
        }
        Mono(out)
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|x| x.1).sum()
    }

    pub fn grade(&self) -> u32 {
        self.0.iter().map(|(v, k)| v.grade() * k).sum()
    }

    pub fn exp(&self, v: &Var) -> u32 {
        self.0.binary_search_by(|x| x.0.cmp(v)).map_or(0, |i| self.0[i].1)
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let (a, b) = (&self.0, &o.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// Exact quotient `self / o`, if `o` divides `self`.
    pub fn div(&self, o: &Mono) -> Option<Mono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, k) in &self.0 {
            if j < o.0.len() && o.0[j].0 < v {
                return None;
            }
            if j < o.0.len() && o.0[j].0 == v {
                let d = o.0[j].1;
                j += 1;
                if d > k {
                    return None;
                }
                if d < k {
                    out.push((v, k - d));
                }
            } else {
                out.push((v, k));
            }
        }
        if j < o.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    pub fn gcd(&self, o: &Mono) -> Mono {
        let mut out = Vec::new();
        for &(v, k) in &self.0 {
            let e = o.exp(&v);
            if e > 0 {
                out.push((v, k.min(e)));
            }
        }
        Mono(out)
    }

    pub fn lcm(&self, o: &Mono) -> Mono {
        let g = self.gcd(o);
        self.mul(o).div(&g).expect("gcd divides product")
    }

    /// Remove a symbol entirely, returning its exponent.
    pub fn without(&self, v: &Var) -> (Mono, u32) {
        let k = self.exp(v);
        (Mono(self.0.iter().filter(|x| x.0 != *v).copied().collect()), k)
    }

    pub fn to_text(&self, labels: &Labels) -> String {
        self.0
            .iter()
            .map(|(v, k)| {
                let t = labels.var_text(v);
                if *k == 1 {
                    t
                } else {
                    format!("{t}^{k}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Graded lexicographic order: total degree first, then the mono with the larger
/// exponent on the earliest differing symbol is greater.
pub fn grlex(a: &Mono, b: &Mono) -> Ordering {
    match a.degree().cmp(&b.degree()) {
        Ordering::Equal => {}
        o => return o,
    }
    let (x, y) = (&a.0, &b.0);
    let (mut i, mut j) = (0, 0);
    loop {
        match (x.get(i), y.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(p), Some(q)) => match p.0.cmp(&q.0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match p.1.cmp(&q.1) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    o => return o,
                },
            },
        }
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex(self, other)
    }
}

/// Polynomial with terms sorted in descending monomial order and no zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: Vec<(Mono, GaussianRational)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Poly {
        Poly::term(Mono::one(), c)
    }

    pub fn term(m: Mono, c: GaussianRational) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    pub fn var(v: Var) -> Poly {
        Poly::term(Mono::var(v), GaussianRational::one())
    }

    /// Build from arbitrary terms, combining duplicates.
    pub fn from_terms(it: impl IntoIterator<Item = (Mono, GaussianRational)>) -> Poly {
        let mut map: HashMap<Mono, GaussianRational> = HashMap::new();
        for (m, c) in it {
            match map.get_mut(&m) {
                Some(x) => *x = &*x + &c,
                None => {
                    map.insert(m, c);
                }
            }
        }
        Poly::from_map(map)
    }

    fn from_map(map: HashMap<Mono, GaussianRational>) -> Poly {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Mono, GaussianRational)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Mono, GaussianRational)> {
        self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant value if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.as_slice() {
            [] => Some(GaussianRational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<&(Mono, GaussianRational)> {
        self.terms.first()
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        self.merge(o, false)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.merge(o, true)
    }

    fn merge(&self, o: &Poly, negate: bool) -> Poly {
        let (a, b) = (&self.terms, &o.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let nb = |c: &GaussianRational| if negate { -c } else { c.clone() };
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((b[j].0.clone(), nb(&b[j].1)));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        out.extend(b[j..].iter().map(|(m, c)| (m.clone(), nb(c))));
        Poly { terms: out }
    }

    pub fn scale(&self, c: &GaussianRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    /// Multiply by a monomial; order is preserved.
    pub fn mul_mono(&self, m: &Mono, c: &GaussianRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(x, k)| (x.mul(m), k * c)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.terms.len() == 1 {
            return self.mul_mono(&o.terms[0].0, &o.terms[0].1);
        }
        if self.terms.len() == 1 {
            return o.mul_mono(&self.terms[0].0, &self.terms[0].1);
        }
        let mut map: HashMap<Mono, GaussianRational> = HashMap::with_capacity(self.len() * o.len());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                match map.get_mut(&m) {
                    Some(x) => *x = &*x + &c,
                    None => {
                        map.insert(m, c);
                    }
                }
            }
        }
        Poly::from_map(map)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.iter().flat_map(|(m, _)| m.factors().iter().map(|x| x.0)).collect()
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.terms.iter().any(|(m, _)| m.exp(v) > 0)
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(v)).max().unwrap_or(0)
    }

    pub fn max_grade(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.grade()).max().unwrap_or(0)
    }

    pub fn derivative(&self, v: &Var) -> Poly {
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let (rest, k) = m.without(v);
            if k == 0 {
                return None;
            }
            let m2 = rest.mul(&Mono::var_pow(*v, k - 1));
            Some((m2, c * &GaussianRational::from_int(k as i64)))
        }))
    }

    /// Keep terms satisfying the predicate.
    pub fn filter(&self, f: impl Fn(&Mono) -> bool) -> Poly {
        Poly { terms: self.terms.iter().filter(|(m, _)| f(m)).cloned().collect() }
    }

    pub fn truncate_grade(&self, n: u32) -> Poly {
        self.filter(|m| m.grade() <= n)
    }

    /// Coefficients of powers of `v`: self = Σ_k coeff_k · v^k.
    pub fn coefficients_in(&self, v: &Var) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Vec<(Mono, GaussianRational)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, k) = m.without(v);
            out.entry(k).or_default().push((rest, c.clone()));
        }
        out.into_iter().map(|(k, t)| (k, Poly::from_terms(t))).collect()
    }

    /// Split terms into (key monomial in symbols chosen by `key`, coefficient polynomial in the rest).
    pub fn collect_by(&self, key: impl Fn(&Var) -> bool) -> BTreeMap<Mono, Poly> {
        let mut out: BTreeMap<Mono, Vec<(Mono, GaussianRational)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (k, r): (Vec<_>, Vec<_>) = m.factors().iter().partition(|x| key(&x.0));
            out.entry(Mono(k)).or_default().push((Mono(r), c.clone()));
        }
        out.into_iter().map(|(k, t)| (k, Poly::from_terms(t))).collect()
    }

    /// Gcd of all monomials.
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.iter();
        let Some(first) = it.next() else { return Mono::one() };
        let mut g = first.0.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(x, c)| (x.div(m).expect("monomial content divides"), c.clone())).collect(),
        }
    }

    /// Exact division; `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (lm, lc) = d.leading()?;
        let lc_inv = lc.inv()?;
        if d.len() == 1 {
            let mut out = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                out.push((m.div(lm)?, c * &lc_inv));
            }
            return Some(Poly { terms: out });
        }
        let mut r = self.clone();
        let mut q = Vec::new();
        while let Some((rm, rc)) = r.leading().cloned() {
            let m = rm.div(lm)?;
            let c = &rc * &lc_inv;
            r = r.sub(&d.mul_mono(&m, &c));
            q.push((m, c));
        }
        Some(Poly::from_terms(q))
    }

    /// Simultaneous substitution of polynomials for symbols.
    pub fn substitute(&self, bind: &BTreeMap<Var, Poly>) -> Poly {
        if bind.is_empty() || !self.vars().iter().any(|v| bind.contains_key(v)) {
            return self.clone();
        }
        let mut cache: HashMap<(Var, u32), Poly> = HashMap::new();
        let mut acc: HashMap<Mono, GaussianRational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut keep = Vec::new();
            let mut p = Poly::one();
            for &(v, k) in m.factors() {
                if let Some(b) = bind.get(&v) {
                    let pw = cache.entry((v, k)).or_insert_with(|| b.pow(k)).clone();
                    p = p.mul(&pw);
                } else {
                    keep.push((v, k));
                }
            }
            let t = p.mul_mono(&Mono(keep), c);
            for (mm, cc) in t.terms {
                match acc.get_mut(&mm) {
                    Some(x) => *x = &*x + &cc,
                    None => {
                        acc.insert(mm, cc);
                    }
                }
            }
        }
        Poly::from_map(acc)
    }

    pub fn to_text(&self, labels: &Labels) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let t = term_text(m, c, labels);
            if idx == 0 {
                s.push_str(&t);
            } else if let Some(rest) = t.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(&t);
            }
        }
        s
    }
}

/// One term in the canonical grammar, e.g. `-3*i*hbar*p/2`.
fn term_text(m: &Mono, c: &GaussianRational, labels: &Labels) -> String {
    let mono = m.to_text(labels);
    if !c.re.is_zero_ratio() && !c.im.is_zero_ratio() {
        let body = format!("({c})");
        return if mono.is_empty() { body } else { format!("{body}*{mono}") };
    }
    let (r, imag) = if c.im.is_zero_ratio() { (&c.re, false) } else { (&c.im, true) };
    let n = r.numer();
    let d = r.denom();
    let mut parts: Vec<String> = Vec::new();
    let neg = n < &num_bigint::BigInt::from(0);
    let an = if neg { -n.clone() } else { n.clone() };
    let one = num_bigint::BigInt::from(1);
    if an != one || (!imag && mono.is_empty()) {
        parts.push(an.to_string());
    }
    if imag {
        parts.push("i".into());
    }
    if !mono.is_empty() {
        parts.push(mono);
    }
    let mut s = parts.join("*");
    if *d != one {
        s.push('/');
        s.push_str(&d.to_string());
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

trait IsZeroRatio {
    fn is_zero_ratio(&self) -> bool;
}

impl IsZeroRatio for num_rational::BigRational {
    fn is_zero_ratio(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Poly {
        Poly::var(Var::p(0))
    }
    fn q() -> Poly {
        Poly::var(Var::q(0))
    }

    #[test]
    fn grlex_degree_first() {
        let a = Mono::var_pow(Var::q(0), 2);
        let b = Mono::var(Var::Hbar);
        assert_eq!(grlex(&a, &b), Ordering::Greater);
        let c = Mono::var(Var::q(0));
        assert_eq!(grlex(&b, &c), Ordering::Greater);
    }

    #[test]
    fn exact_division() {
        let a = q().add(&p());
        let b = q().sub(&p());
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(q().mul(&q()).add(&Poly::one()).div_exact(&a), None);
    }

    #[test]
    fn term_printing() {
        let l = Labels::numbered(1);
        let t = Poly::term(Mono::var(Var::Hbar), &GaussianRational::i() * &GaussianRational::from_ratio(1, 2));
        assert_eq!(t.to_text(&l), "i*hbar/2");
        let u = q().scale(&GaussianRational::from_int(-3)).sub(&Poly::one());
        assert_eq!(u.to_text(&l), "-3*q - 1");
    }
}
