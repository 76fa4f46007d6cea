//! The quantum phase space: expectation values and central Weyl moments.
//!
//! A moment `G[a,b;c,d]` is the expectation of the Weyl-ordered product of
//! `a` factors `δp̂`, `b` factors `δq̂` of pair 0, and likewise for pair 1.
//! Brackets follow `{⟨Â⟩,⟨B̂⟩} = ⟨[Â,B̂]⟩/(iħ)`, so `{q,p} = 1`.

use crate::symbolic_ring::{
    eval_scalar, moment_or_constant, parse_ast, Ast, Canon, Labels, Exps, GaussianRational, Mono, Poly, ScalarExpr, Var, MAX_PAIRS,
};
use crate::weyl_algebra::{binom, factorial, shift_by_expectations, weyl_monomial, NormalMonomial, OperatorPoly};
use crate::Error;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{OnceLock, RwLock};

/// Exponent record of a moment as a normal monomial (position, momentum) per pair.
pub fn exps_to_normal(e: &Exps) -> NormalMonomial {
    let pairs: Vec<(u8, u8)> = (0..MAX_PAIRS).map(|i| (e.pos(i), e.mom(i))).collect();
    NormalMonomial::from_pairs(&pairs)
}

pub fn normal_to_exps(m: &NormalMonomial) -> Exps {
    let pairs: Vec<(u8, u8)> = (0..MAX_PAIRS).map(|i| (m.mom(i), m.pos(i))).collect();
    Exps::from_pairs(&pairs)
}

type Shape = Vec<(u32, GaussianRational)>;

fn basis_cache() -> &'static RwLock<HashMap<(u8, u8), Shape>> {
    static C: OnceLock<RwLock<HashMap<(u8, u8), Shape>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Single-pair change of basis: `δq^i δp^j = Σ_k c_k ħ^k W(δq^{i−k} δp^{j−k})`.
pub fn normal_to_weyl(i: u8, j: u8) -> Shape {
    if let Some(s) = basis_cache().read().expect("cache").get(&(i, j)) {
        return s.clone();
    }
    // Invert the triangular expansion W(q^i p^j) = q^i p^j + Σ_{k≥1} w_k q^{i−k} p^{j−k}.
    let w = weyl_monomial(&NormalMonomial::from_pairs(&[(i, j)]), 1);
    let mut out: BTreeMap<u32, GaussianRational> = BTreeMap::new();
    out.insert(0, GaussianRational::one());
    for (m, c) in w.terms() {
        let k = (i - m.pos(0)) as u32;
        if k == 0 {
            continue;
        }
        let (hk, coef) = hbar_power(c);
        debug_assert_eq!(hk, k);
        for (k2, c2) in normal_to_weyl(m.pos(0), m.mom(0)) {
            let e = out.entry(k + k2).or_insert_with(GaussianRational::zero);
            *e = &*e - &(&coef * &c2);
        }
    }
    let s: Shape = out.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    basis_cache().write().expect("cache").insert((i, j), s.clone());
    s
}

/// Split `c·ħ^k` into `(k, c)`.
fn hbar_power(e: &ScalarExpr) -> (u32, GaussianRational) {
    let p = e.as_poly().expect("polynomial coefficient");
    match p.terms() {
        [(m, c)] => {
            let k = m.exp(&Var::Hbar);
            assert_eq!(m.degree(), k, "coefficient must be a pure power of hbar");
            (k, c.clone())
        }
        _ => panic!("coefficient must be a single term"),
    }
}

/// Expectation of a polynomial in centered operators (monomials read as δ-products).
pub fn centered_expectation(a: &OperatorPoly) -> ScalarExpr {
    let mut acc = ScalarExpr::zero();
    for (m, c) in a.terms() {
        acc = acc.add(&c.mul(&centered_monomial(m)));
    }
    acc
}

/// `⟨δ-monomial⟩` in moments.
fn centered_monomial(m: &NormalMonomial) -> ScalarExpr {
    if m.degree() == 0 {
        return ScalarExpr::one();
    }
    if m.degree() == 1 {
        return ScalarExpr::zero();
    }
    let mut acc: Vec<(Exps, u32, GaussianRational)> = vec![(Exps::default(), 0, GaussianRational::one())];
    for i in 0..m.used_pairs() {
        let shape = normal_to_weyl(m.pos(i), m.mom(i));
        let mut next = Vec::new();
        for (e, h, c) in &acc {
            for (k, ck) in &shape {
                let mut e2 = *e;
                e2.set_pos(i, m.pos(i) - *k as u8);
                e2.set_mom(i, m.mom(i) - *k as u8);
                next.push((e2, h + k, c * ck));
            }
        }
        acc = next;
    }
    let mut terms = Vec::new();
    for (e, h, c) in acc {
        match e.order() {
            0 => terms.push((Mono::var_pow(Var::Hbar, h), c)),
            1 => {}
            _ => terms.push((Mono::from_factors(vec![(Var::Hbar, h), (Var::Moment(e), 1)]), c)),
        }
    }
    ScalarExpr::from_poly(Poly::from_terms(terms))
}

/// `⟨Â⟩` in expectation values and moments.
pub fn expectation(a: &OperatorPoly) -> ScalarExpr {
    centered_expectation(&shift_by_expectations(a))
}

/// `⟨normal monomial⟩` as an F-chart symbol (degree ≥ 2), expectation value, or 1.
fn f_symbol(m: &NormalMonomial) -> ScalarExpr {
    match m.degree() {
        0 => ScalarExpr::one(),
        1 => {
            let i = (0..MAX_PAIRS).find(|&i| m.pos(i) + m.mom(i) > 0).expect("degree one");
            ScalarExpr::var(if m.pos(i) > 0 { Var::q(i as u8) } else { Var::p(i as u8) })
        }
        _ => ScalarExpr::var(Var::F(normal_to_exps(m))),
    }
}

/// Expectation in the F chart: every normal monomial becomes its own coordinate.
pub fn f_expectation(a: &OperatorPoly) -> ScalarExpr {
    let mut acc = ScalarExpr::zero();
    for (m, c) in a.terms() {
        acc = acc.add(&c.mul(&f_symbol(m)));
    }
    acc
}

/// Rewrite moments in F-chart coordinates.
pub fn g_to_f(e: &ScalarExpr) -> Result<ScalarExpr, Error> {
    let mut bind = BTreeMap::new();
    for v in e.vars() {
        if let Var::Moment(x) = v {
            bind.insert(v, moment_in_f(&x));
        }
    }
    e.substitute(&bind)
}

fn moment_in_f(x: &Exps) -> ScalarExpr {
    // W(δ^x) in normal order, then δq^a δp^b = Σ C(a,u)C(b,v)(−q)^{a−u}(−p)^{b−v} q̂^u p̂^v.
    let w = weyl_monomial(&exps_to_normal(x), MAX_PAIRS);
    let mut acc = ScalarExpr::zero();
    for (m, c) in w.terms() {
        let mut parts: Vec<(NormalMonomial, ScalarExpr)> = vec![(NormalMonomial::one(), c.clone())];
        for i in 0..m.used_pairs() {
            let (a, b) = (m.pos(i) as u32, m.mom(i) as u32);
            let mut next = Vec::new();
            for (mm, cc) in &parts {
                for u in 0..=a {
                    for v in 0..=b {
                        let sign = if (a - u + b - v) % 2 == 1 { -1 } else { 1 };
                        let w = binom(a, u) * binom(b, v) * sign;
                        let mono = Mono::from_factors(vec![(Var::q(i as u8), a - u), (Var::p(i as u8), b - v)]);
                        let s = ScalarExpr::from_poly(Poly::term(mono, GaussianRational::from_bigint(w)));
                        let mut m2 = *mm;
                        m2.set(i, u as u8, v as u8);
                        next.push((m2, cc.mul(&s)));
                    }
                }
            }
            parts = next;
        }
        for (mm, cc) in parts {
            acc = acc.add(&cc.mul(&f_symbol(&mm)));
        }
    }
    acc
}

/// Rewrite F-chart coordinates as expectation values and moments.
pub fn f_to_g(e: &ScalarExpr) -> Result<ScalarExpr, Error> {
    let mut bind = BTreeMap::new();
    for v in e.vars() {
        if let Var::F(x) = v {
            bind.insert(v, expectation(&OperatorPoly::monomial(exps_to_normal(&x), ScalarExpr::one(), MAX_PAIRS)));
        }
    }
    e.substitute(&bind)
}

/// A generator as a centered operator `Â(x)` with its explicit dependence on expectation values.
struct GenOp {
    op: OperatorPoly,
    derivs: Vec<(Var, OperatorPoly)>,
}

fn gen_op(v: &Var) -> GenOp {
    let n = MAX_PAIRS;
    match v {
        Var::Expect(i, c) => {
            let i = *i as usize;
            let op = OperatorPoly::scalar(ScalarExpr::var(*v), n).add(&OperatorPoly::basic(i, *c, n)).expect("pairs");
            GenOp { op, derivs: Vec::new() }
        }
        Var::Moment(e) => {
            let m = exps_to_normal(e);
            let op = weyl_monomial(&m, n);
            let mut derivs = Vec::new();
            for i in 0..MAX_PAIRS {
                for c in [Canon::Q, Canon::P] {
                    let k = m.exp(i, c);
                    if k == 0 {
                        continue;
                    }
                    let mut m2 = m;
                    match c {
                        Canon::Q => m2.set(i, k - 1, m.mom(i)),
                        Canon::P => m2.set(i, m.pos(i), k - 1),
                    }
                    let d = weyl_monomial(&m2, n).scale(&ScalarExpr::int(-(k as i64)));
                    derivs.push((Var::Expect(i as u8, c), d));
                }
            }
            GenOp { op, derivs }
        }
        _ => panic!("not a G-chart generator: {v:?}"),
    }
}

fn bracket_cache() -> &'static RwLock<HashMap<(Var, Var), ScalarExpr>> {
    static C: OnceLock<RwLock<HashMap<(Var, Var), ScalarExpr>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn over_i_hbar(e: &ScalarExpr) -> ScalarExpr {
    // Commutators carry an explicit ħ factor, so this is exact polynomial division.
    let p = e.as_poly().expect("polynomial commutator");
    let d = Poly::term(Mono::var(Var::Hbar), GaussianRational::i());
    ScalarExpr::from_poly(p.div_exact(&d).expect("commutator divisible by i*hbar"))
}

fn canonical(u: &Var, v: &Var) -> ScalarExpr {
    match (u, v) {
        (Var::Expect(i, Canon::Q), Var::Expect(j, Canon::P)) if i == j => ScalarExpr::one(),
        (Var::Expect(i, Canon::P), Var::Expect(j, Canon::Q)) if i == j => ScalarExpr::int(-1),
        _ => ScalarExpr::zero(),
    }
}

/// Bracket of two G-chart generators, computed from commutators of centered operators.
fn g_generator_bracket(u: &Var, v: &Var) -> ScalarExpr {
    if let (Var::Expect(..), Var::Expect(..)) = (u, v) {
        return canonical(u, v);
    }
    let a = gen_op(u);
    let b = gen_op(v);
    let n = MAX_PAIRS;
    let comm = |x: &OperatorPoly, y: &OperatorPoly| over_i_hbar(&centered_expectation(&x.commutator(y).expect("pairs")));
    let mut r = comm(&a.op, &b.op);
    for (xj, db) in &b.derivs {
        let (j, c) = match xj {
            Var::Expect(j, c) => (*j as usize, *c),
            _ => unreachable!(),
        };
        let t = comm(&a.op, &OperatorPoly::basic(j, c, n));
        r = r.add(&t.mul(&centered_expectation(db)));
    }
    for (xi, da) in &a.derivs {
        let (i, c) = match xi {
            Var::Expect(i, c) => (*i as usize, *c),
            _ => unreachable!(),
        };
        let t = comm(&OperatorPoly::basic(i, c, n), &b.op);
        r = r.add(&centered_expectation(da).mul(&t));
    }
    for (xi, da) in &a.derivs {
        for (xj, db) in &b.derivs {
            let k = canonical(xi, xj);
            if !k.is_zero() {
                r = r.add(&centered_expectation(da).mul(&centered_expectation(db)).mul(&k));
            }
        }
    }
    r
}

/// Bracket of two F-chart generators (F symbols and expectation values).
fn f_generator_bracket(u: &Var, v: &Var) -> ScalarExpr {
    let op = |x: &Var| -> OperatorPoly {
        match x {
            Var::F(e) => OperatorPoly::monomial(exps_to_normal(e), ScalarExpr::one(), MAX_PAIRS),
            Var::Expect(i, c) => OperatorPoly::basic(*i as usize, *c, MAX_PAIRS),
            _ => unreachable!(),
        }
    };
    over_i_hbar(&f_expectation(&op(u).commutator(&op(v)).expect("pairs")))
}

/// Bracket of two phase-space symbols, cached.
pub fn generator_bracket(u: &Var, v: &Var) -> ScalarExpr {
    if !u.is_phase_space() || !v.is_phase_space() || u == v {
        return ScalarExpr::zero();
    }
    let (x, y, sign) = if u < v { (u, v, false) } else { (v, u, true) };
    let cached = bracket_cache().read().expect("cache").get(&(*x, *y)).cloned();
    let r = match cached {
        Some(r) => r,
        None => {
            let r = match (x, y) {
                (Var::F(_), _) | (_, Var::F(_)) => {
                    if matches!(x, Var::Moment(_)) || matches!(y, Var::Moment(_)) {
                        let fx = if let Var::F(_) = x { f_to_g(&ScalarExpr::var(*x)).expect("finite") } else { ScalarExpr::var(*x) };
                        let fy = if let Var::F(_) = y { f_to_g(&ScalarExpr::var(*y)).expect("finite") } else { ScalarExpr::var(*y) };
                        poisson_bracket(&fx, &fy)
                    } else {
                        f_generator_bracket(x, y)
                    }
                }
                _ => g_generator_bracket(x, y),
            };
            bracket_cache().write().expect("cache").insert((*x, *y), r.clone());
            r
        }
    };
    if sign {
        r.neg()
    } else {
        r
    }
}

/// Poisson bracket of phase-space functions by the chain rule over generators.
pub fn poisson_bracket(a: &ScalarExpr, b: &ScalarExpr) -> ScalarExpr {
    let va: Vec<Var> = a.vars().into_iter().filter(Var::is_phase_space).collect();
    let vb: Vec<Var> = b.vars().into_iter().filter(Var::is_phase_space).collect();
    if va.is_empty() || vb.is_empty() {
        return ScalarExpr::zero().with_assumptions(a.assumptions()).with_assumptions(b.assumptions());
    }
    let db: Vec<(Var, ScalarExpr)> = vb.iter().map(|v| (*v, b.derivative(v))).collect();
    let mut r = ScalarExpr::zero();
    for u in &va {
        let mut t = ScalarExpr::zero();
        for (v, dv) in &db {
            let k = generator_bracket(u, v);
            if !k.is_zero() {
                t = t.add(&k.mul(dv));
            }
        }
        if !t.is_zero() {
            r = r.add(&a.derivative(u).mul(&t));
        }
    }
    r.with_assumptions(a.assumptions()).with_assumptions(b.assumptions())
}

/// Evaluate a scalar expression in which `{a,b}` is the Poisson bracket.
pub fn eval_bracket_expr(ast: &Ast, labels: &Labels) -> Result<ScalarExpr, Error> {
    let ev = |a: &Ast| eval_bracket_expr(a, labels);
    Ok(match ast {
        Ast::Bracket(a, b) => poisson_bracket(&ev(a)?, &ev(b)?),
        Ast::Add(a, b) => ev(a)?.add(&ev(b)?),
        Ast::Sub(a, b) => ev(a)?.sub(&ev(b)?),
        Ast::Mul(a, b) => ev(a)?.mul(&ev(b)?),
        Ast::Div(a, b) => ev(a)?.div(&ev(b)?)?,
        Ast::Neg(a) => ev(a)?.neg(),
        Ast::Pow(a, k) if *k >= 0 => ev(a)?.pow(*k as u32),
        Ast::Pow(a, k) => ev(a)?.pow(k.unsigned_abs()).inv()?,
        leaf => eval_scalar(leaf, labels)?,
    })
}

/// Parse and evaluate an expression that may contain brackets.
pub fn parse_bracket_expr(text: &str, labels: &Labels) -> Result<ScalarExpr, Error> {
    eval_bracket_expr(&parse_ast(text)?, labels)
}

/// Closed-form bracket of single-pair moments `{G[a,b], G[c,d]}`.
///
/// The sum runs over `0 ≤ j ≤ min(a,d)`, `0 ≤ k ≤ min(b,c)` with `j + k` odd,
/// weighted by `j!·k!·C(a,j)C(b,k)C(c,k)C(d,j)·(−ħ²/4)^{⌊j/2⌋+⌊k/2⌋}`, plus the
/// quadratic tail. The indices of each moment are read position first and the
/// result is returned in the momentum-first convention.
pub fn gbracket_closed_form(a: u8, b: u8, c: u8, d: u8) -> ScalarExpr {
    swap_indices(&closed_form_sum(b as u32, a as u32, d as u32, c as u32, true))
}

/// The same sum without the `j!·k!` weights.
pub fn gbracket_closed_form_unweighted(a: u8, b: u8, c: u8, d: u8) -> ScalarExpr {
    swap_indices(&closed_form_sum(b as u32, a as u32, d as u32, c as u32, false))
}

fn swap_indices(raw: &ScalarExpr) -> ScalarExpr {
    let mut bind = BTreeMap::new();
    for v in raw.vars() {
        if let Var::Moment(e) = v {
            bind.insert(v, moment_or_constant(Exps::from_pairs(&[(e.pos(0), e.mom(0))])));
        }
    }
    raw.substitute(&bind).expect("polynomial")
}

/// The closed-form sum with `G^{x,y}` stored as `G[x,y]`.
fn closed_form_sum(a: u32, b: u32, c: u32, d: u32, weighted: bool) -> ScalarExpr {
    let g = |x: i64, y: i64| -> ScalarExpr {
        if x < 0 || y < 0 {
            return ScalarExpr::zero();
        }
        moment_or_constant(Exps::from_pairs(&[(x as u8, y as u8)]))
    };
    let quarter = ScalarExpr::from_poly(Poly::term(Mono::var_pow(Var::Hbar, 2), GaussianRational::from_ratio(-1, 4)));
    let mut r = ScalarExpr::zero();
    for j in 0..=a.min(d) {
        for k in 0..=b.min(c) {
            let sign = match (j % 2, k % 2) {
                (1, 0) => 1,
                (0, 1) => -1,
                _ => continue,
            };
            let rs = j / 2 + k / 2;
            let mut w = binom(a, j) * binom(b, k) * binom(c, k) * binom(d, j) * sign;
            if weighted {
                w *= factorial(j) * factorial(k);
            }
            let t = quarter.pow(rs).mul(&ScalarExpr::constant(GaussianRational::from_bigint(w)));
            r = r.add(&t.mul(&g((a + c - j - k) as i64, (b + d - j - k) as i64)));
        }
    }
    let (ai, bi, ci, di) = (a as i64, b as i64, c as i64, d as i64);
    r = r.sub(&ScalarExpr::int(ai * di).mul(&g(ai - 1, bi).mul(&g(ci, di - 1))));
    r.add(&ScalarExpr::int(bi * ci).mul(&g(ai, bi - 1).mul(&g(ci - 1, di))))
}

/// `H_Q = ⟨Ĥ⟩` truncated at grade `n`.
pub fn quantum_hamiltonian(h: &OperatorPoly, n: u32) -> Result<ScalarExpr, Error> {
    expectation(h).truncate_by_grade(n)
}

/// `ẋ = {x, H_Q}` for each generator.
pub fn equations_of_motion(hq: &ScalarExpr, generators: &[Var]) -> BTreeMap<Var, ScalarExpr> {
    generators.iter().map(|g| (*g, poisson_bracket(&ScalarExpr::var(*g), hq))).collect()
}

/// All moments of the given orders over `npairs` pairs, in symbol order.
pub fn moments_of_order(orders: std::ops::RangeInclusive<u32>, npairs: usize) -> Vec<Var> {
    let mut out = BTreeSet::new();
    let n = 2 * npairs;
    for ord in orders {
        let mut cur = vec![0u8; n];
        enumerate(&mut cur, 0, ord, &mut |v: &[u8]| {
            let pairs: Vec<(u8, u8)> = (0..npairs).map(|i| (v[2 * i], v[2 * i + 1])).collect();
            out.insert(Var::moment(&pairs));
        });
    }
    out.into_iter().collect()
}

fn enumerate(cur: &mut Vec<u8>, idx: usize, left: u32, f: &mut impl FnMut(&[u8])) {
    if idx + 1 == cur.len() {
        cur[idx] = left as u8;
        f(cur);
        return;
    }
    for x in 0..=left {
        cur[idx] = x as u8;
        enumerate(cur, idx + 1, left - x, f);
    }
}
