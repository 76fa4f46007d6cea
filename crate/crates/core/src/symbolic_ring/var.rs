//! Commuting symbols: ħ, parameters, expectation values, moments and F-variables.

use std::fmt;

/// Maximum number of canonical pairs supported by the fixed-size exponent records.
pub const MAX_PAIRS: usize = 4;

/// Short inline ASCII name for parameters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name([u8; 12]);

impl Name {
    pub fn new(s: &str) -> Option<Name> {
        let b = s.as_bytes();
        if b.is_empty() || b.len() > 12 || !b.iter().all(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            return None;
        }
        let mut a = [0u8; 12];
        a[..b.len()].copy_from_slice(b);
        Some(Name(a))
    }

    pub fn as_str(&self) -> &str {
        let n = self.0.iter().position(|&c| c == 0).unwrap_or(12);
        std::str::from_utf8(&self.0[..n]).unwrap_or("?")
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-pair exponents stored as (momentum, position) for each pair.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exps(pub [u8; 2 * MAX_PAIRS]);

impl Exps {
    /// Build from (momentum, position) pairs.
    pub fn from_pairs(pairs: &[(u8, u8)]) -> Exps {
        assert!(pairs.len() <= MAX_PAIRS, "too many pairs");
        let mut e = [0u8; 2 * MAX_PAIRS];
        for (i, (a, b)) in pairs.iter().enumerate() {
            e[2 * i] = *a;
            e[2 * i + 1] = *b;
        }
        Exps(e)
    }

    pub fn mom(&self, pair: usize) -> u8 {
        self.0[2 * pair]
    }

    pub fn pos(&self, pair: usize) -> u8 {
        self.0[2 * pair + 1]
    }

    pub fn set_mom(&mut self, pair: usize, v: u8) {
        self.0[2 * pair] = v;
    }

    pub fn set_pos(&mut self, pair: usize, v: u8) {
        self.0[2 * pair + 1] = v;
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&x| x as u32).sum()
    }

    /// Number of pairs up to the last one with a nonzero exponent.
    pub fn used_pairs(&self) -> usize {
        (0..MAX_PAIRS).rev().find(|&i| self.mom(i) + self.pos(i) > 0).map_or(0, |i| i + 1)
    }

    pub fn pairs(&self, n: usize) -> Vec<(u8, u8)> {
        (0..n).map(|i| (self.mom(i), self.pos(i))).collect()
    }
}

impl fmt::Debug for Exps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_indices(f, self, self.used_pairs().max(1))
    }
}

fn write_indices(f: &mut impl fmt::Write, e: &Exps, n: usize) -> fmt::Result {
    f.write_char('[')?;
    for i in 0..n {
        if i > 0 {
            f.write_char(';')?;
        }
        write!(f, "{},{}", e.mom(i), e.pos(i))?;
    }
    f.write_char(']')
}

/// Position or momentum of a canonical pair.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Canon {
    Q,
    P,
}

/// A commuting symbol of the scalar ring.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    Hbar,
    Param(Name),
    Expect(u8, Canon),
    Moment(Exps),
    /// Expectation value of a normal-ordered monomial (F-chart coordinate).
    F(Exps),
}

impl Var {
    pub fn param(s: &str) -> Var {
        Var::Param(Name::new(s).unwrap_or_else(|| panic!("bad parameter name {s:?}")))
    }

    pub fn q(pair: u8) -> Var {
        Var::Expect(pair, Canon::Q)
    }

    pub fn p(pair: u8) -> Var {
        Var::Expect(pair, Canon::P)
    }

    /// Moment with (momentum, position) exponents per pair.
    pub fn moment(pairs: &[(u8, u8)]) -> Var {
        Var::Moment(Exps::from_pairs(pairs))
    }

    /// λ-grade: 2 for ħ, the order for moments, 0 otherwise.
    pub fn grade(&self) -> u32 {
        match self {
            Var::Hbar => 2,
            Var::Moment(e) => e.order(),
            _ => 0,
        }
    }

    pub fn is_moment(&self) -> bool {
        matches!(self, Var::Moment(_))
    }

    /// Symbols with nontrivial Poisson brackets.
    pub fn is_phase_space(&self) -> bool {
        matches!(self, Var::Expect(..) | Var::Moment(_) | Var::F(_))
    }
}

/// Names of the canonical pairs, used for parsing and printing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    pub pairs: Vec<(String, String)>,
}

impl Default for Labels {
    fn default() -> Self {
        Labels::numbered(2)
    }
}

impl Labels {
    /// `(q,p)`, `(q1,p1)`, `(q2,p2)`, ...
    pub fn numbered(n: usize) -> Labels {
        let pairs = (0..n)
            .map(|i| if i == 0 { ("q".into(), "p".into()) } else { (format!("q{i}"), format!("p{i}")) })
            .collect();
        Labels { pairs }
    }

    pub fn new(pairs: &[(&str, &str)]) -> Labels {
        Labels { pairs: pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect() }
    }

    pub fn npairs(&self) -> usize {
        self.pairs.len()
    }

    /// Resolve an identifier to a symbol.
    pub fn resolve(&self, ident: &str) -> Option<Var> {
        if ident == "hbar" {
            return Some(Var::Hbar);
        }
        for (i, (q, p)) in self.pairs.iter().enumerate() {
            if ident == q {
                return Some(Var::q(i as u8));
            }
            if ident == p {
                return Some(Var::p(i as u8));
            }
        }
        Name::new(ident).map(Var::Param)
    }

    /// Find a basic variable by name.
    pub fn basic(&self, ident: &str) -> Option<(usize, Canon)> {
        self.pairs.iter().enumerate().find_map(|(i, (q, p))| {
            if ident == q {
                Some((i, Canon::Q))
            } else if ident == p {
                Some((i, Canon::P))
            } else {
                None
            }
        })
    }

    pub fn name_of(&self, pair: u8, c: Canon) -> String {
        let i = pair as usize;
        match self.pairs.get(i) {
            Some((q, p)) => match c {
                Canon::Q => q.clone(),
                Canon::P => p.clone(),
            },
            None => match c {
                Canon::Q => format!("q{i}"),
                Canon::P => format!("p{i}"),
            },
        }
    }

    pub fn var_text(&self, v: &Var) -> String {
        match v {
            Var::Hbar => "hbar".into(),
            Var::Param(n) => n.as_str().into(),
            Var::Expect(i, c) => self.name_of(*i, *c),
            Var::Moment(e) => {
                let mut s = String::from("G");
                let _ = write_indices(&mut s, e, e.used_pairs().max(self.npairs()).max(1));
                s
            }
            Var::F(e) => {
                let mut s = String::from("F");
                let _ = write_indices(&mut s, e, e.used_pairs().max(self.npairs()).max(1));
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_text_uses_momentum_first() {
        let l = Labels::numbered(1);
        assert_eq!(l.var_text(&Var::moment(&[(2, 1)])), "G[2,1]");
        let l2 = Labels::numbered(2);
        assert_eq!(l2.var_text(&Var::moment(&[(2, 1)])), "G[2,1;0,0]");
    }

    #[test]
    fn grades() {
        assert_eq!(Var::Hbar.grade(), 2);
        assert_eq!(Var::moment(&[(1, 0), (0, 2)]).grade(), 3);
        assert_eq!(Var::param("M").grade(), 0);
    }
}
