//! Scenario files.
//!
//! ```text
//! # comment
//! name = free_particle
//!
//! [system]
//! pairs = q:p, t:p_t          # position:momentum labels, pair 0 first
//! time = t                    # pair whose moments are eliminated (optional)
//! params = M
//! constraint = phat(1) + phat(0)^2/(2*M)
//!
//! [hierarchy]
//! power = p                   # vocabulary words x·power^k, k ≤ kmax
//! kmax = 1
//! weight = 4                  # deg f + n ≤ weight
//!
//! [truncation]
//! order = 2
//! mode = graded               # or sharp
//!
//! [observables]
//! grade = 2
//! multipliers = 1, t, p
//!
//! [named]                     # named expressions, ordered
//! A1 = G[2,0;0,0]
//!
//! [flows]                     # named flow generators: label or -label (optional)
//! dC_p = C[f=p,n=1]
//!
//! [dirac]                     # second-class constraints: label or -label
//! phi1 = C[f=p,n=1]
//!
//! [gauge]                     # gauge conditions, ordered
//! phi4 = G[0,0;1,1] + i*hbar/2
//!
//! [golden]                    # report key = expected expression
//! solution.G[0,1;1,0] = -p*G[0,1;0,1]/M
//! ```

use crate::CliError;
use effcon::constraint_factory::Label;
use effcon::symbolic_ring::{parse_expr, Canon, Labels, ScalarExpr};
use effcon::weyl_algebra::parse_operator;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Graded,
    Sharp,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode, CliError> {
        match s {
            "graded" => Ok(Mode::Graded),
            "sharp" => Ok(Mode::Sharp),
            _ => Err(CliError::Usage(format!("unknown mode {s:?}, expected graded or sharp"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Graded => "graded",
            Mode::Sharp => "sharp",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub pairs: Vec<(String, String)>,
    pub time: Option<String>,
    pub params: Vec<String>,
    pub constraint: String,
    pub power: String,
    pub kmax: u32,
    pub weight: u32,
    pub order: u32,
    pub mode: Mode,
    pub obs_grade: Option<u32>,
    pub multipliers: Vec<String>,
    pub named: Vec<(String, String)>,
    pub flows: Vec<(String, String)>,
    pub dirac: Vec<(String, String)>,
    pub gauge: Vec<(String, String)>,
    pub golden: Vec<(String, String)>,
    /// SHA-256 of the file bytes.
    pub hash: String,
}

const SECTIONS: &[&str] = &["", "system", "hierarchy", "truncation", "observables", "named", "flows", "dirac", "gauge", "golden"];

fn fixed_keys(section: &str) -> Option<&'static [&'static str]> {
    Some(match section {
        "" => &["name"],
        "system" => &["pairs", "time", "params", "constraint"],
        "hierarchy" => &["power", "kmax", "weight"],
        "truncation" => &["order", "mode"],
        "observables" => &["grade", "multipliers"],
        _ => return None,
    })
}

/// Drop a trailing `# comment`.
fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(a, _)| a)
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

fn number(section: &str, key: &str, v: &str) -> Result<u32, CliError> {
    v.parse().map_err(|_| CliError::Parse(format!("[{section}] {key}: expected a non-negative integer, got {v:?}")))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read scenario {}: {e}", path.display())))?;
        Scenario::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Scenario, CliError> {
        let mut s = Scenario {
            name: String::new(),
            pairs: Vec::new(),
            time: None,
            params: Vec::new(),
            constraint: String::new(),
            power: String::new(),
            kmax: 0,
            weight: 2,
            order: 2,
            mode: Mode::Graded,
            obs_grade: None,
            multipliers: vec!["1".into()],
            named: Vec::new(),
            flows: Vec::new(),
            dirac: Vec::new(),
            gauge: Vec::new(),
            golden: Vec::new(),
            hash: hex(&Sha256::digest(text.as_bytes())),
        };
        let mut section = String::new();
        let mut seen: Vec<(String, String)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            let at = |m: String| CliError::Parse(format!("line {}: {m}", no + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|x| x.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) || name.is_empty() {
                    return Err(at(format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            // Keys such as `flow.C[f=p,n=1].q` contain `=`, so a spaced separator wins.
            let (k, v) = line
                .split_once(" = ")
                .or_else(|| line.split_once('='))
                .ok_or_else(|| at(format!("expected key = value, got {line:?}")))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(at(format!("invalid key {k:?}")));
            }
            if seen.iter().any(|(a, b)| *a == section && *b == k) {
                return Err(at(format!("duplicate key {k:?} in [{section}]")));
            }
            seen.push((section.clone(), k.clone()));
            if let Some(keys) = fixed_keys(&section) {
                if !keys.contains(&k.as_str()) {
                    return Err(at(format!("unknown key {k:?} in [{section}]")));
                }
            }
            match (section.as_str(), k.as_str()) {
                ("", "name") => s.name = v,
                ("system", "pairs") => {
                    for p in list(&v) {
                        let (a, b) = p.split_once(':').ok_or_else(|| at(format!("pair {p:?} is not position:momentum")))?;
                        s.pairs.push((a.trim().to_string(), b.trim().to_string()));
                    }
                }
                ("system", "time") => s.time = Some(v),
                ("system", "params") => s.params = list(&v),
                ("system", "constraint") => s.constraint = v,
                ("hierarchy", "power") => s.power = v,
                ("hierarchy", "kmax") => s.kmax = number(&section, &k, &v)?,
                ("hierarchy", "weight") => s.weight = number(&section, &k, &v)?,
                ("truncation", "order") => s.order = number(&section, &k, &v)?,
                ("truncation", "mode") => s.mode = Mode::parse(&v).map_err(|e| at(e.to_string()))?,
                ("observables", "grade") => s.obs_grade = Some(number(&section, &k, &v)?),
                ("observables", "multipliers") => s.multipliers = list(&v),
                ("named", _) => s.named.push((k, v)),
                ("flows", _) => s.flows.push((k, v)),
                ("dirac", _) => s.dirac.push((k, v)),
                ("gauge", _) => s.gauge.push((k, v)),
                ("golden", _) => s.golden.push((k, v)),
                _ => unreachable!("keys checked above"),
            }
        }
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.pairs.is_empty() {
            return Err(CliError::Parse("[system] pairs is required".into()));
        }
        if self.constraint.is_empty() {
            return Err(CliError::Parse("[system] constraint is required".into()));
        }
        let l = self.labels();
        parse_operator(&self.constraint, &l).map_err(|e| CliError::Parse(format!("[system] constraint: {e}")))?;
        self.time_pair()?;
        if !self.power.is_empty() {
            self.power_var()?;
        }
        for m in &self.multipliers {
            parse_expr(m, &l).map_err(|e| CliError::Parse(format!("[observables] multiplier {m:?}: {e}")))?;
        }
        for (k, v) in self.named.iter().chain(&self.gauge) {
            parse_expr(v, &l).map_err(|e| CliError::Parse(format!("{k}: {e}")))?;
        }
        for (k, v) in self.flows.iter().chain(&self.dirac) {
            self.signed_label(v).map_err(|e| CliError::Parse(format!("{k}: {e}")))?;
        }
        Ok(())
    }

    pub fn labels(&self) -> Labels {
        let p: Vec<(&str, &str)> = self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Labels::new(&p)
    }

    pub fn time_pair(&self) -> Result<Option<usize>, CliError> {
        let Some(t) = &self.time else { return Ok(None) };
        self.pairs
            .iter()
            .position(|(a, b)| a == t || b == t)
            .map(Some)
            .ok_or_else(|| CliError::Parse(format!("[system] time {t:?} names no declared pair")))
    }

    pub fn power_var(&self) -> Result<(usize, Canon), CliError> {
        if self.power.is_empty() {
            return Ok((0, Canon::P));
        }
        self.labels()
            .basic(&self.power)
            .ok_or_else(|| CliError::Parse(format!("[hierarchy] power {:?} is not a pair label", self.power)))
    }

    /// `C[f=q,n=1]` or `-C[f=q,n=1]`.
    pub fn signed_label(&self, text: &str) -> Result<(Label, i64), CliError> {
        let t = text.trim();
        let (sign, rest) = match t.strip_prefix('-') {
            Some(r) => (-1, r),
            None => (1, t.strip_prefix('+').unwrap_or(t)),
        };
        let l = Label::parse(rest, &self.labels()).map_err(|e| CliError::Parse(format!("{text:?}: {e}")))?;
        Ok((l, sign))
    }

    pub fn expr(&self, text: &str) -> Result<ScalarExpr, CliError> {
        parse_expr(text, &self.labels()).map_err(|e| CliError::Parse(format!("{text:?}: {e}")))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
