//! Reports and golden comparison.
//!
//! A report is an ordered list of `section.key = value` entries. Expression values are
//! printed in the canonical grammar and re-parse to equal expressions. The machine form
//! (`report.kv`) has one `key<TAB>value` line per entry, since keys may contain `=`.

use crate::CliError;
use effcon::symbolic_ring::{parse_expr, Labels, ScalarExpr};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Expr(String),
    Text(String),
}

impl Value {
    pub fn as_str(&self) -> &str {
        match self {
            Value::Expr(s) | Value::Text(s) => s,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub header: Vec<(String, String)>,
    pub entries: Vec<(String, Value)>,
    pub messages: Vec<String>,
}

/// Section of a key: the part before the first `.`.
pub fn section_of(key: &str) -> &str {
    key.split_once('.').map_or(key, |(a, _)| a)
}

impl Report {
    pub fn head(&mut self, k: &str, v: impl Into<String>) {
        self.header.push((k.to_string(), v.into()));
    }

    pub fn expr(&mut self, key: impl Into<String>, e: &ScalarExpr, labels: &Labels) {
        self.entries.push((key.into(), Value::Expr(e.to_text(labels))));
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl ToString) {
        self.entries.push((key.into(), Value::Text(v.to_string())));
    }

    pub fn message(&mut self, m: impl Into<String>) {
        self.messages.push(m.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn has_section(&self, s: &str) -> bool {
        self.entries.iter().any(|(k, _)| section_of(k) == s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("effcon report\n");
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}: {v}");
        }
        let mut current = "";
        for (k, v) in &self.entries {
            let s = section_of(k);
            if s != current {
                let _ = writeln!(out, "\n[{s}]");
                current = s;
            }
            let rest = k.get(s.len() + 1..).unwrap_or("");
            let _ = writeln!(out, "{} = {}", if rest.is_empty() { s } else { rest }, v.as_str());
        }
        if !self.messages.is_empty() {
            out.push_str("\n[messages]\n");
            for m in &self.messages {
                let _ = writeln!(out, "{m}");
            }
        }
        out
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}\t{v}");
        }
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}\t{}", v.as_str());
        }
        for (i, m) in self.messages.iter().enumerate() {
            let _ = writeln!(out, "message.{}\t{m}", i + 1);
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Usage(format!("cannot write to {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.txt"), self.to_text()).map_err(io)?;
        std::fs::write(dir.join("report.kv"), self.to_kv()).map_err(io)?;
        Ok(())
    }
}

/// Parse golden lines `key = expression  # tag`. Blank lines and comments are skipped.
pub fn parse_golden(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once(" = ")
            .ok_or_else(|| CliError::Parse(format!("golden line {}: expected `key = expression`", no + 1)))?;
        let k = k.trim().to_string();
        if out.iter().any(|(a, _)| *a == k) {
            return Err(CliError::Parse(format!("golden line {}: duplicate key {k}", no + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GoldenDiff {
    pub matched: Vec<String>,
    /// Key, expected, actual (normalized).
    pub mismatched: Vec<(String, String, String)>,
    pub missing: Vec<String>,
    /// Keys in sections this report does not produce.
    pub skipped: Vec<String>,
}

impl GoldenDiff {
    pub fn is_clean(&self) -> bool {
        self.mismatched.is_empty() && self.missing.is_empty()
    }
}

/// Compare expected expressions with report entries. Both sides are parsed and passed
/// through `normalize` (e.g. reduction on the constraint surface), then compared with
/// symbolic equality.
pub fn golden_compare(
    report: &Report,
    expectations: &[(String, String)],
    labels: &Labels,
    normalize: &dyn Fn(&str, &ScalarExpr) -> Result<ScalarExpr, effcon::Error>,
) -> Result<GoldenDiff, CliError> {
    let mut d = GoldenDiff::default();
    let parse = |k: &str, s: &str| {
        parse_expr(s, labels)
            .and_then(|e| normalize(k, &e))
            .map_err(|e| CliError::Parse(format!("golden {k}: {e}")))
    };
    for (k, want) in expectations {
        if !report.has_section(section_of(k)) {
            d.skipped.push(k.clone());
            continue;
        }
        let Some(Value::Expr(got)) = report.get(k) else {
            d.missing.push(k.clone());
            continue;
        };
        let w = parse(k, want)?;
        let g = parse(k, got)?;
        if w.equals(&g) {
            d.matched.push(k.clone());
        } else {
            d.mismatched.push((k.clone(), w.to_text(labels), g.to_text(labels)));
        }
    }
    Ok(d)
}
