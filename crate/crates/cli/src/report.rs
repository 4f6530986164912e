//! Verdicts and their two renderings.

use std::fmt::Write as _;
use std::time::Duration;

use crate::config::{lex, ConfigError, ErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Error => 2,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Verdict::Pass, Verdict::Fail, Verdict::Error]
            .into_iter()
            .find(|v| v.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub entries: Vec<(String, String)>,
}

/// Residuals below this are printed as `<1e-12`, so reports do not depend on
/// last-bit differences between floating-point libraries.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

pub fn residual(r: f64) -> String {
    if r < RESIDUAL_FLOOR {
        "<1e-12".to_string()
    } else {
        format!("{r:.3e}")
    }
}

impl Report {
    pub fn new(command: &str, verdict: Verdict) -> Self {
        Self {
            command: command.to_string(),
            verdict,
            entries: Vec::new(),
        }
    }

    /// An ERROR report for a config or runtime error.
    pub fn from_error(command: &str, e: &ConfigError) -> Self {
        let mut r = Self::new(command, Verdict::Error);
        r.push("error.code", e.kind.code());
        r.push("error.line", e.line.to_string());
        r.push("error.message", &e.message);
        for (k, v) in &e.witness {
            r.push(k, v);
        }
        r
    }

    /// Appends an entry; newlines and `#` would break the line format and are replaced.
    pub fn push(&mut self, key: &str, value: impl AsRef<str>) {
        let clean: String = value
            .as_ref()
            .chars()
            .map(|c| match c {
                '\n' | '\r' => ' ',
                '#' => 'N',
                c => c,
            })
            .collect();
        self.entries.push((key.to_string(), clean.trim().to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &(String, String)> {
        self.entries.iter().filter(|(k, _)| k.starts_with("witness"))
    }

    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn render_machine(&self) -> String {
        let mut out = format!("command = {}\nverdict = {}\n", self.command, self.verdict.as_str());
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn render_human(&self, elapsed: Option<Duration>) -> String {
        let mut out = format!("{}: {}\n", self.command, self.verdict.as_str());
        let width = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.entries {
            let _ = writeln!(out, "  {k:<width$}  {v}");
        }
        if let Some(t) = elapsed {
            let _ = writeln!(out, "  ({:.3} s)", t.as_secs_f64());
        }
        out
    }

    /// Reads a machine-format report back.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let lines = lex(text)?;
        let bad = |n: usize, m: &str| ConfigError::new(ErrorKind::Syntax, n, m);
        let mut it = lines.into_iter();
        let cmd = it.next().ok_or_else(|| bad(0, "empty report"))?;
        if cmd.key != "command" {
            return Err(bad(cmd.number, "first key must be `command`"));
        }
        let verdict = it.next().ok_or_else(|| bad(0, "missing `verdict`"))?;
        if verdict.key != "verdict" {
            return Err(bad(verdict.number, "second key must be `verdict`"));
        }
        let v = Verdict::parse(&verdict.value)
            .ok_or_else(|| bad(verdict.number, "verdict must be PASS, FAIL or ERROR"))?;
        let mut report = Report::new(&cmd.value, v);
        for line in it {
            report.entries.push((line.key, line.value));
        }
        if report.verdict == Verdict::Fail && report.witnesses().next().is_none() {
            return Err(bad(0, "FAIL report without a witness"));
        }
        if report.verdict == Verdict::Error && report.get("error.code").is_none() {
            return Err(bad(0, "ERROR report without `error.code`"));
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_format_round_trips() {
        let mut r = Report::new("check", Verdict::Fail);
        r.push("witness.a", "(2)");
        r.push("witness.b", "(3)");
        r.push("feq.max_residual", residual(0.75));
        let text = r.render_machine();
        assert_eq!(
            text,
            "command = check\nverdict = FAIL\nwitness.a = (2)\nwitness.b = (3)\nfeq.max_residual = 7.500e-1\n"
        );
        assert_eq!(Report::parse(&text).unwrap(), r);
    }

    #[test]
    fn fail_needs_witness() {
        assert!(Report::parse("command = check\nverdict = FAIL\n").is_err());
        assert!(Report::parse("command = check\nverdict = ERROR\n").is_err());
        assert!(Report::parse("verdict = PASS\ncommand = check\n").is_err());
    }

    #[test]
    fn tiny_residuals_are_floored() {
        assert_eq!(residual(3e-17), "<1e-12");
        assert_eq!(residual(0.0), "<1e-12");
        assert_eq!(residual(1.5e-3), "1.500e-3");
    }

    #[test]
    fn sanitizes_values() {
        let mut r = Report::new("x", Verdict::Pass);
        r.push("note", "a#b\nc");
        assert_eq!(r.get("note"), Some("aNb c"));
    }
}
