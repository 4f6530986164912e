//! Line-oriented job files.
//!
//! One `key = value` pair per line, `#` starts a comment. Values use a small
//! fixed vocabulary: group literals `Z5 x Z3`, integer matrices `[[2,0],[0,1]]`,
//! rationals `p/q`, elements `(a,b)` and distribution specs.

use std::collections::BTreeMap;
use std::fmt;

use heyde_core::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
    Bound,
    Io,
    Usage,
    /// Two independent checks disagreed; always a bug or a sampling miss.
    Internal,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ErrorKind::Syntax => "E-SYNTAX",
            ErrorKind::Semantic => "E-SEMANTIC",
            ErrorKind::Bound => "E-BOUND",
            ErrorKind::Io => "E-IO",
            ErrorKind::Usage => "E-USAGE",
            ErrorKind::Internal => "E-INTERNAL",
        }
    }
}

/// First error found in a job file, with its 1-based line (0 when no line applies).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub kind: ErrorKind,
    pub line: usize,
    pub message: String,
    pub witness: Vec<(String, String)>,
}

impl ConfigError {
    pub fn new(kind: ErrorKind, line: usize, message: impl Into<String>) -> Self {
        Self {
            kind,
            line,
            message: message.into(),
            witness: Vec::new(),
        }
    }

    pub fn with_witness(mut self, key: &str, value: impl Into<String>) -> Self {
        self.witness.push((key.to_string(), value.into()));
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at line {}: {}", self.kind.code(), self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub number: usize,
    pub key: String,
    pub value: String,
}

/// Splits text into `key = value` lines, dropping comments and blank lines.
pub fn lex(text: &str) -> Result<Vec<Line>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::new(ErrorKind::Syntax, number, "expected `key = value`"));
        };
        let (key, value) = (key.trim(), value.trim());
        let key_ok = !key.is_empty()
            && key
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'));
        if !key_ok {
            return Err(ConfigError::new(ErrorKind::Syntax, number, format!("invalid key `{key}`")));
        }
        if value.is_empty() {
            return Err(ConfigError::new(ErrorKind::Syntax, number, format!("empty value for `{key}`")));
        }
        out.push(Line {
            number,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

/// Character cursor for the value grammars.
pub(crate) struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(s: &'a str) -> Self {
        Self { s, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.s.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected `{c}` at `{}`", self.rest()))
        }
    }

    pub(crate) fn done(&mut self) -> Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(format!("unexpected trailing input `{}`", self.rest())),
        }
    }

    fn token(&mut self, allowed: impl Fn(char) -> bool) -> &'a str {
        self.ws();
        let start = self.pos;
        let len: usize = self
            .rest()
            .chars()
            .take_while(|&c| allowed(c))
            .map(char::len_utf8)
            .sum();
        self.pos += len;
        &self.s[start..self.pos]
    }

    pub(crate) fn word(&mut self) -> &'a str {
        self.token(|c| c.is_ascii_alphabetic() || c == '_')
    }

    fn keyword(&mut self, w: &str) -> Result<(), String> {
        let save = self.pos;
        if self.word() == w {
            Ok(())
        } else {
            self.pos = save;
            Err(format!("expected `{w}` at `{}`", self.rest()))
        }
    }

    pub(crate) fn int(&mut self) -> Result<i64, String> {
        let save = self.pos;
        let neg = self.eat('-');
        let digits = self.token(|c| c.is_ascii_digit());
        if digits.is_empty() {
            self.pos = save;
            return Err(format!("expected an integer at `{}`", self.rest()));
        }
        let v: i64 = digits.parse().map_err(|_| format!("integer `{digits}` out of range"))?;
        Ok(if neg { -v } else { v })
    }

    pub(crate) fn unsigned(&mut self) -> Result<u64, String> {
        let digits = self.token(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return Err(format!("expected a nonnegative integer at `{}`", self.rest()));
        }
        digits.parse().map_err(|_| format!("integer `{digits}` out of range"))
    }

    pub(crate) fn rational(&mut self) -> Result<Rational, String> {
        let save = self.pos;
        self.eat('-');
        self.token(|c| c.is_ascii_digit());
        if self.eat('/') {
            self.token(|c| c.is_ascii_digit());
        }
        let text: String = self.s[save..self.pos].chars().filter(|c| !c.is_whitespace()).collect();
        rational::parse(&text).ok_or_else(|| {
            self.pos = save;
            format!("expected a rational at `{}`", self.rest())
        })
    }

    fn list<T>(
        &mut self,
        open: char,
        close: char,
        mut item: impl FnMut(&mut Self) -> Result<T, String>,
    ) -> Result<Vec<T>, String> {
        self.expect(open)?;
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    pub(crate) fn element(&mut self) -> Result<Vec<i64>, String> {
        self.list('(', ')', Cursor::int)
    }

    pub(crate) fn vector(&mut self) -> Result<Vec<Rational>, String> {
        self.list('[', ']', Cursor::rational)
    }

    pub(crate) fn matrix(&mut self) -> Result<Vec<Vec<Rational>>, String> {
        self.list('[', ']', Cursor::vector)
    }

    pub(crate) fn int_matrix(&mut self) -> Result<Vec<Vec<i64>>, String> {
        self.list('[', ']', |c| c.list('[', ']', Cursor::int))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    Check,
    Feq,
    SolvePartner,
    Decompose,
    EnumerateAuts,
    FdmDemo,
    GaussianCheck,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Check,
        Command::Feq,
        Command::SolvePartner,
        Command::Decompose,
        Command::EnumerateAuts,
        Command::FdmDemo,
        Command::GaussianCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Feq => "feq",
            Command::SolvePartner => "solve-partner",
            Command::Decompose => "decompose",
            Command::EnumerateAuts => "enumerate-auts",
            Command::FdmDemo => "fdm-demo",
            Command::GaussianCheck => "gaussian-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Commands that draw random samples and therefore need a seed.
    pub fn is_randomized(self) -> bool {
        matches!(self, Command::FdmDemo | Command::GaussianCheck)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistSpec {
    Literal(Vec<Rational>),
    HaarFull,
    /// Haar measure of the subgroup generated by the listed elements.
    HaarGen(Vec<Vec<i64>>),
    Point(Vec<i64>),
    /// Gaussian `(A, t)` times `rho * E_shift`.
    Product {
        a: Vec<Vec<Rational>>,
        t: Vec<Rational>,
        shift: Vec<i64>,
        rho: Box<DistSpec>,
    },
}

fn render_element(x: &[i64]) -> String {
    let parts: Vec<String> = x.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

fn render_compact(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(rational::render).collect();
    format!("[{}]", parts.join(","))
}

pub fn render_rational_matrix(m: &[Vec<Rational>]) -> String {
    let rows: Vec<String> = m.iter().map(|r| render_compact(r)).collect();
    format!("[{}]", rows.join(","))
}

pub fn render_int_matrix(m: &[Vec<i64>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(i64::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    format!("[{}]", rows.join(","))
}

pub fn render_group(orders: &[i64]) -> String {
    orders.iter().map(|d| format!("Z{d}")).collect::<Vec<_>>().join(" x ")
}

/// Masses written out as `[p/q, p/q, ...]`.
pub fn render_masses(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(rational::render).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Literal(v) => write!(f, "{}", render_masses(v)),
            DistSpec::HaarFull => write!(f, "haar full"),
            DistSpec::HaarGen(gens) => {
                write!(f, "haar gen")?;
                for g in gens {
                    write!(f, " {}", render_element(g))?;
                }
                Ok(())
            }
            DistSpec::Point(x) => write!(f, "point {}", render_element(x)),
            DistSpec::Product { a, t, shift, rho } => write!(
                f,
                "product A={} t={} shift={} rho={rho}",
                render_rational_matrix(a),
                render_compact(t),
                render_element(shift)
            ),
        }
    }
}

fn parse_dist(c: &mut Cursor<'_>, allow_product: bool) -> Result<DistSpec, String> {
    if c.peek() == Some('[') {
        return Ok(DistSpec::Literal(c.vector()?));
    }
    match c.word() {
        "haar" => match c.word() {
            "full" => Ok(DistSpec::HaarFull),
            "gen" => {
                let mut gens = Vec::new();
                while c.peek() == Some('(') {
                    gens.push(c.element()?);
                }
                Ok(DistSpec::HaarGen(gens))
            }
            other => Err(format!("expected `full` or `gen` after `haar`, found `{other}`")),
        },
        "point" => Ok(DistSpec::Point(c.element()?)),
        "product" if allow_product => {
            c.keyword("A")?;
            c.expect('=')?;
            let a = c.matrix()?;
            c.keyword("t")?;
            c.expect('=')?;
            let t = c.vector()?;
            c.keyword("shift")?;
            c.expect('=')?;
            let shift = c.element()?;
            c.keyword("rho")?;
            c.expect('=')?;
            let rho = Box::new(parse_dist(c, false)?);
            Ok(DistSpec::Product { a, t, shift, rho })
        }
        "product" => Err("nested `product` is not allowed".into()),
        other => Err(format!("unknown distribution form `{other}`")),
    }
}

pub fn parse_dist_spec(text: &str) -> Result<DistSpec, String> {
    let mut c = Cursor::new(text);
    let d = parse_dist(&mut c, true)?;
    c.done()?;
    Ok(d)
}

pub fn parse_group(text: &str) -> Result<Vec<i64>, String> {
    text.split('x')
        .map(|part| {
            let part = part.trim();
            part.strip_prefix('Z')
                .and_then(|d| d.parse::<i64>().ok())
                .filter(|_| part[1..].chars().all(|c| c.is_ascii_digit()))
                .ok_or_else(|| format!("expected a cyclic factor `Z<d>`, found `{part}`"))
        })
        .collect()
}

/// A job as written in a config file. Only syntax is captured here; the
/// semantic checks live in [`crate::job::Job::build`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobConfig {
    pub command: Command,
    pub group: Option<Vec<i64>>,
    pub delta: Option<Vec<Vec<i64>>>,
    pub eps_r: Option<Vec<Vec<Rational>>>,
    pub mu1: Option<DistSpec>,
    pub mu2: Option<DistSpec>,
    pub tol: Option<Rational>,
    pub seed: Option<u64>,
    pub bound: Option<usize>,
    pub samples: Option<usize>,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            group: None,
            delta: None,
            eps_r: None,
            mu1: None,
            mu2: None,
            tol: None,
            seed: None,
            bound: None,
            samples: None,
        }
    }

    /// Canonical text; `parse_config(&c.render())` gives back `c`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("cmd", self.command.name().to_string());
        if let Some(g) = &self.group {
            put("group", render_group(g));
        }
        if let Some(d) = &self.delta {
            put("delta", render_int_matrix(d));
        }
        if let Some(e) = &self.eps_r {
            put("eps_r", render_rational_matrix(e));
        }
        if let Some(m) = &self.mu1 {
            put("mu1", m.to_string());
        }
        if let Some(m) = &self.mu2 {
            put("mu2", m.to_string());
        }
        if let Some(t) = &self.tol {
            put("tol", rational::render(t));
        }
        if let Some(s) = self.seed {
            put("seed", s.to_string());
        }
        if let Some(b) = self.bound {
            put("bound", b.to_string());
        }
        if let Some(s) = self.samples {
            put("samples", s.to_string());
        }
        out
    }
}

/// Line number of each key in the source text.
pub type KeyLines = BTreeMap<String, usize>;

pub const KEYS: [&str; 10] = [
    "cmd", "group", "delta", "eps_r", "mu1", "mu2", "tol", "seed", "bound", "samples",
];

/// Syntax-only parse, keeping the line of every key.
pub fn parse_syntax(text: &str) -> Result<(JobConfig, KeyLines), ConfigError> {
    let lines = lex(text)?;
    let mut seen = KeyLines::new();
    let mut values: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for line in lines {
        if !KEYS.contains(&line.key.as_str()) {
            return Err(ConfigError::new(ErrorKind::Syntax, line.number, format!("unknown key `{}`", line.key)));
        }
        if let Some(first) = seen.get(&line.key) {
            return Err(ConfigError::new(
                ErrorKind::Syntax,
                line.number,
                format!("duplicate key `{}` (first on line {first})", line.key),
            ));
        }
        seen.insert(line.key.clone(), line.number);
        values.insert(line.key, (line.number, line.value));
    }
    let syntax = |n: usize, m: String| ConfigError::new(ErrorKind::Syntax, n, m);
    let Some((cmd_line, cmd)) = values.get("cmd") else {
        return Err(ConfigError::new(ErrorKind::Syntax, 0, "missing `cmd`"));
    };
    let command = Command::from_name(cmd)
        .ok_or_else(|| syntax(*cmd_line, format!("unknown command `{cmd}`")))?;
    let mut config = JobConfig::new(command);
    fn with<T>(
        values: &BTreeMap<String, (usize, String)>,
        key: &str,
        f: impl Fn(&mut Cursor<'_>) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        let Some((n, v)) = values.get(key) else {
            return Ok(None);
        };
        let mut c = Cursor::new(v);
        f(&mut c)
            .and_then(|x| c.done().map(|_| x))
            .map(Some)
            .map_err(|m| ConfigError::new(ErrorKind::Syntax, *n, format!("{key}: {m}")))
    }
    config.group = match values.get("group") {
        Some((n, v)) => Some(parse_group(v).map_err(|m| syntax(*n, format!("group: {m}")))?),
        None => None,
    };
    config.delta = with(&values, "delta", |c| c.int_matrix())?;
    config.eps_r = with(&values, "eps_r", |c| c.matrix())?;
    config.mu1 = with(&values, "mu1", |c| parse_dist(c, true))?;
    config.mu2 = with(&values, "mu2", |c| parse_dist(c, true))?;
    config.tol = with(&values, "tol", |c| c.rational())?;
    let count = |c: &mut Cursor<'_>| c.unsigned();
    config.seed = with(&values, "seed", count)?;
    config.bound = with(&values, "bound", count)?.map(|v| v as usize);
    config.samples = with(&values, "samples", count)?.map(|v| v as usize);
    Ok((config, seen))
}

/// Parses and validates a job file.
pub fn parse_config(text: &str) -> Result<JobConfig, ConfigError> {
    let (config, lines) = parse_syntax(text)?;
    crate::job::Job::build(&config, &lines)?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use heyde_core::rational::ratio;

    #[test]
    fn lexes_comments_and_blank_lines() {
        let lines = lex("# header\n\ngroup = Z5 # trailing\n  cmd=check\n").unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].number, 3);
        assert_eq!(lines[0].value, "Z5");
        assert_eq!(lines[1].key, "cmd");
        assert_eq!(lex("oops\n").unwrap_err().line, 1);
    }

    #[test]
    fn distribution_specs_round_trip() {
        for text in [
            "[1/2, 1/2, 0, 0, 0]",
            "haar full",
            "haar gen (1,0) (0,2)",
            "haar gen",
            "point (3)",
            "product A=[[1/2,0],[0,1]] t=[1,-2] shift=(1) rho=haar gen (2)",
        ] {
            let d = parse_dist_spec(text).unwrap();
            assert_eq!(d.to_string(), text);
        }
        assert_eq!(
            parse_dist_spec("[ 2/4 ,1/2]").unwrap(),
            DistSpec::Literal(vec![ratio(1, 2), ratio(1, 2)])
        );
        assert!(parse_dist_spec("product A=[[1]] t=[0] shift=(0) rho=product A=[[1]] t=[0] shift=(0) rho=point (0)").is_err());
        assert!(parse_dist_spec("haar half").is_err());
        assert!(parse_dist_spec("point (1) extra").is_err());
    }

    #[test]
    fn group_literals() {
        assert_eq!(parse_group("Z5 x Z3").unwrap(), vec![5, 3]);
        assert_eq!(parse_group("Z12").unwrap(), vec![12]);
        assert!(parse_group("Z5 x 3").is_err());
        assert!(parse_group("Z+5").is_err());
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let e = parse_syntax("cmd = check\ngroup = Z5\nfoo = 1\n").unwrap_err();
        assert_eq!((e.kind, e.line), (ErrorKind::Syntax, 3));
        let e = parse_syntax("cmd = check\ngroup = Z5\ngroup = Z7\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_syntax("cmd = check\ndelta = [[2]\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_syntax("cmd = frobnicate\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_syntax("cmd = check\nseed = -4\n").unwrap_err();
        assert_eq!(e.line, 2);
    }
}
