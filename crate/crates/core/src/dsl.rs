//! The `.pulse` text format: a line-oriented schedule language.
//!
//! ```text
//! levels 4                      # header, must come first
//! load 2
//! raman 2 3 theta=pi/2          # optional phi=ANGLE
//! feed target=4 control=3
//! emit 2:L 3:R
//! random-emit
//! measure last basis=RL         # or a 1-based mode index
//! ```
//!
//! Angles are decimal radians or pi fractions such as `pi/2`, `-3pi/4`.
//! [`parse`] collects one diagnostic per bad line instead of stopping at the
//! first; [`serialize`] writes the canonical form that parses back to an equal
//! schedule.

use std::f64::consts::PI;
use std::fmt;

use crate::error::Error;
use crate::protocols::Schedule;
use crate::pulse::{EmissionMap, Instruction, Level, ModeRef};
use crate::state::{Letter, MAX_LEVELS};

/// 1-based line and column (in characters) of a token, `length ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    /// What the parser would have accepted at this position.
    pub expected: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.column, self.message)?;
        if let Some(e) = &self.expected {
            write!(f, " (expected {e})")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Formats diagnostics with the offending source line and a caret marker.
pub fn render_diagnostics(source: &str, errors: &[ParseError]) -> String {
    let lines: Vec<&str> = source.lines().collect();
    let mut out = String::new();
    for e in errors {
        out.push_str(&format!("error: {e}\n"));
        if let Some(text) = lines.get(e.span.line - 1) {
            out.push_str(&format!("{:>5} | {}\n", e.span.line, text));
            out.push_str(&format!(
                "      | {}{}\n",
                " ".repeat(e.span.column - 1),
                "^".repeat(e.span.length)
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((b, c)) = start.take() {
                tokens.push(Token {
                    text: &line[b..byte],
                    column: c + 1,
                });
            }
        } else if start.is_none() {
            start = Some((byte, col));
        }
    }
    if let Some((b, c)) = start {
        tokens.push(Token {
            text: &line[b..],
            column: c + 1,
        });
    }
    tokens
}

struct LineParser<'a> {
    line: usize,
    end_column: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
}

type LineResult<T> = std::result::Result<T, ParseError>;

impl<'a> LineParser<'a> {
    fn error_at(&self, tok: Token<'_>, message: impl Into<String>, expected: Option<&str>) -> ParseError {
        ParseError {
            span: SourceSpan {
                line: self.line,
                column: tok.column,
                length: tok.text.chars().count().max(1),
            },
            message: message.into(),
            expected: expected.map(str::to_string),
        }
    }

    fn error_at_end(&self, message: impl Into<String>, expected: &str) -> ParseError {
        ParseError {
            span: SourceSpan {
                line: self.line,
                column: self.end_column,
                length: 1,
            },
            message: message.into(),
            expected: Some(expected.to_string()),
        }
    }

    fn next(&mut self, expected: &str) -> LineResult<Token<'a>> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(*t)
            }
            None => Err(self.error_at_end("unexpected end of line", expected)),
        }
    }

    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.pos).copied()
    }

    fn finish(&self) -> LineResult<()> {
        match self.peek() {
            Some(t) => Err(self.error_at(t, format!("unexpected token `{}`", t.text), Some("end of line"))),
            None => Ok(()),
        }
    }

    fn int(&self, tok: Token<'_>, what: &str) -> LineResult<usize> {
        if tok.text.is_empty() || !tok.text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.error_at(tok, format!("malformed {what} `{}`", tok.text), Some(what)));
        }
        tok.text
            .parse()
            .map_err(|_| self.error_at(tok, format!("{what} `{}` is too large", tok.text), Some(what)))
    }

    fn level_token(&self, tok: Token<'_>, levels: usize) -> LineResult<Level> {
        let n = self.int(tok, "level index")?;
        if n == 0 || n > levels {
            return Err(self.error_at(
                tok,
                format!("level out of range: {n} not in 1..={levels}"),
                Some("level index"),
            ));
        }
        Ok(Level::new(n as u8).expect("bounded by the header"))
    }

    fn level(&mut self, levels: usize) -> LineResult<Level> {
        let tok = self.next("level index")?;
        self.level_token(tok, levels)
    }

    /// `key=VALUE`, returning the value part as a token with its own column.
    fn keyed(&mut self, key: &str) -> LineResult<Token<'a>> {
        let hint = format!("{key}=");
        let tok = self.next(&hint)?;
        match tok.text.strip_prefix(&hint) {
            Some(value) => Ok(Token {
                text: value,
                column: tok.column + hint.len(),
            }),
            None => Err(self.error_at(tok, format!("expected `{hint}…`, found `{}`", tok.text), Some(&hint))),
        }
    }

    fn keyed_level(&mut self, key: &str, levels: usize) -> LineResult<Level> {
        let tok = self.keyed(key)?;
        if tok.text.is_empty() {
            return Err(self.error_at_end(format!("missing value after `{key}=`"), "level index"));
        }
        self.level_token(tok, levels)
    }

    fn angle(&mut self, key: &str) -> LineResult<f64> {
        let tok = self.keyed(key)?;
        parse_angle(tok.text)
            .ok_or_else(|| self.error_at(tok, format!("malformed angle `{}`", tok.text), Some("radians or pi fraction")))
    }

    fn optional_phi(&mut self) -> LineResult<f64> {
        match self.peek() {
            Some(t) if t.text.starts_with("phi=") => self.angle("phi"),
            _ => Ok(0.0),
        }
    }
}

/// `[-][INT]pi[/INT]` or a finite decimal.
pub fn parse_angle(text: &str) -> Option<f64> {
    if text.contains("pi") {
        let (neg, rest) = match text.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, text),
        };
        let (num, tail) = rest.split_once("pi")?;
        let p: u64 = if num.is_empty() {
            1
        } else if num.bytes().all(|b| b.is_ascii_digit()) {
            num.parse().ok()?
        } else {
            return None;
        };
        let q: u64 = match tail {
            "" => 1,
            t => {
                let d = t.strip_prefix('/')?;
                if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                d.parse().ok()?
            }
        };
        if q == 0 {
            return None;
        }
        let mag = pi_fraction(p, q);
        return Some(if neg { -mag } else { mag });
    }
    let allowed = |c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'e' | 'E');
    if text.is_empty() || !text.chars().all(allowed) {
        return None;
    }
    text.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn pi_fraction(p: u64, q: u64) -> f64 {
    p as f64 * PI / q as f64
}

/// Shortest exact textual form: `0`, a pi fraction with denominator ≤ 16, or a decimal.
pub fn format_angle(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs();
    let sign = if x < 0.0 { "-" } else { "" };
    for q in 1..=16u64 {
        let p = (mag * q as f64 / PI).round();
        if !(1.0..=1e6).contains(&p) {
            continue;
        }
        let p = p as u64;
        if pi_fraction(p, q) == mag {
            let num = if p == 1 { String::new() } else { p.to_string() };
            let den = if q == 1 { String::new() } else { format!("/{q}") };
            return format!("{sign}{num}pi{den}");
        }
    }
    format!("{x}")
}

fn parse_letter(s: &str) -> Option<Letter> {
    match s {
        "R" => Some(Letter::R),
        "L" => Some(Letter::L),
        _ => None,
    }
}

fn parse_instruction(p: &mut LineParser<'_>, keyword: Token<'_>, levels: usize, emitted: usize) -> LineResult<Instruction> {
    let ins = match keyword.text {
        "load" => Instruction::Load { level: p.level(levels)? },
        "toggle" => Instruction::Toggle { level: p.level(levels)? },
        "supload" => {
            let level = p.level(levels)?;
            let theta = p.angle("theta")?;
            let phi = p.optional_phi()?;
            Instruction::SuperpositionLoad { level, theta, phi }
        }
        "raman" => {
            let first = p.level(levels)?;
            let second = p.level(levels)?;
            if first == second {
                return Err(p.error_at(keyword, "raman needs two distinct levels", None));
            }
            let theta = p.angle("theta")?;
            let phi = p.optional_phi()?;
            Instruction::Raman {
                first,
                second,
                theta,
                phi,
            }
        }
        "cphase" => {
            let first = p.level(levels)?;
            let second = p.level(levels)?;
            if first == second {
                return Err(p.error_at(keyword, "cphase needs two distinct levels", None));
            }
            Instruction::CPhase { first, second }
        }
        "feed" => {
            let target = p.keyed_level("target", levels)?;
            let control = p.keyed_level("control", levels)?;
            if target == control {
                return Err(p.error_at(keyword, "feed target and control must differ", None));
            }
            Instruction::Feed { target, control }
        }
        "emit" => {
            let mut entries: Vec<(Level, Letter)> = Vec::new();
            while let Some(tok) = p.peek() {
                p.pos += 1;
                let Some((l, x)) = tok.text.split_once(':') else {
                    return Err(p.error_at(tok, format!("malformed emission `{}`", tok.text), Some("LEVEL:R or LEVEL:L")));
                };
                let level = p.level_token(Token { text: l, column: tok.column }, levels)?;
                let letter = parse_letter(x).ok_or_else(|| {
                    p.error_at(
                        Token {
                            text: x,
                            column: tok.column + l.chars().count() + 1,
                        },
                        format!("unknown polarization `{x}`"),
                        Some("R or L"),
                    )
                })?;
                if entries.iter().any(|(e, _)| *e == level) {
                    return Err(p.error_at(tok, format!("duplicate emit key: level {level}"), None));
                }
                entries.push((level, letter));
            }
            if entries.is_empty() {
                return Err(p.error_at_end("emit needs at least one level", "LEVEL:R or LEVEL:L"));
            }
            Instruction::Emit {
                map: EmissionMap::new(entries).expect("validated above"),
            }
        }
        "random-emit" => Instruction::RandomEmit,
        "measure" => {
            let tok = p.next("`last` or a mode index")?;
            let mode = if tok.text == "last" {
                if emitted == 0 {
                    return Err(p.error_at(tok, "measurement before any emission", None));
                }
                ModeRef::Last
            } else {
                let n = p.int(tok, "mode index")?;
                if n == 0 || n > emitted {
                    return Err(p.error_at(
                        tok,
                        format!("mode {n} not emitted yet ({emitted} so far)"),
                        Some("emitted mode index"),
                    ));
                }
                ModeRef::Index(n)
            };
            let basis = p.keyed("basis")?;
            if basis.text != "RL" {
                return Err(p.error_at(basis, format!("unsupported basis `{}`", basis.text), Some("RL")));
            }
            Instruction::Measure { mode }
        }
        "levels" => return Err(p.error_at(keyword, "duplicate `levels` header", None)),
        other => {
            return Err(p.error_at(
                keyword,
                format!("unknown keyword `{other}`"),
                Some("load, supload, raman, feed, toggle, cphase, emit, random-emit or measure"),
            ))
        }
    };
    p.finish()?;
    Ok(ins)
}

/// Parses a `.pulse` document.
pub fn parse(text: &str) -> Result<Schedule, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut levels: Option<usize> = None;
    let mut header_seen = false;
    let mut instructions = Vec::new();
    let mut lines_of = Vec::new();
    let mut emitted = 0usize;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(&keyword) = tokens.first() else {
            continue;
        };
        let mut p = LineParser {
            line: line_no,
            end_column: content.trim_end().chars().count() + 1,
            tokens,
            pos: 1,
        };
        if !header_seen {
            header_seen = true;
            if keyword.text == "levels" {
                let parsed = p.next("register size").and_then(|tok| {
                    let n = p.int(tok, "register size")?;
                    if n == 0 || n > MAX_LEVELS {
                        return Err(p.error_at(tok, format!("register size {n} not in 1..={MAX_LEVELS}"), None));
                    }
                    p.finish()?;
                    Ok(n)
                });
                match parsed {
                    Ok(n) => levels = Some(n),
                    Err(e) => errors.push(e),
                }
                continue;
            }
            errors.push(p.error_at(keyword, "missing `levels` header", Some("levels INT")));
            continue;
        }
        match parse_instruction(&mut p, keyword, levels.unwrap_or(MAX_LEVELS), emitted) {
            Ok(ins) => {
                if matches!(ins, Instruction::Emit { .. } | Instruction::RandomEmit) {
                    emitted += 1;
                }
                instructions.push(ins);
                lines_of.push(line_no);
            }
            Err(e) => errors.push(e),
        }
    }
    if !header_seen {
        errors.push(ParseError {
            span: SourceSpan {
                line: last_line.max(1),
                column: 1,
                length: 1,
            },
            message: "missing `levels` header".into(),
            expected: Some("levels INT".into()),
        });
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let levels = levels.expect("header parsed without errors");
    Schedule::new(levels, instructions).map_err(|e| {
        let line = match &e {
            Error::Schedule { index, .. } => lines_of[*index],
            _ => 1,
        };
        vec![ParseError {
            span: SourceSpan {
                line,
                column: 1,
                length: 1,
            },
            message: e.to_string(),
            expected: None,
        }]
    })
}

fn format_instruction(ins: &Instruction) -> String {
    let phi = |phi: f64| {
        if phi == 0.0 {
            String::new()
        } else {
            format!(" phi={}", format_angle(phi))
        }
    };
    match ins {
        Instruction::Load { level } => format!("load {level}"),
        Instruction::SuperpositionLoad { level, theta, phi: f } => {
            format!("supload {level} theta={}{}", format_angle(*theta), phi(*f))
        }
        Instruction::Raman {
            first,
            second,
            theta,
            phi: f,
        } => format!("raman {first} {second} theta={}{}", format_angle(*theta), phi(*f)),
        Instruction::Feed { target, control } => format!("feed target={target} control={control}"),
        Instruction::Toggle { level } => format!("toggle {level}"),
        Instruction::CPhase { first, second } => format!("cphase {first} {second}"),
        Instruction::Emit { map } => {
            let parts: Vec<String> = map
                .entries()
                .iter()
                .map(|(l, x)| format!("{l}:{}", x.symbol()))
                .collect();
            format!("emit {}", parts.join(" "))
        }
        Instruction::RandomEmit => "random-emit".into(),
        Instruction::Measure { mode } => match mode {
            ModeRef::Last => "measure last basis=RL".into(),
            ModeRef::Index(i) => format!("measure {i} basis=RL"),
        },
    }
}

/// Canonical text; the schedule name, if any, becomes a leading comment.
pub fn serialize(schedule: &Schedule) -> String {
    let mut out = String::new();
    if let Some(name) = schedule.name() {
        out.push_str(&format!("# {name}\n"));
    }
    out.push_str(&format!("levels {}\n", schedule.level_count()));
    for ins in schedule.instructions() {
        out.push_str(&format_instruction(ins));
        out.push('\n');
    }
    out
}
