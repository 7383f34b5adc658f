//! Gamble spec files.
//!
//! A spec is a line-oriented list of `key = value` entries. Blank lines
//! and text after `#` are ignored. Either an outcome table
//!
//! ```text
//! round_duration = 1      # optional, defaults to 1
//! outcome = 0.5, -0.4     # probability, wealth change
//! outcome = 0.5, 0.5
//! ```
//!
//! or a lottery family
//!
//! ```text
//! family = menger         # st_petersburg | menger
//! n_max = 10
//! price = 2               # optional, defaults to 0
//! outer_base = e          # menger only, optional
//! inner_base = e          # menger only, optional
//! round_duration = 1      # optional
//! ```
//!
//! Numbers are decimal and parse to the nearest `f64`; `e` is accepted as
//! a base. Each key other than `outcome` may appear once.

use std::fmt;

use thiserror::Error;

use crate::gamble::{Gamble, GambleError};
use crate::io::render::number;
use crate::lotteries::{LotteryError, LotteryFamily, LotterySpec};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("line {line}: {field}: {source}")]
    Gamble {
        line: usize,
        field: &'static str,
        source: GambleError,
    },
    #[error("line {line}: {field}: {source}")]
    Lottery {
        line: usize,
        field: &'static str,
        source: LotteryError,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecDocument {
    Gamble(Gamble),
    Lottery(LotterySpec),
}

#[derive(Debug, Clone, Copy)]
struct Located<T> {
    value: T,
    line: usize,
}

#[derive(Default)]
struct Fields {
    outcomes: Vec<Located<(f64, f64)>>,
    round_duration: Option<Located<f64>>,
    family: Option<Located<FamilyName>>,
    n_max: Option<Located<usize>>,
    price: Option<Located<f64>>,
    outer_base: Option<Located<f64>>,
    inner_base: Option<Located<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FamilyName {
    StPetersburg,
    Menger,
}

pub fn parse_spec(text: &str) -> Result<SpecDocument, SpecError> {
    let fields = parse_fields(text)?;
    build(fields, text.lines().count().max(1))
}

fn parse_fields(text: &str) -> Result<Fields, ParseError> {
    let mut f = Fields::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let key_col = raw.len() - raw.trim_start().len() + 1;
        let Some(eq) = content.find('=') else {
            return Err(ParseError {
                line,
                column: key_col,
                message: "expected `key = value`".into(),
            });
        };
        let key = content[..eq].trim();
        let value = content[eq + 1..].trim();
        let value_col = if value.is_empty() {
            eq + 2
        } else {
            eq + 2 + content[eq + 1..].find(value).unwrap_or(0)
        };
        let err = |column: usize, message: String| ParseError { line, column, message };
        if value.is_empty() {
            return Err(err(value_col, format!("missing value for `{key}`")));
        }
        let duplicate = || err(key_col, format!("`{key}` given more than once"));
        match key {
            "outcome" => {
                let Some(comma) = value.find(',') else {
                    return Err(err(value_col, "expected `probability, wealth_change`".into()));
                };
                let p = parse_number(value[..comma].trim(), line, value_col)?;
                let second = &value[comma + 1..];
                let offset = value_col + comma + 1 + (second.len() - second.trim_start().len());
                let dw = parse_number(second.trim(), line, offset)?;
                f.outcomes.push(Located { value: (p, dw), line });
            }
            "round_duration" | "price" | "outer_base" | "inner_base" => {
                let x = parse_number(value, line, value_col)?;
                let slot = match key {
                    "round_duration" => &mut f.round_duration,
                    "price" => &mut f.price,
                    "outer_base" => &mut f.outer_base,
                    _ => &mut f.inner_base,
                };
                if slot.is_some() {
                    return Err(duplicate());
                }
                *slot = Some(Located { value: x, line });
            }
            "n_max" => {
                if f.n_max.is_some() {
                    return Err(duplicate());
                }
                let n = value
                    .parse::<usize>()
                    .map_err(|_| err(value_col, format!("`{value}` is not a non-negative integer")))?;
                f.n_max = Some(Located { value: n, line });
            }
            "family" => {
                if f.family.is_some() {
                    return Err(duplicate());
                }
                let name = match value {
                    "st_petersburg" => FamilyName::StPetersburg,
                    "menger" => FamilyName::Menger,
                    _ => {
                        return Err(err(
                            value_col,
                            format!("unknown family `{value}`, expected st_petersburg or menger"),
                        ))
                    }
                };
                f.family = Some(Located { value: name, line });
            }
            _ => return Err(err(key_col, format!("unknown key `{key}`"))),
        }
    }
    Ok(f)
}

fn parse_number(token: &str, line: usize, column: usize) -> Result<f64, ParseError> {
    if token == "e" {
        return Ok(std::f64::consts::E);
    }
    let bad = || ParseError {
        line,
        column,
        message: format!("`{token}` is not a decimal number"),
    };
    // reject Rust's extra spellings (inf, nan, infinity)
    if !token
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return Err(bad());
    }
    token.parse::<f64>().map_err(|_| bad())
}

fn build(f: Fields, last_line: usize) -> Result<SpecDocument, SpecError> {
    let family = f.family;
    if let Some(family) = family {
        if let Some(o) = f.outcomes.first() {
            return Err(ParseError {
                line: o.line,
                column: 1,
                message: "outcome tables and lottery families cannot be mixed".into(),
            }
            .into());
        }
        let Some(n_max) = f.n_max else {
            return Err(ParseError {
                line: family.line,
                column: 1,
                message: "a lottery family needs `n_max`".into(),
            }
            .into());
        };
        if family.value == FamilyName::StPetersburg {
            if let Some(base) = f.outer_base.or(f.inner_base) {
                return Err(ParseError {
                    line: base.line,
                    column: 1,
                    message: "bases apply to the menger family only".into(),
                }
                .into());
            }
        }
        let price = f.price.map_or(0.0, |p| p.value);
        let lottery_err = |line, field, source| SpecError::Lottery { line, field, source };
        let spec = match family.value {
            FamilyName::StPetersburg => LotteryFamily::StPetersburg.build(n_max.value, price),
            FamilyName::Menger => LotteryFamily::Menger {
                outer_base: f.outer_base.map_or(std::f64::consts::E, |b| b.value),
                inner_base: f.inner_base.map_or(std::f64::consts::E, |b| b.value),
            }
            .build(n_max.value, price),
        }
        .map_err(|e| {
            let (line, field) = match &e {
                LotteryError::NMaxOutOfRange(_) => (n_max.line, "n_max"),
                LotteryError::InvalidPrice(_) => (f.price.map_or(family.line, |p| p.line), "price"),
                LotteryError::InvalidBase => (f.outer_base.or(f.inner_base).map_or(family.line, |b| b.line), "base"),
                _ => (family.line, "family"),
            };
            lottery_err(line, field, e)
        })?;
        return match f.round_duration {
            Some(d) => spec
                .with_round_duration(d.value)
                .map(SpecDocument::Lottery)
                .map_err(|e| lottery_err(d.line, "round_duration", e)),
            None => Ok(SpecDocument::Lottery(spec)),
        };
    }

    for (key, line) in [
        ("n_max", f.n_max.map(|x| x.line)),
        ("price", f.price.map(|x| x.line)),
        ("outer_base", f.outer_base.map(|x| x.line)),
        ("inner_base", f.inner_base.map(|x| x.line)),
    ] {
        if let Some(line) = line {
            return Err(ParseError {
                line,
                column: 1,
                message: format!("`{key}` needs a `family`"),
            }
            .into());
        }
    }
    let raw: Vec<(f64, f64)> = f.outcomes.iter().map(|o| o.value).collect();
    let duration = f.round_duration.map_or(1.0, |d| d.value);
    Gamble::new(&raw, duration).map(SpecDocument::Gamble).map_err(|source| {
        let at = |position: usize| f.outcomes[position].line;
        let (line, field) = match &source {
            GambleError::Empty => (last_line, "outcome"),
            GambleError::NonPositiveDuration(_) => (f.round_duration.map_or(1, |d| d.line), "round_duration"),
            GambleError::NonPositiveProbability { position, .. } => (at(*position), "probability"),
            GambleError::NonFiniteWealthChange { position, .. } => (at(*position), "wealth_change"),
            GambleError::DuplicateWealthChange { second, .. } => (at(*second), "wealth_change"),
            GambleError::ProbabilitySum { .. } => (f.outcomes.last().map_or(last_line, |o| o.line), "probability"),
            _ => (last_line, "outcome"),
        };
        SpecError::Gamble { line, field, source }
    })
}

/// Serializes a document so that [`parse_spec`] rebuilds an equal value.
pub fn to_spec_string(doc: &SpecDocument) -> String {
    doc.to_string()
}

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecDocument::Gamble(g) => {
                writeln!(f, "round_duration = {}", number(g.round_duration()))?;
                for o in g.outcomes() {
                    writeln!(f, "outcome = {}, {}", number(o.probability), number(o.wealth_change))?;
                }
            }
            SpecDocument::Lottery(l) => {
                match l.family() {
                    Some(LotteryFamily::StPetersburg) => writeln!(f, "family = st_petersburg")?,
                    Some(LotteryFamily::Menger { outer_base, inner_base }) => {
                        writeln!(f, "family = menger")?;
                        writeln!(f, "outer_base = {}", number(outer_base))?;
                        writeln!(f, "inner_base = {}", number(inner_base))?;
                    }
                    None => return Err(fmt::Error),
                }
                writeln!(f, "n_max = {}", l.n_max())?;
                writeln!(f, "price = {}", number(l.price()))?;
                writeln!(f, "round_duration = {}", number(l.round_duration()))?;
            }
        }
        Ok(())
    }
}
