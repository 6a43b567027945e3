//! Line-oriented reaction DSL: parsing and lossless emission.
//!
//! ```text
//! # comment
//! species A = 100
//! species M1 = 10
//! r1: A -> B ; k = 1.0
//! dimer: 2 M1 -> M2 ; k = 0.0038
//! src: 0 -> A ; k = 0.5        # `0` denotes an empty side
//! ```
//!
//! A side is either the token `0` (empty) or `+`-separated addends,
//! each an optional positive integer coefficient followed by a species
//! name; repeated addends merge into one term with the summed
//! coefficient. Species referenced without a `species` declaration are
//! created with initial amount 0 and reported in the parse notes. The
//! full grammar is spelled out in `docs/dsl.md`.

use thiserror::Error;

use crate::network::{
    is_valid_identifier, merge_terms, Reaction, ReactionNetwork, ReactionTerm, Species,
};

#[derive(Debug, Error, PartialEq)]
pub enum DslError {
    #[error("line {line}, column {column}: expected {expected}, found {found}")]
    Syntax {
        line: usize,
        column: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: duplicate {kind} name `{name}`")]
    DuplicateName {
        kind: &'static str,
        name: String,
        line: usize,
    },
    #[error("line {line}: reaction `{reaction}` has negative rate constant {value}")]
    NegativeRate {
        reaction: String,
        value: f64,
        line: usize,
    },
    #[error("line {line}: species `{species}` has negative initial amount {value}")]
    NegativeAmount {
        species: String,
        value: f64,
        line: usize,
    },
}

/// Result of a successful parse: the network plus human-readable notes
/// (implicitly declared species and similar non-fatal observations).
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub network: ReactionNetwork,
    pub notes: Vec<String>,
}

pub fn parse_dsl(text: &str) -> Result<Parsed, DslError> {
    let mut species: Vec<Species> = Vec::new();
    let mut reactions: Vec<Reaction> = Vec::new();
    let mut notes = Vec::new();

    // First pass: species declarations, so declaration order wins and
    // species may be declared after the reactions that use them.
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let Some(line) = meaningful(raw) else {
            continue;
        };
        if !is_species_decl(line) {
            continue;
        }
        let mut cur = Cursor::new(line, line_no);
        cur.expect_keyword("species")?;
        let name = cur.ident("species name")?.to_owned();
        cur.expect_char('=')?;
        let amount = cur.number("initial amount")?;
        cur.expect_end()?;
        if amount < 0.0 {
            return Err(DslError::NegativeAmount {
                species: name,
                value: amount,
                line: line_no,
            });
        }
        if species.iter().any(|s| s.name == name) {
            return Err(DslError::DuplicateName {
                kind: "species",
                name,
                line: line_no,
            });
        }
        species.push(Species::new(name, amount));
    }

    // Second pass: reactions. Undeclared species are appended with
    // initial amount 0.
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let Some(line) = meaningful(raw) else {
            continue;
        };
        if is_species_decl(line) {
            continue;
        }
        let mut cur = Cursor::new(line, line_no);
        let name = cur.ident("reaction name")?.to_owned();
        cur.expect_char(':')?;
        let reactants = parse_side(&mut cur, &mut species, &name, &mut notes)?;
        cur.expect_token("->")?;
        let products = parse_side(&mut cur, &mut species, &name, &mut notes)?;
        cur.expect_char(';')?;
        cur.expect_keyword("k")?;
        cur.expect_char('=')?;
        let rate = cur.number("rate constant")?;
        cur.expect_end()?;
        if rate < 0.0 {
            return Err(DslError::NegativeRate {
                reaction: name,
                value: rate,
                line: line_no,
            });
        }
        if reactions.iter().any(|r| r.name == name) {
            return Err(DslError::DuplicateName {
                kind: "reaction",
                name,
                line: line_no,
            });
        }
        reactions.push(Reaction::new(name, reactants, products, rate));
    }

    Ok(Parsed {
        network: ReactionNetwork::new(species, reactions),
        notes,
    })
}

/// Serialise a network back to canonical DSL text. `parse_dsl` of the
/// output reproduces the network exactly.
pub fn emit_dsl(network: &ReactionNetwork) -> String {
    let mut out = String::new();
    for s in &network.species {
        out.push_str(&format!("species {} = {}\n", s.name, s.initial_amount));
    }
    if !network.species.is_empty() && !network.reactions.is_empty() {
        out.push('\n');
    }
    for r in &network.reactions {
        out.push_str(&format!(
            "{}: {} -> {} ; k = {}\n",
            r.name,
            emit_side(network, &r.reactants),
            emit_side(network, &r.products),
            r.rate_constant
        ));
    }
    out
}

fn emit_side(network: &ReactionNetwork, terms: &[ReactionTerm]) -> String {
    if terms.is_empty() {
        return "0".to_owned();
    }
    terms
        .iter()
        .map(|t| {
            let name = &network.species[t.species].name;
            if t.coefficient == 1 {
                name.clone()
            } else {
                format!("{} {}", t.coefficient, name)
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Strip comments and whitespace; `None` when nothing is left.
fn meaningful(raw: &str) -> Option<&str> {
    let no_comment = match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    };
    let trimmed = no_comment.trim();
    (!trimmed.is_empty()).then_some(trimmed)
}

fn is_species_decl(line: &str) -> bool {
    line.strip_prefix("species")
        .is_some_and(|rest| rest.starts_with(|c: char| c.is_whitespace()))
}

fn parse_side(
    cur: &mut Cursor<'_>,
    species: &mut Vec<Species>,
    reaction: &str,
    notes: &mut Vec<String>,
) -> Result<Vec<ReactionTerm>, DslError> {
    cur.skip_ws();
    // The bare token `0` denotes an empty side.
    if cur.peek() == Some('0') && !matches!(cur.peek_at(1), Some(c) if c.is_ascii_alphanumeric()) {
        cur.advance(1);
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    loop {
        let coefficient = match cur.integer() {
            Some(n) if n >= 1 => n,
            Some(_) => {
                return Err(cur.syntax_error("a coefficient of at least 1"));
            }
            None => 1,
        };
        let name = cur.ident("species name")?.to_owned();
        let index = match species.iter().position(|s| s.name == name) {
            Some(i) => i,
            None => {
                notes.push(format!(
                    "species `{name}` used in reaction `{reaction}` without a declaration; \
                     initial amount defaulted to 0"
                ));
                species.push(Species::new(name, 0.0));
                species.len() - 1
            }
        };
        terms.push(ReactionTerm::new(index, coefficient));
        cur.skip_ws();
        if cur.peek() == Some('+') {
            cur.advance(1);
        } else {
            break;
        }
    }
    Ok(merge_terms(terms))
}

struct Cursor<'a> {
    line: &'a str,
    pos: usize,
    line_no: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a str, line_no: usize) -> Self {
        Self { line, pos: 0, line_no }
    }

    fn rest(&self) -> &'a str {
        &self.line[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn advance(&mut self, bytes: usize) {
        self.pos += bytes;
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.line.len() - trimmed.len();
    }

    fn column(&self) -> usize {
        self.line[..self.pos].chars().count() + 1
    }

    fn syntax_error(&self, expected: &str) -> DslError {
        let found = match self.peek() {
            Some(c) => format!("`{}`", &self.rest()[..c.len_utf8()]),
            None => "end of line".to_owned(),
        };
        DslError::Syntax {
            line: self.line_no,
            column: self.column(),
            expected: expected.to_owned(),
            found,
        }
    }

    fn expect_char(&mut self, c: char) -> Result<(), DslError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.advance(c.len_utf8());
            Ok(())
        } else {
            Err(self.syntax_error(&format!("`{c}`")))
        }
    }

    fn expect_token(&mut self, token: &str) -> Result<(), DslError> {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.advance(token.len());
            Ok(())
        } else {
            Err(self.syntax_error(&format!("`{token}`")))
        }
    }

    /// A keyword is an identifier-shaped token that must match exactly.
    fn expect_keyword(&mut self, word: &str) -> Result<(), DslError> {
        self.skip_ws();
        let start = self.pos;
        match self.ident(&format!("`{word}`")) {
            Ok(got) if got == word => Ok(()),
            Ok(_) => {
                self.pos = start;
                Err(self.syntax_error(&format!("`{word}`")))
            }
            Err(e) => Err(e),
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'a str, DslError> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .take_while(|&(i, c)| {
                if i == 0 {
                    c.is_ascii_alphabetic() || c == '_'
                } else {
                    c.is_ascii_alphanumeric() || c == '_'
                }
            })
            .count();
        if len == 0 {
            return Err(self.syntax_error(what));
        }
        let ident = &rest[..len];
        debug_assert!(is_valid_identifier(ident));
        self.advance(len);
        Ok(ident)
    }

    /// Consume a bare unsigned integer if one is present and not
    /// immediately part of a float (e.g. the `2` in `2 M1`).
    fn integer(&mut self) -> Option<i64> {
        self.skip_ws();
        let rest = self.rest();
        let digits = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if digits == 0 {
            return None;
        }
        let value: i64 = rest[..digits].parse().ok()?;
        self.advance(digits);
        Some(value)
    }

    fn number(&mut self, what: &str) -> Result<f64, DslError> {
        self.skip_ws();
        let rest = self.rest();
        let mut len = 0;
        let bytes = rest.as_bytes();
        if matches!(bytes.first(), Some(b'+') | Some(b'-')) {
            len += 1;
        }
        let mut seen_digit = false;
        let mut seen_dot = false;
        let mut seen_exp = false;
        while len < bytes.len() {
            match bytes[len] {
                b'0'..=b'9' => {
                    seen_digit = true;
                    len += 1;
                }
                b'.' if !seen_dot && !seen_exp => {
                    seen_dot = true;
                    len += 1;
                }
                b'e' | b'E' if seen_digit && !seen_exp => {
                    seen_exp = true;
                    len += 1;
                    if matches!(bytes.get(len), Some(b'+') | Some(b'-')) {
                        len += 1;
                    }
                }
                _ => break,
            }
        }
        let parsed = if seen_digit {
            rest[..len].parse::<f64>().ok()
        } else {
            None
        };
        match parsed {
            Some(v) if v.is_finite() => {
                self.advance(len);
                Ok(v)
            }
            _ => Err(self.syntax_error(&format!("{what} (a finite number)"))),
        }
    }

    fn expect_end(&mut self) -> Result<(), DslError> {
        self.skip_ws();
        if self.peek().is_none() {
            Ok(())
        } else {
            Err(self.syntax_error("end of line"))
        }
    }
}
