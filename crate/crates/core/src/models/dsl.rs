//! Recursive descent parser and canonical printer for model documents.
//!
//! ```text
//! record  := "model" id ["alt" int] "on" space "cut" bundle ["expect" tuple] ["tags" taglist] ";"
//! space   := factor ("x" factor)*
//! factor  := "P(" int ")" | "Gr(" int "," int ")" | "Fl(" int ("," int)* ";" int ")" | "WP(" int ("," int)* ")"
//! bundle  := prod ("+" prod)*
//! prod    := atom ("*" atom)*
//! atom    := "O(" ints ")" | "U" int ["." int] | "Q" int ["." int]
//!          | "dual(" bundle ")" | "Sym" int "(" bundle ")" | "Wedge" int "(" bundle ")"
//!          | "Schur[" ints "](" bundle ")" | "Ext[" bundle ("," bundle)+ "]"
//!          | atom "(" ints ")"
//! ```
//!
//! Whitespace is insignificant between tokens and `#` starts a comment that
//! runs to the end of the line. Comment lines directly above a record are
//! kept as its notes.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::bundlecalc::{BundleExpr, TautKind};
use crate::bwb::{FactorDescriptor, SpaceDescriptor};
use crate::combinat::Partition;

use super::{Expected, ModelRecord, Tag};

/// A parse or validation failure at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column} (offset {offset}): {message}")]
pub struct DslError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Parses a whole document into records.
pub fn parse(text: &str) -> Result<Vec<ModelRecord>, DslError> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    loop {
        let notes = p.skip_trivia();
        if p.at_end() {
            return Ok(out);
        }
        out.push(p.record(notes)?);
    }
}

/// Parses a product space such as `P(2) x Gr(2,4)`.
pub fn parse_space(text: &str) -> Result<SpaceDescriptor, DslError> {
    let mut p = Parser::new(text);
    let s = p.space()?;
    p.finish()?;
    Ok(s)
}

/// Parses a bundle expression and checks it against `space`.
pub fn parse_bundle(text: &str, space: &SpaceDescriptor) -> Result<BundleExpr, DslError> {
    let mut p = Parser::new(text);
    let b = p.bundle(space)?;
    p.finish()?;
    Ok(b)
}

/// Canonical text of one record, notes included.
pub fn print_record(r: &ModelRecord) -> String {
    let mut s = String::new();
    for n in &r.notes {
        s.push_str("# ");
        s.push_str(n);
        s.push('\n');
    }
    s.push_str(&record_line(r));
    s.push('\n');
    s
}

/// Canonical single-line form of a record, without notes.
pub fn record_line(r: &ModelRecord) -> String {
    let mut s = format!("model {}", r.id);
    if r.variant > 0 {
        s.push_str(&format!(" alt {}", r.variant));
    }
    s.push_str(&format!(" on {} cut {}", r.space, r.bundle));
    if let Some(t) = r.expected.tuple() {
        let items: Vec<String> = t
            .iter()
            .map(|v| v.map_or("_".to_string(), |x| x.to_string()))
            .collect();
        s.push_str(&format!(" expect ({})", items.join(",")));
    }
    if !r.tags.is_empty() {
        let tags: Vec<String> = r.tags.iter().map(|t| t.to_string()).collect();
        s.push_str(&format!(" tags {}", tags.join(", ")));
    }
    s.push(';');
    s
}

/// Canonical text of a whole document.
pub fn print(records: &[ModelRecord]) -> String {
    let mut s = String::new();
    for (i, r) in records.iter().enumerate() {
        if i > 0 && !r.notes.is_empty() {
            s.push('\n');
        }
        s.push_str(&print_record(r));
    }
    s
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> DslError {
        let before = &self.src[..offset.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        DslError {
            offset,
            line,
            column,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> DslError {
        self.error_at(self.pos, message)
    }

    /// Skips whitespace and comments, returning the comment block that
    /// ends right before the next token.
    fn skip_trivia(&mut self) -> Vec<String> {
        let mut notes: Vec<String> = Vec::new();
        loop {
            let r = self.rest();
            let trimmed = r.trim_start();
            let skipped = &r[..r.len() - trimmed.len()];
            if skipped.matches('\n').count() >= 2 {
                notes.clear();
            }
            self.pos += skipped.len();
            if let Some(body) = self.rest().strip_prefix('#') {
                let end = body.find('\n').unwrap_or(body.len());
                notes.push(body[..end].trim().to_string());
                self.pos += 1 + end;
            } else {
                return notes;
            }
        }
    }

    fn ws(&mut self) {
        self.skip_trivia();
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), DslError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{tok}`")))
        }
    }

    /// Matches a keyword not followed by an identifier character.
    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.ws();
        let r = self.rest();
        if r.starts_with(kw) && !r[kw.len()..].starts_with(is_ident_char) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn finish(&mut self) -> Result<(), DslError> {
        self.ws();
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn int(&mut self) -> Result<i64, DslError> {
        self.ws();
        let r = self.rest();
        let sign = usize::from(r.starts_with('-'));
        let digits = r[sign..].bytes().take_while(|b| b.is_ascii_digit()).count();
        if digits == 0 {
            return Err(self.error("expected an integer"));
        }
        let text = &r[..sign + digits];
        let v = text
            .parse::<i64>()
            .map_err(|_| self.error("integer out of range"))?;
        self.pos += sign + digits;
        Ok(v)
    }

    fn uint(&mut self) -> Result<usize, DslError> {
        self.ws();
        let start = self.pos;
        let v = self.int()?;
        usize::try_from(v).map_err(|_| self.error_at(start, "expected a non-negative integer"))
    }

    fn ints(&mut self) -> Result<Vec<i64>, DslError> {
        let mut v = vec![self.int()?];
        while self.eat(",") {
            v.push(self.int()?);
        }
        Ok(v)
    }

    fn ident(&mut self) -> Result<String, DslError> {
        self.ws();
        let n = self
            .rest()
            .chars()
            .take_while(|&c| is_ident_char(c))
            .count();
        if n == 0 {
            return Err(self.error("expected an identifier"));
        }
        let s = self.rest()[..n].to_string();
        self.pos += n;
        Ok(s)
    }

    fn record(&mut self, notes: Vec<String>) -> Result<ModelRecord, DslError> {
        if !self.eat_keyword("model") {
            return Err(self.error("expected `model`"));
        }
        let id = self.ident()?;
        let variant = if self.eat_keyword("alt") {
            let start = self.pos;
            u32::try_from(self.uint()?).map_err(|_| self.error_at(start, "variant out of range"))?
        } else {
            0
        };
        if !self.eat_keyword("on") {
            return Err(self.error("expected `on`"));
        }
        let space = self.space()?;
        if !self.eat_keyword("cut") {
            return Err(self.error("expected `cut`"));
        }
        let bundle = self.bundle(&space)?;
        let expected = if self.eat_keyword("expect") {
            self.tuple()?
        } else {
            Expected::None
        };
        let mut tags = BTreeSet::new();
        if self.eat_keyword("tags") {
            loop {
                self.ws();
                let start = self.pos;
                let name = self.ident()?;
                let tag = name
                    .parse::<Tag>()
                    .map_err(|_| self.error_at(start, format!("unknown tag `{name}`")))?;
                tags.insert(tag);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(";")?;
        Ok(ModelRecord {
            id,
            variant,
            space,
            bundle,
            expected,
            tags,
            notes,
        })
    }

    fn tuple(&mut self) -> Result<Expected, DslError> {
        self.expect("(")?;
        let start = self.pos;
        let mut items = Vec::new();
        loop {
            if self.eat("_") {
                items.push(None);
            } else {
                items.push(Some(self.int()? as i128));
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        match items[..] {
            [h0, k3, h21, rho] => Ok(Expected::Threefold { h0, k3, h21, rho }),
            [k2, chi] => Ok(Expected::Surface { k2, chi }),
            _ => Err(self.error_at(start, "expected 4 entries for a 3-fold or 2 for a surface")),
        }
    }

    fn space(&mut self) -> Result<SpaceDescriptor, DslError> {
        self.ws();
        let start = self.pos;
        let mut factors = vec![self.factor()?];
        while self.eat("x") {
            factors.push(self.factor()?);
        }
        SpaceDescriptor::new(factors).map_err(|e| self.error_at(start, e.to_string()))
    }

    fn factor(&mut self) -> Result<FactorDescriptor, DslError> {
        self.ws();
        let start = self.pos;
        let f = if self.eat("WP(") {
            let w = self.ints()?;
            let w = w
                .into_iter()
                .map(|x| {
                    u32::try_from(x).map_err(|_| self.error_at(start, "weights must be positive"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            FactorDescriptor::WeightedProjective(w)
        } else if self.eat("P(") {
            FactorDescriptor::Projective(self.uint()?)
        } else if self.eat("Gr(") {
            let k = self.uint()?;
            self.expect(",")?;
            FactorDescriptor::Grassmannian(k, self.uint()?)
        } else if self.eat("Fl(") {
            let mut ks = vec![self.uint()?];
            while self.eat(",") {
                ks.push(self.uint()?);
            }
            self.expect(";")?;
            FactorDescriptor::Flag(ks, self.uint()?)
        } else {
            return Err(self.error("expected a factor `P(`, `Gr(`, `Fl(` or `WP(`"));
        };
        self.expect(")")?;
        f.validate()
            .map_err(|e| self.error_at(start, e.to_string()))?;
        Ok(f)
    }

    fn bundle(&mut self, space: &SpaceDescriptor) -> Result<BundleExpr, DslError> {
        let mut terms = vec![self.prod(space)?];
        while self.eat("+") {
            terms.push(self.prod(space)?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().expect("one term")
        } else {
            BundleExpr::Sum(terms)
        })
    }

    fn prod(&mut self, space: &SpaceDescriptor) -> Result<BundleExpr, DslError> {
        let mut factors = vec![self.atom(space)?];
        while self.eat("*") {
            factors.push(self.atom(space)?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            BundleExpr::Tensor(factors)
        })
    }

    fn degrees(&mut self, space: &SpaceDescriptor) -> Result<Vec<i64>, DslError> {
        self.ws();
        let start = self.pos;
        let d = self.ints()?;
        self.expect(")")?;
        if d.len() != space.picard_rank() {
            return Err(self.error_at(
                start,
                format!(
                    "twist of arity {} on a space of Picard rank {}",
                    d.len(),
                    space.picard_rank()
                ),
            ));
        }
        Ok(d)
    }

    fn atom(&mut self, space: &SpaceDescriptor) -> Result<BundleExpr, DslError> {
        self.ws();
        let start = self.pos;
        let mut a = if self.eat("O(") {
            BundleExpr::Line(self.degrees(space)?)
        } else if self.eat("dual(") {
            let b = self.bundle(space)?;
            self.expect(")")?;
            BundleExpr::Dual(Box::new(b))
        } else if self.eat("Sym") {
            let k = self.power()?;
            self.expect("(")?;
            let b = self.bundle(space)?;
            self.expect(")")?;
            BundleExpr::Sym(k, Box::new(b))
        } else if self.eat("Wedge") {
            let k = self.power()?;
            self.expect("(")?;
            let b = self.bundle(space)?;
            self.expect(")")?;
            BundleExpr::Wedge(k, Box::new(b))
        } else if self.eat("Schur[") {
            let parts_at = self.pos;
            let parts = self.ints()?;
            let lambda =
                Partition::new(&parts).map_err(|e| self.error_at(parts_at, e.to_string()))?;
            self.expect("](")?;
            let b = self.bundle(space)?;
            self.expect(")")?;
            BundleExpr::Schur(lambda, Box::new(b))
        } else if self.eat("Ext[") {
            let mut pieces = vec![self.bundle(space)?];
            while self.eat(",") {
                pieces.push(self.bundle(space)?);
            }
            if pieces.len() < 2 {
                return Err(self.error("an extension needs at least two pieces"));
            }
            self.expect("]")?;
            BundleExpr::Ext(pieces)
        } else if matches!(self.peek(), Some('U' | 'Q')) {
            let kind = if self.eat("U") {
                TautKind::Sub
            } else {
                self.pos += 1;
                TautKind::Quotient
            };
            let factor = self.uint()?;
            let index = if self.eat(".") { self.uint()? } else { 1 };
            check_taut(space, factor, index).map_err(|m| self.error_at(start, m))?;
            BundleExpr::Taut {
                kind,
                factor,
                index,
            }
        } else {
            return Err(self.error("expected a bundle atom"));
        };
        while self.eat("(") {
            let d = self.degrees(space)?;
            a = BundleExpr::Twist(Box::new(a), d);
        }
        Ok(a)
    }

    fn power(&mut self) -> Result<u32, DslError> {
        self.ws();
        let start = self.pos;
        let k = self.uint()?;
        u32::try_from(k).map_err(|_| self.error_at(start, "power out of range"))
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

fn check_taut(space: &SpaceDescriptor, factor: usize, index: usize) -> Result<(), String> {
    let Some(f) = factor.checked_sub(1).and_then(|i| space.factors.get(i)) else {
        return Err(format!(
            "factor {factor} does not exist in a product of {} factors",
            space.factors.len()
        ));
    };
    if f.is_weighted() {
        return Err(format!(
            "factor {factor} is weighted and has no tautological bundles"
        ));
    }
    if index == 0 || index > f.picard_rank() {
        return Err(format!(
            "tautological index {index} is out of range on factor {factor}"
        ));
    }
    Ok(())
}

impl fmt::Display for ModelRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", record_line(self))
    }
}
