//! Reading and writing `.gifs` system definition files, plus the three
//! built-in example systems.
//!
//! ```text
//! # optional leading comments
//! gifs 1
//! dims M p D
//! map <name>
//! <M rows of p*M + 1 numbers: row r of [A_1 | ... | A_p | b]>
//! ```
//!
//! `#` starts a comment anywhere on a line and blank lines are ignored.
//! Only the comment lines before the header are kept in a
//! [`SystemDocument`]; the rest are discarded.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::affine::AffineMap;
use crate::error::FormatError;
use crate::system::{GifsSystem, RangePolicy};

#[derive(Clone, Debug, PartialEq)]
pub struct NamedMap {
    pub name: String,
    pub map: AffineMap,
}

/// Parsed contents of a `.gifs` file, before certification.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDocument {
    pub comments: Vec<String>,
    pub dim: usize,
    pub order: usize,
    pub side: f64,
    pub maps: Vec<NamedMap>,
}

impl SystemDocument {
    /// Document for an existing system, with maps named `f1`, `f2`, ...
    pub fn from_system(system: &GifsSystem) -> Self {
        SystemDocument {
            comments: Vec::new(),
            dim: system.dim(),
            order: system.order(),
            side: system.side(),
            maps: system
                .maps()
                .iter()
                .enumerate()
                .map(|(i, m)| NamedMap { name: format!("f{}", i + 1), map: m.clone() })
                .collect(),
        }
    }

    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    /// Certifies the document as a system.
    pub fn build(&self, policy: RangePolicy) -> Result<GifsSystem, FormatError> {
        let maps = self.maps.iter().map(|m| m.map.clone()).collect();
        Ok(GifsSystem::new(maps, self.side, self.order, self.dim, policy)?)
    }

    /// Text form; `parse_document(&doc.to_text())` returns `doc`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            if c.is_empty() {
                out.push_str("#\n");
            } else {
                let _ = writeln!(out, "# {c}");
            }
        }
        let _ = writeln!(out, "gifs 1");
        let _ = writeln!(out, "dims {} {} {}", self.dim, self.order, number(self.side));
        for m in &self.maps {
            let _ = writeln!(out, "map {}", m.name);
            for r in 0..self.dim {
                let mut row: Vec<String> = Vec::with_capacity(self.order * self.dim + 1);
                for j in 0..self.order {
                    for c in 0..self.dim {
                        row.push(number(m.map.coeff(j, r, c)));
                    }
                }
                row.push(number(m.map.offset()[r]));
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        out
    }
}

/// Shortest decimal that parses back to the same `f64`.
fn number(v: f64) -> String {
    let v = v + 0.0;
    let plain = format!("{v}");
    if plain.len() > 24 {
        format!("{v:e}")
    } else {
        plain
    }
}

pub fn serialize(doc: &SystemDocument) -> String {
    doc.to_text()
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end_col: usize,
}

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, col, expected: expected.into() }
}

fn tokenize(content: &str, number: usize) -> Line<'_> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    let mut col = 0;
    for (ci, (bi, ch)) in content.char_indices().enumerate() {
        col = ci + 1;
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                let first_col = content[..s].chars().count() + 1;
                tokens.push(Token { text: &content[s..bi], col: first_col });
            }
        } else if start.is_none() {
            start = Some(bi);
        }
    }
    if let Some(s) = start {
        let first_col = content[..s].chars().count() + 1;
        tokens.push(Token { text: &content[s..], col: first_col });
    }
    Line { number, tokens, end_col: col + 1 }
}

fn parse_number(tok: &Token, line: usize) -> Result<f64, FormatError> {
    match tok.text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(syntax(line, tok.col, format!("a finite decimal number, found {:?}", tok.text))),
    }
}

fn parse_positive(tok: &Token, line: usize, what: &str) -> Result<usize, FormatError> {
    match tok.text.parse::<usize>() {
        Ok(v) if v > 0 && tok.text.bytes().all(|b| b.is_ascii_digit()) => Ok(v),
        _ => Err(syntax(line, tok.col, format!("{what} as a positive integer, found {:?}", tok.text))),
    }
}

pub fn parse_document(text: &str) -> Result<SystemDocument, FormatError> {
    let mut comments = Vec::new();
    let mut lines = Vec::new();
    let mut header_seen = false;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        last_line = i + 1;
        let (content, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        let line = tokenize(content, i + 1);
        if line.tokens.is_empty() {
            if let (false, Some(c)) = (header_seen, comment) {
                comments.push(c.strip_prefix(' ').unwrap_or(c).to_string());
            }
            continue;
        }
        header_seen = true;
        lines.push(line);
    }
    let eof = |expected: &str| syntax(last_line + 1, 1, expected);
    if lines.is_empty() {
        return Err(syntax(1, 1, "`gifs 1` header"));
    }
    let mut it = lines.into_iter();

    let header = it.next().ok_or_else(|| eof("`gifs 1` header"))?;
    match header.tokens.as_slice() {
        [a, b] if a.text == "gifs" && b.text == "1" => {}
        [a, b] if a.text == "gifs" => return Err(syntax(header.number, b.col, "format version 1")),
        [a, _, extra, ..] if a.text == "gifs" => {
            return Err(syntax(header.number, extra.col, "end of line after `gifs 1`"))
        }
        [a] if a.text == "gifs" => return Err(syntax(header.number, header.end_col, "format version 1")),
        [first, ..] => return Err(syntax(header.number, first.col, "`gifs 1` header")),
        [] => unreachable!(),
    }

    let dims = it.next().ok_or_else(|| eof("`dims M p D` line"))?;
    let t = &dims.tokens;
    if t[0].text != "dims" {
        return Err(syntax(dims.number, t[0].col, "`dims M p D` line"));
    }
    let names = ["dimension M", "order p", "cube side D"];
    if t.len() < 4 {
        return Err(syntax(dims.number, dims.end_col, names[t.len() - 1]));
    }
    if t.len() > 4 {
        return Err(syntax(dims.number, t[4].col, "end of line after `dims M p D`"));
    }
    let dim = parse_positive(&t[1], dims.number, names[0])?;
    let order = parse_positive(&t[2], dims.number, names[1])?;
    let side = parse_number(&t[3], dims.number)?;
    if side <= 0.0 {
        return Err(syntax(dims.number, t[3].col, "a positive cube side"));
    }
    let width = order
        .checked_mul(dim)
        .and_then(|w| w.checked_add(1))
        .ok_or_else(|| syntax(dims.number, t[1].col, "a smaller dimension and order"))?;

    let mut maps = Vec::new();
    while let Some(head) = it.next() {
        let t = &head.tokens;
        if t[0].text != "map" {
            return Err(syntax(head.number, t[0].col, "`map <name>`"));
        }
        if t.len() == 1 {
            return Err(syntax(head.number, head.end_col, "a map name"));
        }
        if t.len() > 2 {
            return Err(syntax(head.number, t[2].col, "end of line after the map name"));
        }
        let name = t[1].text.to_string();
        let mut blocks = vec![vec![0.0; dim * dim]; order];
        let mut offset = vec![0.0; dim];
        for r in 0..dim {
            let expected = format!("row {} of map {name}: {width} numbers", r + 1);
            let row = it.next().ok_or_else(|| eof(&expected))?;
            if row.tokens.len() < width {
                return Err(syntax(
                    row.number,
                    row.end_col,
                    format!("{expected}, found {}", row.tokens.len()),
                ));
            }
            if row.tokens.len() > width {
                return Err(syntax(row.number, row.tokens[width].col, format!("{expected}, found more")));
            }
            for (k, tok) in row.tokens.iter().enumerate() {
                let v = parse_number(tok, row.number)?;
                if k == width - 1 {
                    offset[r] = v;
                } else {
                    blocks[k / dim][r * dim + k % dim] = v;
                }
            }
        }
        let map = AffineMap::new(blocks, offset)?;
        maps.push(NamedMap { name, map });
    }
    if maps.is_empty() {
        return Err(eof("`map <name>`"));
    }
    Ok(SystemDocument { comments, dim, order, side, maps })
}

/// Parses and certifies a system with the strict range condition.
pub fn parse_system(text: &str) -> Result<GifsSystem, FormatError> {
    parse_system_with(text, RangePolicy::Strict)
}

pub fn parse_system_with(text: &str, policy: RangePolicy) -> Result<GifsSystem, FormatError> {
    parse_document(text)?.build(policy)
}

/// The three example systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Example {
    A,
    B,
    C,
}

impl Example {
    pub const ALL: [Example; 3] = [Example::A, Example::B, Example::C];

    pub fn name(self) -> &'static str {
        match self {
            Example::A => "A",
            Example::B => "B",
            Example::C => "C",
        }
    }

    /// Source text in `.gifs` format.
    pub fn source(self) -> &'static str {
        match self {
            Example::A => include_str!("../systems/example_a.gifs"),
            Example::B => include_str!("../systems/example_b.gifs"),
            Example::C => include_str!("../systems/example_c.gifs"),
        }
    }

    /// B and C map parts of the cube slightly outside it and are loaded
    /// with projection onto the cube.
    pub fn policy(self) -> RangePolicy {
        match self {
            Example::A => RangePolicy::Strict,
            Example::B | Example::C => RangePolicy::Project,
        }
    }
}

impl FromStr for Example {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Example::A),
            "B" => Ok(Example::B),
            "C" => Ok(Example::C),
            _ => Err(FormatError::UnknownExample(s.to_string())),
        }
    }
}

pub fn builtin_document(example: Example) -> SystemDocument {
    parse_document(example.source()).expect("built-in example source is well formed")
}

pub fn builtin(example: Example) -> GifsSystem {
    builtin_document(example)
        .build(example.policy())
        .expect("built-in example certifies")
}

pub fn builtin_by_name(name: &str) -> Result<GifsSystem, FormatError> {
    Ok(builtin(name.parse()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SystemError;

    #[test]
    fn builtins_load() {
        assert_eq!(builtin(Example::A).map_count(), 3);
        assert_eq!(builtin(Example::B).map_count(), 2);
        assert_eq!(builtin(Example::C).map_count(), 2);
        assert_eq!(builtin(Example::B).maps()[1].offset()[0], 0.4);
        assert!(builtin_by_name("b").is_ok());
        assert_eq!(builtin_by_name("D").unwrap_err(), FormatError::UnknownExample("D".into()));
    }

    #[test]
    fn strict_parse_rejects_b() {
        assert!(matches!(
            parse_system(Example::B.source()),
            Err(FormatError::Semantic(SystemError::RangeViolation { .. }))
        ));
    }

    #[test]
    fn roundtrip_keeps_leading_comments() {
        let doc = builtin_document(Example::A);
        assert_eq!(doc.comments.len(), 2);
        assert_eq!(parse_document(&doc.to_text()).unwrap(), doc);
    }

    #[test]
    fn empty_input_fails_at_origin() {
        assert_eq!(
            parse_document("").unwrap_err(),
            FormatError::Syntax { line: 1, col: 1, expected: "`gifs 1` header".into() }
        );
    }

    #[test]
    fn errors_carry_positions() {
        let text = "gifs 1\ndims 1 1 1\nmap f\n0.5 x\n";
        match parse_document(text).unwrap_err() {
            FormatError::Syntax { line, col, .. } => assert_eq!((line, col), (4, 5)),
            e => panic!("unexpected {e:?}"),
        }
        let short = "gifs 1\ndims 1 1 1\nmap f\n0.5\n";
        match parse_document(short).unwrap_err() {
            FormatError::Syntax { line, col, .. } => assert_eq!((line, col), (4, 4)),
            e => panic!("unexpected {e:?}"),
        }
        assert!(parse_document("gifs 1\ndims 1 1 1\nmap f\nnan 0\n").is_err());
    }

    #[test]
    fn contraction_violation_is_semantic() {
        let text = Example::A.source().replacen("0.2 0 0 0.2 0", "2.0 0 0 0.2 0", 1);
        assert!(matches!(
            parse_system(&text),
            Err(FormatError::Semantic(SystemError::ContractionViolation { .. }))
        ));
    }

    #[test]
    fn numbers_roundtrip() {
        for v in [0.1, -0.05, 1e-300, 123456789.125, 5e-324, -0.0] {
            let s = number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), (v + 0.0).to_bits(), "{s}");
        }
    }
}
