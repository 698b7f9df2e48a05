//! Text formats for families.
//!
//! Permutation families:
//! ```text
//! n=3
//! 1 2 3
//! 2 1 3
//! ```
//! Partial families use `row:col` pairs per line, `-` for the empty pattern:
//! ```text
//! n=4
//! 1:1 2:2
//! -
//! ```
//! Lines starting with `#` are comments. Serialization always writes the
//! `n=` header and members in canonical order; parsing accepts a headerless
//! partial family and infers the degree from the largest coordinate.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::family::{Cell, PartialFamily, PartialPerm, PermFamily, Permutation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedFamily {
    Perms(PermFamily),
    Partials(PartialFamily),
}

impl ParsedFamily {
    pub fn degree(&self) -> usize {
        match self {
            ParsedFamily::Perms(f) => f.degree(),
            ParsedFamily::Partials(f) => f.degree(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ParsedFamily::Perms(f) => f.len(),
            ParsedFamily::Partials(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Permutation families view; errors on partial input.
    pub fn into_perms(self) -> Result<PermFamily> {
        match self {
            ParsedFamily::Perms(f) => Ok(f),
            ParsedFamily::Partials(_) => Err(Error::InvalidParameter(
                "expected a permutation family, found partial patterns".into(),
            )),
        }
    }

    /// Partial-family view; full permutations downgrade losslessly.
    pub fn into_partials(self) -> Result<PartialFamily> {
        match self {
            ParsedFamily::Partials(f) => Ok(f),
            ParsedFamily::Perms(f) => Ok(PartialFamily::from(&f)),
        }
    }
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

fn content_lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            None
        } else {
            Some(Line { no: i + 1, text: t })
        }
    })
}

fn parse_header(l: &Line) -> Option<Result<usize>> {
    let rest = l.text.strip_prefix("n=")?;
    Some(rest.trim().parse::<usize>().map_err(|_| Error::Parse {
        line: l.no,
        msg: format!("bad degree '{rest}'"),
    }))
}

fn parse_perm_line(l: &Line, n: usize) -> Result<Permutation> {
    let mut images = Vec::with_capacity(n);
    for tok in l.text.split_whitespace() {
        let v: u8 = tok.parse().map_err(|_| Error::Parse {
            line: l.no,
            msg: format!("bad image '{tok}'"),
        })?;
        images.push(v);
    }
    if images.len() != n {
        return Err(Error::Parse {
            line: l.no,
            msg: format!("expected {n} images, found {}", images.len()),
        });
    }
    Permutation::from_images(images).map_err(|e| Error::Parse {
        line: l.no,
        msg: e.to_string(),
    })
}

fn parse_partial_line(l: &Line, n: usize) -> Result<PartialPerm> {
    if l.text == "-" {
        return PartialPerm::empty(n).map_err(|e| Error::Parse {
            line: l.no,
            msg: e.to_string(),
        });
    }
    let mut cells = Vec::new();
    for tok in l.text.split_whitespace() {
        let Some((r, c)) = tok.split_once(':') else {
            return Err(Error::Parse {
                line: l.no,
                msg: format!("expected row:col, found '{tok}'"),
            });
        };
        let parse = |s: &str| -> Result<u8> {
            s.parse().map_err(|_| Error::Parse {
                line: l.no,
                msg: format!("bad coordinate '{s}'"),
            })
        };
        cells.push(Cell::new(parse(r)?, parse(c)?));
    }
    PartialPerm::new(n, cells).map_err(|e| Error::Parse {
        line: l.no,
        msg: e.to_string(),
    })
}

/// Parse either family format. Duplicate members are rejected with the line
/// number of the second occurrence. A file with a header and no member lines
/// parses as an empty permutation family.
pub fn parse_family(text: &str) -> Result<ParsedFamily> {
    let mut lines = content_lines(text).peekable();
    let mut degree: Option<usize> = None;
    if let Some(first) = lines.peek() {
        if let Some(h) = parse_header(first) {
            degree = Some(h?);
            lines.next();
        }
    }
    let body: Vec<Line> = lines.collect();
    if body.is_empty() {
        let n = degree.ok_or(Error::Parse {
            line: 1,
            msg: "empty input: expected an n=<degree> header".into(),
        })?;
        return Ok(ParsedFamily::Perms(PermFamily::empty(n)?));
    }
    let partial = body.iter().any(|l| l.text.contains(':') || l.text == "-");
    if partial {
        let n = match degree {
            Some(n) => n,
            None => body
                .iter()
                .flat_map(|l| l.text.split_whitespace())
                .filter_map(|tok| {
                    let (r, c) = tok.split_once(':')?;
                    Some(r.parse::<usize>().ok()?.max(c.parse::<usize>().ok()?))
                })
                .max()
                .ok_or(Error::Parse {
                    line: body[0].no,
                    msg: "cannot infer degree".into(),
                })?,
        };
        let mut seen = HashSet::new();
        let mut members = Vec::new();
        for l in &body {
            let m = parse_partial_line(l, n)?;
            if !seen.insert(m.clone()) {
                return Err(Error::Parse {
                    line: l.no,
                    msg: format!("duplicate member '{m}'"),
                });
            }
            members.push(m);
        }
        Ok(ParsedFamily::Partials(PartialFamily::new(n, members)?))
    } else {
        let n = match degree {
            Some(n) => n,
            None => body[0].text.split_whitespace().count(),
        };
        let mut seen = HashSet::new();
        let mut members = Vec::new();
        for l in &body {
            let m = parse_perm_line(l, n)?;
            if !seen.insert(m.clone()) {
                return Err(Error::Parse {
                    line: l.no,
                    msg: format!("duplicate member '{m}'"),
                });
            }
            members.push(m);
        }
        Ok(ParsedFamily::Perms(PermFamily::new(n, members)?))
    }
}

pub fn serialize_perm_family(f: &PermFamily) -> String {
    let mut out = format!("n={}\n", f.degree());
    for m in f.iter() {
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out
}

pub fn serialize_partial_family(f: &PartialFamily) -> String {
    let mut out = format!("n={}\n", f.degree());
    for m in f.iter() {
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out
}

pub fn serialize_family(f: &ParsedFamily) -> String {
    match f {
        ParsedFamily::Perms(f) => serialize_perm_family(f),
        ParsedFamily::Partials(f) => serialize_partial_family(f),
    }
}
