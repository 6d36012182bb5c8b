//! The HDG v1 text format.
//!
//! ```text
//! n m
//! <ascending 0-based vertex indices of edge 0, space separated>
//! ...
//! <edge m-1>
//! ```
//!
//! An empty line is an empty edge. Every line, including the last, ends in
//! `\n`; [`to_string`] always writes this canonical form, so
//! `to_string(&parse(s)?) == s` for any canonical `s`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hyperdisc_core::Hypergraph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HdgError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn syntax(line: usize, message: impl Into<String>) -> HdgError {
    HdgError::Syntax { line, message: message.into() }
}

fn number(token: &str, line: usize) -> Result<usize, HdgError> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(syntax(line, format!("`{token}` is not a non-negative integer")));
    }
    token.parse().map_err(|_| syntax(line, format!("`{token}` is out of range")))
}

/// Parses HDG v1. Tokens are separated by single spaces; indices must be
/// strictly ascending and below `n`.
pub fn parse(text: &str) -> Result<Hypergraph, HdgError> {
    let mut lines = text.split_terminator('\n');
    let header = lines.next().ok_or_else(|| syntax(1, "missing header"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let [n, m] = fields[..] else {
        return Err(syntax(1, "header must be `n m`"));
    };
    let (n, m) = (number(n, 1)?, number(m, 1)?);
    let mut h = Hypergraph::empty(n);
    let mut found = 0;
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        found += 1;
        if found > m {
            continue;
        }
        let mut edge = Vec::new();
        if !line.is_empty() {
            for token in line.split(' ') {
                let v = number(token, lineno)?;
                if v >= n {
                    return Err(syntax(lineno, format!("vertex {v} out of range for n = {n}")));
                }
                if edge.last().is_some_and(|&last| v <= last) {
                    return Err(syntax(lineno, "vertex indices must be strictly ascending"));
                }
                edge.push(v);
            }
        }
        h.push_edge(edge).expect("indices validated above");
    }
    if found != m {
        return Err(HdgError::EdgeCount { expected: m, found });
    }
    Ok(h)
}

/// Canonical HDG v1 text.
pub fn to_string(h: &Hypergraph) -> String {
    let mut out = String::with_capacity(16 + h.total_incidences() * 4);
    writeln!(out, "{} {}", h.n(), h.m()).unwrap();
    for e in 0..h.m() {
        for (k, v) in h.edge(e).enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read(path: &Path) -> Result<Hypergraph, HdgError> {
    let text = fs::read_to_string(path).map_err(|source| HdgError::Io { path: path.to_path_buf(), source })?;
    parse(&text)
}

pub fn write(path: &Path, h: &Hypergraph) -> Result<(), HdgError> {
    fs::write(path, to_string(h)).map_err(|source| HdgError::Io { path: path.to_path_buf(), source })
}
