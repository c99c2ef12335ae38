//! Graph file formats.
//!
//! Text: first line `n m`, then `m` lines `u v` with 0-based ids; multigraphs repeat
//! lines. Blank lines and lines starting with `#` are ignored.
//!
//! JSON: `{"n": int, "edges": [[u, v], ...], "multi": bool}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Multigraph, SimpleGraph};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("input declares multi = false but repeats edge {0}-{1}")]
    UnexpectedParallel(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub multi: bool,
}

impl GraphJson {
    pub fn from_simple(g: &SimpleGraph) -> Self {
        GraphJson {
            n: g.n(),
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            multi: false,
        }
    }

    pub fn from_multi(h: &Multigraph) -> Self {
        GraphJson {
            n: h.n(),
            edges: h.edges().iter().map(|&(u, v)| [u, v]).collect(),
            multi: true,
        }
    }

    pub fn to_multigraph(&self) -> Result<Multigraph, GraphError> {
        Multigraph::new(self.n, self.edges.iter().map(|e| (e[0], e[1])).collect())
    }

    pub fn to_simple(&self) -> Result<SimpleGraph, GraphError> {
        self.to_multigraph()?.to_simple()
    }
}

fn line_err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Line {
        line,
        msg: msg.into(),
    }
}

/// Parses the text edge-list format into a multigraph.
pub fn parse_text(input: &str) -> Result<Multigraph, ParseError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| line_err(1, "missing `n m` header"))?;
    let nums = parse_pair(hline, header)?;
    let (n, m) = (nums.0, nums.1);
    let mut edges = Vec::with_capacity(m);
    for (lno, l) in lines {
        if edges.len() == m {
            return Err(line_err(lno, format!("more than the declared {m} edges")));
        }
        let (u, v) = parse_pair(lno, l)?;
        if u >= n || v >= n {
            return Err(line_err(lno, format!("vertex out of range 0..{n}")));
        }
        if u == v {
            return Err(line_err(lno, format!("self-loop at {u}")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(line_err(
            input.lines().count().max(1),
            format!("expected {m} edges, found {}", edges.len()),
        ));
    }
    Ok(Multigraph::new(n, edges)?)
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize), ParseError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(line_err(
            line,
            format!("expected two integers, got `{text}`"),
        ));
    }
    let a = parts[0]
        .parse()
        .map_err(|_| line_err(line, format!("not a non-negative integer: `{}`", parts[0])))?;
    let b = parts[1]
        .parse()
        .map_err(|_| line_err(line, format!("not a non-negative integer: `{}`", parts[1])))?;
    Ok((a, b))
}

/// Parses the JSON format. A `multi: false` document with repeated edges is rejected.
pub fn parse_json(input: &str) -> Result<Multigraph, ParseError> {
    let doc: GraphJson = serde_json::from_str(input)?;
    let h = doc.to_multigraph()?;
    if !doc.multi {
        if let Some((&(u, v), _)) = h.multiplicities().iter().find(|(_, &c)| c > 1) {
            return Err(ParseError::UnexpectedParallel(u, v));
        }
    }
    Ok(h)
}

/// Picks the format from the first non-space character.
pub fn parse_auto(input: &str) -> Result<Multigraph, ParseError> {
    if input.trim_start().starts_with('{') {
        parse_json(input)
    } else {
        parse_text(input)
    }
}

pub fn to_text(h: &Multigraph) -> String {
    let mut s = format!("{} {}\n", h.n(), h.m());
    for (u, v) in h.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}
