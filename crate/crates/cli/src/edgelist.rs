//! Edge-list text files.
//!
//! The plain format is a vertex count on the first non-comment line followed
//! by one `u v` pair per line, 0-based and whitespace separated. Lines
//! starting with `#` are comments. The labeled variant has no count line and
//! accepts arbitrary tokens as endpoints; labels are numbered in order of
//! first appearance.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, Write};

use stochvc_core::BaseGraph;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: invalid graph: {message}")]
    Invalid { line: usize, message: String },
    #[error("missing vertex count line")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(reader: impl BufRead) -> impl Iterator<Item = io::Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(e)),
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| Ok((i + 1, t.to_string())))
        }
    })
}

fn pair(line: usize, text: &str) -> Result<(&str, &str), ParseError> {
    let mut it = text.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(syntax(line, format!("expected two endpoints, got {text:?}"))),
    }
}

fn id(line: usize, token: &str, n: usize) -> Result<usize, ParseError> {
    let v: usize = token
        .parse()
        .map_err(|_| syntax(line, format!("{token:?} is not a vertex id")))?;
    if v >= n {
        return Err(syntax(line, format!("vertex {v} out of range for n = {n}")));
    }
    Ok(v)
}

/// Builds the graph, reporting self-loops and duplicates at the line of the
/// offending edge.
fn build(n: usize, edges: Vec<(usize, (usize, usize))>) -> Result<BaseGraph, ParseError> {
    let mut seen = HashSet::with_capacity(edges.len());
    for &(line, (u, v)) in &edges {
        let message = if u == v {
            format!("self-loop on vertex {u}")
        } else if !seen.insert((u.min(v), u.max(v))) {
            format!("duplicate edge ({}, {})", u.min(v), u.max(v))
        } else {
            continue;
        };
        return Err(ParseError::Invalid { line, message });
    }
    Ok(BaseGraph::from_edges(n, edges.into_iter().map(|(_, e)| e)).expect("edges validated above"))
}

pub fn parse_edge_list(reader: impl BufRead) -> Result<BaseGraph, ParseError> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)??;
    let n: usize = header
        .parse()
        .map_err(|_| syntax(hline, format!("expected a vertex count, got {header:?}")))?;
    let mut edges = Vec::new();
    for item in lines {
        let (line, text) = item?;
        let (a, b) = pair(line, &text)?;
        edges.push((line, (id(line, a, n)?, id(line, b, n)?)));
    }
    build(n, edges)
}

pub fn parse_edge_list_str(text: &str) -> Result<BaseGraph, ParseError> {
    parse_edge_list(text.as_bytes())
}

/// A graph read from a labeled edge list, with `labels[v]` naming vertex `v`.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    pub graph: BaseGraph,
    pub labels: Vec<String>,
}

pub fn parse_labeled_edge_list(reader: impl BufRead) -> Result<LabeledGraph, ParseError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |s: &str| {
        *index.entry(s.to_string()).or_insert_with(|| {
            labels.push(s.to_string());
            labels.len() - 1
        })
    };
    for item in content_lines(reader) {
        let (line, text) = item?;
        let (a, b) = pair(line, &text)?;
        let e = (intern(a), intern(b));
        edges.push((line, e));
    }
    let graph = build(labels.len(), edges)?;
    Ok(LabeledGraph { graph, labels })
}

/// Writes `g` in the plain format, edges in index order. `comments` are
/// emitted first as `#` lines.
pub fn write_edge_list(mut w: impl Write, g: &BaseGraph, comments: &[String]) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "{}", g.n())?;
    for &(u, v) in g.edges() {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}
