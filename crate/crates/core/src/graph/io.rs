//! Edge-list text format.
//!
//! ```text
//! n 4
//! 0 1
//! 3 2
//! ```
//!
//! The header gives the vertex count; each following line is a 0-based vertex
//! pair in either order. Blank lines and lines starting with `#` are ignored.
//! Self-loops and repeated pairs are rejected.

use std::io::{BufRead, Write};
use std::path::Path;

use rustc_hash::FxHashSet;

use super::{pair_index, Graph};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut seen = FxHashSet::default();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let Some(count) = n else {
            if fields.len() != 2 || fields[0] != "n" {
                return Err(parse_err(lineno, format!("expected header `n <count>`, found `{trimmed}`")));
            }
            let count: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid vertex count `{}`", fields[1])))?;
            if count == 0 {
                return Err(parse_err(lineno, "vertex count must be at least 1"));
            }
            n = Some(count);
            continue;
        };
        if fields.len() != 2 {
            return Err(parse_err(lineno, format!("expected `i j`, found `{trimmed}`")));
        }
        let mut ends = [0usize; 2];
        for (slot, f) in ends.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| parse_err(lineno, format!("invalid vertex `{f}`")))?;
        }
        let [a, b] = ends;
        if a == b {
            return Err(parse_err(lineno, format!("self-loop `{a} {b}`")));
        }
        if a >= count || b >= count {
            return Err(parse_err(lineno, format!("vertex out of range in `{a} {b}` (n = {count})")));
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let s = pair_index(i, j, count)?;
        if !seen.insert(s) {
            return Err(parse_err(lineno, format!("duplicate edge `{a} {b}`")));
        }
        pairs.push((i, j));
    }
    let n = n.ok_or_else(|| parse_err(0, "missing header `n <count>`"))?;
    Graph::from_edges(n, &pairs)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let file = std::fs::File::open(path)?;
    parse_edge_list(std::io::BufReader::new(file))
}

/// Writes the header and the edges in lexicographic order.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "n {}", g.n())?;
    for (i, j) in g.edge_list() {
        writeln!(out, "{i} {j}")?;
    }
    Ok(())
}
