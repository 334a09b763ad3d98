//! Line-oriented graph text format.
//!
//! ```text
//! # comment
//! node X1 2
//! node Y 2
//! reward Y
//! edge X1 Y
//! bidirected X1 Y
//! ```

use std::fmt::Write as _;

use super::{Admg, AdmgBuilder};
use crate::error::{Error, Result};

/// Non-empty lines with comments stripped, split on whitespace, paired
/// with their 1-based line number.
pub(crate) fn tokenized_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

/// Applies one graph directive to `builder`. Returns `Ok(false)` when the
/// keyword is not a graph directive.
pub(crate) fn apply_graph_directive(
    builder: &mut AdmgBuilder,
    line: usize,
    tokens: &[&str],
) -> Result<bool> {
    let wrap = |e: Error| match e {
        Error::Domain(m) => Error::parse(line, m),
        other => other,
    };
    match tokens[0] {
        "node" => {
            let [_, name, k] = tokens else {
                return Err(Error::parse(line, "expected `node <name> <domain_size>`"));
            };
            let k: u32 = k
                .parse()
                .map_err(|_| Error::parse(line, format!("bad domain size `{k}`")))?;
            builder.node(name, k).map_err(wrap)?;
        }
        "reward" => {
            let [_, name] = tokens else {
                return Err(Error::parse(line, "expected `reward <name>`"));
            };
            builder.reward(name).map_err(wrap)?;
        }
        "edge" => {
            let [_, t, h] = tokens else {
                return Err(Error::parse(line, "expected `edge <tail> <head>`"));
            };
            builder.edge(t, h).map_err(wrap)?;
        }
        "bidirected" => {
            let [_, a, b] = tokens else {
                return Err(Error::parse(line, "expected `bidirected <a> <b>`"));
            };
            builder.bidirected(a, b).map_err(wrap)?;
        }
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn parse_graph(text: &str) -> Result<Admg> {
    let mut builder = AdmgBuilder::default();
    for (line, tokens) in tokenized_lines(text) {
        if !apply_graph_directive(&mut builder, line, &tokens)? {
            return Err(Error::parse(
                line,
                format!("unknown directive `{}`", tokens[0]),
            ));
        }
    }
    builder.build()
}

pub fn write_graph(g: &Admg) -> String {
    let mut out = String::new();
    for v in 0..g.n() {
        let _ = writeln!(out, "node {} {}", g.name(v), g.domain(v));
    }
    let _ = writeln!(out, "reward {}", g.name(g.reward()));
    for (t, h) in g.directed_edges() {
        let _ = writeln!(out, "edge {} {}", g.name(t), g.name(h));
    }
    for (a, b) in g.bidirected_edges() {
        let _ = writeln!(out, "bidirected {} {}", g.name(a), g.name(b));
    }
    out
}
