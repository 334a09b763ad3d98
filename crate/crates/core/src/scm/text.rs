//! SCM text format: the graph format plus
//!
//! ```text
//! noise X1 0.5 0.5
//! confounder X2 Y 0.5 0.5
//! mech X2 1,0,1 0
//! ```
//!
//! A `mech` row lists the mechanism inputs in positional order: parents by
//! index, own noise, then incident confounders in canonical edge order.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Mechanism, MechanismInputs, Scm};
use crate::admg::text::{apply_graph_directive, tokenized_lines};
use crate::admg::{AdmgBuilder, VarId};
use crate::error::{Error, Result};

fn parse_probs(line: usize, tokens: &[&str]) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::parse(line, "expected at least one probability"));
    }
    tokens
        .iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::parse(line, format!("bad probability `{t}`")))
        })
        .collect()
}

pub fn parse_scm(text: &str) -> Result<Scm> {
    let mut builder = AdmgBuilder::default();
    let mut noise: HashMap<String, (usize, Vec<f64>)> = HashMap::new();
    let mut confounders: Vec<(usize, String, String, Vec<f64>)> = Vec::new();
    let mut rows: Vec<(usize, String, Vec<usize>, u32)> = Vec::new();
    for (line, tokens) in tokenized_lines(text) {
        if apply_graph_directive(&mut builder, line, &tokens)? {
            continue;
        }
        match tokens[0] {
            "noise" if tokens.len() >= 2 => {
                let probs = parse_probs(line, &tokens[2..])?;
                if noise.insert(tokens[1].to_string(), (line, probs)).is_some() {
                    return Err(Error::parse(
                        line,
                        format!("duplicate noise for {}", tokens[1]),
                    ));
                }
            }
            "confounder" if tokens.len() >= 3 => {
                let probs = parse_probs(line, &tokens[3..])?;
                confounders.push((line, tokens[1].to_string(), tokens[2].to_string(), probs));
            }
            "mech" => {
                let [_, node, assignment, value] = tokens[..] else {
                    return Err(Error::parse(
                        line,
                        "expected `mech <node> <v1,v2,...> <value>`",
                    ));
                };
                let inputs = assignment
                    .split(',')
                    .map(|t| t.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::parse(line, format!("bad row `{assignment}`")))?;
                let value = value
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad value `{value}`")))?;
                rows.push((line, node.to_string(), inputs, value));
            }
            other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
        }
    }
    let graph = builder.build()?;
    let index = |line: usize, name: &str| -> Result<VarId> {
        graph
            .index_of(name)
            .ok_or_else(|| Error::parse(line, format!("unknown vertex {name}")))
    };

    let mut noise_tables = vec![vec![1.0]; graph.n()];
    for (name, (line, probs)) in noise {
        noise_tables[index(line, &name)?] = probs;
    }
    let edges = graph.bidirected_edges();
    let mut conf_tables: Vec<Option<Vec<f64>>> = vec![None; edges.len()];
    for (line, a, b, probs) in confounders {
        let (a, b) = (index(line, &a)?, index(line, &b)?);
        let key = (a.min(b), a.max(b));
        let Some(pos) = edges.iter().position(|&e| e == key) else {
            return Err(Error::parse(line, "confounder without a bidirected edge"));
        };
        if conf_tables[pos].replace(probs).is_some() {
            return Err(Error::parse(line, "duplicate confounder"));
        }
    }
    let conf_tables: Vec<Vec<f64>> = conf_tables
        .into_iter()
        .map(|t| t.unwrap_or_else(|| vec![1.0]))
        .collect();

    // layout depends only on graph and table sizes, so build a skeleton
    // model first and fill the mechanisms from it
    let empty = vec![Mechanism { table: vec![] }; graph.n()];
    let skeleton = Scm::from_parts(
        graph.clone(),
        noise_tables.clone(),
        conf_tables.clone(),
        empty,
    )?;
    let mut tables: Vec<Vec<Option<u32>>> = (0..graph.n())
        .map(|v| vec![None; skeleton.inputs(v).rows()])
        .collect();
    for (line, name, inputs, value) in rows {
        let v = index(line, &name)?;
        let layout: &MechanismInputs = skeleton.inputs(v);
        if inputs.len() != layout.radices.len()
            || inputs.iter().zip(&layout.radices).any(|(x, r)| x >= r)
        {
            return Err(Error::parse(
                line,
                format!("row does not match inputs of {name}"),
            ));
        }
        tables[v][layout.encode(&inputs)] = Some(value);
    }
    let mut problems = Vec::new();
    let mechanisms = tables
        .into_iter()
        .enumerate()
        .map(|(v, t)| {
            let missing = t.iter().filter(|x| x.is_none()).count();
            if missing > 0 {
                problems.push(format!(
                    "mechanism of {} is not total: {missing} rows missing",
                    graph.name(v)
                ));
            }
            Mechanism {
                table: t.into_iter().map(|x| x.unwrap_or(0)).collect(),
            }
        })
        .collect();
    if !problems.is_empty() {
        return Err(Error::Invalid(problems));
    }
    let scm = Scm::from_parts(graph, noise_tables, conf_tables, mechanisms)?;
    scm.validate().map_err(Error::Invalid)?;
    Ok(scm)
}

fn join_probs(probs: &[f64]) -> String {
    probs
        .iter()
        .map(|p| format!("{p:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_scm(scm: &Scm) -> String {
    let g = scm.graph();
    let mut out = crate::admg::write_graph(g);
    for v in 0..g.n() {
        let _ = writeln!(out, "noise {} {}", g.name(v), join_probs(scm.noise(v)));
    }
    for c in scm.confounders() {
        let _ = writeln!(
            out,
            "confounder {} {} {}",
            g.name(c.a),
            g.name(c.b),
            join_probs(&c.probs)
        );
    }
    for v in 0..g.n() {
        let layout = scm.inputs(v);
        for (row, value) in scm.mechanism(v).table.iter().enumerate() {
            let inputs: Vec<String> = layout.decode(row).iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "mech {} {} {}", g.name(v), inputs.join(","), value);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::xor_scm;
    use super::*;

    #[test]
    fn round_trips() {
        let scm = xor_scm();
        let text = write_scm(&scm);
        assert_eq!(parse_scm(&text).unwrap(), scm);
    }

    #[test]
    fn missing_row_is_reported() {
        let text = write_scm(&xor_scm());
        let trimmed: String = text
            .lines()
            .filter(|l| *l != "mech Y 1,0,1 0")
            .map(|l| format!("{l}\n"))
            .collect();
        let Err(Error::Invalid(problems)) = parse_scm(&trimmed) else {
            panic!("expected invalid model");
        };
        assert!(problems[0].contains("not total"));
    }

    #[test]
    fn bad_probability_sum_is_reported() {
        let text = write_scm(&xor_scm()).replace("noise X1 0.5 0.5", "noise X1 0.5 0.4");
        assert!(matches!(parse_scm(&text), Err(Error::Invalid(_))));
    }

    #[test]
    fn confounder_needs_edge() {
        let text = write_scm(&xor_scm()) + "confounder X1 Y 0.5 0.5\n";
        assert!(matches!(parse_scm(&text), Err(Error::Parse { .. })));
    }
}
