use std::collections::HashMap;
use std::fmt::Write;

use super::{Ends, NodeClass, Partition, SpinNetwork};
use crate::error::{Error, Result};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn node(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| perr(line, format!("expected a node index, found `{tok}`")))
}

/// Parses the network file format. Line numbers in errors are 1-based; a
/// missing directive is reported against the line after the last one.
pub fn parse_network(text: &str) -> Result<SpinNetwork> {
    let mut n: Option<usize> = None;
    let mut ends: Option<Ends> = None;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut edge_lines: HashMap<(usize, usize), usize> = HashMap::new();
    let mut classes: Vec<(NodeClass, usize)> = Vec::new();
    let mut order: Option<(Vec<String>, usize)> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "nodes" => {
                if toks.len() != 2 {
                    return Err(perr(line, "usage: nodes <n>"));
                }
                if n.is_some() {
                    return Err(perr(line, "repeated `nodes` directive"));
                }
                n = Some(node(toks[1], line)?);
            }
            "ends" => {
                if toks.len() != 3 {
                    return Err(perr(line, "usage: ends <source> <target>"));
                }
                if ends.is_some() {
                    return Err(perr(line, "repeated `ends` directive"));
                }
                ends = Some(Ends::new(node(toks[1], line)?, node(toks[2], line)?));
            }
            "edge" => {
                if toks.len() != 4 {
                    return Err(perr(line, "usage: edge <i> <j> <alpha>"));
                }
                let (i, j) = (node(toks[1], line)?, node(toks[2], line)?);
                let alpha: f64 = toks[3]
                    .parse()
                    .map_err(|_| perr(line, format!("bad coupling `{}`", toks[3])))?;
                if i == j {
                    return Err(perr(line, format!("self-loop on node {i}")));
                }
                if !alpha.is_finite() || alpha == 0.0 {
                    return Err(perr(line, format!("coupling must be finite and nonzero, got {alpha}")));
                }
                let key = (i.min(j), i.max(j));
                if let Some(first) = edge_lines.insert(key, line) {
                    return Err(perr(
                        line,
                        format!("duplicate edge ({},{}) first given on line {first}", key.0, key.1),
                    ));
                }
                edges.push((i, j, alpha));
            }
            "class" => {
                if toks.len() < 3 {
                    return Err(perr(line, "usage: class <name> <node> ..."));
                }
                let nodes = toks[2..]
                    .iter()
                    .map(|t| node(t, line))
                    .collect::<Result<Vec<_>>>()?;
                if classes.iter().any(|(c, _)| c.name == toks[1]) {
                    return Err(perr(line, format!("class `{}` defined twice", toks[1])));
                }
                classes.push((
                    NodeClass {
                        name: toks[1].to_string(),
                        nodes,
                    },
                    line,
                ));
            }
            "order" => {
                if toks.len() < 2 {
                    return Err(perr(line, "usage: order <class> ..."));
                }
                if order.is_some() {
                    return Err(perr(line, "repeated `order` directive"));
                }
                order = Some((toks[1..].iter().map(|s| s.to_string()).collect(), line));
            }
            other => return Err(perr(line, format!("unknown directive `{other}`"))),
        }
    }

    let eof = last_line + 1;
    let n = n.ok_or_else(|| perr(eof, "missing `nodes` directive"))?;
    let ends = ends.ok_or_else(|| perr(eof, "missing `ends` directive"))?;

    for (i, j, _) in &edges {
        for v in [*i, *j] {
            if v == 0 || v > n {
                let line = edge_lines[&((*i).min(*j), (*i).max(*j))];
                return Err(perr(line, format!("edge node {v} outside 1..={n}")));
            }
        }
    }
    for (class, line) in &classes {
        if let Some(v) = class.nodes.iter().find(|&&v| v == 0 || v > n) {
            return Err(perr(*line, format!("class `{}` names dangling node {v}", class.name)));
        }
    }

    let partition = if classes.is_empty() {
        if let Some((_, line)) = order {
            return Err(perr(line, "`order` given without any `class`"));
        }
        None
    } else {
        let (ordered, line) = match order {
            Some((names, line)) => {
                let mut out = Vec::new();
                for name in &names {
                    let class = classes
                        .iter()
                        .find(|(c, _)| &c.name == name)
                        .ok_or_else(|| perr(line, format!("unknown class `{name}` in order")))?;
                    out.push(class.0.clone());
                }
                if out.len() != classes.len() {
                    return Err(perr(line, "order must list every class exactly once"));
                }
                (out, line)
            }
            None => {
                let line = classes.last().map(|(_, l)| *l).unwrap_or(eof);
                (classes.into_iter().map(|(c, _)| c).collect(), line)
            }
        };
        let p = Partition::new(ordered);
        p.validate(n, ends).map_err(|e| perr(line, e.to_string()))?;
        Some(p)
    };

    SpinNetwork::new(n, ends, edges, partition).map_err(|e| perr(eof, e.to_string()))
}

/// Canonical rendering: `nodes`, `ends`, sorted edges, classes, `order`.
pub fn serialize_network(net: &SpinNetwork) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {}", net.n()).unwrap();
    writeln!(out, "ends {} {}", net.ends().source, net.ends().target).unwrap();
    for e in net.edges() {
        writeln!(out, "edge {} {} {}", e.i, e.j, e.alpha).unwrap();
    }
    if let Some(p) = net.partition() {
        for c in p.classes() {
            let nodes: Vec<String> = c.nodes.iter().map(|v| v.to_string()).collect();
            writeln!(out, "class {} {}", c.name, nodes.join(" ")).unwrap();
        }
        let names: Vec<&str> = p.classes().iter().map(|c| c.name.as_str()).collect();
        writeln!(out, "order {}", names.join(" ")).unwrap();
    }
    out
}
