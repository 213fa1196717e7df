//! Line-oriented topology files:
//!
//! ```text
//! nodes 4
//! m 2
//! source 0
//! sinks 3
//! edge 0 1   # repeated; file order gives edge ids
//! ```

use std::fmt::Write;

use thiserror::Error;

use super::{Edge, NodeId, Topology, TopologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `{0}` directive")]
    Missing(&'static str),
    #[error(transparent)]
    Invalid(#[from] TopologyError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, msg: msg.into() }
}

fn number(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("expected a non-negative integer, found `{tok}`")))
}

fn set_once(slot: &mut Option<usize>, v: usize, line: usize, key: &str) -> Result<(), ParseError> {
    if slot.replace(v).is_some() {
        return Err(syntax(line, format!("`{key}` given twice")));
    }
    Ok(())
}

/// Largest node count a topology file may declare.
pub const MAX_NODES: usize = 1 << 20;

pub fn load_topology(text: &str) -> Result<Topology, ParseError> {
    let mut nodes = None;
    let mut rate = None;
    let mut source = None;
    let mut sinks: Option<Vec<NodeId>> = None;
    let mut edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(key) = toks.next() else { continue };
        let args: Vec<&str> = toks.collect();
        let single = |args: &[&str]| -> Result<usize, ParseError> {
            match args {
                [a] => number(line, a),
                _ => Err(syntax(line, format!("`{key}` takes exactly one value"))),
            }
        };
        match key {
            "nodes" => {
                let n = single(&args)?;
                if n > MAX_NODES {
                    return Err(syntax(line, format!("node count {n} exceeds the limit of {MAX_NODES}")));
                }
                set_once(&mut nodes, n, line, key)?
            }
            "m" => set_once(&mut rate, single(&args)?, line, key)?,
            "source" => set_once(&mut source, single(&args)?, line, key)?,
            "sinks" => {
                if args.is_empty() {
                    return Err(syntax(line, "`sinks` needs at least one id"));
                }
                let ids = args
                    .iter()
                    .map(|a| number(line, a).map(NodeId))
                    .collect::<Result<Vec<_>, _>>()?;
                if sinks.replace(ids).is_some() {
                    return Err(syntax(line, "`sinks` given twice"));
                }
            }
            "edge" => match args[..] {
                [a, b] => edges.push(Edge {
                    from: NodeId(number(line, a)?),
                    to: NodeId(number(line, b)?),
                }),
                _ => return Err(syntax(line, "`edge` takes <from> <to>")),
            },
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }

    let nodes = nodes.ok_or(ParseError::Missing("nodes"))?;
    let rate = rate.ok_or(ParseError::Missing("m"))?;
    let source = source.ok_or(ParseError::Missing("source"))?;
    let sinks = sinks.ok_or(ParseError::Missing("sinks"))?;
    Ok(Topology::new(nodes, rate, NodeId(source), sinks, edges)?)
}

/// Canonical text form; `load_topology` of the result gives back `topo`.
pub fn save_topology(topo: &Topology) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {}", topo.node_count()).unwrap();
    writeln!(out, "m {}", topo.rate()).unwrap();
    writeln!(out, "source {}", topo.source()).unwrap();
    let sinks: Vec<String> = topo.sinks().iter().map(|s| s.to_string()).collect();
    writeln!(out, "sinks {}", sinks.join(" ")).unwrap();
    for e in topo.edges() {
        writeln!(out, "edge {} {}", e.from, e.to).unwrap();
    }
    out
}
