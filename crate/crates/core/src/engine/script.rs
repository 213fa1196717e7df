//! Scripted local-kernel coefficients.
//!
//! One directive per line, `#` starts a comment:
//!
//! ```text
//! k <from> <to> <t> <value>
//! ```
//!
//! `<to>` is an edge id. `<from>` is either the id of an edge entering the
//! tail of `<to>`, or `x<j>` for the source's `j`-th message input.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::topology::{EdgeId, Topology};

/// What feeds a local kernel: a message input at the source or an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Input {
    Message(usize),
    Edge(EdgeId),
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Message(j) => write!(f, "x{j}"),
            Input::Edge(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScriptError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {from} does not feed edge {to}")]
    NotAdjacent { line: usize, from: Input, to: EdgeId },
    #[error("line {line}: edge {edge} out of range")]
    EdgeOutOfRange { line: usize, edge: usize },
    #[error("line {line}: value {value} is not an element of F_{q}")]
    ValueOutOfRange { line: usize, value: u64, q: u32 },
    #[error("line {line}: coefficient ({from}, {to}, t={t}) given twice")]
    Duplicate {
        line: usize,
        from: Input,
        to: EdgeId,
        t: usize,
    },
}

/// Parsed script: `(from, to, t) -> raw value`. Check it against a network
/// with [`KernelScript::bind`] before use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KernelScript {
    entries: BTreeMap<(Input, EdgeId, usize), (u64, usize)>,
}

fn syntax(line: usize, msg: impl Into<String>) -> ScriptError {
    ScriptError::Syntax { line, msg: msg.into() }
}

fn parse_input(line: usize, tok: &str) -> Result<Input, ScriptError> {
    if let Some(j) = tok.strip_prefix('x') {
        return j
            .parse()
            .map(Input::Message)
            .map_err(|_| syntax(line, format!("bad message input `{tok}`")));
    }
    tok.parse()
        .map(|e| Input::Edge(EdgeId(e)))
        .map_err(|_| syntax(line, format!("expected an edge id or x<j>, found `{tok}`")))
}

impl KernelScript {
    pub fn parse(text: &str) -> Result<KernelScript, ScriptError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            match toks[..] {
                [] => continue,
                ["k", from, to, t, value] => {
                    let from = parse_input(line, from)?;
                    let to = to
                        .parse()
                        .map(EdgeId)
                        .map_err(|_| syntax(line, format!("bad edge id `{to}`")))?;
                    let t: usize = t.parse().map_err(|_| syntax(line, format!("bad time `{t}`")))?;
                    let value: u64 = value
                        .parse()
                        .map_err(|_| syntax(line, format!("bad value `{value}`")))?;
                    if entries.insert((from, to, t), (value, line)).is_some() {
                        return Err(ScriptError::Duplicate { line, from, to, t });
                    }
                }
                ["k", ..] => return Err(syntax(line, "expected `k <from> <to> <t> <value>`")),
                [other, ..] => return Err(syntax(line, format!("unknown directive `{other}`"))),
            }
        }
        Ok(KernelScript { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, from: Input, to: EdgeId, t: usize, value: u64) {
        self.entries.insert((from, to, t), (value, 0));
    }

    /// Checks every entry against the network and field.
    pub fn bind(&self, topo: &Topology, field: &Field) -> Result<BoundScript, ScriptError> {
        let mut out = BTreeMap::new();
        for (&(from, to, t), &(value, line)) in &self.entries {
            if to.0 >= topo.edge_count() {
                return Err(ScriptError::EdgeOutOfRange { line, edge: to.0 });
            }
            let tail = topo.edge(to).from;
            let adjacent = match from {
                Input::Message(j) => tail == topo.source() && j < topo.rate(),
                Input::Edge(e) => {
                    if e.0 >= topo.edge_count() {
                        return Err(ScriptError::EdgeOutOfRange { line, edge: e.0 });
                    }
                    topo.edge(e).to == tail
                }
            };
            if !adjacent {
                return Err(ScriptError::NotAdjacent { line, from, to });
            }
            let elem = field.elem(value).map_err(|_| ScriptError::ValueOutOfRange {
                line,
                value,
                q: field.order(),
            })?;
            out.insert((from, to, t), elem);
        }
        Ok(BoundScript { entries: out })
    }
}

/// A script validated against one network and field.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundScript {
    entries: BTreeMap<(Input, EdgeId, usize), Elem>,
}

impl BoundScript {
    pub fn get(&self, from: Input, to: EdgeId, t: usize) -> Option<Elem> {
        self.entries.get(&(from, to, t)).copied()
    }
}
