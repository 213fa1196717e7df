//! Directed multigraph network model with a single source, a sink set and
//! a multicast rate. Every edge is a unit-capacity channel carrying one
//! symbol per time step; edge ids follow insertion order and drive all
//! tie-breaking.

mod flow;
mod format;
mod generators;

pub use flow::{disjoint_paths, validate_multicast, MulticastReport, PathSet};
pub use format::{load_topology, save_topology, ParseError};
pub use generators::{combination_network, layered_random_dag, two_node_cycle};

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("network needs at least one node")]
    NoNodes,
    #[error("multicast rate must be at least 1")]
    ZeroRate,
    #[error("node {0} is out of range")]
    NodeOutOfRange(usize),
    #[error("source {0} is also listed as a sink")]
    SourceIsSink(usize),
    #[error("sink {0} listed twice")]
    DuplicateSink(usize),
    #[error("no sinks")]
    NoSinks,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("combination network needs 1 <= m <= n, got n={n} m={m}")]
    BadCombination { n: usize, m: usize },
    #[error("sink {sink} has max-flow {flow} < rate {rate}")]
    InsufficientFlow { sink: usize, flow: usize, rate: usize },
}

/// Immutable network description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    node_count: usize,
    edges: Vec<Edge>,
    source: NodeId,
    sinks: Vec<NodeId>,
    rate: usize,
    in_edges: Vec<Vec<EdgeId>>,
    out_edges: Vec<Vec<EdgeId>>,
}

impl Topology {
    pub fn new(
        node_count: usize,
        rate: usize,
        source: NodeId,
        sinks: Vec<NodeId>,
        edges: Vec<Edge>,
    ) -> Result<Topology, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::NoNodes);
        }
        if rate == 0 {
            return Err(TopologyError::ZeroRate);
        }
        if source.0 >= node_count {
            return Err(TopologyError::NodeOutOfRange(source.0));
        }
        if sinks.is_empty() {
            return Err(TopologyError::NoSinks);
        }
        let mut seen = BTreeSet::new();
        for &s in &sinks {
            if s.0 >= node_count {
                return Err(TopologyError::NodeOutOfRange(s.0));
            }
            if s == source {
                return Err(TopologyError::SourceIsSink(s.0));
            }
            if !seen.insert(s) {
                return Err(TopologyError::DuplicateSink(s.0));
            }
        }
        let mut in_edges = vec![Vec::new(); node_count];
        let mut out_edges = vec![Vec::new(); node_count];
        for (i, e) in edges.iter().enumerate() {
            for n in [e.from, e.to] {
                if n.0 >= node_count {
                    return Err(TopologyError::NodeOutOfRange(n.0));
                }
            }
            if e.from == e.to {
                return Err(TopologyError::SelfLoop(e.from.0));
            }
            out_edges[e.from.0].push(EdgeId(i));
            in_edges[e.to.0].push(EdgeId(i));
        }
        Ok(Topology {
            node_count,
            edges,
            source,
            sinks,
            rate,
            in_edges,
            out_edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e.0]
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sinks(&self) -> &[NodeId] {
        &self.sinks
    }

    /// Multicast rate `m`.
    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    /// Incoming edges in id order.
    pub fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.in_edges[v.0]
    }

    /// Outgoing edges in id order.
    pub fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.out_edges[v.0]
    }

    pub fn is_sink(&self, v: NodeId) -> bool {
        self.sinks.contains(&v)
    }

    /// Distinct heads of outgoing edges, ascending.
    pub fn children(&self, v: NodeId) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self.out_edges[v.0].iter().map(|&e| self.edges[e.0].to).collect();
        set.into_iter().collect()
    }

    /// Nodes reachable from `v` (including `v`).
    pub fn reachable_from(&self, v: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([v]);
        seen[v.0] = true;
        while let Some(u) = queue.pop_front() {
            for &e in &self.out_edges[u.0] {
                let w = self.edges[e.0].to;
                if !seen[w.0] {
                    seen[w.0] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Kahn's algorithm, smallest ready node first. `None` when a directed
    /// cycle exists.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indeg: Vec<usize> = self.in_edges.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<NodeId> = self.nodes().filter(|v| indeg[v.0] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &e in &self.out_edges[v.0] {
                let w = self.edges[e.0].to;
                indeg[w.0] -= 1;
                if indeg[w.0] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == self.node_count).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Copy with edge `e` removed (later ids shift down by one).
    pub fn without_edge(&self, e: EdgeId) -> Topology {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != e.0)
            .map(|(_, &ed)| ed)
            .collect();
        Topology::new(self.node_count, self.rate, self.source, self.sinks.clone(), edges)
            .expect("removing an edge keeps a valid topology")
    }
}

/// Acyclicity check plus the order the engine evaluates nodes in.
pub fn is_acyclic(topo: &Topology) -> (bool, Option<Vec<NodeId>>) {
    let order = topo.topological_order();
    (order.is_some(), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        let e = |a, b| Edge {
            from: NodeId(a),
            to: NodeId(b),
        };
        assert_eq!(
            Topology::new(2, 1, NodeId(0), vec![NodeId(0)], vec![e(0, 1)]),
            Err(TopologyError::SourceIsSink(0))
        );
        assert_eq!(
            Topology::new(2, 1, NodeId(0), vec![NodeId(1)], vec![e(0, 2)]),
            Err(TopologyError::NodeOutOfRange(2))
        );
        assert_eq!(
            Topology::new(2, 0, NodeId(0), vec![NodeId(1)], vec![]),
            Err(TopologyError::ZeroRate)
        );
        assert_eq!(
            Topology::new(2, 1, NodeId(0), vec![NodeId(1), NodeId(1)], vec![]),
            Err(TopologyError::DuplicateSink(1))
        );
        assert!(Topology::new(2, 1, NodeId(0), vec![NodeId(1)], vec![e(1, 1)]).is_err());
    }

    #[test]
    fn acyclicity() {
        assert!(combination_network(4, 2).unwrap().is_acyclic());
        let (acyclic, order) = is_acyclic(&two_node_cycle());
        assert!(!acyclic && order.is_none());
        let empty = Topology::new(3, 1, NodeId(0), vec![NodeId(2)], vec![]).unwrap();
        assert_eq!(empty.topological_order(), Some(vec![NodeId(0), NodeId(1), NodeId(2)]));
    }
}
