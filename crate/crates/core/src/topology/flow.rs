use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::{EdgeId, NodeId, Topology, TopologyError};

/// Per-sink max-flow values against the multicast rate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MulticastReport {
    pub rate: usize,
    pub flows: Vec<(NodeId, usize)>,
}

impl MulticastReport {
    pub fn passes(&self) -> bool {
        self.flows.iter().all(|&(_, f)| f >= self.rate)
    }

    pub fn failures(&self) -> Vec<NodeId> {
        self.flows
            .iter()
            .filter(|&&(_, f)| f < self.rate)
            .map(|&(s, _)| s)
            .collect()
    }

    pub fn to_error(&self) -> Option<TopologyError> {
        self.flows
            .iter()
            .find(|&&(_, f)| f < self.rate)
            .map(|&(sink, flow)| TopologyError::InsufficientFlow {
                sink: sink.0,
                flow,
                rate: self.rate,
            })
    }
}

/// Unit-capacity max-flow from the source to `sink` by BFS augmentation,
/// stopping once `limit` units are routed. Returns the value and the 0/1
/// flow on every edge.
fn max_flow(topo: &Topology, sink: NodeId, limit: usize) -> (usize, Vec<bool>) {
    let mut flow = vec![false; topo.edge_count()];
    let mut value = 0;
    let s = topo.source();
    while value < limit {
        // parent[v] = (edge, forward?)
        let mut parent: Vec<Option<(EdgeId, bool)>> = vec![None; topo.node_count()];
        let mut seen = vec![false; topo.node_count()];
        seen[s.0] = true;
        let mut queue = VecDeque::from([s]);
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in topo.out_edges(u) {
                let w = topo.edge(e).to;
                if !flow[e.0] && !seen[w.0] {
                    seen[w.0] = true;
                    parent[w.0] = Some((e, true));
                    if w == sink {
                        break 'bfs;
                    }
                    queue.push_back(w);
                }
            }
            for &e in topo.in_edges(u) {
                let w = topo.edge(e).from;
                if flow[e.0] && !seen[w.0] {
                    seen[w.0] = true;
                    parent[w.0] = Some((e, false));
                    queue.push_back(w);
                }
            }
        }
        if !seen[sink.0] {
            break;
        }
        let mut v = sink;
        while v != s {
            let (e, forward) = parent[v.0].expect("augmenting path is connected");
            flow[e.0] = forward;
            v = if forward { topo.edge(e).from } else { topo.edge(e).to };
        }
        value += 1;
    }
    (value, flow)
}

/// Max-flow from the source to every sink; passes when each reaches `m`.
pub fn validate_multicast(topo: &Topology) -> MulticastReport {
    let flows = topo
        .sinks()
        .iter()
        .map(|&r| (r, max_flow(topo, r, usize::MAX).0))
        .collect();
    MulticastReport {
        rate: topo.rate(),
        flows,
    }
}

/// `m` edge-disjoint source-to-sink paths for every sink, as edge lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathSet {
    pub per_sink: Vec<(NodeId, Vec<Vec<EdgeId>>)>,
}

impl PathSet {
    /// Adjacent pairs `(e', e)` lying consecutively on some path.
    pub fn adjacent_pairs(&self) -> BTreeSet<(EdgeId, EdgeId)> {
        self.per_sink
            .iter()
            .flat_map(|(_, paths)| paths.iter())
            .flat_map(|p| p.windows(2).map(|w| (w[0], w[1])))
            .collect()
    }

    /// First edges of all paths (the source's on-path outputs).
    pub fn source_edges(&self) -> BTreeSet<EdgeId> {
        self.per_sink
            .iter()
            .flat_map(|(_, paths)| paths.iter())
            .filter_map(|p| p.first().copied())
            .collect()
    }
}

/// Extracts `m` edge-disjoint paths per sink from an integral max-flow.
/// Paths of different sinks may share edges.
pub fn disjoint_paths(topo: &Topology) -> Result<PathSet, TopologyError> {
    let m = topo.rate();
    let mut per_sink = Vec::with_capacity(topo.sinks().len());
    for &r in topo.sinks() {
        let (value, flow) = max_flow(topo, r, m);
        if value < m {
            return Err(TopologyError::InsufficientFlow {
                sink: r.0,
                flow: value,
                rate: m,
            });
        }
        per_sink.push((r, decompose(topo, r, flow, m)));
    }
    Ok(PathSet { per_sink })
}

fn decompose(topo: &Topology, sink: NodeId, mut flow: Vec<bool>, count: usize) -> Vec<Vec<EdgeId>> {
    let mut paths = Vec::with_capacity(count);
    for _ in 0..count {
        let mut path: Vec<EdgeId> = Vec::new();
        let mut nodes = vec![topo.source()];
        let mut u = topo.source();
        while u != sink {
            let e = *topo
                .out_edges(u)
                .iter()
                .find(|e| flow[e.0])
                .expect("flow conservation leaves an outgoing unit");
            flow[e.0] = false;
            let w = topo.edge(e).to;
            if let Some(pos) = nodes.iter().position(|&n| n == w) {
                // Circulation: drop the loop and continue from w.
                path.truncate(pos);
                nodes.truncate(pos + 1);
            } else {
                path.push(e);
                nodes.push(w);
            }
            u = w;
        }
        paths.push(path);
    }
    paths
}
