use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, NodeId, Topology, TopologyError};

/// The `n choose m` combination network.
///
/// Node 0 is the source, nodes `1..=n` the intermediates and the sinks
/// follow, one per `m`-subset of intermediates in lexicographic order.
/// Edges `0..n` run from the source to each intermediate; then each sink,
/// in order, gets one edge from every member of its subset.
pub fn combination_network(n: usize, m: usize) -> Result<Topology, TopologyError> {
    if m == 0 || m > n {
        return Err(TopologyError::BadCombination { n, m });
    }
    let mut edges: Vec<Edge> = (1..=n)
        .map(|i| Edge {
            from: NodeId(0),
            to: NodeId(i),
        })
        .collect();
    let mut sinks = Vec::new();
    for (k, subset) in (1..=n).combinations(m).enumerate() {
        let sink = NodeId(n + 1 + k);
        sinks.push(sink);
        edges.extend(subset.into_iter().map(|i| Edge {
            from: NodeId(i),
            to: sink,
        }));
    }
    Topology::new(n + 1 + sinks.len(), m, NodeId(0), sinks, edges)
}

/// Small cyclic network with rate 2: source `0`, relays `a = 1`, `b = 2`
/// joined in a two-cycle, and sink `r = 3`.
///
/// Edges: `0:s->a 1:s->a 2:a->b 3:b->a 4:a->r 5:b->r`. The source needs two
/// parallel channels into `a` for the sink to see a min-cut of 2.
pub fn two_node_cycle() -> Topology {
    let e = |a, b| Edge {
        from: NodeId(a),
        to: NodeId(b),
    };
    Topology::new(
        4,
        2,
        NodeId(0),
        vec![NodeId(3)],
        vec![e(0, 1), e(0, 1), e(1, 2), e(2, 1), e(1, 3), e(2, 3)],
    )
    .expect("fixed network is valid")
}

/// Seeded layered DAG for property tests: `layers` hidden layers of
/// `width` nodes, every node wired to `fan_in` random nodes of the previous
/// layer (the source feeds the first layer with `rate` parallel edges per
/// node), and `sinks` sink nodes fed from the last layer.
pub fn layered_random_dag(
    seed: u64,
    rate: usize,
    layers: usize,
    width: usize,
    fan_in: usize,
    sinks: usize,
) -> Topology {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut prev: Vec<usize> = vec![0];
    let mut next_id = 1;
    for layer in 0..layers {
        let cur: Vec<usize> = (next_id..next_id + width).collect();
        next_id += width;
        for &v in &cur {
            let k = if layer == 0 { rate } else { fan_in };
            for _ in 0..k {
                let u = prev[rng.random_range(0..prev.len())];
                edges.push(Edge {
                    from: NodeId(u),
                    to: NodeId(v),
                });
            }
        }
        prev = cur;
    }
    let sink_ids: Vec<NodeId> = (next_id..next_id + sinks).map(NodeId).collect();
    for s in &sink_ids {
        for _ in 0..fan_in.max(rate) {
            let u = prev[rng.random_range(0..prev.len())];
            edges.push(Edge {
                from: NodeId(u),
                to: *s,
            });
        }
    }
    Topology::new(next_id + sinks, rate, NodeId(0), sink_ids, edges).expect("generated layers are valid")
}
