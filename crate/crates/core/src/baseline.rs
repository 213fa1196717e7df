//! One-shot random linear network coding: every coding node draws a single
//! scalar per adjacent pair, once.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis;
use crate::engine::{trial_seed, Input, RelayMode};
use crate::gf::{Elem, Field};
use crate::polyalg::{rank_fq, Matrix};
use crate::topology::{disjoint_paths, EdgeId, NodeId, Topology, TopologyError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RlncResult {
    pub per_sink: Vec<bool>,
    pub success: bool,
    pub memory_bits_per_node: f64,
}

/// Scalar global kernels, one `m`-vector per edge.
fn global_kernels(
    topo: &Topology,
    field: &Field,
    relay: RelayMode,
    on_path: Option<&BTreeSet<(Input, EdgeId)>>,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<Elem>> {
    let m = topo.rate();
    let q = field.order();
    let coding = |v: NodeId| {
        let indeg = topo.in_edges(v).len();
        v == topo.source() || indeg >= 2 || (indeg == 1 && relay == RelayMode::Random)
    };
    // local[e] = (coefficient per message input, coefficient per in-edge)
    let mut local: Vec<(Vec<Elem>, Vec<Elem>)> = Vec::with_capacity(topo.edge_count());
    for (e, edge) in topo.edges().iter().enumerate() {
        let v = edge.from;
        let allowed = |from: Input| on_path.is_none_or(|s| s.contains(&(from, EdgeId(e))));
        let mut pick = |from: Input| {
            if !allowed(from) {
                Elem::ZERO
            } else if coding(v) {
                Elem(rng.random_range(0..q))
            } else {
                Elem::ONE
            }
        };
        let msgs: Vec<Elem> = if v == topo.source() {
            (0..m).map(|j| pick(Input::Message(j))).collect()
        } else {
            Vec::new()
        };
        let ins: Vec<Elem> = topo.in_edges(v).iter().map(|&x| pick(Input::Edge(x))).collect();
        local.push((msgs, ins));
    }
    let value = |e: usize, f: &[Vec<Elem>]| -> Vec<Elem> {
        let v = topo.edge(EdgeId(e)).from;
        let mut out = vec![Elem::ZERO; m];
        for (j, &c) in local[e].0.iter().enumerate() {
            out[j] = field.add(out[j], c);
        }
        for (&x, &c) in topo.in_edges(v).iter().zip(&local[e].1) {
            for (o, &g) in out.iter_mut().zip(&f[x.0]) {
                *o = field.mul_add(*o, c, g);
            }
        }
        out
    };
    let mut f = vec![vec![Elem::ZERO; m]; topo.edge_count()];
    match topo.topological_order() {
        Some(order) => {
            for v in order {
                for &e in topo.out_edges(v) {
                    f[e.0] = value(e.0, &f);
                }
            }
        }
        None => {
            for _ in 0..=topo.edge_count() {
                let next: Vec<Vec<Elem>> = (0..topo.edge_count()).map(|e| value(e, &f)).collect();
                if next == f {
                    break;
                }
                f = next;
            }
        }
    }
    f
}

fn path_pairs(topo: &Topology) -> Result<Option<BTreeSet<(Input, EdgeId)>>, TopologyError> {
    if topo.is_acyclic() {
        return Ok(None);
    }
    let paths = disjoint_paths(topo)?;
    let mut set: BTreeSet<(Input, EdgeId)> = paths
        .adjacent_pairs()
        .into_iter()
        .map(|(a, b)| (Input::Edge(a), b))
        .collect();
    for e in paths.source_edges() {
        set.extend((0..topo.rate()).map(|j| (Input::Message(j), e)));
    }
    Ok(Some(set))
}

/// One RLNC draw: a sink succeeds when its `m x |In(r)|` kernel matrix has
/// rank `m`. Relays forward.
pub fn rlnc_trial(topo: &Topology, field: &Field, seed: u64) -> Result<RlncResult, TopologyError> {
    rlnc_trial_with(topo, field, seed, RelayMode::Forward)
}

pub fn rlnc_trial_with(
    topo: &Topology,
    field: &Field,
    seed: u64,
    relay: RelayMode,
) -> Result<RlncResult, TopologyError> {
    let pairs = path_pairs(topo)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(evaluate(topo, field, relay, pairs.as_ref(), &mut rng))
}

fn evaluate(
    topo: &Topology,
    field: &Field,
    relay: RelayMode,
    pairs: Option<&BTreeSet<(Input, EdgeId)>>,
    rng: &mut ChaCha8Rng,
) -> RlncResult {
    let m = topo.rate();
    let f = global_kernels(topo, field, relay, pairs, rng);
    let per_sink: Vec<bool> = topo
        .sinks()
        .iter()
        .map(|&r| {
            let ins = topo.in_edges(r);
            let mat = Matrix::from_fn(m, ins.len(), |i, j| f[ins[j].0][i]);
            rank_fq(field, &mat) == m
        })
        .collect();
    RlncResult {
        success: per_sink.iter().all(|&s| s),
        per_sink,
        memory_bits_per_node: m as f64 * field.bits_per_symbol(),
    }
}

/// Edges with a coding tail from which `sink` is reachable.
pub fn random_links_upstream(topo: &Topology, sink: NodeId, relay: RelayMode) -> usize {
    topo.edges()
        .iter()
        .filter(|e| {
            let indeg = topo.in_edges(e.from).len();
            let coding = e.from == topo.source() || indeg >= 2 || (indeg == 1 && relay == RelayMode::Random);
            coding && topo.reachable_from(e.to)[sink.0]
        })
        .count()
}

/// A row of the success-versus-field-size table; `sink = None` is the
/// all-sinks event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RlncRow {
    pub q: u32,
    pub sink: Option<NodeId>,
    pub success_fraction: f64,
    pub ho_bound: Option<f64>,
}

/// Monte Carlo success fractions per field order. Per-sink rows carry the
/// bound with `d = 1` and `eta` = random links upstream of that sink; the
/// all-sinks row uses `d` = sink count and `eta` = `overall_eta`.
pub fn rlnc_success_curve(
    topo: &Topology,
    fields: &[Field],
    trials: u64,
    base_seed: u64,
    overall_eta: u64,
    workers: usize,
) -> Result<Vec<RlncRow>, TopologyError> {
    let pairs = path_pairs(topo)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let d = topo.sinks().len();
    let mut rows = Vec::new();
    for field in fields {
        let counts = pool.install(|| {
            (0..trials)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(base_seed, i));
                    let r = evaluate(topo, field, RelayMode::Forward, pairs.as_ref(), &mut rng);
                    let mut c: Vec<u64> = r.per_sink.iter().map(|&s| s as u64).collect();
                    c.push(r.success as u64);
                    c
                })
                .reduce(|| vec![0; d + 1], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect())
        });
        let q = field.order();
        for (i, &sink) in topo.sinks().iter().enumerate() {
            let eta = random_links_upstream(topo, sink, RelayMode::Forward) as u64;
            rows.push(RlncRow {
                q,
                sink: Some(sink),
                success_fraction: counts[i] as f64 / trials as f64,
                ho_bound: analysis::ho_bound(1, q as u64, eta, 0).ok(),
            });
        }
        rows.push(RlncRow {
            q,
            sink: None,
            success_fraction: counts[d] as f64 / trials as f64,
            ho_bound: analysis::ho_bound(d as u64, q as u64, overall_eta, 0).ok(),
        });
    }
    Ok(rows)
}

/// `q,sink,success_fraction,ho_bound`; the all-sinks row has sink `all`.
pub fn write_rlnc_csv<W: std::io::Write>(w: W, rows: &[RlncRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["q", "sink", "success_fraction", "ho_bound"])?;
    for r in rows {
        out.write_record([
            r.q.to_string(),
            r.sink.map_or_else(|| "all".to_string(), |s| s.to_string()),
            r.success_fraction.to_string(),
            r.ho_bound.map_or_else(|| "N/A".to_string(), |b| b.to_string()),
        ])?;
    }
    out.flush()?;
    Ok(())
}
