use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::gf::{Elem, Field};
use crate::polyalg::{
    encode, poly_mul_trunc, select_columns, sequential_decode, DecodabilityTracker, Matrix, Poly, PolyAlgError,
    PolyMatrix,
};
use crate::topology::{EdgeId, NodeId, Topology};

use super::script::Input;
use super::{EngineError, MessageSource, SimConfig};

/// How a coefficient got its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Origin {
    Random,
    Scripted,
    /// Relay copying its single input at time 0.
    Forward,
    /// Off-path pair at time 0 in a cyclic network.
    Zeroed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coefficient {
    pub from: Input,
    pub to: EdgeId,
    pub value: Elem,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinkVerdict {
    pub sink: NodeId,
    pub condition_one: bool,
    pub condition_two: bool,
    pub rank_increment: usize,
    pub decodable: bool,
}

/// Everything that happened in one time step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub t: usize,
    pub message: Vec<Elem>,
    pub coefficients: Vec<Coefficient>,
    pub symbols: Vec<Elem>,
    pub headers: Vec<Vec<Elem>>,
    /// Sinks still testing at this step.
    pub verdicts: Vec<SinkVerdict>,
    pub acked: Vec<NodeId>,
    pub frozen: Vec<EdgeId>,
}

/// Outcome of sequential decoding at one sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinkDecode {
    pub sink: NodeId,
    pub columns: Vec<usize>,
    pub delay: usize,
    pub recovered: bool,
    pub reencoded: bool,
}

struct SinkState {
    node: NodeId,
    in_edges: Vec<EdgeId>,
    tracker: DecodabilityTracker,
    stopping_time: Option<usize>,
}

/// One trial of the protocol, advanced a step at a time.
pub struct Simulation<'a> {
    cfg: &'a SimConfig,
    inputs: Vec<Vec<Input>>,
    coding: Vec<bool>,
    edge_order: Option<Vec<EdgeId>>,
    sinks_below: Vec<Vec<usize>>,
    // [edge][input][t]; missing trailing entries are zero
    kernels: Vec<Vec<Vec<Elem>>>,
    symbols: Vec<Vec<Elem>>,
    headers: Vec<Vec<Vec<Elem>>>,
    frozen_at: Vec<Option<usize>>,
    fresh: Vec<Vec<EdgeId>>,
    messages: Vec<Vec<Elem>>,
    sinks: Vec<SinkState>,
    acked: Vec<bool>,
    kernel_rng: ChaCha8Rng,
    message_rng: ChaCha8Rng,
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: &'a SimConfig, seed: u64) -> Simulation<'a> {
        let topo = cfg.topology();
        let m = topo.rate();
        let inputs: Vec<Vec<Input>> = topo
            .nodes()
            .map(|v| {
                let msgs = (v == topo.source())
                    .then_some(0..m)
                    .into_iter()
                    .flatten()
                    .map(Input::Message);
                msgs.chain(topo.in_edges(v).iter().map(|&e| Input::Edge(e))).collect()
            })
            .collect();
        let coding = topo.nodes().map(|v| cfg.is_coding(v)).collect();
        let edge_order = topo.topological_order().map(|order| {
            let mut pos = vec![0; topo.node_count()];
            for (i, v) in order.iter().enumerate() {
                pos[v.0] = i;
            }
            let mut edges: Vec<EdgeId> = (0..topo.edge_count()).map(EdgeId).collect();
            edges.sort_by_key(|e| (pos[topo.edge(*e).from.0], e.0));
            edges
        });
        let sinks: Vec<SinkState> = topo
            .sinks()
            .iter()
            .map(|&r| SinkState {
                node: r,
                in_edges: topo.in_edges(r).to_vec(),
                tracker: DecodabilityTracker::new(m, topo.in_edges(r).len()),
                stopping_time: None,
            })
            .collect();
        let sinks_below = topo
            .nodes()
            .map(|v| {
                let reach = topo.reachable_from(v);
                (0..sinks.len()).filter(|&i| reach[sinks[i].node.0]).collect()
            })
            .collect();
        let kernels = topo
            .edges()
            .iter()
            .map(|e| vec![Vec::new(); inputs[e.from.0].len()])
            .collect();
        let mut message_rng = ChaCha8Rng::seed_from_u64(seed);
        message_rng.set_stream(1);
        Simulation {
            cfg,
            inputs,
            coding,
            edge_order,
            sinks_below,
            kernels,
            symbols: vec![Vec::new(); topo.edge_count()],
            headers: vec![Vec::new(); topo.edge_count()],
            frozen_at: vec![None; topo.edge_count()],
            fresh: Vec::new(),
            messages: Vec::new(),
            sinks,
            acked: vec![false; topo.node_count()],
            kernel_rng: ChaCha8Rng::seed_from_u64(seed),
            message_rng,
        }
    }

    fn topo(&self) -> &'a Topology {
        self.cfg.topology()
    }

    fn field(&self) -> &'a Field {
        self.cfg.field()
    }

    /// Number of completed steps.
    pub fn t(&self) -> usize {
        self.messages.len()
    }

    pub fn all_decodable(&self) -> bool {
        self.sinks.iter().all(|s| s.stopping_time.is_some())
    }

    pub fn stopping_times(&self) -> Vec<Option<usize>> {
        self.sinks.iter().map(|s| s.stopping_time).collect()
    }

    pub fn frozen_at(&self, e: EdgeId) -> Option<usize> {
        self.frozen_at[e.0]
    }

    /// Edges whose tail drew new coefficients at step `t`.
    pub fn fresh_edges(&self, t: usize) -> &[EdgeId] {
        &self.fresh[t]
    }

    pub fn messages(&self) -> &[Vec<Elem>] {
        &self.messages
    }

    /// `k_{from,to,t}`, zero when never set.
    pub fn kernel(&self, from: Input, to: EdgeId, t: usize) -> Elem {
        let tail = self.topo().edge(to).from;
        self.inputs[tail.0]
            .iter()
            .position(|&a| a == from)
            .and_then(|a| self.kernels[to.0][a].get(t).copied())
            .unwrap_or(Elem::ZERO)
    }

    fn draw(&mut self, from: Input, to: EdgeId, t: usize) -> Result<(Elem, Origin), EngineError> {
        if let Some(v) = self.cfg.script().and_then(|s| s.get(from, to, t)) {
            return Ok((v, Origin::Scripted));
        }
        let tail = self.topo().edge(to).from;
        if t == 0 && !self.cfg.pair_on_path(from, to) {
            return Ok((Elem::ZERO, Origin::Zeroed));
        }
        if !self.coding[tail.0] {
            let v = if t == 0 { Elem::ONE } else { Elem::ZERO };
            return Ok((v, Origin::Forward));
        }
        if self.cfg.script().is_some() && self.cfg.strict_script() {
            return Err(EngineError::MissingCoefficient { from, to, t });
        }
        let q = self.field().order();
        Ok((Elem(self.kernel_rng.random_range(0..q)), Origin::Random))
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<StepReport, EngineError> {
        let topo = self.topo();
        let field = self.field();
        let m = topo.rate();
        let t = self.t();

        let message: Vec<Elem> = match self.cfg.messages() {
            MessageSource::Random => (0..m)
                .map(|_| Elem(self.message_rng.random_range(0..field.order())))
                .collect(),
            MessageSource::Scripted(xs) => (0..m)
                .map(|j| xs.get(t).and_then(|x| x.get(j)).copied().unwrap_or(Elem::ZERO))
                .collect(),
        };
        self.messages.push(message.clone());

        let mut coefficients = Vec::new();
        let mut fresh = Vec::new();
        for e in 0..topo.edge_count() {
            let to = EdgeId(e);
            if self.frozen_at[e].is_some() {
                continue;
            }
            let tail = topo.edge(to).from;
            let coding = self.coding[tail.0];
            if coding {
                fresh.push(to);
            }
            for a in 0..self.inputs[tail.0].len() {
                let from = self.inputs[tail.0][a];
                let (value, origin) = if coding || t == 0 {
                    self.draw(from, to, t)?
                } else {
                    // relays only take explicitly scripted taps after time 0
                    match self.cfg.script().and_then(|s| s.get(from, to, t)) {
                        Some(v) => (v, Origin::Scripted),
                        None => continue,
                    }
                };
                let k = &mut self.kernels[e][a];
                if k.len() < t {
                    k.resize(t, Elem::ZERO);
                }
                k.push(value);
                coefficients.push(Coefficient {
                    from,
                    to,
                    value,
                    origin,
                });
            }
        }
        self.fresh.push(fresh);

        for e in 0..topo.edge_count() {
            self.symbols[e].push(Elem::ZERO);
            self.headers[e].push(vec![Elem::ZERO; m]);
        }
        self.evaluate(t)?;

        let mut verdicts = Vec::new();
        for s in &mut self.sinks {
            if s.stopping_time.is_some() {
                continue;
            }
            let block = Matrix::from_fn(m, s.in_edges.len(), |i, j| self.headers[s.in_edges[j].0][t][i]);
            let decodable = s.tracker.push(field, block)?;
            if decodable {
                s.stopping_time = Some(t);
            }
            verdicts.push(SinkVerdict {
                sink: s.node,
                condition_one: s.tracker.condition_one(),
                condition_two: s.tracker.condition_two(),
                rank_increment: s.tracker.toeplitz().increment(),
                decodable,
            });
        }

        let mut acked = Vec::new();
        for v in topo.nodes() {
            if !self.acked[v.0]
                && self.sinks_below[v.0]
                    .iter()
                    .all(|&i| self.sinks[i].stopping_time.is_some())
            {
                self.acked[v.0] = true;
                acked.push(v);
            }
        }
        let mut frozen = Vec::new();
        for (e, edge) in topo.edges().iter().enumerate() {
            if self.frozen_at[e].is_none() && self.acked[edge.to.0] {
                self.frozen_at[e] = Some(t);
                frozen.push(EdgeId(e));
            }
        }

        Ok(StepReport {
            t,
            message,
            coefficients,
            symbols: self.symbols.iter().map(|y| y[t]).collect(),
            headers: self.headers.iter().map(|f| f[t].clone()).collect(),
            verdicts,
            acked,
            frozen,
        })
    }

    /// `(y_{e,t}, f_{e,t})` from the current values of all inputs.
    fn edge_value(&self, e: usize, t: usize) -> (Elem, Vec<Elem>) {
        let field = self.field();
        let m = self.topo().rate();
        let tail = self.topo().edge(EdgeId(e)).from;
        let mut y = Elem::ZERO;
        let mut f = vec![Elem::ZERO; m];
        for (a, input) in self.inputs[tail.0].iter().enumerate() {
            let k = &self.kernels[e][a];
            for (i, &c) in k.iter().enumerate().take(t + 1) {
                if c.is_zero() {
                    continue;
                }
                let tau = t - i;
                match *input {
                    Input::Message(j) => {
                        y = field.mul_add(y, c, self.messages[tau][j]);
                        if tau == 0 {
                            f[j] = field.add(f[j], c);
                        }
                    }
                    Input::Edge(src) => {
                        y = field.mul_add(y, c, self.symbols[src.0][tau]);
                        for (fj, &h) in f.iter_mut().zip(&self.headers[src.0][tau]) {
                            *fj = field.mul_add(*fj, c, h);
                        }
                    }
                }
            }
        }
        (y, f)
    }

    fn evaluate(&mut self, t: usize) -> Result<(), EngineError> {
        if let Some(order) = self.edge_order.clone() {
            for e in order {
                let (y, f) = self.edge_value(e.0, t);
                self.symbols[e.0][t] = y;
                self.headers[e.0][t] = f;
            }
            return Ok(());
        }
        // Cyclic: within a step the time-0 coefficients couple the edges
        // linearly; with a nilpotent coupling |E| substitutions settle it.
        let edges = self.topo().edge_count();
        for pass in 0..=edges {
            let next: Vec<(Elem, Vec<Elem>)> = (0..edges).map(|e| self.edge_value(e, t)).collect();
            let mut changed = false;
            for (e, (y, f)) in next.into_iter().enumerate() {
                if self.symbols[e][t] != y || self.headers[e][t] != f {
                    changed = true;
                    self.symbols[e][t] = y;
                    self.headers[e][t] = f;
                }
            }
            if !changed {
                return Ok(());
            }
            if pass == edges {
                break;
            }
        }
        Err(EngineError::NotNilpotent { t })
    }

    /// Code length per edge: one more than the last step its tail drew a
    /// coefficient for it; `None` when the tail does not code.
    pub fn code_lengths(&self) -> Vec<Option<usize>> {
        let topo = self.topo();
        let mut lens: Vec<Option<usize>> = vec![None; topo.edge_count()];
        for (t, fresh) in self.fresh.iter().enumerate() {
            for e in fresh {
                lens[e.0] = Some(t + 1);
            }
        }
        lens
    }

    /// Constraint length `L_v`. A node keeps history for every step in which
    /// one of its edges carries a symbol that depends on a fresh
    /// coefficient; a non-sink must also hold as much as any child.
    pub fn constraint_lengths(&self) -> Vec<usize> {
        let topo = self.topo();
        let mut base = vec![0usize; topo.node_count()];
        for (t, fresh) in self.fresh.iter().enumerate() {
            let mut live = vec![false; topo.edge_count()];
            let mut stack: Vec<EdgeId> = fresh.clone();
            while let Some(e) = stack.pop() {
                if live[e.0] {
                    continue;
                }
                live[e.0] = true;
                stack.extend(topo.out_edges(topo.edge(e).to).iter().copied());
            }
            for (e, edge) in topo.edges().iter().enumerate() {
                if live[e] {
                    base[edge.from.0] = base[edge.from.0].max(t + 1);
                    base[edge.to.0] = base[edge.to.0].max(t + 1);
                }
            }
        }
        let mut len = base;
        loop {
            let mut changed = false;
            for v in topo.nodes() {
                if topo.is_sink(v) {
                    continue;
                }
                let best = topo.children(v).iter().map(|c| len[c.0]).max().unwrap_or(0);
                if best > len[v.0] {
                    len[v.0] = best;
                    changed = true;
                }
            }
            if !changed {
                return len;
            }
        }
    }

    /// The sink's received global kernel matrix through `horizon`
    /// (rows = message inputs, columns = incoming edges).
    pub fn sink_kernel(&self, sink: usize, horizon: usize) -> PolyMatrix {
        let m = self.topo().rate();
        let s = &self.sinks[sink];
        PolyMatrix::from_fn(m, s.in_edges.len(), |i, j| {
            let f = &self.headers[s.in_edges[j].0];
            Poly::from_coeffs((0..=horizon.min(f.len() - 1)).map(|t| f[t][i]).collect())
        })
    }

    /// Recomputes every global kernel from the local kernels as truncated
    /// power series and compares with the headers carried on the edges.
    pub fn headers_consistent(&self) -> bool {
        let topo = self.topo();
        let field = self.field();
        let m = topo.rate();
        let Some(h) = self.t().checked_sub(1) else {
            return true;
        };
        let kernel_poly = |e: usize, a: usize| Poly::from_coeffs(self.kernels[e][a].clone()).truncated(h);
        let compute = |e: usize, g: &[Vec<Poly>]| -> Vec<Poly> {
            let tail = topo.edge(EdgeId(e)).from;
            let mut out = vec![Poly::zero(); m];
            for (a, input) in self.inputs[tail.0].iter().enumerate() {
                let k = kernel_poly(e, a);
                match *input {
                    Input::Message(j) => out[j] = out[j].add(field, &k),
                    Input::Edge(src) => {
                        for (o, gi) in out.iter_mut().zip(&g[src.0]) {
                            *o = o.add(field, &poly_mul_trunc(field, &k, gi, h));
                        }
                    }
                }
            }
            out.into_iter().map(Poly::trimmed).collect()
        };
        let mut g: Vec<Vec<Poly>> = vec![vec![Poly::zero(); m]; topo.edge_count()];
        match &self.edge_order {
            Some(order) => {
                for e in order {
                    g[e.0] = compute(e.0, &g);
                }
            }
            None => {
                let limit = (h + 2) * (topo.edge_count() + 1);
                let mut settled = false;
                for _ in 0..limit {
                    let next: Vec<Vec<Poly>> = (0..topo.edge_count()).map(|e| compute(e, &g)).collect();
                    if next == g {
                        settled = true;
                        break;
                    }
                    g = next;
                }
                if !settled {
                    return false;
                }
            }
        }
        (0..topo.edge_count()).all(|e| (0..=h).all(|t| (0..m).all(|i| g[e][i].coeff(t) == self.headers[e][t][i])))
    }

    /// Sequentially decodes every sink over the first `horizon + 1` steps
    /// and checks the result against the true message stream.
    pub fn verify_decoding(&self, horizon: usize) -> Result<Vec<SinkDecode>, PolyAlgError> {
        let field = self.field();
        let mut out = Vec::with_capacity(self.sinks.len());
        for (i, s) in self.sinks.iter().enumerate() {
            let f = self.sink_kernel(i, horizon);
            let columns = select_columns(field, &f)?;
            let fsel = f.select_columns(&columns);
            let ys: Vec<Vec<Elem>> = (0..=horizon)
                .map(|t| columns.iter().map(|&c| self.symbols[s.in_edges[c].0][t]).collect())
                .collect();
            let dec = sequential_decode(field, &fsel, &ys, horizon)?;
            let recovered = dec.symbols[..] == self.messages[..dec.symbols.len()];
            let reencoded = encode(field, &fsel, &self.messages, horizon) == ys;
            out.push(SinkDecode {
                sink: s.node,
                columns,
                delay: dec.delay,
                recovered,
                reencoded,
            });
        }
        Ok(out)
    }
}

/// Adjacent pairs eligible for a random draw at time 0.
pub(super) fn random_pairs_at_zero(cfg: &SimConfig) -> BTreeSet<(Input, EdgeId)> {
    let topo = cfg.topology();
    let mut out = BTreeSet::new();
    for (e, edge) in topo.edges().iter().enumerate() {
        let v = edge.from;
        if !cfg.is_coding(v) {
            continue;
        }
        let msgs = (v == topo.source())
            .then_some(0..topo.rate())
            .into_iter()
            .flatten()
            .map(Input::Message);
        for from in msgs.chain(topo.in_edges(v).iter().map(|&x| Input::Edge(x))) {
            if cfg.pair_on_path(from, EdgeId(e)) {
                out.insert((from, EdgeId(e)));
            }
        }
    }
    out
}
