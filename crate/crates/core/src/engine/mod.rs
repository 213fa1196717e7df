//! The time-stepped protocol: local kernels grow by one random coefficient
//! per step on every edge that has not been frozen, headers carry global
//! kernels downstream, sinks test decodability each step and ACK, and
//! edges into fully acknowledged nodes freeze.

mod campaign;
mod script;
mod sim;

pub use campaign::{collect_campaign, write_sinks_csv, write_trials_csv, Campaign, CampaignSummary, TrialRecord};
pub use script::{BoundScript, Input, KernelScript, ScriptError};
pub use sim::{Coefficient, Origin, Simulation, SinkDecode, SinkVerdict, StepReport};

use std::collections::BTreeSet;

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::gf::{Elem, Field, FieldKind};
use crate::polyalg::PolyAlgError;
use crate::topology::{disjoint_paths, validate_multicast, EdgeId, NodeId, Topology, TopologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error(transparent)]
    Algebra(#[from] PolyAlgError),
    #[error("override script has no coefficient for pair ({from}, {to}) at t={t}")]
    MissingCoefficient { from: Input, to: EdgeId, t: usize },
    #[error("time-{t} symbols did not settle; the kernel coupling is not nilpotent")]
    NotNilpotent { t: usize },
    #[error("max rounds must be at least 1")]
    ZeroRounds,
}

/// What nodes with a single incoming edge do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RelayMode {
    /// Copy the input at time 0 and never grow the kernel.
    #[default]
    Forward,
    /// Draw coefficients like any coding node.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MessageSource {
    #[default]
    Random,
    /// `x_t` per step; missing entries are zero.
    Scripted(Vec<Vec<Elem>>),
}

/// Everything a trial needs besides its index.
#[derive(Debug, Clone)]
pub struct SimConfig {
    topology: Topology,
    field: Field,
    max_rounds: usize,
    base_seed: u64,
    relay: RelayMode,
    script: Option<BoundScript>,
    strict_script: bool,
    messages: MessageSource,
    // adjacent pairs on the per-sink disjoint paths; `None` when acyclic
    on_path: Option<BTreeSet<(Input, EdgeId)>>,
    eta: usize,
}

impl SimConfig {
    /// Checks the min-cut condition and, for cyclic networks, fixes the
    /// time-0 paths.
    pub fn new(topology: Topology, field: Field) -> Result<SimConfig, EngineError> {
        if let Some(err) = validate_multicast(&topology).to_error() {
            return Err(err.into());
        }
        let on_path = if topology.is_acyclic() {
            None
        } else {
            let paths = disjoint_paths(&topology)?;
            let mut set: BTreeSet<(Input, EdgeId)> = paths
                .adjacent_pairs()
                .into_iter()
                .map(|(a, b)| (Input::Edge(a), b))
                .collect();
            for e in paths.source_edges() {
                set.extend((0..topology.rate()).map(|j| (Input::Message(j), e)));
            }
            Some(set)
        };
        let mut cfg = SimConfig {
            topology,
            field,
            max_rounds: 64,
            base_seed: 0,
            relay: RelayMode::default(),
            script: None,
            strict_script: false,
            messages: MessageSource::default(),
            on_path,
            eta: 0,
        };
        cfg.eta = sim::random_pairs_at_zero(&cfg).len();
        Ok(cfg)
    }

    pub fn with_max_rounds(mut self, rounds: usize) -> SimConfig {
        self.max_rounds = rounds;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> SimConfig {
        self.base_seed = seed;
        self
    }

    pub fn with_relay_mode(mut self, relay: RelayMode) -> SimConfig {
        self.relay = relay;
        self.eta = sim::random_pairs_at_zero(&self).len();
        self
    }

    /// Scripted coefficients. With `strict`, any coefficient the script
    /// leaves out is an error instead of a random draw.
    pub fn with_script(mut self, script: &KernelScript, strict: bool) -> Result<SimConfig, EngineError> {
        self.script = Some(script.bind(&self.topology, &self.field)?);
        self.strict_script = strict;
        Ok(self)
    }

    pub fn with_messages(mut self, messages: MessageSource) -> SimConfig {
        self.messages = messages;
        self
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn max_rounds(&self) -> usize {
        self.max_rounds
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn relay_mode(&self) -> RelayMode {
        self.relay
    }

    pub fn script(&self) -> Option<&BoundScript> {
        self.script.as_ref()
    }

    pub fn strict_script(&self) -> bool {
        self.strict_script
    }

    pub fn messages(&self) -> &MessageSource {
        &self.messages
    }

    pub fn is_cyclic(&self) -> bool {
        self.on_path.is_some()
    }

    /// Whether node `v` draws random coefficients.
    pub fn is_coding(&self, v: NodeId) -> bool {
        let indeg = self.topology.in_edges(v).len();
        v == self.topology.source() || indeg >= 2 || (indeg == 1 && self.relay == RelayMode::Random)
    }

    /// Whether the pair may be nonzero at time 0.
    pub fn pair_on_path(&self, from: Input, to: EdgeId) -> bool {
        self.on_path.as_ref().is_none_or(|set| set.contains(&(from, to)))
    }

    /// Number of coefficients drawn at random at time 0.
    pub fn eta(&self) -> usize {
        self.eta
    }

    /// Seed of the generator used for trial `trial`.
    pub fn trial_seed(&self, trial: u64) -> u64 {
        trial_seed(self.base_seed, trial)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `splitmix64(base ^ splitmix64(trial))`; seeds a ChaCha8 stream
/// (stream 0 for coefficients, stream 1 for messages).
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    splitmix64(base ^ splitmix64(trial))
}

/// Per-trial metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: u64,
    pub seed: u64,
    pub rate: usize,
    pub sinks: Vec<NodeId>,
    /// `T_i` per sink, `None` if the sink never became decodable.
    pub stopping_times: Vec<Option<usize>>,
    pub t_n: Option<usize>,
    pub success: bool,
    pub rounds: usize,
    pub eta: usize,
    /// Per edge; `None` when the tail does not code.
    pub code_lengths: Vec<Option<usize>>,
    /// `L_v` per node.
    pub constraint_lengths: Vec<usize>,
    pub memory_bits: Vec<f64>,
    pub avg_stopping_time: Option<f64>,
    pub avg_code_len: Option<f64>,
    pub avg_memory_bits: f64,
    /// Sequential-decoding results; empty when the trial failed.
    pub decoding: Vec<SinkDecode>,
    /// Last step fed to the decoder.
    pub decode_horizon: Option<usize>,
    pub headers_consistent: bool,
}

impl TrialResult {
    /// Every decoded sink recovered and re-encoded its stream.
    pub fn decoded(&self) -> bool {
        self.success && self.decoding.iter().all(|d| d.recovered && d.reencoded)
    }

    pub fn avg_stopping_time_exact(&self) -> Option<Rational64> {
        let sum: Option<usize> = self.stopping_times.iter().copied().sum();
        sum.map(|s| Rational64::new(s as i64, self.sinks.len() as i64))
    }

    pub fn avg_code_len_exact(&self) -> Option<Rational64> {
        let lens: Vec<usize> = self.code_lengths.iter().flatten().copied().collect();
        (!lens.is_empty()).then(|| Rational64::new(lens.iter().sum::<usize>() as i64, lens.len() as i64))
    }

    /// Exact average memory in bits; only for fields of order `2^k`.
    pub fn avg_memory_bits_exact(&self, field: &Field) -> Option<Rational64> {
        let bits = match field.kind() {
            FieldKind::BinaryExtension { degree, .. } => degree as i64,
            FieldKind::Prime if field.order() == 2 => 1,
            FieldKind::Prime => return None,
        };
        let total: usize = self.constraint_lengths.iter().sum();
        Some(Rational64::new(
            self.rate as i64 * total as i64 * bits,
            self.constraint_lengths.len() as i64,
        ))
    }
}

/// Runs one trial: steps until every sink decodes or the round budget is
/// spent, then keeps the (frozen) network running long enough to decode
/// every sink and verify the recovered stream.
pub fn run_trial(cfg: &SimConfig, trial: u64) -> Result<TrialResult, EngineError> {
    run_trial_with(cfg, trial, |_| {})
}

/// [`run_trial`] with a callback receiving each step report.
pub fn run_trial_with(
    cfg: &SimConfig,
    trial: u64,
    mut on_step: impl FnMut(&StepReport),
) -> Result<TrialResult, EngineError> {
    if cfg.max_rounds == 0 {
        return Err(EngineError::ZeroRounds);
    }
    let topo = cfg.topology();
    let m = topo.rate();
    let seed = cfg.trial_seed(trial);
    let mut sim = Simulation::new(cfg, seed);
    while sim.t() < cfg.max_rounds {
        let report = sim.step()?;
        on_step(&report);
        if sim.all_decodable() {
            break;
        }
    }
    let rounds = sim.t();
    let stopping_times = sim.stopping_times();
    let success = sim.all_decodable();
    let t_n = if success {
        stopping_times.iter().flatten().max().copied()
    } else {
        None
    };

    // Metrics are fixed once every sink has ACKed: later steps draw nothing.
    let code_lengths = sim.code_lengths();
    let constraint_lengths = sim.constraint_lengths();

    let mut decoding = Vec::new();
    let mut decode_horizon = None;
    if let Some(t_n) = t_n {
        let mut horizon = (m + 1) * t_n + 2;
        for attempt in 0..4 {
            while sim.t() <= horizon {
                sim.step()?;
            }
            match sim.verify_decoding(horizon) {
                Ok(d) => {
                    decoding = d;
                    decode_horizon = Some(horizon);
                    break;
                }
                Err(PolyAlgError::HorizonTooShort { .. } | PolyAlgError::NoFullRankSubset) if attempt < 3 => {
                    horizon = 2 * horizon + 1;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let headers_consistent = sim.headers_consistent();

    let bits = cfg.field().bits_per_symbol();
    let memory_bits: Vec<f64> = constraint_lengths.iter().map(|&l| (m * l) as f64 * bits).collect();
    let coding_lens: Vec<usize> = code_lengths.iter().flatten().copied().collect();
    let avg_code_len =
        (!coding_lens.is_empty()).then(|| coding_lens.iter().sum::<usize>() as f64 / coding_lens.len() as f64);
    let avg_stopping_time =
        success.then(|| stopping_times.iter().flatten().sum::<usize>() as f64 / stopping_times.len() as f64);
    let avg_memory_bits = memory_bits.iter().sum::<f64>() / memory_bits.len() as f64;

    Ok(TrialResult {
        trial,
        seed,
        rate: m,
        sinks: topo.sinks().to_vec(),
        stopping_times,
        t_n,
        success,
        rounds,
        eta: cfg.eta(),
        code_lengths,
        constraint_lengths,
        memory_bits,
        avg_stopping_time,
        avg_code_len,
        avg_memory_bits,
        decoding,
        decode_horizon,
        headers_consistent,
    })
}
