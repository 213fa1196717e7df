use std::io;

use rayon::prelude::*;
use serde::Serialize;

use crate::topology::NodeId;

use super::{run_trial, EngineError, SimConfig, TrialResult};

/// The per-trial numbers kept for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub stopping_times: Vec<Option<u32>>,
    pub t_n: Option<u32>,
    pub success: bool,
    pub rounds: u32,
    pub avg_stopping_time: Option<f64>,
    pub avg_code_len: Option<f64>,
    pub avg_memory_bits: f64,
    pub decoded: bool,
}

impl From<&TrialResult> for TrialRecord {
    fn from(r: &TrialResult) -> TrialRecord {
        TrialRecord {
            trial: r.trial,
            seed: r.seed,
            stopping_times: r.stopping_times.iter().map(|t| t.map(|t| t as u32)).collect(),
            t_n: r.t_n.map(|t| t as u32),
            success: r.success,
            rounds: r.rounds as u32,
            avg_stopping_time: r.avg_stopping_time,
            avg_code_len: r.avg_code_len,
            avg_memory_bits: r.avg_memory_bits,
            decoded: r.decoded(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub trials: usize,
    pub successes: usize,
    pub sinks: usize,
    pub eta: usize,
    /// Mean over successful trials of `(1/d) sum_i T_i`.
    #[serde(rename = "mean_avg_T")]
    pub mean_avg_t: f64,
    /// Unbiased sample variance of the same quantity.
    #[serde(rename = "var_avg_T")]
    pub var_avg_t: f64,
    #[serde(rename = "se_avg_T")]
    pub se_avg_t: f64,
    /// Mean of `T_i^2` over all sinks of successful trials.
    #[serde(rename = "mean_T_sq")]
    pub mean_t_sq: f64,
    pub mean_avg_code_len: f64,
    pub mean_avg_memory_bits: f64,
    /// Entry `t`: fraction of trials with every sink decodable by `t`.
    pub success_by_t: Vec<f64>,
    /// Entry `t`: fraction of (trial, sink) pairs decodable by `t`.
    pub sink_success_by_t: Vec<f64>,
    /// Entry `t`: trials with `T_N = t`.
    pub t_n_histogram: Vec<usize>,
    /// `L_v` averaged over successful trials.
    pub mean_constraint_length: Vec<f64>,
    pub decode_failures: usize,
    pub header_mismatches: usize,
    /// Decoded sinks whose delay exceeded their stopping time.
    pub delay_above_stopping_time: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Campaign {
    pub records: Vec<TrialRecord>,
    pub summary: CampaignSummary,
}

#[derive(Default)]
struct Accumulator {
    successes: usize,
    sum_avg: f64,
    sum_avg_sq: f64,
    sum_t_sq: f64,
    code_len_sum: f64,
    code_len_count: usize,
    memory_sum: f64,
    by_t: Vec<usize>,
    sink_by_t: Vec<usize>,
    histogram: Vec<usize>,
    l_sum: Vec<f64>,
    decode_failures: usize,
    header_mismatches: usize,
    delay_above: usize,
}

fn bump(v: &mut Vec<usize>, i: usize) {
    if v.len() <= i {
        v.resize(i + 1, 0);
    }
    v[i] += 1;
}

impl Accumulator {
    fn add(&mut self, r: &TrialResult) {
        if let Some(t) = r.t_n {
            bump(&mut self.by_t, t);
            bump(&mut self.histogram, t);
        }
        for t in r.stopping_times.iter().flatten() {
            bump(&mut self.sink_by_t, *t);
        }
        self.memory_sum += r.avg_memory_bits;
        if let Some(c) = r.avg_code_len {
            self.code_len_sum += c;
            self.code_len_count += 1;
        }
        if !r.headers_consistent {
            self.header_mismatches += 1;
        }
        let Some(avg) = r.avg_stopping_time else { return };
        self.successes += 1;
        self.sum_avg += avg;
        self.sum_avg_sq += avg * avg;
        self.sum_t_sq +=
            r.stopping_times.iter().flatten().map(|&t| (t * t) as f64).sum::<f64>() / r.stopping_times.len() as f64;
        if self.l_sum.len() < r.constraint_lengths.len() {
            self.l_sum.resize(r.constraint_lengths.len(), 0.0);
        }
        for (s, &l) in self.l_sum.iter_mut().zip(&r.constraint_lengths) {
            *s += l as f64;
        }
        if !r.decoded() {
            self.decode_failures += 1;
        }
        for (d, t) in r.decoding.iter().zip(&r.stopping_times) {
            if t.is_some_and(|t| d.delay > t) {
                self.delay_above += 1;
            }
        }
    }

    fn finish(self, trials: usize, sinks: usize, eta: usize, max_rounds: usize) -> CampaignSummary {
        let n = self.successes as f64;
        let mean = if self.successes > 0 { self.sum_avg / n } else { f64::NAN };
        let var = if self.successes > 1 {
            ((self.sum_avg_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            f64::NAN
        };
        let cumulative = |counts: &[usize], denom: f64| -> Vec<f64> {
            let mut acc = 0;
            (0..max_rounds)
                .map(|t| {
                    acc += counts.get(t).copied().unwrap_or(0);
                    acc as f64 / denom
                })
                .collect()
        };
        CampaignSummary {
            trials,
            successes: self.successes,
            sinks,
            eta,
            mean_avg_t: mean,
            var_avg_t: var,
            se_avg_t: (var / n).sqrt(),
            mean_t_sq: self.sum_t_sq / n,
            mean_avg_code_len: self.code_len_sum / self.code_len_count.max(1) as f64,
            mean_avg_memory_bits: self.memory_sum / trials as f64,
            success_by_t: cumulative(&self.by_t, trials as f64),
            sink_success_by_t: cumulative(&self.sink_by_t, (trials * sinks) as f64),
            t_n_histogram: self.histogram,
            mean_constraint_length: self.l_sum.iter().map(|s| s / n).collect(),
            decode_failures: self.decode_failures,
            header_mismatches: self.header_mismatches,
            delay_above_stopping_time: self.delay_above,
        }
    }
}

const CHUNK: u64 = 4096;

/// Runs trials `0..trials` on `workers` threads and merges by trial index,
/// so the outcome does not depend on the worker count.
pub fn collect_campaign(cfg: &SimConfig, trials: u64, workers: usize) -> Result<Campaign, EngineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let mut acc = Accumulator::default();
    let mut records = Vec::with_capacity(trials as usize);
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        let batch: Vec<TrialResult> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| run_trial(cfg, i))
                .collect::<Result<_, _>>()
        })?;
        for r in &batch {
            acc.add(r);
            records.push(TrialRecord::from(r));
        }
        start = end;
    }
    let summary = acc.finish(
        trials as usize,
        cfg.topology().sinks().len(),
        cfg.eta(),
        cfg.max_rounds(),
    );
    Ok(Campaign { records, summary })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// `trial,seed,sink,T_i,T_N,success`, one row per (trial, sink).
pub fn write_sinks_csv<W: io::Write>(w: W, records: &[TrialRecord], sinks: &[NodeId]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "seed", "sink", "T_i", "T_N", "success"])?;
    for r in records {
        for (sink, t) in sinks.iter().zip(&r.stopping_times) {
            out.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                sink.to_string(),
                opt(*t),
                opt(r.t_n),
                r.success.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `trial,avg_T,avg_code_len,avg_memory_bits,rounds`.
pub fn write_trials_csv<W: io::Write>(w: W, records: &[TrialRecord]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "avg_T", "avg_code_len", "avg_memory_bits", "rounds"])?;
    for r in records {
        out.write_record([
            r.trial.to_string(),
            opt(r.avg_stopping_time),
            opt(r.avg_code_len),
            r.avg_memory_bits.to_string(),
            r.rounds.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
