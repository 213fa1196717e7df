use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use arcnc::analysis::{self, format_exact, BoundError};
use arcnc::baseline::{rlnc_success_curve, write_rlnc_csv, RlncRow};
use arcnc::engine::{
    collect_campaign, run_trial_with, write_sinks_csv, write_trials_csv, CampaignSummary, KernelScript, Origin,
    RelayMode, SimConfig, TrialResult,
};
use arcnc::gf::{Elem, Field};
use arcnc::topology::{combination_network, load_topology, save_topology, two_node_cycle, Topology};
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::config::{CampaignConfig, Mode};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io { .. } => 2,
        }
    }
}

pub fn invalid(e: impl Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_at(path))
}

pub fn write_file(path: &Path, body: &[u8]) -> Result<(), CliError> {
    fs::write(path, body).map_err(io_at(path))
}

/// `comb`, `example`, `cycle`, or a topology file.
pub fn resolve_topology(spec: &str, n: usize, m: usize) -> Result<Topology, CliError> {
    match spec {
        "comb" => combination_network(n, m).map_err(invalid),
        "example" => combination_network(4, 2).map_err(invalid),
        "cycle" => Ok(two_node_cycle()),
        path => load_topology(&read_file(Path::new(path))?).map_err(invalid),
    }
}

/// Topology file text for a generator.
pub fn generate(kind: &str, n: usize, m: usize) -> Result<String, CliError> {
    match kind {
        "comb" | "example" | "cycle" => Ok(save_topology(&resolve_topology(kind, n, m)?)),
        other => Err(CliError::Invalid(format!("unknown generator `{other}`"))),
    }
}

fn field(q: u64) -> Result<Field, CliError> {
    Field::with_order(q).map_err(invalid)
}

fn vector(v: &[Elem]) -> String {
    let parts: Vec<String> = v.iter().map(|e| e.value().to_string()).collect();
    format!("[{}]", parts.join(" "))
}

fn list<T: Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn opt<T: Display>(x: Option<T>) -> String {
    x.map_or_else(|| "-".to_string(), |x| x.to_string())
}

#[derive(Debug, Clone)]
pub struct TraceOptions {
    pub topology: String,
    pub n: usize,
    pub m: usize,
    pub script: PathBuf,
    pub q: u64,
    pub max_rounds: usize,
    pub seed: u64,
    pub relay: RelayMode,
    /// Leave unscripted coefficients to the random draw.
    pub fill_random: bool,
    pub out: PathBuf,
}

/// Runs one scripted trial, printing every step, and writes the trial
/// result as JSON.
pub fn trace(opts: &TraceOptions, w: &mut impl Write) -> Result<TrialResult, CliError> {
    let topo = resolve_topology(&opts.topology, opts.n, opts.m)?;
    let script = KernelScript::parse(&read_file(&opts.script)?).map_err(invalid)?;
    let cfg = SimConfig::new(topo, field(opts.q)?)
        .map_err(invalid)?
        .with_relay_mode(opts.relay)
        .with_max_rounds(opts.max_rounds)
        .with_seed(opts.seed)
        .with_script(&script, !opts.fill_random)
        .map_err(invalid)?;
    let topo = cfg.topology();
    writeln!(
        w,
        "topology: {} nodes, {} edges, rate {}, sinks {}, q = {}",
        topo.node_count(),
        topo.edge_count(),
        topo.rate(),
        list(topo.sinks()),
        opts.q
    )
    .map_err(stdout_err)?;

    let mut printed: io::Result<()> = Ok(());
    let result = run_trial_with(&cfg, 0, |step| {
        if printed.is_ok() {
            printed = print_step(w, step);
        }
    })
    .map_err(invalid)?;
    printed.map_err(stdout_err)?;
    print_result(w, &cfg, &result).map_err(stdout_err)?;

    let json = serde_json::to_string_pretty(&result).map_err(invalid)?;
    write_file(&opts.out, json.as_bytes())?;
    writeln!(w, "wrote {}", opts.out.display()).map_err(stdout_err)?;
    Ok(result)
}

fn print_step(w: &mut impl Write, step: &arcnc::engine::StepReport) -> io::Result<()> {
    writeln!(w, "t={} message {}", step.t, vector(&step.message))?;
    for c in &step.coefficients {
        let origin = match c.origin {
            Origin::Random => "random",
            Origin::Scripted => "scripted",
            Origin::Forward => "forward",
            Origin::Zeroed => "off-path",
        };
        writeln!(w, "  k[{} -> {}] = {} {origin}", c.from, c.to, c.value.value())?;
    }
    for (e, (s, h)) in step.symbols.iter().zip(&step.headers).enumerate() {
        writeln!(w, "  edge {e}: symbol {} header {}", s.value(), vector(h))?;
    }
    for v in &step.verdicts {
        writeln!(
            w,
            "  sink {}: full rank {}, toeplitz increment {} -> {}",
            v.sink,
            if v.condition_one { "yes" } else { "no" },
            v.rank_increment,
            if v.decodable { "decodable" } else { "waiting" }
        )?;
    }
    if !step.acked.is_empty() {
        writeln!(w, "  ack: {}", list(&step.acked))?;
    }
    if !step.frozen.is_empty() {
        writeln!(w, "  freeze: {}", list(&step.frozen))?;
    }
    Ok(())
}

fn print_result(w: &mut impl Write, cfg: &SimConfig, r: &TrialResult) -> io::Result<()> {
    writeln!(w, "stopping times: {}", list(r.stopping_times.iter().map(|&t| opt(t))))?;
    writeln!(w, "code lengths: {}", list(r.code_lengths.iter().map(|&l| opt(l))))?;
    writeln!(w, "constraint lengths: {}", list(&r.constraint_lengths))?;
    writeln!(
        w,
        "average stopping time {}, average code length {}, average memory {} bits",
        opt(r.avg_stopping_time_exact()),
        opt(r.avg_code_len_exact()),
        r.avg_memory_bits_exact(cfg.field())
            .map_or_else(|| r.avg_memory_bits.to_string(), |x| x.to_string())
    )?;
    for d in &r.decoding {
        writeln!(
            w,
            "decoding sink {}: delay {}, channels {}, {}",
            d.sink,
            d.delay,
            list(&d.columns),
            if d.recovered && d.reencoded {
                "recovered"
            } else {
                "MISMATCH"
            }
        )?;
    }
    if !r.success {
        writeln!(w, "not every sink decodable within {} rounds", cfg.max_rounds())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct TopologyInfo {
    pub nodes: usize,
    pub edges: usize,
    pub rate: usize,
    pub sinks: usize,
    pub cyclic: bool,
}

/// Closed-form columns matching the campaign parameters.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisColumns {
    pub m: u32,
    pub q: u64,
    pub d: u64,
    pub eta: u64,
    pub et_upper: f64,
    pub et_upper_exact: String,
    pub et_lower: f64,
    pub et_lower_exact: String,
    #[serde(rename = "exact_ET")]
    pub exact_et: f64,
    pub et2_upper: f64,
    pub var_upper: Option<f64>,
    pub et_n_upper: f64,
    /// Entry `t`; `None` where the bound does not apply.
    pub ho_bound_by_t: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Literature {
    pub label: &'static str,
    pub bnc_delay: u32,
    pub bnc_memory_bits_per_node: u32,
    pub bnc_min_block_length: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RlncFieldSummary {
    pub q: u32,
    pub all_sinks_fraction: f64,
    /// `1 / fraction`: draws needed on average before every sink succeeds.
    pub expected_attempts: Option<f64>,
    /// Probability that `m` independent uniform vectors span `F_q^m`.
    pub independent_full_rank: f64,
    pub independent_full_rank_exact: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RlncSection {
    pub trials: u64,
    pub rows: Vec<RlncRow>,
    pub fields: Vec<RlncFieldSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: CampaignConfig,
    pub topology: TopologyInfo,
    pub eta: usize,
    pub engine: Option<CampaignSummary>,
    pub analysis: AnalysisColumns,
    pub literature: Literature,
    pub rlnc: Option<RlncSection>,
}

fn analysis_columns(cfg: &CampaignConfig, sim: &SimConfig) -> Result<AnalysisColumns, CliError> {
    let topo = sim.topology();
    let m = topo.rate() as u32;
    let q = cfg.q;
    let d = topo.sinks().len() as u64;
    let eta = sim.eta() as u64;
    let var_upper = match cfg.topology.as_str() {
        "comb" => Some(analysis::var_upper(cfg.n as u32, m, q).map_err(invalid)?),
        "example" => Some(analysis::var_upper(4, m, q).map_err(invalid)?),
        _ => None,
    };
    Ok(AnalysisColumns {
        m,
        q,
        d,
        eta,
        et_upper: analysis::et_upper(m, q).map_err(invalid)?,
        et_upper_exact: format_exact(&analysis::et_upper_exact(m, q).map_err(invalid)?),
        et_lower: analysis::et_lower(m, q).map_err(invalid)?,
        et_lower_exact: format_exact(&analysis::et_lower_exact(m, q).map_err(invalid)?),
        exact_et: analysis::exact_et(q, m, cfg.tol).map_err(invalid)?,
        et2_upper: analysis::et2_upper(m, q).map_err(invalid)?,
        var_upper,
        et_n_upper: analysis::et_n_upper(d, q, eta, cfg.tol).map_err(invalid)?,
        ho_bound_by_t: (0..cfg.max_rounds as u32)
            .map(|t| analysis::ho_bound(d, q, eta, t).ok())
            .collect(),
    })
}

fn create_csv(dir: &Path, name: &str) -> Result<(PathBuf, io::BufWriter<fs::File>), CliError> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(io_at(&path))?;
    Ok((path, io::BufWriter::new(file)))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Invalid(format!("{}: {other:?}", path.display())),
    }
}

/// Runs a campaign and writes `sinks.csv`, `trials.csv`, `rlnc.csv` and
/// `summary.json` into `cfg.out`.
pub fn run(cfg: &CampaignConfig, log: &mut impl Write) -> Result<RunSummary, CliError> {
    cfg.validate().map_err(invalid)?;
    let topo = resolve_topology(&cfg.topology, cfg.n, cfg.m)?;
    let f = field(cfg.q)?;
    let mut sim = SimConfig::new(topo, f)
        .map_err(invalid)?
        .with_relay_mode(cfg.relay)
        .with_max_rounds(cfg.max_rounds)
        .with_seed(cfg.seed);
    if let Some(path) = &cfg.override_script {
        let script = KernelScript::parse(&read_file(path)?).map_err(invalid)?;
        sim = sim.with_script(&script, false).map_err(invalid)?;
    }
    fs::create_dir_all(&cfg.out).map_err(io_at(&cfg.out))?;

    let engine = if cfg.mode != Mode::Rlnc {
        let campaign = collect_campaign(&sim, cfg.trials, cfg.workers).map_err(invalid)?;
        let (path, w) = create_csv(&cfg.out, "sinks.csv")?;
        write_sinks_csv(w, &campaign.records, sim.topology().sinks()).map_err(|e| csv_err(&path, e))?;
        let (path, w) = create_csv(&cfg.out, "trials.csv")?;
        write_trials_csv(w, &campaign.records).map_err(|e| csv_err(&path, e))?;
        let s = &campaign.summary;
        writeln!(
            log,
            "arcnc: {}/{} trials decodable, mean avg T {:.6} (SE {:.6})",
            s.successes, s.trials, s.mean_avg_t, s.se_avg_t
        )
        .map_err(stdout_err)?;
        Some(campaign.summary)
    } else {
        None
    };

    let rlnc = if cfg.mode != Mode::Arcnc {
        let fields: Vec<Field> = cfg.rlnc_fields().into_iter().map(field).collect::<Result<_, _>>()?;
        let rows = rlnc_success_curve(
            sim.topology(),
            &fields,
            cfg.trials,
            cfg.seed,
            sim.eta() as u64,
            cfg.workers,
        )
        .map_err(invalid)?;
        let (path, w) = create_csv(&cfg.out, "rlnc.csv")?;
        write_rlnc_csv(w, &rows).map_err(|e| csv_err(&path, e))?;
        let m = sim.topology().rate() as u32;
        let mut summaries = Vec::new();
        for f in &fields {
            let all = rows
                .iter()
                .find(|r| r.q == f.order() && r.sink.is_none())
                .map_or(0.0, |r| r.success_fraction);
            let full: BigRational = analysis::full_rank_prob_q_exact(f.order() as u64, m, 1).map_err(invalid)?;
            summaries.push(RlncFieldSummary {
                q: f.order(),
                all_sinks_fraction: all,
                expected_attempts: (all > 0.0).then(|| 1.0 / all),
                independent_full_rank: analysis::to_f64(&full),
                independent_full_rank_exact: format_exact(&full),
            });
            writeln!(log, "rlnc: q={} all sinks {all:.6}", f.order()).map_err(stdout_err)?;
        }
        Some(RlncSection {
            trials: cfg.trials,
            rows,
            fields: summaries,
        })
    } else {
        None
    };

    let summary = RunSummary {
        config: cfg.clone(),
        topology: TopologyInfo {
            nodes: sim.topology().node_count(),
            edges: sim.topology().edge_count(),
            rate: sim.topology().rate(),
            sinks: sim.topology().sinks().len(),
            cyclic: sim.is_cyclic(),
        },
        eta: sim.eta(),
        engine,
        analysis: analysis_columns(cfg, &sim)?,
        literature: Literature {
            label: "literature value",
            bnc_delay: 1,
            bnc_memory_bits_per_node: 4,
            bnc_min_block_length: matches!(cfg.topology.as_str(), "comb" | "example").then(|| {
                let (n, m) = if cfg.topology == "example" { (4, 2) } else { (cfg.n, cfg.m) };
                n - m
            }),
        },
        rlnc,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(invalid)?;
    write_file(&cfg.out.join("summary.json"), json.as_bytes())?;
    writeln!(log, "wrote {}", cfg.out.display()).map_err(stdout_err)?;
    Ok(summary)
}

/// Parameter grid for the bound table.
#[derive(Debug, Clone)]
pub struct BoundGrid {
    pub m: Vec<u32>,
    pub q: Vec<u64>,
    pub n: Vec<u32>,
    pub d: Vec<u64>,
    pub eta: Vec<u64>,
    pub t: Vec<u32>,
    pub tol: f64,
}

#[derive(Default)]
struct Cell {
    m: Option<u32>,
    q: Option<u64>,
    n: Option<u32>,
    d: Option<u64>,
    eta: Option<u64>,
    t: Option<u32>,
}

struct Table<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> Table<W> {
    fn row(&mut self, quantity: &str, c: &Cell, value: String, mode: &str) -> csv::Result<()> {
        fn s<T: Display>(x: Option<T>) -> String {
            x.map_or_else(String::new, |x| x.to_string())
        }
        self.out.write_record([
            quantity.to_string(),
            s(c.m),
            s(c.q),
            s(c.n),
            s(c.d),
            s(c.eta),
            s(c.t),
            value,
            mode.to_string(),
        ])
    }

    /// Exact and float rows; inapplicable cells become `N/A`, other
    /// errors abort.
    fn pair(&mut self, quantity: &str, c: &Cell, exact: Result<BigRational, BoundError>) -> Result<(), CliError> {
        let (e, f) = match exact {
            Ok(x) => (format_exact(&x), analysis::to_f64(&x).to_string()),
            Err(BoundError::NotApplicable { .. } | BoundError::ZeroTime) => ("N/A".to_string(), "N/A".to_string()),
            Err(e) => return Err(invalid(e)),
        };
        self.row(quantity, c, e, "exact").map_err(invalid)?;
        self.row(quantity, c, f, "float").map_err(invalid)
    }

    fn float(&mut self, quantity: &str, c: &Cell, value: Result<f64, BoundError>) -> Result<(), CliError> {
        let v = match value {
            Ok(x) => x.to_string(),
            Err(BoundError::NotApplicable { .. }) => "N/A".to_string(),
            Err(e) => return Err(invalid(e)),
        };
        self.row(quantity, c, v, "float").map_err(invalid)
    }
}

/// `quantity,m,q,n,d,eta,t,value,mode` over the grid. Parameters a
/// quantity does not take are left empty.
pub fn bounds_csv<W: Write>(grid: &BoundGrid, w: W) -> Result<(), CliError> {
    let mut table = Table {
        out: csv::Writer::from_writer(w),
    };
    table
        .out
        .write_record(["quantity", "m", "q", "n", "d", "eta", "t", "value", "mode"])
        .map_err(invalid)?;
    for &m in &grid.m {
        for &q in &grid.q {
            let c = Cell {
                m: Some(m),
                q: Some(q),
                ..Cell::default()
            };
            table.pair("et_upper", &c, analysis::et_upper_exact(m, q))?;
            table.pair("et_lower", &c, analysis::et_lower_exact(m, q))?;
            table.pair("et2_upper", &c, analysis::et2_upper_exact(m, q))?;
            match analysis::rho_upper_exact(m, q).map_err(invalid)? {
                Some(x) => table.pair("rho_upper", &c, Ok(x))?,
                None => {
                    table.row("rho_upper", &c, "N/A".into(), "exact").map_err(invalid)?;
                    table.row("rho_upper", &c, "N/A".into(), "float").map_err(invalid)?;
                }
            }
            table.float("exact_ET", &c, analysis::exact_et(q, m, grid.tol))?;
            for &t in &grid.t {
                let c = Cell {
                    m: Some(m),
                    q: Some(q),
                    t: Some(t),
                    ..Cell::default()
                };
                table.pair("full_rank_prob_Q", &c, analysis::full_rank_prob_q_exact(q, m, t))?;
            }
            for &n in grid.n.iter().filter(|&&n| n >= m) {
                let c = Cell {
                    m: Some(m),
                    q: Some(q),
                    n: Some(n),
                    ..Cell::default()
                };
                table.pair("var_upper", &c, analysis::var_upper_exact(n, m, q))?;
            }
        }
    }
    for &d in &grid.d {
        for &q in &grid.q {
            for &eta in &grid.eta {
                let base = || Cell {
                    q: Some(q),
                    d: Some(d),
                    eta: Some(eta),
                    ..Cell::default()
                };
                for &t in &grid.t {
                    let c = Cell { t: Some(t), ..base() };
                    table.pair("ho_bound", &c, analysis::ho_bound_exact(d, q, eta, t))?;
                }
                let eta32 = u32::try_from(eta).map_err(invalid)?;
                table.pair("et_n_upper", &base(), analysis::et_n_upper_exact(d, q, eta32))?;
            }
        }
    }
    table.out.flush().map_err(stdout_err)?;
    Ok(())
}
