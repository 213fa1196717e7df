use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use arcnc::engine::RelayMode;
use arcnc_cli::commands::{self, BoundGrid, TraceOptions};
use arcnc_cli::{CampaignConfig, CliError, Mode};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "arcnc",
    version,
    about = "Adaptive random convolutional network coding simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a topology file for a built-in network.
    Gen(GenArgs),
    /// Run one trial with scripted kernels and print every step.
    Trace(TraceArgs),
    /// Monte Carlo campaign.
    Run(RunArgs),
    /// Tabulate the closed-form bounds over a grid.
    Bounds(BoundsArgs),
    /// Same as `run --mode both`.
    Compare(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Comb,
    Example,
    Cycle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Relay {
    Forward,
    Random,
}

impl From<Relay> for RelayMode {
    fn from(r: Relay) -> RelayMode {
        match r {
            Relay::Forward => RelayMode::Forward,
            Relay::Random => RelayMode::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Arcnc,
    Rlnc,
    Both,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// `comb`, `example`, `cycle` or a topology file.
    #[arg(long, default_value = "example")]
    topology: String,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Kernel override script (`k <from> <to> <t> <value>` lines).
    #[arg(long = "override")]
    script: PathBuf,
    #[arg(long, default_value_t = 2)]
    q: u64,
    #[arg(long, default_value_t = 64)]
    max_rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "forward")]
    relay: Relay,
    /// Draw coefficients the script leaves out instead of failing.
    #[arg(long)]
    fill_random: bool,
    /// Trial result JSON.
    #[arg(long, default_value = "trial.json")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "override")]
    script: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    relay: Option<Relay>,
    /// Field orders for the RLNC curve.
    #[arg(long, value_delimiter = ',')]
    rlnc_q: Vec<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    m: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,8")]
    q: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
    n: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1,6")]
    d: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "2,8")]
    eta: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    t: Vec<u32>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn campaign_config(args: RunArgs, force_both: bool) -> Result<CampaignConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => CampaignConfig::parse(&commands::read_file(path)?).map_err(commands::invalid)?,
        None => CampaignConfig::default(),
    };
    if let Some(v) = args.topology {
        cfg.topology = v;
    }
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.m {
        cfg.m = v;
    }
    if let Some(v) = args.q {
        cfg.q = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.max_rounds {
        cfg.max_rounds = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.mode {
        cfg.mode = match v {
            ModeArg::Arcnc => Mode::Arcnc,
            ModeArg::Rlnc => Mode::Rlnc,
            ModeArg::Both => Mode::Both,
        };
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    if let Some(v) = args.script {
        cfg.override_script = Some(v);
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = args.tol {
        cfg.tol = v;
    }
    if let Some(v) = args.relay {
        cfg.relay = v.into();
    }
    if !args.rlnc_q.is_empty() {
        cfg.rlnc_q = args.rlnc_q;
    }
    if force_both {
        cfg.mode = Mode::Both;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Gen(a) => {
            let kind = match a.kind {
                GenKind::Comb => "comb",
                GenKind::Example => "example",
                GenKind::Cycle => "cycle",
            };
            let text = commands::generate(kind, a.n, a.m)?;
            match a.out {
                Some(path) => commands::write_file(&path, text.as_bytes()),
                None => out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                }),
            }
        }
        Command::Trace(a) => {
            let opts = TraceOptions {
                topology: a.topology,
                n: a.n,
                m: a.m,
                script: a.script,
                q: a.q,
                max_rounds: a.max_rounds,
                seed: a.seed,
                relay: a.relay.into(),
                fill_random: a.fill_random,
                out: a.out,
            };
            commands::trace(&opts, &mut out).map(|_| ())
        }
        Command::Run(a) => commands::run(&campaign_config(a, false)?, &mut out).map(|_| ()),
        Command::Compare(a) => commands::run(&campaign_config(a, true)?, &mut out).map(|_| ()),
        Command::Bounds(a) => {
            let grid = BoundGrid {
                m: a.m,
                q: a.q,
                n: a.n,
                d: a.d,
                eta: a.eta,
                t: a.t,
                tol: a.tol,
            };
            match a.out {
                Some(path) => {
                    let mut buf = Vec::new();
                    commands::bounds_csv(&grid, &mut buf)?;
                    commands::write_file(&path, &buf)
                }
                None => commands::bounds_csv(&grid, &mut out),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
