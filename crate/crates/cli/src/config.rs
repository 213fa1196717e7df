//! Campaign configuration: flat `key = value` files, overridable by flags.
//!
//! ```text
//! # comments and blank lines are ignored
//! topology = comb      # comb, cycle, example or a topology file path
//! n = 4
//! m = 2
//! q = 2
//! trials = 100000
//! max_rounds = 64
//! seed = 1
//! mode = both          # arcnc, rlnc or both
//! out = runs/comb42
//! override = kernels.txt
//! workers = 4
//! tol = 1e-9
//! relay = forward      # forward or random
//! rlnc_q = 2,4,8
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use arcnc::engine::RelayMode;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    Value { line: usize, key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Arcnc,
    Rlnc,
    Both,
}

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> Result<Mode, ()> {
        match s {
            "arcnc" => Ok(Mode::Arcnc),
            "rlnc" => Ok(Mode::Rlnc),
            "both" => Ok(Mode::Both),
            _ => Err(()),
        }
    }
}

pub fn parse_relay(s: &str) -> Option<RelayMode> {
    match s {
        "forward" => Some(RelayMode::Forward),
        "random" => Some(RelayMode::Random),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    /// `comb`, `cycle`, `example`, or a path to a topology file.
    pub topology: String,
    pub n: usize,
    pub m: usize,
    pub q: u64,
    pub trials: u64,
    pub max_rounds: usize,
    pub seed: u64,
    pub mode: Mode,
    pub out: PathBuf,
    #[serde(rename = "override")]
    pub override_script: Option<PathBuf>,
    pub workers: usize,
    pub tol: f64,
    pub relay: RelayMode,
    /// Field orders for the RLNC curve; empty means `[q]`.
    pub rlnc_q: Vec<u64>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            topology: "comb".into(),
            n: 4,
            m: 2,
            q: 2,
            trials: 1000,
            max_rounds: 64,
            seed: 0,
            mode: Mode::Arcnc,
            out: PathBuf::from("out"),
            override_script: None,
            workers: 1,
            tol: 1e-9,
            relay: RelayMode::Forward,
            rlnc_q: Vec::new(),
        }
    }
}

fn parsed<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value {
        line,
        key: key.into(),
        value: value.into(),
    })
}

impl CampaignConfig {
    /// Reads a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<CampaignConfig, ConfigError> {
        let mut cfg = CampaignConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            cfg.set(line, key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "topology" => self.topology = value.to_string(),
            "n" => self.n = parsed(line, key, value)?,
            "m" => self.m = parsed(line, key, value)?,
            "q" => self.q = parsed(line, key, value)?,
            "trials" => self.trials = parsed(line, key, value)?,
            "max_rounds" => self.max_rounds = parsed(line, key, value)?,
            "seed" => self.seed = parsed(line, key, value)?,
            "mode" => self.mode = parsed(line, key, value)?,
            "out" => self.out = PathBuf::from(value),
            "override" => self.override_script = (!value.is_empty()).then(|| PathBuf::from(value)),
            "workers" => self.workers = parsed(line, key, value)?,
            "tol" => self.tol = parsed(line, key, value)?,
            "relay" => {
                self.relay = parse_relay(value).ok_or_else(|| ConfigError::Value {
                    line,
                    key: key.into(),
                    value: value.into(),
                })?
            }
            "rlnc_q" => {
                self.rlnc_q = value
                    .split(',')
                    .map(|v| parsed(line, key, v.trim()))
                    .collect::<Result<_, _>>()?
            }
            _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(ConfigError::Invalid("max_rounds must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(ConfigError::Invalid(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn rlnc_fields(&self) -> Vec<u64> {
        if self.rlnc_q.is_empty() {
            vec![self.q]
        } else {
            self.rlnc_q.clone()
        }
    }
}
