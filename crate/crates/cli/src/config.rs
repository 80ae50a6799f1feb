//! Run configuration: defaults, flat key-value config files, flag overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sepe_core::qed::SchedulingPolicy;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub solver: Option<PathBuf>,
    pub solver_args: Vec<String>,
    pub timeout_ms: u64,
    pub alpha: u64,
    pub delta: u64,
    pub k: usize,
    pub min_len: usize,
    pub n_max: usize,
    /// Enabled instruction set (synthesis targets / checker opcodes).
    pub instructions: Vec<String>,
    pub policy: SchedulingPolicy,
    pub seed: Option<u64>,
    pub program_index: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: None,
            solver_args: Vec::new(),
            timeout_ms: 60_000,
            alpha: 1,
            delta: 1,
            k: 20,
            min_len: 3,
            n_max: 3,
            instructions: Vec::new(),
            policy: SchedulingPolicy::Sequential,
            seed: None,
            program_index: 0,
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    BadLine(usize),
    #[error("`{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("{0} must be positive")]
    NotPositive(&'static str),
}

/// Parses a flat `key = value` file (# starts a comment).
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ConfigError::BadLine(i + 1))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn parse_policy(text: &str) -> Result<SchedulingPolicy, String> {
    match text {
        "sequential" => Ok(SchedulingPolicy::Sequential),
        "interleaved" => Ok(SchedulingPolicy::Interleaved),
        other => Err(format!("unknown policy `{other}`")),
    }
}

impl RunConfig {
    /// Applies config-file entries on top of the defaults.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::BadValue {
            key: path.display().to_string(),
            message: e.to_string(),
        })?;
        let entries = parse_config_text(&text)?;
        for (key, value) in entries {
            self.apply_entry(&key, &value)
                .map_err(|message| ConfigError::BadValue { key, message })?;
        }
        Ok(())
    }

    pub fn apply_entry(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_u64 = |v: &str| v.parse::<u64>().map_err(|e| e.to_string());
        let parse_usize = |v: &str| v.parse::<usize>().map_err(|e| e.to_string());
        match key {
            "solver" => self.solver = Some(PathBuf::from(value)),
            "solver-args" => {
                self.solver_args = value.split_whitespace().map(|s| s.to_string()).collect()
            }
            "timeout" => self.timeout_ms = parse_u64(value)?,
            "alpha" => self.alpha = parse_u64(value)?,
            "delta" => self.delta = parse_u64(value)?,
            "k" => self.k = parse_usize(value)?,
            "min-len" => self.min_len = parse_usize(value)?,
            "n-max" => self.n_max = parse_usize(value)?,
            "instr" => {
                self.instructions = value
                    .split(',')
                    .map(|s| s.trim().to_uppercase())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "policy" => self.policy = parse_policy(value)?,
            "seed" => self.seed = Some(parse_u64(value)?),
            "program-index" => self.program_index = parse_usize(value)?,
            "out" => self.out_dir = PathBuf::from(value),
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.timeout_ms == 0 {
            return Err(ConfigError::NotPositive("timeout"));
        }
        if self.k == 0 {
            return Err(ConfigError::NotPositive("k"));
        }
        if self.min_len == 0 {
            return Err(ConfigError::NotPositive("min-len"));
        }
        if self.n_max == 0 {
            return Err(ConfigError::NotPositive("n-max"));
        }
        Ok(())
    }
}
