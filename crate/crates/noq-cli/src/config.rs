//! Flat `key = value` run configuration for the `optimize` subcommand.
//!
//! One setting per line; `#` starts a comment; blank lines are skipped.
//! Relative paths (problem file, codebook file, output directory) resolve
//! against the directory containing the config file, so bundled configs work
//! from any working directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Result};
use noq::optimizer::GradientMode;

/// Name of the built-in benchmark problem: the squared 12-term polynomial
/// over 15 integer variables in -9..=10, read out with 20 states per qubit.
pub const BENCH_POLY8: &str = "bench-poly8";

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Builtin,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CodebookSource {
    Platonic,
    Optimized { seed: u64, restarts: usize },
    File(PathBuf),
}

/// Everything `optimize` needs, parsed and validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSource,
    /// Overrides the variable count inferred from the problem file (only
    /// upward, for trailing variables the polynomial never mentions).
    pub n_vars: Option<usize>,
    /// Classical values per variable, in strictly increasing order.
    pub values: Option<Vec<f64>>,
    pub codebook: CodebookSource,
    pub layers: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    pub target_cost: f64,
    pub gradient_mode: GradientMode,
    pub fd_step: f64,
    pub shots: Option<u64>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

const KNOWN_KEYS: &[&str] = &[
    "problem",
    "n_vars",
    "values",
    "p",
    "codebook",
    "codebook_file",
    "codebook_seed",
    "codebook_restarts",
    "layers",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "max_epochs",
    "target_cost",
    "gradient_mode",
    "fd_step",
    "shots",
    "seeds",
    "out",
];

#[derive(Default)]
struct RawConfig {
    problem: Option<String>,
    n_vars: Option<usize>,
    values: Option<Vec<f64>>,
    p: Option<usize>,
    codebook: Option<String>,
    codebook_file: Option<String>,
    codebook_seed: Option<u64>,
    codebook_restarts: Option<usize>,
    layers: Option<usize>,
    learning_rate: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    epsilon: Option<f64>,
    max_epochs: Option<usize>,
    target_cost: Option<f64>,
    gradient_mode: Option<GradientMode>,
    fd_step: Option<f64>,
    shots: Option<u64>,
    seeds: Option<Vec<u64>>,
    out: Option<String>,
}

impl RunConfig {
    /// Parses the text of a config file. `base_dir` is the directory the
    /// file lives in; relative paths resolve against it.
    pub fn parse(text: &str, base_dir: &Path) -> Result<RunConfig> {
        let mut raw = RawConfig::default();
        let mut seen = BTreeSet::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let content = match line.split_once('#') {
                Some((before, _)) => before.trim(),
                None => line.trim(),
            };
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                bail!("config line {lineno}: expected `key = value`, got {content:?}");
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("config line {lineno}: unknown key {key:?}");
            }
            if !seen.insert(key.to_string()) {
                bail!("config line {lineno}: duplicate key {key:?}");
            }
            if value.is_empty() {
                bail!("config line {lineno}: key {key:?} has no value");
            }
            raw.set(key, value)
                .map_err(|e| anyhow::anyhow!("config line {lineno}: {e}"))?;
        }
        raw.finish(base_dir)
    }
}

fn parse_scalar<T: FromStr>(value: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| anyhow::anyhow!("invalid {what} {value:?}: {e}"))
}

/// `lo..hi` (inclusive) or a comma-separated list.
fn parse_u64_list(value: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: u64 = parse_scalar(lo.trim(), "range start")?;
        let hi: u64 = parse_scalar(hi.trim(), "range end")?;
        if lo > hi {
            bail!("empty range {value:?}");
        }
        return Ok((lo..=hi).collect());
    }
    value
        .split(',')
        .map(|s| parse_scalar(s.trim(), "list entry"))
        .collect()
}

/// `lo..hi` (inclusive integer range) or a comma-separated list of floats.
fn parse_value_list(value: &str) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: i64 = parse_scalar(lo.trim(), "range start")?;
        let hi: i64 = parse_scalar(hi.trim(), "range end")?;
        if lo > hi {
            bail!("empty range {value:?}");
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    value
        .split(',')
        .map(|s| parse_scalar(s.trim(), "value"))
        .collect()
}

impl RawConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = Some(value.to_string()),
            "n_vars" => self.n_vars = Some(parse_scalar(value, "n_vars")?),
            "values" => self.values = Some(parse_value_list(value)?),
            "p" => self.p = Some(parse_scalar(value, "p")?),
            "codebook" => self.codebook = Some(value.to_string()),
            "codebook_file" => self.codebook_file = Some(value.to_string()),
            "codebook_seed" => self.codebook_seed = Some(parse_scalar(value, "codebook_seed")?),
            "codebook_restarts" => {
                self.codebook_restarts = Some(parse_scalar(value, "codebook_restarts")?)
            }
            "layers" => self.layers = Some(parse_scalar(value, "layers")?),
            "learning_rate" => self.learning_rate = Some(parse_scalar(value, "learning_rate")?),
            "beta1" => self.beta1 = Some(parse_scalar(value, "beta1")?),
            "beta2" => self.beta2 = Some(parse_scalar(value, "beta2")?),
            "epsilon" => self.epsilon = Some(parse_scalar(value, "epsilon")?),
            "max_epochs" => self.max_epochs = Some(parse_scalar(value, "max_epochs")?),
            "target_cost" => self.target_cost = Some(parse_scalar(value, "target_cost")?),
            "gradient_mode" => {
                self.gradient_mode =
                    Some(GradientMode::from_str(value).map_err(|e| anyhow::anyhow!("{e}"))?)
            }
            "fd_step" => self.fd_step = Some(parse_scalar(value, "fd_step")?),
            "shots" => self.shots = Some(parse_scalar(value, "shots")?),
            "seeds" => self.seeds = Some(parse_u64_list(value)?),
            "out" => self.out = Some(value.to_string()),
            other => bail!("unknown key {other:?}"),
        }
        Ok(())
    }

    fn finish(self, base_dir: &Path) -> Result<RunConfig> {
        let resolve = |s: &str| -> PathBuf {
            let path = Path::new(s);
            if path.is_absolute() {
                path.to_path_buf()
            } else {
                base_dir.join(path)
            }
        };

        let Some(problem_raw) = self.problem else {
            bail!("config field `problem` is required (a polynomial file path or {BENCH_POLY8:?})");
        };
        let problem = if problem_raw == BENCH_POLY8 {
            ProblemSource::Builtin
        } else {
            ProblemSource::File(resolve(&problem_raw))
        };

        let values = self.values;
        if problem == ProblemSource::Builtin {
            if values.is_some() || self.n_vars.is_some() {
                bail!("problem {BENCH_POLY8:?} pins values (-9..10) and n_vars (15); drop those keys");
            }
        } else if values.is_none() {
            bail!("config field `values` is required for file problems (e.g. `values = -9..10`)");
        }
        let effective_p = match &values {
            Some(v) => v.len(),
            None => 20,
        };
        if let Some(p) = self.p {
            if p != effective_p {
                bail!("config field `p` is {p} but the value map has {effective_p} entries");
            }
        }

        let codebook = match self.codebook.as_deref().unwrap_or("platonic") {
            "platonic" => CodebookSource::Platonic,
            "optimized" => CodebookSource::Optimized {
                seed: self.codebook_seed.unwrap_or(1),
                restarts: self.codebook_restarts.unwrap_or(8),
            },
            "file" => {
                let Some(file) = &self.codebook_file else {
                    bail!("codebook = file requires `codebook_file`");
                };
                CodebookSource::File(resolve(file))
            }
            other => bail!("unknown codebook mode {other:?}; expected platonic, optimized, or file"),
        };
        if !matches!(codebook, CodebookSource::Optimized { .. })
            && (self.codebook_seed.is_some() || self.codebook_restarts.is_some())
        {
            bail!("codebook_seed / codebook_restarts only apply to codebook = optimized");
        }
        if !matches!(codebook, CodebookSource::File(_)) && self.codebook_file.is_some() {
            bail!("codebook_file only applies to codebook = file");
        }

        let layers = self.layers.unwrap_or(1);
        if layers == 0 {
            bail!("layers must be at least 1");
        }
        let seeds = self.seeds.unwrap_or_else(|| vec![1]);
        if seeds.is_empty() {
            bail!("seed list is empty");
        }
        let mut unique = BTreeSet::new();
        for &s in &seeds {
            if !unique.insert(s) {
                bail!("duplicate seed {s} in seed list");
            }
        }

        Ok(RunConfig {
            problem,
            n_vars: self.n_vars,
            values,
            codebook,
            layers,
            learning_rate: self.learning_rate.unwrap_or(0.008),
            beta1: self.beta1.unwrap_or(0.9),
            beta2: self.beta2.unwrap_or(0.999),
            epsilon: self.epsilon.unwrap_or(1e-8),
            max_epochs: self.max_epochs.unwrap_or(1000),
            target_cost: self.target_cost.unwrap_or(1e-3),
            gradient_mode: self.gradient_mode.unwrap_or(GradientMode::FiniteDifference),
            fd_step: self.fd_step.unwrap_or(1e-3),
            shots: self.shots,
            seeds,
            out: resolve(self.out.as_deref().unwrap_or(".")),
        })
    }
}
