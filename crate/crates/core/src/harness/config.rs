//! Experiment configuration: flat `key=value` files, CLI overrides, and the
//! worker-count environment override.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::trimming::{PsiClass, PsiSpec};
use crate::trimming::psi::parse_decimal;

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "TRIMLAB_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    WeakConvergence,
    TrimmedLaw,
    LemmaSuite,
    SpectralSuite,
    PhiConcentration,
    PropertyB,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::WeakConvergence => "weak_convergence",
            Experiment::TrimmedLaw => "trimmed_law",
            Experiment::LemmaSuite => "lemma_suite",
            Experiment::SpectralSuite => "spectral_suite",
            Experiment::PhiConcentration => "phi_concentration",
            Experiment::PropertyB => "property_b",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "weak" | "weak_convergence" => Experiment::WeakConvergence,
            "trim" | "trimmed_law" => Experiment::TrimmedLaw,
            "lemmas" | "lemma_suite" => Experiment::LemmaSuite,
            "spectral" | "spectral_suite" => Experiment::SpectralSuite,
            "phi" | "phi_concentration" => Experiment::PhiConcentration,
            "propb" | "property_b" => Experiment::PropertyB,
            _ => return Err(Error::Config(format!("unknown experiment `{s}`"))),
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown format `{s}`"))),
        }
    }
}

/// `{10³, 3·10³, 10⁴, …, 10⁷}`.
pub fn default_grid() -> Vec<u64> {
    geometric_grid(1_000, 10_000_000)
}

/// Checkpoints `{1, 3}·10^k` between `lo` and `hi`, inclusive.
pub fn geometric_grid(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 1u64;
    loop {
        for c in [p, 3 * p] {
            if c >= lo && c <= hi {
                out.push(c);
            }
        }
        match p.checked_mul(10) {
            Some(q) if q <= hi => p = q,
            _ => break,
        }
    }
    out
}

/// Every setting of a run. Keys of the flat file mirror the CLI flags.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Number of seeds N.
    pub seeds: u64,
    pub seed_base: u64,
    pub n_grid: Vec<u64>,
    /// ψ source text and declared class.
    pub psi: String,
    pub psi_class: PsiClass,
    /// Optional second ψ run on the same orbits (trimmed law contrast).
    pub contrast_psi: Option<(String, PsiClass)>,
    pub epsilon: Rational,
    pub epsilon_text: String,
    pub max_bits: usize,
    /// Extra ledger slots above the largest `b_n`.
    pub top_k_slack: usize,
    pub piece_cap: u64,
    /// Grid points `n ≥ tail_from` form the tail for running extremes.
    pub tail_from: u64,
    /// Reference checkpoint for the pass/fail summary.
    pub reference_n: u64,
    /// Also sample the i.i.d. oracle (weak convergence).
    pub oracle: bool,
    /// Characteristic-function argument for Property B.
    pub t: Rational,
    pub t_text: String,
    /// Include wall-clock timings in suite outputs (breaks byte-identity).
    pub timings: bool,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        let pairs = BTreeMap::new();
        Self::from_pairs(experiment, &pairs).expect("defaults are valid")
    }

    /// Builds a config from `key → value` pairs over the defaults.
    pub fn from_pairs(experiment: Experiment, pairs: &BTreeMap<String, String>) -> Result<Self> {
        let known = [
            "experiment", "seeds", "seed-base", "n-max", "grid", "psi", "psi-class", "contrast-psi",
            "contrast-class", "epsilon", "max-bits", "top-k-slack", "piece-cap", "tail-from", "reference-n",
            "oracle", "t", "timings", "out", "format", "workers",
        ];
        if let Some(k) = pairs.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let experiment = match get("experiment") {
            Some(e) => e.parse()?,
            None => experiment,
        };
        let num = |k: &str, default: u64| -> Result<u64> {
            get(k).map_or(Ok(default), |v| parse_u64(v).map_err(|e| Error::Config(format!("{k}: {e}"))))
        };
        let flag = |k: &str, default: bool| -> Result<bool> {
            match get(k) {
                None => Ok(default),
                Some("true" | "1" | "yes") => Ok(true),
                Some("false" | "0" | "no") => Ok(false),
                Some(v) => Err(Error::Config(format!("{k}: not a boolean `{v}`"))),
            }
        };

        let mut n_grid = match get("grid") {
            None | Some("geometric") => default_grid(),
            Some(g) => parse_grid(g)?,
        };
        if let Some(v) = get("n-max") {
            let n_max = parse_u64(v).map_err(|e| Error::Config(format!("n-max: {e}")))?;
            n_grid.retain(|&n| n <= n_max);
            if n_grid.last() != Some(&n_max) {
                n_grid.push(n_max);
            }
        }
        let psi_class: PsiClass = get("psi-class").unwrap_or("summable").parse()?;
        let contrast_psi = match get("contrast-psi") {
            None => None,
            Some(src) => Some((src.to_string(), get("contrast-class").unwrap_or("divergent").parse()?)),
        };
        let epsilon_text = get("epsilon").unwrap_or("0.5").to_string();
        let t_text = get("t").unwrap_or("1").to_string();
        let last = n_grid.last().copied().unwrap_or(0);
        let cfg = ExperimentConfig {
            experiment,
            seeds: num("seeds", 100)?,
            seed_base: num("seed-base", 0)?,
            psi: get("psi").unwrap_or("n*log(n)^2").to_string(),
            psi_class,
            contrast_psi,
            epsilon: parse_decimal(&epsilon_text)?,
            epsilon_text,
            max_bits: num("max-bits", crate::dynamics::DEFAULT_MAX_BITS as u64)? as usize,
            top_k_slack: num("top-k-slack", 8)? as usize,
            piece_cap: num("piece-cap", crate::exactnum::DEFAULT_PIECE_CAP)?,
            tail_from: num("tail-from", 10_000)?,
            reference_n: num("reference-n", 1_000_000.min(last))?,
            oracle: flag("oracle", true)?,
            t: parse_decimal(&t_text)?,
            t_text,
            timings: flag("timings", false)?,
            out: get("out").map(PathBuf::from),
            format: get("format").unwrap_or("csv").parse()?,
            workers: match get("workers") {
                None => None,
                Some(v) => Some(parse_u64(v).map_err(|e| Error::Config(format!("workers: {e}")))? as usize),
            },
            n_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Merges a flat config file with CLI pairs; CLI values win.
    pub fn from_file_and_overrides(
        experiment: Experiment,
        file_text: Option<&str>,
        overrides: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut pairs = match file_text {
            Some(t) => parse_flat(t)?,
            None => BTreeMap::new(),
        };
        for (k, v) in overrides {
            pairs.insert(normalize_key(k), v.clone());
        }
        Self::from_pairs(experiment, &pairs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be ≥ 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::Config("empty checkpoint grid".into()));
        }
        if self.n_grid[0] < 3 {
            return Err(Error::Config("checkpoints must be ≥ 3".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("checkpoint grid must be strictly increasing".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be ≥ 1".into()));
        }
        if self.epsilon <= Rational::from_integer(0.into()) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        Ok(())
    }

    pub fn psi_spec(&self) -> Result<PsiSpec> {
        PsiSpec::parse(&self.psi, self.psi_class)
    }

    pub fn contrast_spec(&self) -> Result<Option<PsiSpec>> {
        self.contrast_psi.as_ref().map(|(s, c)| PsiSpec::parse(s, *c)).transpose()
    }

    /// Seeds `seed_base, …, seed_base + N − 1`.
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds).map(|i| self.seed_base.wrapping_add(i)).collect()
    }

    pub fn n_max(&self) -> u64 {
        *self.n_grid.last().expect("validated grid")
    }

    /// Flag, then environment, then file value, then the machine's parallelism.
    pub fn resolve_workers(&self, cli: Option<usize>) -> Result<usize> {
        if let Some(w) = cli {
            return Ok(w.max(1));
        }
        if let Ok(v) = std::env::var(WORKERS_ENV) {
            let w = parse_u64(&v).map_err(|e| Error::Config(format!("{WORKERS_ENV}: {e}")))?;
            return Ok((w as usize).max(1));
        }
        Ok(self
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
    }

    /// The settings that determine the output, in a stable order. The worker
    /// count and output location are left out on purpose.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment", self.experiment.to_string());
        m.insert("seeds", self.seeds.to_string());
        m.insert("seed-base", self.seed_base.to_string());
        m.insert(
            "grid",
            self.n_grid.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        );
        m.insert("psi", self.psi.clone());
        m.insert("psi-class", self.psi_class.to_string());
        if let Some((s, c)) = &self.contrast_psi {
            m.insert("contrast-psi", s.clone());
            m.insert("contrast-class", c.to_string());
        }
        m.insert("epsilon", self.epsilon_text.clone());
        m.insert("max-bits", self.max_bits.to_string());
        m.insert("top-k-slack", self.top_k_slack.to_string());
        m.insert("piece-cap", self.piece_cap.to_string());
        m.insert("tail-from", self.tail_from.to_string());
        m.insert("reference-n", self.reference_n.to_string());
        m.insert("oracle", self.oracle.to_string());
        m.insert("t", self.t_text.clone());
        m.insert("timings", self.timings.to_string());
        m
    }
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('_', "-")
}

/// `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_flat(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        out.insert(normalize_key(k), v.trim().to_string());
    }
    Ok(out)
}

/// Integers with optional `_` separators or `1e6` style exponents.
pub fn parse_u64(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().map_err(|_| format!("bad integer `{s}`"))?;
        let e: u32 = e.parse().map_err(|_| format!("bad exponent `{s}`"))?;
        return 10u64
            .checked_pow(e)
            .and_then(|p| p.checked_mul(m))
            .ok_or_else(|| format!("`{s}` overflows"));
    }
    s.parse().map_err(|_| format!("bad integer `{s}`"))
}

/// `geometric:LO:HI` or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    if let Some(rest) = s.strip_prefix("geometric:") {
        let (lo, hi) = rest
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("bad grid `{s}`")))?;
        let lo = parse_u64(lo).map_err(Error::Config)?;
        let hi = parse_u64(hi).map_err(Error::Config)?;
        return Ok(geometric_grid(lo, hi));
    }
    s.split(',')
        .map(|t| parse_u64(t).map_err(Error::Config))
        .collect()
}
