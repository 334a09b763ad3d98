use std::path::PathBuf;

use crate::admg::MAX_VERTICES;
use crate::discovery::DiscoveryConfig;
use crate::error::{Error, Result};

/// Parameters of the random-graph experiments.
///
/// `n`, `rho` and `rho_l` are lists; every combination is a cell of
/// `trials` instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub rho: Vec<f64>,
    pub rho_l: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub discovery: DiscoveryConfig,
    /// Degree bound handed to discovery. `None` uses each instance's own
    /// largest directed degree.
    pub d_max: Option<usize>,
    /// Bandit horizon in pulls; `None` means `horizon_multiple` times the
    /// phase-one pulls of full-latent discovery.
    pub horizon: Option<u64>,
    pub horizon_multiple: u64,
    pub stride: u64,
    /// Graphs drawn per trial before generation gives up.
    pub generation_retries: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: vec![6],
            rho: vec![0.3],
            rho_l: vec![0.3],
            trials: 20,
            seed: 0,
            discovery: DiscoveryConfig::default(),
            d_max: None,
            horizon: None,
            horizon_multiple: 10,
            stride: 1000,
            generation_retries: 20,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn list<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| scalar(line, key, v.trim()))
        .collect()
}

fn scalar<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("bad value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    /// Published settings: tight gaps, δ = 0.99 and K = 2.
    pub fn paper_scale() -> Self {
        ExperimentConfig {
            discovery: DiscoveryConfig::paper_scale(),
            ..ExperimentConfig::default()
        }
    }

    /// `key = value` lines, `#` comments. List keys take comma-separated
    /// values. `paper_scale = true` swaps in the published discovery
    /// settings before any other key applies.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    i + 1,
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let mut cfg = ExperimentConfig::default();
        for (line, key, value) in &pairs {
            if key == "paper_scale" && scalar::<bool>(*line, key, value)? {
                cfg.discovery = DiscoveryConfig::paper_scale();
            }
        }
        for (line, key, value) in pairs {
            let (line, key, value) = (line, key.as_str(), value.as_str());
            match key {
                "paper_scale" => {}
                "n" => cfg.n = list(line, key, value)?,
                "rho" => cfg.rho = list(line, key, value)?,
                "rho_l" => cfg.rho_l = list(line, key, value)?,
                "trials" => cfg.trials = scalar(line, key, value)?,
                "seed" => cfg.seed = scalar(line, key, value)?,
                "epsilon" => cfg.discovery.epsilon = scalar(line, key, value)?,
                "gamma" => cfg.discovery.gamma = scalar(line, key, value)?,
                "eta" => cfg.discovery.eta = scalar(line, key, value)?,
                "delta" => cfg.discovery.delta = scalar(line, key, value)?,
                "k" => cfg.discovery.k = scalar(line, key, value)?,
                "d_max" => {
                    cfg.d_max = match value {
                        "auto" => None,
                        v => Some(scalar(line, key, v)?),
                    }
                }
                "horizon" => {
                    cfg.horizon = match value {
                        "auto" => None,
                        v => Some(scalar(line, key, v)?),
                    }
                }
                "horizon_multiple" => cfg.horizon_multiple = scalar(line, key, value)?,
                "stride" => cfg.stride = scalar(line, key, value)?,
                "generation_retries" => cfg.generation_retries = scalar(line, key, value)?,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                other => return Err(Error::parse(line, format!("unknown key `{other}`"))),
            }
        }
        Ok(cfg)
    }

    /// Every (n, rho, rho_l) combination in list order.
    pub fn cells(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &rho in &self.rho {
                for &rho_l in &self.rho_l {
                    out.push((n, rho, rho_l));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n.is_empty() || self.rho.is_empty() || self.rho_l.is_empty() {
            problems.push("n, rho and rho_l need at least one value each".to_string());
        }
        for &n in &self.n {
            if !(2..=MAX_VERTICES).contains(&n) {
                problems.push(format!("n must lie in [2, {MAX_VERTICES}], got {n}"));
            }
        }
        for &r in &self.rho {
            if !(r > 0.0 && r <= 1.0) {
                problems.push(format!("rho must lie in (0, 1], got {r}"));
            }
        }
        for &r in &self.rho_l {
            if !(0.0..=1.0).contains(&r) {
                problems.push(format!("rho_l must lie in [0, 1], got {r}"));
            }
        }
        if self.trials < 1 {
            problems.push("trials must be at least 1".to_string());
        }
        if self.d_max == Some(0) {
            problems.push("d_max must be at least 1".to_string());
        }
        if self.stride < 1 {
            problems.push("stride must be at least 1".to_string());
        }
        if self.horizon_multiple < 1 {
            problems.push("horizon_multiple must be at least 1".to_string());
        }
        if self.generation_retries < 1 {
            problems.push("generation_retries must be at least 1".to_string());
        }
        if let Err(Error::Config(m)) = self.discovery.validate() {
            problems.push(m);
        }
        if self.discovery.eta >= 0.5 {
            problems.push(format!(
                "eta must be below 0.5 for generation, got {}",
                self.discovery.eta
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Discovery settings for one instance whose largest directed degree
    /// is `degree`.
    pub fn discovery_for(&self, degree: usize) -> DiscoveryConfig {
        DiscoveryConfig {
            d_max: self.d_max.unwrap_or(degree.max(1)),
            ..self.discovery
        }
    }
}
