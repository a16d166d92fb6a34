use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Incremental objective-driven k-means, best move per sample.
    Bkm,
    /// Incremental objective-driven k-means, first improving move per sample.
    BkmFast,
    Lloyd,
    #[serde(rename = "kmeanspp")]
    KMeansPP,
    #[serde(rename = "minibatch")]
    MiniBatch,
    Lvq,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Bkm,
        Algorithm::BkmFast,
        Algorithm::Lloyd,
        Algorithm::KMeansPP,
        Algorithm::MiniBatch,
        Algorithm::Lvq,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bkm => "bkm",
            Algorithm::BkmFast => "bkm-fast",
            Algorithm::Lloyd => "lloyd",
            Algorithm::KMeansPP => "kmeanspp",
            Algorithm::MiniBatch => "minibatch",
            Algorithm::Lvq => "lvq",
        }
    }

    pub fn is_boost(self) -> bool {
        matches!(self, Algorithm::Bkm | Algorithm::BkmFast)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

/// How the initial partition is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Random labels, no nearest-seed assignment.
    None,
    /// k uniformly drawn seeds, then nearest-seed assignment.
    Rnd,
    /// k-means++ D² seeds, then nearest-seed assignment.
    Kpp,
}

impl InitMode {
    pub fn name(self) -> &'static str {
        match self {
            InitMode::None => "none",
            InitMode::Rnd => "rnd",
            InitMode::Kpp => "kpp",
        }
    }
}

impl fmt::Display for InitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "non" => Ok(InitMode::None),
            "rnd" => Ok(InitMode::Rnd),
            "kpp" => Ok(InitMode::Kpp),
            _ => Err(Error::Config(format!("unknown init mode '{s}'"))),
        }
    }
}

/// Priority used to pick the next cluster to bisect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitPriority {
    #[default]
    Size,
    /// Highest mean squared distance to the centroid.
    IntraDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub algorithm: Algorithm,
    pub init: InitMode,
    pub k: usize,
    pub seed: u64,
    pub max_passes: usize,
    /// Top-k0 candidate pruning width; `None` scans every cluster.
    pub k0: Option<usize>,
    /// Number of unpruned passes before pruning kicks in.
    pub prune_after: usize,
    /// Passes between refreshes of the cached per-sample candidate lists.
    pub prune_refresh: usize,
    pub minibatch_fraction: f64,
    /// Mini-Batch: apply centroid updates at batch end instead of per sample.
    pub minibatch_deferred: bool,
    pub lvq_rate0: f64,
    pub lvq_decay: f64,
    pub lvq_rate_min: f64,
    pub split_priority: SplitPriority,
    /// Bisect disjoint clusters concurrently.
    pub parallel_bisect: bool,
}

/// Default pass cap, the iteration horizon used for the classic comparison.
pub const DEFAULT_MAX_PASSES: usize = 130;

impl ClusterConfig {
    pub fn new(algorithm: Algorithm, k: usize) -> Self {
        let init = match algorithm {
            Algorithm::Bkm | Algorithm::BkmFast => InitMode::None,
            Algorithm::KMeansPP => InitMode::Kpp,
            _ => InitMode::Rnd,
        };
        Self {
            algorithm,
            init,
            k,
            seed: 0,
            max_passes: DEFAULT_MAX_PASSES,
            k0: None,
            prune_after: 2,
            prune_refresh: 5,
            minibatch_fraction: 0.10,
            minibatch_deferred: false,
            lvq_rate0: 0.01,
            lvq_decay: 4e-4,
            lvq_rate_min: 0.0,
            split_priority: SplitPriority::Size,
            parallel_bisect: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_init(mut self, init: InitMode) -> Self {
        self.init = init;
        self
    }

    pub fn with_max_passes(mut self, max_passes: usize) -> Self {
        self.max_passes = max_passes;
        self
    }

    pub fn with_k0(mut self, k0: usize) -> Self {
        self.k0 = Some(k0);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    /// Checks the configuration against a dataset of `n` samples.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k > n {
            return Err(Error::Config(format!("k must satisfy 2 <= k <= n (k = {}, n = {n})", self.k)));
        }
        if let Some(k0) = self.k0 {
            if k0 == 0 || k0 > self.k {
                return Err(Error::Config(format!("k0 must satisfy 1 <= k0 <= k (k0 = {k0}, k = {})", self.k)));
            }
        }
        if !(self.minibatch_fraction > 0.0 && self.minibatch_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "minibatch fraction must lie in (0, 1], got {}",
                self.minibatch_fraction
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::Config("max_passes must be at least 1".into()));
        }
        if self.prune_refresh == 0 {
            return Err(Error::Config("prune_refresh must be at least 1".into()));
        }
        if self.lvq_rate0 < 0.0 || self.lvq_decay < 0.0 || self.lvq_rate_min < 0.0 {
            return Err(Error::Config("LVQ rates must be non-negative".into()));
        }
        Ok(())
    }
}
