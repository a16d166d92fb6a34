//! Uniform entry point over every clusterer.

use crate::baselines;
use crate::bisect;
use crate::boost;
use crate::config::{Algorithm, ClusterConfig};
use crate::data::Dataset;
use crate::error::Result;
use crate::log::IterationLog;
use crate::state::ClusterState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// A full pass changed nothing.
    Converged,
    MaxPasses,
    /// Bisecting runs stop once k clusters exist.
    ReachedK,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    pub state: ClusterState,
    pub log: IterationLog,
    pub stop: StopReason,
}

impl Clustering {
    pub fn labels(&self) -> &[usize] {
        self.state.labels()
    }

    /// Average distortion of the final partition, via `(E - I) / n`.
    pub fn distortion(&self, ds: &Dataset) -> f64 {
        crate::metrics::distortion_from_score(ds, self.state.score())
    }
}

/// Anything that can partition a dataset into `k` clusters.
///
/// Bisecting and product-quantizer training take a `&dyn Clusterer` so the
/// inner algorithm is swappable.
pub trait Clusterer: Sync {
    fn cluster(&self, ds: &Dataset, k: usize, seed: u64) -> Result<Clustering>;
}

impl Clusterer for ClusterConfig {
    fn cluster(&self, ds: &Dataset, k: usize, seed: u64) -> Result<Clustering> {
        let cfg = ClusterConfig { k, seed, ..self.clone() };
        cluster_direct(ds, &cfg)
    }
}

/// Runs the configured algorithm in direct k-way mode.
pub fn cluster_direct(ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    match cfg.algorithm {
        Algorithm::Bkm | Algorithm::BkmFast => boost::bkm_cluster(ds, cfg),
        Algorithm::Lloyd => baselines::lloyd(ds, cfg),
        Algorithm::KMeansPP => baselines::kmeanspp(ds, cfg),
        Algorithm::MiniBatch => baselines::minibatch(ds, cfg),
        Algorithm::Lvq => baselines::lvq(ds, cfg),
    }
}

/// Runs the configured algorithm, optionally bisecting and refining.
pub fn cluster(ds: &Dataset, cfg: &ClusterConfig, bisecting: bool, refine: bool) -> Result<Clustering> {
    let mut out = if bisecting { bisect::bisecting_cluster(ds, cfg)? } else { cluster_direct(ds, cfg)? };
    if refine {
        let refined = bisect::refine(out.state, ds, cfg)?;
        // pass 0 of the refinement repeats the final bisecting state
        let tail = IterationLog { entries: refined.log.entries[1..].to_vec() };
        out.log.extend(&tail);
        out.state = refined.state;
        out.stop = refined.stop;
    }
    Ok(out)
}
