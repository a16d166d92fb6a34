//! Top-down clustering by repeated 2-way splits, plus global refinement.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boost::BoostRun;
use crate::config::{ClusterConfig, SplitPriority};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::log::IterationLog;
use crate::metrics::distortion_from_score;
use crate::run::{Clusterer, Clustering, StopReason};
use crate::state::ClusterState;

#[derive(Debug, Clone, Copy)]
struct Entry {
    id: usize,
    size: usize,
    key: f64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // max-heap: larger key first, then the lower id
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then(other.id.cmp(&self.id))
    }
}

/// Clusters waiting to be split, largest priority first (ties to the lower id).
#[derive(Debug, Clone, Default)]
pub struct SplitQueue {
    heap: BinaryHeap<Entry>,
}

impl SplitQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queues a cluster prioritized by its size.
    pub fn push(&mut self, id: usize, size: usize) {
        self.push_keyed(id, size, size as f64);
    }

    /// Queues a cluster under an explicit priority key.
    pub fn push_keyed(&mut self, id: usize, size: usize, key: f64) {
        self.heap.push(Entry { id, size, key });
    }

    /// Removes the highest-priority cluster, returning `(id, size)`.
    pub fn pop(&mut self) -> Option<(usize, usize)> {
        self.heap.pop().map(|e| (e.id, e.size))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// The two halves of a split.
#[derive(Debug, Clone)]
pub struct Bisection {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// `D'D / n` of each half.
    pub terms: [f64; 2],
    pub log: IterationLog,
}

/// Splits `members` in two with the inner clusterer run on that subset only.
pub fn bisect_cluster(ds: &Dataset, members: &[usize], inner: &dyn Clusterer, seed: u64) -> Result<Bisection> {
    if members.len() < 2 {
        return Err(Error::TooSmall { size: members.len() });
    }
    let sub = ds.subset(members)?;
    let out = inner.cluster(&sub, 2, seed)?;
    let mut left = Vec::with_capacity(out.state.size(0));
    let mut right = Vec::with_capacity(out.state.size(1));
    for (&m, &l) in members.iter().zip(out.state.labels()) {
        if l == 0 {
            left.push(m);
        } else {
            right.push(m);
        }
    }
    let terms = [
        out.state.self_dot(0) / out.state.size(0) as f64,
        out.state.self_dot(1) / out.state.size(1) as f64,
    ];
    Ok(Bisection { left, right, terms, log: out.log })
}

fn priority_key(ds: &Dataset, members: &[usize], priority: SplitPriority, term: f64) -> f64 {
    match priority {
        SplitPriority::Size => members.len() as f64,
        SplitPriority::IntraDistance => {
            let energy: f64 = members.iter().map(|&i| ds.sq_norm(i)).sum();
            (energy - term) / members.len() as f64
        }
    }
}

/// Builds `k` clusters by `k - 1` splits of the highest-priority cluster.
///
/// The log has one entry per split holding the global average distortion
/// after that split. Singleton clusters are never queued; the run fails with
/// [`Error::InsufficientData`] if nothing is left to split before `k` is reached.
pub fn bisecting_cluster(ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    let n = ds.n();
    let k = cfg.k;
    if k == 0 || k > n {
        return Err(Error::Config(format!("k must satisfy 1 <= k <= n (k = {k}, n = {n})")));
    }
    let inner = ClusterConfig { k0: None, ..cfg.clone() };
    inner.clone().with_k(2).validate(2)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut terms = vec![{
        let st = ClusterState::build(ds, vec![0; n], 1)?;
        st.score()
    }];
    let mut total = terms[0];
    let mut log = IterationLog::default();
    log.push(distortion_from_score(ds, total), 0, 0, 0.0);

    let mut queue = SplitQueue::new();
    if n >= 2 {
        queue.push_keyed(0, n, priority_key(ds, &clusters[0], cfg.split_priority, total));
    }
    while clusters.len() < k {
        let want = k - clusters.len();
        let take = if cfg.parallel_bisect { want.min(rayon::current_num_threads()).max(1) } else { 1 };
        let mut batch = Vec::with_capacity(take);
        while batch.len() < take {
            match queue.pop() {
                Some((id, _)) => batch.push((id, rng.next_u64())),
                None => break,
            }
        }
        if batch.is_empty() {
            return Err(Error::InsufficientData { available: clusters.len(), wanted: k });
        }
        let t0 = Instant::now();
        let splits: Vec<Result<Bisection>> = if batch.len() == 1 {
            vec![bisect_cluster(ds, &clusters[batch[0].0], &inner, batch[0].1)]
        } else {
            batch.par_iter().map(|&(id, seed)| bisect_cluster(ds, &clusters[id], &inner, seed)).collect()
        };
        let ms = t0.elapsed().as_secs_f64() * 1e3 / batch.len() as f64;
        for (&(id, _), split) in batch.iter().zip(splits) {
            let split = split?;
            let new_id = clusters.len();
            total += split.terms[0] + split.terms[1] - terms[id];
            terms[id] = split.terms[0];
            terms.push(split.terms[1]);
            clusters[id] = split.left;
            clusters.push(split.right);
            for c in [id, new_id] {
                if clusters[c].len() >= 2 {
                    let key = priority_key(ds, &clusters[c], cfg.split_priority, terms[c]);
                    queue.push_keyed(c, clusters[c].len(), key);
                }
            }
            let moves = split.log.entries.iter().map(|e| e.moves).sum();
            log.push(distortion_from_score(ds, total), moves, split.log.total_gain_evals(), ms);
        }
    }
    let mut labels = vec![0usize; n];
    for (c, members) in clusters.iter().enumerate() {
        members.iter().for_each(|&i| labels[i] = c);
    }
    let state = ClusterState::build(ds, labels, k)?;
    Ok(Clustering { state, log, stop: StopReason::ReachedK })
}

/// Runs direct k-way incremental passes from an existing partition until no
/// single move improves it (or `cfg.max_passes`).
pub fn refine(state: ClusterState, ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    // distinct stream from the one that drove the splits
    let rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x005e_ed0f_2ef1_4e00);
    Ok(BoostRun::new(ds, state, cfg, rng, 0.0).run(cfg.max_passes))
}

/// Sample-to-centroid comparisons of an evenly splitting `s`-way top-down
/// clustering of `n` samples into `k` clusters: `n (s - 1) log_s k`.
pub fn secting_cost(n: usize, k: usize, s: usize) -> f64 {
    n as f64 * (s as f64 - 1.0) * (k as f64).ln() / (s as f64).ln()
}
