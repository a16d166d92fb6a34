//! Direct k-way incremental k-means driven by the objective.
//!
//! Every pass visits all samples in a freshly shuffled order and relocates a
//! sample whenever that raises the objective. No centroids are kept; the
//! partition is carried entirely by composites and sizes. A run ends after a
//! pass that moves nothing, which is exactly single-move local optimality.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Algorithm, ClusterConfig, InitMode};
use crate::data::{dot_mixed, sq_dist_mixed, Dataset};
use crate::error::Result;
use crate::log::IterationLog;
use crate::metrics::distortion_from_score;
use crate::objective::{best_move, first_improving_move, MoveGain};
use crate::run::{Clustering, StopReason};
use crate::state::{repair_empty, ClusterState};

/// How a sample's destination is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BkmVariant {
    /// Evaluate every candidate and take the largest gain.
    Best,
    /// Take the first improving candidate in a random order.
    Fast,
}

impl BkmVariant {
    pub fn for_algorithm(a: Algorithm) -> Self {
        if a == Algorithm::BkmFast {
            BkmVariant::Fast
        } else {
            BkmVariant::Best
        }
    }
}

/// Initial labeling for the given mode. Every cluster is non-empty.
pub fn init_labels(ds: &Dataset, k: usize, mode: InitMode, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let n = ds.n();
    if k == 0 || k > n {
        return Err(crate::Error::Config(format!("k must satisfy 1 <= k <= n (k = {k}, n = {n})")));
    }
    let mut labels = match mode {
        InitMode::None => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            let mut labels = vec![0usize; n];
            for (slot, &i) in perm.iter().enumerate() {
                labels[i] = if slot < k { slot } else { rng.random_range(0..k) };
            }
            labels
        }
        InitMode::Rnd => assign_to_seeds(ds, &random_seeds(ds, k, rng)).0,
        InitMode::Kpp => assign_to_seeds(ds, &kpp_seeds(ds, k, rng)).0,
    };
    repair_empty(ds, &mut labels, k)?;
    Ok(labels)
}

/// `k` distinct sample indices drawn uniformly.
pub fn random_seeds(ds: &Dataset, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    rand::seq::index::sample(rng, ds.n(), k).into_vec()
}

/// k-means++ seeding: first seed uniform, the rest by D² sampling.
pub fn kpp_seeds(ds: &Dataset, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let first = rng.random_range(0..ds.n());
    kpp_seeds_from(ds, k, first, rng)
}

/// k-means++ seeding with a fixed first seed.
pub fn kpp_seeds_from(ds: &Dataset, k: usize, first: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = ds.n();
    let mut seeds = Vec::with_capacity(k);
    seeds.push(first);
    let mut min_d2: Vec<f64> = (0..n).map(|i| crate::data::sq_dist32(ds.row(i), ds.row(first))).collect();
    while seeds.len() < k {
        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in min_d2.iter().enumerate() {
                if w > 0.0 {
                    if r < w {
                        pick = Some(i);
                        break;
                    }
                    r -= w;
                }
            }
            // rounding can leave r just past the last positive weight
            pick.unwrap_or_else(|| min_d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // every remaining point coincides with a seed
            let free: Vec<usize> = (0..n).filter(|i| !seeds.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        seeds.push(pick);
        let c = ds.row(pick);
        for (i, m) in min_d2.iter_mut().enumerate() {
            let d2 = crate::data::sq_dist32(ds.row(i), c);
            if d2 < *m {
                *m = d2;
            }
        }
    }
    seeds
}

/// Labels every sample with its nearest seed (ties to the lower seed index).
/// Also returns the seed coordinates as a `k x d` matrix.
pub fn assign_to_seeds(ds: &Dataset, seeds: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let centers: Vec<f64> = seeds.iter().flat_map(|&s| ds.row(s).iter().map(|&v| v as f64)).collect();
    (nearest_centers(ds, &centers, seeds.len()).0, centers)
}

/// Nearest center of every sample plus the number of comparisons made.
pub(crate) fn nearest_centers(ds: &Dataset, centers: &[f64], k: usize) -> (Vec<usize>, u64) {
    let d = ds.d();
    let labels = ds
        .rows()
        .map(|x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for r in 0..k {
                let dist = sq_dist_mixed(x, &centers[r * d..(r + 1) * d]);
                if dist < best_d {
                    best_d = dist;
                    best = r;
                }
            }
            best
        })
        .collect();
    (labels, (ds.n() * k) as u64)
}

/// Ids of the `k0` clusters whose centroids are nearest to sample `i`, plus
/// the sample's own cluster, in ascending id order.
pub fn prune_candidates(state: &ClusterState, ds: &Dataset, i: usize, k0: usize) -> Vec<usize> {
    let k = state.k();
    let own = state.label(i);
    if k0 >= k {
        return (0..k).collect();
    }
    let x = ds.row(i);
    let xx = ds.sq_norm(i);
    let mut dist: Vec<(f64, usize)> = (0..k)
        .map(|r| {
            let nr = state.size(r) as f64;
            let d = xx - 2.0 * dot_mixed(x, state.composite(r)) / nr + state.self_dot(r) / (nr * nr);
            (d, r)
        })
        .collect();
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    dist.select_nth_unstable_by(k0 - 1, by_dist);
    let mut out: Vec<usize> = dist[..k0].iter().map(|&(_, r)| r).collect();
    if !out.contains(&own) {
        out.push(own);
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PassStats {
    pub moves: usize,
    pub gain_evals: u64,
}

/// One pass over all samples in a random order, without candidate pruning.
pub fn bkm_pass(
    state: &mut ClusterState,
    ds: &Dataset,
    variant: BkmVariant,
    rng: &mut ChaCha8Rng,
) -> PassStats {
    run_pass(state, ds, variant, rng, None, &mut |_, _| {})
}

/// One fast pass: each sample takes the first improving candidate found in a
/// random candidate order. Returns the number of accepted moves.
pub fn bkm_pass_fast(state: &mut ClusterState, ds: &Dataset, rng: &mut ChaCha8Rng) -> usize {
    bkm_pass(state, ds, BkmVariant::Fast, rng).moves
}

fn run_pass(
    state: &mut ClusterState,
    ds: &Dataset,
    variant: BkmVariant,
    rng: &mut ChaCha8Rng,
    lists: Option<&[Vec<usize>]>,
    on_move: &mut dyn FnMut(&MoveGain, &ClusterState),
) -> PassStats {
    let n = state.n();
    let k = state.k();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let all: Vec<usize> = (0..k).collect();
    let mut scratch: Vec<usize> = Vec::with_capacity(k);
    let mut stats = PassStats::default();
    for &i in &order {
        let u = state.label(i);
        if state.size(u) < 2 {
            continue;
        }
        let cands: &[usize] = match lists {
            Some(l) => &l[i],
            None => &all,
        };
        let found = match variant {
            BkmVariant::Best => {
                stats.gain_evals += cands.iter().filter(|&&v| v != u).count() as u64;
                best_move(state, ds, i, cands)
            }
            BkmVariant::Fast => {
                scratch.clear();
                scratch.extend_from_slice(cands);
                scratch.shuffle(rng);
                let (g, evals) = first_improving_move(state, ds, i, &scratch);
                stats.gain_evals += evals;
                g
            }
        };
        if let Some(g) = found {
            state.relocate(ds.row(i), i, g.to, g.delta);
            stats.moves += 1;
            on_move(&g, state);
        }
    }
    stats
}

/// A Boost k-means run in progress.
pub struct BoostRun<'a> {
    ds: &'a Dataset,
    state: ClusterState,
    variant: BkmVariant,
    rng: ChaCha8Rng,
    k0: Option<usize>,
    prune_after: usize,
    prune_refresh: usize,
    passes: usize,
    lists: Option<Vec<Vec<usize>>>,
    lists_age: usize,
    log: IterationLog,
}

impl<'a> BoostRun<'a> {
    /// Starts from an existing partition. `init_ms` is recorded as the cost of pass 0.
    pub fn new(ds: &'a Dataset, state: ClusterState, cfg: &ClusterConfig, rng: ChaCha8Rng, init_ms: f64) -> Self {
        let mut log = IterationLog::default();
        log.push(distortion_from_score(ds, state.score()), 0, 0, init_ms);
        Self {
            ds,
            state,
            variant: BkmVariant::for_algorithm(cfg.algorithm),
            rng,
            k0: cfg.k0,
            prune_after: cfg.prune_after,
            prune_refresh: cfg.prune_refresh.max(1),
            passes: 0,
            lists: None,
            lists_age: 0,
            log,
        }
    }

    pub fn state(&self) -> &ClusterState {
        &self.state
    }

    pub fn log(&self) -> &IterationLog {
        &self.log
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Runs one pass. `on_move` sees each accepted move and the state after it.
    /// Returns the pass statistics and whether the pass certifies convergence.
    pub fn pass_with(&mut self, on_move: &mut dyn FnMut(&MoveGain, &ClusterState)) -> (PassStats, bool) {
        let t0 = Instant::now();
        let k = self.state.k();
        let pruning = match self.k0 {
            Some(k0) if self.passes >= self.prune_after => Some(k0),
            _ => None,
        };
        let mut fresh = true;
        if let Some(k0) = pruning {
            if self.lists.is_none() || self.lists_age >= self.prune_refresh {
                let lists =
                    (0..self.state.n()).map(|i| prune_candidates(&self.state, self.ds, i, k0)).collect();
                self.lists = Some(lists);
                self.lists_age = 0;
            } else {
                fresh = k0 >= k;
            }
        }
        let lists = if pruning.is_some() { self.lists.as_deref() } else { None };
        let stats = run_pass(&mut self.state, self.ds, self.variant, &mut self.rng, lists, on_move);
        self.state.refresh(self.ds);
        self.passes += 1;
        self.lists_age += 1;
        if stats.moves == 0 && !fresh {
            // stale candidate lists: rebuild them before trusting a quiet pass
            self.lists_age = self.prune_refresh;
        }
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        self.log.push(distortion_from_score(self.ds, self.state.score()), stats.moves, stats.gain_evals, ms);
        (stats, stats.moves == 0 && fresh)
    }

    pub fn pass(&mut self) -> (PassStats, bool) {
        self.pass_with(&mut |_, _| {})
    }

    /// Runs until a quiet pass or `max_passes` passes in total.
    pub fn run(mut self, max_passes: usize) -> Clustering {
        let mut stop = StopReason::MaxPasses;
        while self.passes < max_passes {
            if self.pass().1 {
                stop = StopReason::Converged;
                break;
            }
        }
        Clustering { state: self.state, log: self.log, stop }
    }
}

/// Direct k-way Boost k-means.
pub fn bkm_cluster(ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    cfg.validate(ds.n())?;
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels = init_labels(ds, cfg.k, cfg.init, &mut rng)?;
    let state = ClusterState::build(ds, labels, cfg.k)?;
    let init_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(BoostRun::new(ds, state, cfg, rng, init_ms).run(cfg.max_passes))
}
