//! Reference clusterers: Lloyd, k-means++, Mini-Batch and online LVQ.
//!
//! All of them return a validated [`ClusterState`] built from the final
//! nearest-centroid assignment, so their distortion is measured exactly like
//! the incremental clusterers'. `gain_evals` counts sample-to-centroid
//! comparisons made by the algorithm itself (not by the per-pass logging).

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boost::{init_labels, kpp_seeds, nearest_centers, random_seeds};
use crate::config::{ClusterConfig, InitMode};
use crate::data::{sq_dist_mixed, Dataset};
use crate::error::Result;
use crate::log::IterationLog;
use crate::metrics::distortion_from_score;
use crate::run::{Clustering, StopReason};
use crate::state::{repair_empty, ClusterState};

fn elapsed_ms(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}

/// Lloyd iterations from the configured initialization (random seeds by default).
pub fn lloyd(ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    cfg.validate(ds.n())?;
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let labels = init_labels(ds, cfg.k, cfg.init, &mut rng)?;
    lloyd_from_labels(ds, labels, cfg.k, cfg.max_passes, elapsed_ms(t0))
}

/// k-means++ seeding followed by Lloyd iterations.
pub fn kmeanspp(ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    lloyd(ds, &cfg.clone().with_init(InitMode::Kpp))
}

/// Alternates nearest-centroid assignment and centroid recomputation until
/// the labels stop changing or `max_passes` passes ran.
///
/// A cluster left empty by the assignment takes the member of the largest
/// cluster farthest from that cluster's centroid.
pub fn lloyd_from_labels(
    ds: &Dataset,
    labels: Vec<usize>,
    k: usize,
    max_passes: usize,
    init_ms: f64,
) -> Result<Clustering> {
    let mut state = ClusterState::build(ds, labels, k)?;
    let mut log = IterationLog::default();
    log.push(distortion_from_score(ds, state.score()), 0, 0, init_ms);
    let mut stop = StopReason::MaxPasses;
    for _ in 0..max_passes {
        let t0 = Instant::now();
        let centroids = state.centroids();
        let (mut next, comparisons) = nearest_centers(ds, &centroids, k);
        repair_empty(ds, &mut next, k)?;
        let moves = next.iter().zip(state.labels()).filter(|(a, b)| a != b).count();
        if moves > 0 {
            state = ClusterState::build(ds, next, k)?;
        }
        log.push(distortion_from_score(ds, state.score()), moves, comparisons, elapsed_ms(t0));
        if moves == 0 {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(Clustering { state, log, stop })
}

fn seed_centers(ds: &Dataset, cfg: &ClusterConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let seeds = match cfg.init {
        InitMode::Kpp => kpp_seeds(ds, cfg.k, rng),
        InitMode::Rnd | InitMode::None => random_seeds(ds, cfg.k, rng),
    };
    seeds.iter().flat_map(|&s| ds.row(s).iter().map(|&v| v as f64)).collect()
}

fn assignment_state(ds: &Dataset, centers: &[f64], k: usize) -> Result<ClusterState> {
    let (mut labels, _) = nearest_centers(ds, centers, k);
    repair_empty(ds, &mut labels, k)?;
    ClusterState::build(ds, labels, k)
}

#[inline]
fn nearest(x: &[f32], centers: &[f64], k: usize, d: usize) -> usize {
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
}

/// Mini-Batch k-means with per-centroid count-based learning rates.
///
/// Each pass draws `ceil(fraction * n)` distinct samples, assigns them to
/// their nearest centers (as of the start of the batch) and pulls each center
/// toward its assigned samples with rate `1 / count`. With
/// `minibatch_deferred` the updates are applied at batch end. Stops when the
/// full assignment does not change between passes, or at `max_passes`.
pub fn minibatch(ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    cfg.validate(ds.n())?;
    let t0 = Instant::now();
    let (n, d, k) = (ds.n(), ds.d(), cfg.k);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centers = seed_centers(ds, cfg, &mut rng);
    let mut state = assignment_state(ds, &centers, k)?;
    let mut log = IterationLog::default();
    log.push(distortion_from_score(ds, state.score()), 0, 0, elapsed_ms(t0));

    let batch = minibatch_size(n, cfg.minibatch_fraction);
    let mut counts = vec![0u64; k];
    let mut stop = StopReason::MaxPasses;
    for _ in 0..cfg.max_passes {
        let t0 = Instant::now();
        let picked = rand::seq::index::sample(&mut rng, n, batch).into_vec();
        let assigned: Vec<usize> = picked.iter().map(|&i| nearest(ds.row(i), &centers, k, d)).collect();
        if cfg.minibatch_deferred {
            let mut sums = vec![0.0f64; k * d];
            let mut got = vec![0u64; k];
            for (&i, &c) in picked.iter().zip(&assigned) {
                got[c] += 1;
                sums[c * d..(c + 1) * d].iter_mut().zip(ds.row(i)).for_each(|(s, &v)| *s += v as f64);
            }
            for c in 0..k {
                if got[c] == 0 {
                    continue;
                }
                let total = (counts[c] + got[c]) as f64;
                let old = counts[c] as f64;
                for (cv, s) in centers[c * d..(c + 1) * d].iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                    *cv = (*cv * old + s) / total;
                }
                counts[c] += got[c];
            }
        } else {
            for (&i, &c) in picked.iter().zip(&assigned) {
                counts[c] += 1;
                let eta = 1.0 / counts[c] as f64;
                pull_toward(&mut centers[c * d..(c + 1) * d], ds.row(i), eta);
            }
        }
        let ms = elapsed_ms(t0);
        let next = assignment_state(ds, &centers, k)?;
        let moves = next.labels().iter().zip(state.labels()).filter(|(a, b)| a != b).count();
        state = next;
        log.push(distortion_from_score(ds, state.score()), moves, (batch * k) as u64, ms);
        if moves == 0 {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(Clustering { state, log, stop })
}

/// Number of samples drawn per Mini-Batch pass.
pub fn minibatch_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).ceil() as usize).clamp(1, n)
}

/// `c += eta * (x - c)`.
pub(crate) fn pull_toward(c: &mut [f64], x: &[f32], eta: f64) {
    for (cv, &v) in c.iter_mut().zip(x) {
        *cv += eta * (v as f64 - *cv);
    }
}

/// Learning rate of LVQ pass `pass` (0-based).
pub fn lvq_rate(cfg: &ClusterConfig, pass: usize) -> f64 {
    let r = (cfg.lvq_rate0 - cfg.lvq_decay * pass as f64).max(cfg.lvq_rate_min);
    if r < 1e-15 {
        0.0
    } else {
        r
    }
}

/// Online LVQ: every visited sample pulls its nearest center by `eta * (x - c)`.
///
/// The rate is constant within a pass and decays linearly per pass. The run
/// stops after the first pass whose rate is zero (centers frozen from then
/// on), or at `max_passes`.
pub fn lvq(ds: &Dataset, cfg: &ClusterConfig) -> Result<Clustering> {
    cfg.validate(ds.n())?;
    let t0 = Instant::now();
    let (n, d, k) = (ds.n(), ds.d(), cfg.k);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centers = seed_centers(ds, cfg, &mut rng);
    let mut state = assignment_state(ds, &centers, k)?;
    let mut log = IterationLog::default();
    log.push(distortion_from_score(ds, state.score()), 0, 0, elapsed_ms(t0));

    let mut order: Vec<usize> = (0..n).collect();
    let mut stop = StopReason::MaxPasses;
    for pass in 0..cfg.max_passes {
        let t0 = Instant::now();
        let eta = lvq_rate(cfg, pass);
        order.shuffle(&mut rng);
        if eta > 0.0 {
            for &i in &order {
                let x = ds.row(i);
                let c = nearest(x, &centers, k, d);
                pull_toward(&mut centers[c * d..(c + 1) * d], x, eta);
            }
        }
        let ms = elapsed_ms(t0);
        let next = assignment_state(ds, &centers, k)?;
        let moves = next.labels().iter().zip(state.labels()).filter(|(a, b)| a != b).count();
        state = next;
        let comparisons = if eta > 0.0 { (n * k) as u64 } else { 0 };
        log.push(distortion_from_score(ds, state.score()), moves, comparisons, ms);
        if eta == 0.0 {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(Clustering { state, log, stop })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Algorithm;
    use crate::state::rel_close;
    use rand::Rng;

    fn blobs(seed: u64, per: usize, centers: &[[f32; 2]]) -> (Dataset, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (c, ctr) in centers.iter().enumerate() {
            for _ in 0..per {
                rows.push([ctr[0] + rng.random_range(-1.0f32..1.0), ctr[1] + rng.random_range(-1.0f32..1.0)]);
                truth.push(c);
            }
        }
        (Dataset::from_rows(&rows).unwrap(), truth)
    }

    fn random_ds(seed: u64, n: usize, d: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Dataset::new((0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(), d).unwrap()
    }

    fn check_identity(ds: &Dataset, out: &Clustering) {
        out.state.validate(ds).unwrap();
        let direct = crate::metrics::average_distortion(ds, &out.state);
        assert!(rel_close(ds.n() as f64 * direct + out.state.score(), ds.energy(), 1e-9));
    }

    #[test]
    fn lloyd_fixed_point_stops_after_one_pass() {
        let (ds, truth) = blobs(1, 10, &[[0.0, 0.0], [20.0, 20.0]]);
        let out = lloyd_from_labels(&ds, truth.clone(), 2, 50, 0.0).unwrap();
        assert_eq!(out.log.passes(), 1);
        assert_eq!(out.log.entries[1].moves, 0);
        assert_eq!(out.state.labels(), &truth[..]);
    }

    #[test]
    fn lloyd_one_seed_per_blob_converges_fast() {
        let (ds, truth) = blobs(2, 15, &[[0.0, 0.0], [20.0, 0.0]]);
        let (labels, _) = crate::boost::assign_to_seeds(&ds, &[3, 20]);
        let out = lloyd_from_labels(&ds, labels, 2, 50, 0.0).unwrap();
        assert!(out.log.passes() <= 2);
        assert_eq!(out.state.labels(), &truth[..]);
    }

    #[test]
    fn lloyd_distortion_is_non_increasing() {
        for seed in 0..10 {
            let ds = random_ds(seed, 300, 3);
            for algo in [Algorithm::Lloyd, Algorithm::KMeansPP] {
                let out = crate::run::cluster_direct(&ds, &ClusterConfig::new(algo, 8).with_seed(seed)).unwrap();
                let d: Vec<f64> = out.log.entries.iter().map(|e| e.distortion).collect();
                assert!(d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{algo}: {d:?}");
                assert_eq!(out.stop, StopReason::Converged);
                check_identity(&ds, &out);
            }
        }
    }

    #[test]
    fn kmeanspp_is_kpp_init_then_lloyd() {
        let ds = random_ds(4, 200, 2);
        let cfg = ClusterConfig::new(Algorithm::KMeansPP, 5).with_seed(77);
        let out = kmeanspp(&ds, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let labels = init_labels(&ds, 5, InitMode::Kpp, &mut rng).unwrap();
        let manual = lloyd_from_labels(&ds, labels, 5, cfg.max_passes, 0.0).unwrap();
        assert_eq!(out.state.labels(), manual.state.labels());
    }

    #[test]
    fn kmeanspp_k_equal_n_has_zero_distortion() {
        let ds = random_ds(5, 10, 2);
        let out = kmeanspp(&ds, &ClusterConfig::new(Algorithm::KMeansPP, 10)).unwrap();
        assert!(out.distortion(&ds) < 1e-12);
    }

    #[test]
    fn full_deferred_minibatch_pass_equals_lloyd_pass() {
        let (ds, _) = blobs(6, 30, &[[0.0, 0.0], [6.0, 0.0], [0.0, 6.0], [6.0, 6.0]]);
        for seed in 0..5 {
            let mut cfg = ClusterConfig::new(Algorithm::MiniBatch, 4).with_seed(seed).with_max_passes(1);
            cfg.minibatch_fraction = 1.0;
            cfg.minibatch_deferred = true;
            let mb = minibatch(&ds, &cfg).unwrap();
            let ll = lloyd(&ds, &ClusterConfig::new(Algorithm::Lloyd, 4).with_seed(seed).with_max_passes(1)).unwrap();
            assert_eq!(mb.state.labels(), ll.state.labels());
            assert!(rel_close(mb.state.score(), ll.state.score(), 1e-12));
        }
    }

    #[test]
    fn minibatch_batch_size() {
        assert_eq!(minibatch_size(1000, 0.1), 100);
        assert_eq!(minibatch_size(1001, 0.1), 101);
        assert_eq!(minibatch_size(5, 0.01), 1);
        let ds = random_ds(7, 1000, 2);
        let cfg = ClusterConfig::new(Algorithm::MiniBatch, 4).with_max_passes(3);
        let out = minibatch(&ds, &cfg).unwrap();
        // comparisons per pass = batch * k
        assert!(out.log.entries[1..].iter().all(|e| e.gain_evals == 400));
        check_identity(&ds, &out);
    }

    #[test]
    fn lvq_zero_rate_freezes_seeds() {
        let ds = random_ds(8, 150, 2);
        let mut cfg = ClusterConfig::new(Algorithm::Lvq, 5).with_seed(9);
        cfg.lvq_rate0 = 0.0;
        let out = lvq(&ds, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let seeds = random_seeds(&ds, 5, &mut rng);
        let (mut labels, _) = crate::boost::assign_to_seeds(&ds, &seeds);
        repair_empty(&ds, &mut labels, 5).unwrap();
        assert_eq!(out.state.labels(), &labels[..]);
        assert_eq!(out.log.passes(), 1);
    }

    #[test]
    fn lvq_rate_schedule() {
        let cfg = ClusterConfig::new(Algorithm::Lvq, 2);
        assert_eq!(lvq_rate(&cfg, 0), 0.01);
        assert!((lvq_rate(&cfg, 10) - 0.006).abs() < 1e-15);
        assert_eq!(lvq_rate(&cfg, 25), 0.0);
        assert_eq!(lvq_rate(&cfg, 40), 0.0);
        let ds = random_ds(10, 200, 2);
        let out = lvq(&ds, &cfg).unwrap();
        assert_eq!(out.log.passes(), 26);
        check_identity(&ds, &out);
    }

    #[test]
    fn lvq_update_contracts_distance() {
        // |c' - x| = (1 - eta) |c - x|
        let x = [3.0f32, -1.0];
        let mut c = [0.5f64, 2.0];
        let dist = |c: &[f64]| ((c[0] - 3.0).powi(2) + (c[1] + 1.0).powi(2)).sqrt();
        let eta = 0.3;
        let before = dist(&c);
        pull_toward(&mut c, &x, eta);
        let after = dist(&c);
        assert!((after - (1.0 - eta) * before).abs() < 1e-12);
    }
}
