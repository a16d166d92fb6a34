//! Evaluation measures: average distortion, clustering entropy, recall@R.

use crate::data::{sq_dist_mixed, Dataset};
use crate::error::{Error, Result};
use crate::state::ClusterState;

/// Mean squared distance of every sample to its cluster centroid, summed directly.
pub fn average_distortion(ds: &Dataset, state: &ClusterState) -> f64 {
    let centroids = state.centroids();
    let d = ds.d();
    let total: f64 = ds
        .rows()
        .zip(state.labels())
        .map(|(x, &l)| sq_dist_mixed(x, &centroids[l * d..(l + 1) * d]))
        .sum();
    total / ds.n() as f64
}

/// Average distortion from the objective value: `(E - I) / n`, floored at 0.
pub fn distortion_from_score(ds: &Dataset, score: f64) -> f64 {
    ((ds.energy() - score) / ds.n() as f64).max(0.0)
}

/// Size-weighted, `log c`-normalized class entropy of the clusters; 0 when
/// every cluster is class-pure, 1 for a single cluster mixing all classes uniformly.
pub fn entropy(state: &ClusterState, classes: &[usize], class_count: usize) -> Result<f64> {
    if classes.len() != state.n() {
        return Err(Error::LabelCount { expected: state.n(), got: classes.len() });
    }
    if class_count < 2 {
        return Err(Error::Config(format!("entropy needs at least 2 classes, got {class_count}")));
    }
    if let Some((i, &c)) = classes.iter().enumerate().find(|(_, &c)| c >= class_count) {
        return Err(Error::BadLabel { sample: i, label: c, k: class_count });
    }
    let k = state.k();
    let mut counts = vec![0usize; k * class_count];
    for (&l, &c) in state.labels().iter().zip(classes) {
        counts[l * class_count + c] += 1;
    }
    let n = state.n() as f64;
    let log_c = (class_count as f64).ln();
    let mut total = 0.0;
    for r in 0..k {
        let nr = state.size(r) as f64;
        let h: f64 = counts[r * class_count..(r + 1) * class_count]
            .iter()
            .filter(|&&m| m > 0)
            .map(|&m| {
                let p = m as f64 / nr;
                -p * p.ln()
            })
            .sum();
        total += nr / n * h / log_c;
    }
    Ok(total)
}

/// Entropy using the class ids attached to the dataset.
pub fn dataset_entropy(ds: &Dataset, state: &ClusterState) -> Result<f64> {
    let classes = ds.classes().ok_or(Error::MissingLabels)?;
    entropy(state, classes, ds.class_count().unwrap_or(0).max(2))
}

/// Fraction of queries whose true nearest neighbor appears among the first `r` results.
pub fn recall_at<R: AsRef<[usize]>>(results: &[R], nearest: &[usize], r: usize) -> f64 {
    if nearest.is_empty() {
        return 0.0;
    }
    let hits = results
        .iter()
        .zip(nearest)
        .filter(|(res, &nn)| res.as_ref().iter().take(r).any(|&id| id == nn))
        .count();
    hits as f64 / nearest.len() as f64
}

/// Exact nearest neighbors of every query by linear scan (ties to the lower id).
pub fn exact_nearest(base: &Dataset, queries: &Dataset, top: usize) -> Vec<Vec<usize>> {
    queries
        .rows()
        .map(|q| {
            let mut scored: Vec<(f64, usize)> =
                base.rows().enumerate().map(|(i, x)| (crate::data::sq_dist32(q, x), i)).collect();
            let top = top.min(scored.len());
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if top < scored.len() {
                scored.select_nth_unstable_by(top, cmp);
                scored.truncate(top);
            }
            scored.sort_by(cmp);
            scored.into_iter().map(|(_, i)| i).collect()
        })
        .collect()
}
