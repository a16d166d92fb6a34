//! The live partition shared by every clusterer.
//!
//! A cluster is represented by its composite vector `D_r` (the sum of its
//! members) and its size `n_r`. Centroids are derived on demand as
//! `D_r / n_r`; they are never stored. The objective value
//! `I = sum_r D_r'D_r / n_r` is cached together with every `D_r'D_r`.

use crate::data::{dot64, Dataset};
use crate::error::{Error, Result};

/// Relative tolerance for the cached-versus-recomputed consistency checks.
pub const STATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    k: usize,
    d: usize,
    labels: Vec<usize>,
    composites: Vec<f64>,
    sizes: Vec<usize>,
    self_dots: Vec<f64>,
    score: f64,
    revision: u64,
}

impl ClusterState {
    /// Computes composites, sizes and score from scratch for a labeling.
    ///
    /// Every label must lie in `[0, k)` and every cluster id must be used.
    pub fn build(ds: &Dataset, labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != ds.n() {
            return Err(Error::LabelCount { expected: ds.n(), got: labels.len() });
        }
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::BadLabel { sample: i, label: l, k });
            }
        }
        let (composites, sizes) = accumulate(ds, &labels, k);
        if let Some(r) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyCluster { cluster: r });
        }
        let mut state = Self {
            k,
            d: ds.d(),
            labels,
            composites,
            sizes,
            self_dots: vec![0.0; k],
            score: 0.0,
            revision: 0,
        };
        state.recompute_score();
        Ok(state)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<usize> {
        self.labels
    }

    #[inline]
    pub fn size(&self, r: usize) -> usize {
        self.sizes[r]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    #[inline]
    pub fn composite(&self, r: usize) -> &[f64] {
        &self.composites[r * self.d..(r + 1) * self.d]
    }

    /// Cached `D_r'D_r`.
    #[inline]
    pub fn self_dot(&self, r: usize) -> f64 {
        self.self_dots[r]
    }

    /// Cached objective value `sum_r D_r'D_r / n_r`.
    pub fn score(&self) -> f64 {
        self.score
    }

    /// Incremented on every mutation; used to detect stale move gains.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    /// Centroid `D_r / n_r`.
    pub fn centroid(&self, r: usize) -> Result<Vec<f64>> {
        if r >= self.k {
            return Err(Error::ClusterOutOfRange { cluster: r, k: self.k });
        }
        let inv = 1.0 / self.sizes[r] as f64;
        Ok(self.composite(r).iter().map(|v| v * inv).collect())
    }

    /// All centroids, row-major `k x d`.
    pub fn centroids(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k * self.d);
        for r in 0..self.k {
            let inv = 1.0 / self.sizes[r] as f64;
            out.extend(self.composite(r).iter().map(|v| v * inv));
        }
        out
    }

    /// Member indices of every cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Rebuilds composites, self inner products and score from the labels.
    pub fn refresh(&mut self, ds: &Dataset) {
        let (composites, sizes) = accumulate(ds, &self.labels, self.k);
        debug_assert_eq!(sizes, self.sizes);
        self.composites = composites;
        self.recompute_score();
    }

    /// Checks every stored quantity against a from-scratch recomputation.
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let fresh = Self::build(ds, self.labels.clone(), self.k)?;
        if fresh.sizes != self.sizes {
            return Err(Error::Config("stored cluster sizes disagree with labels".into()));
        }
        // sum of member norms bounds |D_r| and the rounding error of its accumulation
        let mut mass = vec![0.0f64; self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            mass[l] += ds.sq_norm(i).sqrt();
        }
        for (r, &mass_r) in mass.iter().enumerate() {
            let worst = fresh
                .composite(r)
                .iter()
                .zip(self.composite(r))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if worst > STATE_TOLERANCE * mass_r {
                return Err(Error::Config(format!("composite of cluster {r} drifted by {worst:e}")));
            }
        }
        let floor = STATE_TOLERANCE * ds.energy();
        if (fresh.score - self.score).abs() > STATE_TOLERANCE * fresh.score.abs().max(self.score.abs()) + floor * 1e-6 {
            return Err(Error::Config(format!(
                "cached score {} disagrees with recomputed {}",
                self.score, fresh.score
            )));
        }
        Ok(())
    }

    fn recompute_score(&mut self) {
        let mut score = 0.0;
        for r in 0..self.k {
            let dd = dot64(self.composite(r), self.composite(r));
            self.self_dots[r] = dd;
            score += dd / self.sizes[r] as f64;
        }
        self.score = score;
        self.revision += 1;
    }

    /// Relocates sample `i` from its cluster to `to`, updating composites and
    /// the two affected self inner products; `delta` is added to the score.
    pub(crate) fn relocate(&mut self, x: &[f32], i: usize, to: usize, delta: f64) {
        let from = self.labels[i];
        let d = self.d;
        {
            let du = &mut self.composites[from * d..(from + 1) * d];
            du.iter_mut().zip(x).for_each(|(c, &v)| *c -= v as f64);
        }
        {
            let dv = &mut self.composites[to * d..(to + 1) * d];
            dv.iter_mut().zip(x).for_each(|(c, &v)| *c += v as f64);
        }
        self.self_dots[from] = dot64(self.composite(from), self.composite(from));
        self.self_dots[to] = dot64(self.composite(to), self.composite(to));
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        self.labels[i] = to;
        self.score += delta;
        self.revision += 1;
    }
}

fn accumulate(ds: &Dataset, labels: &[usize], k: usize) -> (Vec<f64>, Vec<usize>) {
    let d = ds.d();
    let mut composites = vec![0.0f64; k * d];
    let mut sizes = vec![0usize; k];
    for (x, &l) in ds.rows().zip(labels) {
        sizes[l] += 1;
        composites[l * d..(l + 1) * d].iter_mut().zip(x).for_each(|(c, &v)| *c += v as f64);
    }
    (composites, sizes)
}

/// `|a - b| <= rel * max(|a|, |b|)`, with exact equality accepted.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Moves members so that no cluster is empty.
///
/// Each empty cluster takes the member of the currently largest cluster that
/// lies farthest from that cluster's centroid. Deterministic: ties go to the
/// lower cluster id, then the lower sample index.
pub fn repair_empty(ds: &Dataset, labels: &mut [usize], k: usize) -> Result<()> {
    if k > ds.n() {
        return Err(Error::Config(format!("k = {k} exceeds n = {}", ds.n())));
    }
    let d = ds.d();
    loop {
        let mut sizes = vec![0usize; k];
        labels.iter().for_each(|&l| sizes[l] += 1);
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return Ok(());
        };
        let largest = (0..k).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap();
        let mut mean = vec![0.0f64; d];
        for (x, _) in ds.rows().zip(labels.iter()).filter(|(_, &l)| l == largest) {
            mean.iter_mut().zip(x).for_each(|(m, &v)| *m += v as f64);
        }
        let inv = 1.0 / sizes[largest] as f64;
        mean.iter_mut().for_each(|m| *m *= inv);
        let mut far = usize::MAX;
        let mut far_d = -1.0;
        for (i, &l) in labels.iter().enumerate() {
            if l == largest {
                let dist = crate::data::sq_dist_mixed(ds.row(i), &mean);
                if dist > far_d {
                    far_d = dist;
                    far = i;
                }
            }
        }
        labels[far] = empty;
    }
}
