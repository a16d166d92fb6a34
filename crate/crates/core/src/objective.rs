//! The `I = sum_r D_r'D_r / n_r` objective and its single-sample move gain.
//!
//! Maximizing `I` is the same as minimizing total distortion, since
//! `sum_i |x_i - C_{q(i)}|^2 = E - I` with `E` the (constant) data energy.
//! Moving `x` from `u` to `v` changes the objective by
//!
//! ```text
//! (D_v + x)'(D_v + x) / (n_v + 1) + (D_u - x)'(D_u - x) / (n_u - 1)
//!     - D_v'D_v / n_v - D_u'D_u / n_u
//! ```
//!
//! which only needs the cached `D_r'D_r`, `x'x` and the two inner products
//! `x'D_u`, `x'D_v`.

use crate::data::{dot64, dot_mixed, Dataset};
use crate::error::{Error, Result};
use crate::state::ClusterState;

/// Gains at or below this fraction of the magnitude of the terms involved
/// are treated as zero (rounding noise of the expansion).
pub const GAIN_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveGain {
    pub sample: usize,
    pub from: usize,
    pub to: usize,
    pub delta: f64,
    scale: f64,
    revision: u64,
}

impl MoveGain {
    /// True when the move strictly increases the objective beyond rounding noise.
    #[inline]
    pub fn is_improving(&self) -> bool {
        self.delta > GAIN_NOISE * self.scale
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }
}

/// `sum_r D_r'D_r / n_r` computed from the stored composites.
pub fn objective_score(state: &ClusterState) -> f64 {
    (0..state.k())
        .map(|r| dot64(state.composite(r), state.composite(r)) / state.size(r) as f64)
        .sum()
}

/// Contribution of removing `x` (with `xd = x'D_u`, `xx = x'x`) from its cluster `u`.
#[inline]
fn leave_term(state: &ClusterState, u: usize, xd: f64, xx: f64) -> (f64, f64) {
    let nu = state.size(u) as f64;
    let du = state.self_dot(u);
    let before = du / nu;
    let after = (du - 2.0 * xd + xx) / (nu - 1.0);
    (after - before, before)
}

#[inline]
fn join_term(state: &ClusterState, v: usize, xd: f64, xx: f64) -> (f64, f64) {
    let nv = state.size(v) as f64;
    let dv = state.self_dot(v);
    let before = dv / nv;
    let after = (dv + 2.0 * xd + xx) / (nv + 1.0);
    (after - before, before)
}

/// Exact change of the objective if sample `i` moved to cluster `v`.
pub fn move_gain(state: &ClusterState, ds: &Dataset, i: usize, v: usize) -> Result<MoveGain> {
    if i >= state.n() {
        return Err(Error::SampleOutOfRange { sample: i, n: state.n() });
    }
    if v >= state.k() {
        return Err(Error::ClusterOutOfRange { cluster: v, k: state.k() });
    }
    let u = state.label(i);
    if u == v {
        return Err(Error::SameCluster { sample: i, cluster: u });
    }
    if state.size(u) < 2 {
        return Err(Error::WouldEmptyCluster { sample: i, cluster: u });
    }
    let x = ds.row(i);
    let xx = ds.sq_norm(i);
    let (leave, su) = leave_term(state, u, dot_mixed(x, state.composite(u)), xx);
    let (join, sv) = join_term(state, v, dot_mixed(x, state.composite(v)), xx);
    Ok(MoveGain {
        sample: i,
        from: u,
        to: v,
        delta: join + leave,
        scale: su + sv + xx,
        revision: state.revision(),
    })
}

/// Applies a gain computed against the current state.
pub fn apply_move(state: &mut ClusterState, ds: &Dataset, g: &MoveGain) -> Result<()> {
    if g.revision != state.revision() {
        return Err(Error::StaleGain { gain_revision: g.revision, state_revision: state.revision() });
    }
    state.relocate(ds.row(g.sample), g.sample, g.to, g.delta);
    Ok(())
}

/// Best improving move of sample `i` among `candidates`.
///
/// The sample's own cluster is skipped if listed. Returns `None` when no
/// candidate improves the objective or when the sample is a singleton.
/// Ties go to the lowest cluster id.
pub fn best_move(state: &ClusterState, ds: &Dataset, i: usize, candidates: &[usize]) -> Option<MoveGain> {
    let u = state.label(i);
    if state.size(u) < 2 {
        return None;
    }
    let x = ds.row(i);
    let xx = ds.sq_norm(i);
    let (leave, su) = leave_term(state, u, dot_mixed(x, state.composite(u)), xx);
    let mut best: Option<MoveGain> = None;
    for &v in candidates {
        if v == u {
            continue;
        }
        let (join, sv) = join_term(state, v, dot_mixed(x, state.composite(v)), xx);
        let g = MoveGain {
            sample: i,
            from: u,
            to: v,
            delta: join + leave,
            scale: su + sv + xx,
            revision: state.revision(),
        };
        let better = match &best {
            None => true,
            Some(b) => g.delta > b.delta || (g.delta == b.delta && v < b.to),
        };
        if better {
            best = Some(g);
        }
    }
    best.filter(MoveGain::is_improving)
}

/// First improving move of sample `i`, scanning `candidates` in the given order.
pub fn first_improving_move(
    state: &ClusterState,
    ds: &Dataset,
    i: usize,
    candidates: &[usize],
) -> (Option<MoveGain>, u64) {
    let u = state.label(i);
    if state.size(u) < 2 {
        return (None, 0);
    }
    let x = ds.row(i);
    let xx = ds.sq_norm(i);
    let (leave, su) = leave_term(state, u, dot_mixed(x, state.composite(u)), xx);
    let mut evals = 0;
    for &v in candidates {
        if v == u {
            continue;
        }
        evals += 1;
        let (join, sv) = join_term(state, v, dot_mixed(x, state.composite(v)), xx);
        let g = MoveGain {
            sample: i,
            from: u,
            to: v,
            delta: join + leave,
            scale: su + sv + xx,
            revision: state.revision(),
        };
        if g.is_improving() {
            return (Some(g), evals);
        }
    }
    (None, evals)
}

/// Scans every (sample, cluster) pair and returns the largest improving move, if any.
pub fn find_improving_move(state: &ClusterState, ds: &Dataset) -> Option<MoveGain> {
    let all: Vec<usize> = (0..state.k()).collect();
    (0..state.n())
        .filter_map(|i| best_move(state, ds, i, &all))
        .max_by(|a, b| a.delta.total_cmp(&b.delta))
}
