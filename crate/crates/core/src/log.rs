use serde::{Deserialize, Serialize};

/// One row of the per-pass log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRecord {
    pub pass: usize,
    pub distortion: f64,
    pub moves: usize,
    pub gain_evals: u64,
    pub ms: f64,
}

/// Per-pass progress of a run. Pass 0 is the initial partition.
///
/// For the incremental clusterers `gain_evals` counts move-gain evaluations;
/// for the centroid-based baselines it counts sample-to-centroid comparisons.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub entries: Vec<PassRecord>,
}

impl IterationLog {
    pub fn push(&mut self, distortion: f64, moves: usize, gain_evals: u64, ms: f64) {
        let pass = self.entries.last().map_or(0, |e| e.pass + 1);
        self.entries.push(PassRecord { pass, distortion, moves, gain_evals, ms });
    }

    /// Passes executed after the initial partition.
    pub fn passes(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn final_distortion(&self) -> Option<f64> {
        self.entries.last().map(|e| e.distortion)
    }

    pub fn total_gain_evals(&self) -> u64 {
        self.entries.iter().map(|e| e.gain_evals).sum()
    }

    pub fn total_ms(&self) -> f64 {
        self.entries.iter().map(|e| e.ms).sum()
    }

    /// First pass whose distortion is at or below `level`.
    pub fn first_pass_reaching(&self, level: f64) -> Option<usize> {
        self.entries.iter().find(|e| e.distortion <= level).map(|e| e.pass)
    }

    /// Appends another log, renumbering its passes after this one.
    pub fn extend(&mut self, other: &IterationLog) {
        for e in &other.entries {
            self.push(e.distortion, e.moves, e.gain_evals, e.ms);
        }
    }

    pub fn zero_timing(&mut self) {
        self.entries.iter_mut().for_each(|e| e.ms = 0.0);
    }
}
