//! Immutable dense dataset.

use crate::error::{Error, Result};

/// A dense `n x d` row matrix with optional per-row class ids.
///
/// Rows are stored in single precision (the native precision of the benchmark
/// vector formats); every derived quantity is accumulated in `f64`.
#[derive(Debug, Clone)]
pub struct Dataset {
    n: usize,
    d: usize,
    rows: Vec<f32>,
    sq_norms: Vec<f64>,
    energy: f64,
    classes: Option<Vec<usize>>,
}

impl Dataset {
    /// Builds a dataset from a row-major buffer.
    pub fn new(rows: Vec<f32>, d: usize) -> Result<Self> {
        if d == 0 || rows.is_empty() {
            return Err(Error::EmptyDataset { n: rows.len().checked_div(d).unwrap_or(0), d });
        }
        if !rows.len().is_multiple_of(d) {
            return Err(Error::RaggedRows { len: rows.len(), d });
        }
        let n = rows.len() / d;
        let sq_norms: Vec<f64> = rows.chunks_exact(d).map(sq_norm).collect();
        let energy = sq_norms.iter().sum();
        Ok(Self { n, d, rows, sq_norms, energy, classes: None })
    }

    /// Builds a dataset from explicit rows. All rows must share one length.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut buf = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::DimMismatch { expected: d, got: r.len() });
            }
            buf.extend_from_slice(r);
        }
        Self::new(buf, d)
    }

    /// Attaches class ids (one per row).
    pub fn with_classes(mut self, classes: Vec<usize>) -> Result<Self> {
        if classes.len() != self.n {
            return Err(Error::LabelCount { expected: self.n, got: classes.len() });
        }
        self.classes = Some(classes);
        Ok(self)
    }

    /// Returns a copy with every non-zero row scaled to unit length.
    pub fn normalized(&self) -> Self {
        let mut rows = self.rows.clone();
        for (row, &nrm) in rows.chunks_exact_mut(self.d).zip(&self.sq_norms) {
            if nrm > 0.0 {
                let inv = 1.0 / nrm.sqrt();
                row.iter_mut().for_each(|v| *v = (*v as f64 * inv) as f32);
            }
        }
        let mut out = Self::new(rows, self.d).expect("shape preserved");
        out.classes = self.classes.clone();
        out
    }

    /// Copies the given rows (and their classes) into a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut rows = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            if i >= self.n {
                return Err(Error::SampleOutOfRange { sample: i, n: self.n });
            }
            rows.extend_from_slice(self.row(i));
        }
        let mut out = Self::new(rows, self.d)?;
        if let Some(c) = &self.classes {
            out.classes = Some(indices.iter().map(|&i| c[i]).collect());
        }
        Ok(out)
    }

    /// Copies the contiguous column range `[start, end)` into a new dataset.
    pub fn columns(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.d {
            return Err(Error::DimMismatch { expected: self.d, got: end });
        }
        let mut rows = Vec::with_capacity(self.n * (end - start));
        for row in self.rows.chunks_exact(self.d) {
            rows.extend_from_slice(&row[start..end]);
        }
        Self::new(rows, end - start)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.rows[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> {
        self.rows.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.rows
    }

    /// Squared norm `x_i'x_i`.
    #[inline]
    pub fn sq_norm(&self, i: usize) -> f64 {
        self.sq_norms[i]
    }

    /// Total energy `E = sum_i x_i'x_i`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn classes(&self) -> Option<&[usize]> {
        self.classes.as_deref()
    }

    /// Number of distinct class ids (max id + 1), if classes are attached.
    pub fn class_count(&self) -> Option<usize> {
        self.classes.as_ref().map(|c| c.iter().max().map_or(0, |m| m + 1))
    }
}

#[inline]
pub(crate) fn sq_norm(x: &[f32]) -> f64 {
    x.iter().map(|&v| (v as f64) * (v as f64)).sum()
}

/// `x'y` with `x` in single and `y` in double precision.
#[inline]
pub(crate) fn dot_mixed(x: &[f32], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| a as f64 * b).sum()
}

#[inline]
pub(crate) fn dot64(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

/// Squared Euclidean distance between a single-precision row and a double-precision point.
#[inline]
pub(crate) fn sq_dist_mixed(x: &[f32], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(&a, &b)| {
            let t = a as f64 - b;
            t * t
        })
        .sum()
}

#[inline]
pub(crate) fn sq_dist32(x: &[f32], y: &[f32]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            let t = a as f64 - b as f64;
            t * t
        })
        .sum()
}
