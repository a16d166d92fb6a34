//! Product quantization: per-sub-space codebooks, byte codes and exhaustive
//! asymmetric-distance (ADC) search.

use std::fs;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::io::{read_fvecs, write_fvecs_raw};
use crate::run::Clusterer;

pub const DEFAULT_K_SUB: usize = 256;
const HEADER_FILE: &str = "codebook.hdr";

/// `m` sub-codebooks of `k_sub` centroids each, over contiguous dimension ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    m: usize,
    k_sub: usize,
    d: usize,
    // [sub-quantizer][centroid][sub-dim]
    centroids: Vec<f32>,
}

impl Codebook {
    pub fn new(m: usize, k_sub: usize, d: usize, centroids: Vec<f32>) -> Result<Self> {
        if m == 0 || !d.is_multiple_of(m) {
            return Err(Error::BadSubdiv { d, m });
        }
        if k_sub == 0 || k_sub > 256 {
            return Err(Error::Config(format!("k_sub must be in 1..=256, got {k_sub}")));
        }
        if centroids.len() != k_sub * d {
            return Err(Error::DimMismatch { expected: k_sub * d, got: centroids.len() });
        }
        Ok(Codebook { m, k_sub, d, centroids })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k_sub(&self) -> usize {
        self.k_sub
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn sub_dim(&self) -> usize {
        self.d / self.m
    }

    pub fn range(&self, r: usize) -> Range<usize> {
        let s = self.sub_dim();
        r * s..(r + 1) * s
    }

    /// All centroids of sub-quantizer `r`, row-major.
    pub fn sub_codebook(&self, r: usize) -> &[f32] {
        let len = self.k_sub * self.sub_dim();
        &self.centroids[r * len..(r + 1) * len]
    }

    pub fn centroid(&self, r: usize, c: usize) -> &[f32] {
        let s = self.sub_dim();
        &self.sub_codebook(r)[c * s..(c + 1) * s]
    }

    /// Number of centroid rows that repeat an earlier row of the same sub-codebook.
    pub fn duplicate_count(&self) -> usize {
        (0..self.m)
            .map(|r| {
                (1..self.k_sub)
                    .filter(|&c| (0..c).any(|p| self.centroid(r, p) == self.centroid(r, c)))
                    .count()
            })
            .sum()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut hdr = Vec::with_capacity(12);
        for v in [self.m, self.k_sub, self.d] {
            hdr.extend_from_slice(&(v as u32).to_le_bytes());
        }
        let hp = dir.join(HEADER_FILE);
        fs::write(&hp, hdr).map_err(|e| Error::io(&hp, e))?;
        for r in 0..self.m {
            write_fvecs_raw(&dir.join(sub_file(r)), self.sub_codebook(r), self.sub_dim())?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let hp = dir.join(HEADER_FILE);
        let hdr = fs::read(&hp).map_err(|e| Error::io(&hp, e))?;
        if hdr.len() != 12 {
            return Err(Error::Truncated { path: hp, offset: 0 });
        }
        let word = |i: usize| u32::from_le_bytes(hdr[4 * i..4 * i + 4].try_into().unwrap()) as usize;
        let (m, k_sub, d) = (word(0), word(1), word(2));
        if m == 0 || d % m != 0 {
            return Err(Error::BadSubdiv { d, m });
        }
        let mut centroids = Vec::with_capacity(k_sub * d);
        for r in 0..m {
            let sub = read_fvecs(&dir.join(sub_file(r)))?;
            if sub.d() != d / m || sub.n() != k_sub {
                return Err(Error::DimMismatch { expected: k_sub * (d / m), got: sub.n() * sub.d() });
            }
            centroids.extend_from_slice(sub.as_slice());
        }
        Codebook::new(m, k_sub, d, centroids)
    }
}

fn sub_file(r: usize) -> String {
    format!("sub_{r:03}.fvecs")
}

/// Seed used for sub-space `r` when training with base seed `seed`.
pub fn sub_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(r as u64)
}

/// Trains one sub-codebook per contiguous sub-space with `inner`; sub-spaces
/// run concurrently. Sub-space `r` is clustered with seed `sub_seed(seed, r)`.
pub fn pq_train(train: &Dataset, m: usize, k_sub: usize, inner: &dyn Clusterer, seed: u64) -> Result<Codebook> {
    let d = train.d();
    if m == 0 || !d.is_multiple_of(m) {
        return Err(Error::BadSubdiv { d, m });
    }
    if k_sub == 0 || k_sub > 256 {
        return Err(Error::Config(format!("k_sub must be in 1..=256, got {k_sub}")));
    }
    if train.n() < k_sub {
        return Err(Error::InsufficientData { available: train.n(), wanted: k_sub });
    }
    let s = d / m;
    let subs: Vec<Vec<f32>> = (0..m)
        .into_par_iter()
        .map(|r| -> Result<Vec<f32>> {
            let cols = train.columns(r * s, (r + 1) * s)?;
            let c = inner.cluster(&cols, k_sub, sub_seed(seed, r))?;
            Ok(c.state.centroids().into_iter().map(|v| v as f32).collect())
        })
        .collect::<Result<_>>()?;
    Codebook::new(m, k_sub, d, subs.concat())
}

/// `n × m` byte codes, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    n: usize,
    m: usize,
    codes: Vec<u8>,
}

impl CodeMatrix {
    pub fn new(n: usize, m: usize, codes: Vec<u8>) -> Result<Self> {
        if codes.len() != n * m {
            return Err(Error::DimMismatch { expected: n * m, got: codes.len() });
        }
        Ok(CodeMatrix { n, m, codes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.codes[i * self.m..(i + 1) * self.m]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.codes
    }

    /// Checks shape and code range against a codebook.
    pub fn check(&self, cb: &Codebook) -> Result<()> {
        if self.m != cb.m() {
            return Err(Error::DimMismatch { expected: cb.m(), got: self.m });
        }
        if let Some(pos) = self.codes.iter().position(|&c| c as usize >= cb.k_sub()) {
            return Err(Error::BadLabel { sample: pos / self.m, label: self.codes[pos] as usize, k: cb.k_sub() });
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(8 + self.codes.len());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.m as u32).to_le_bytes());
        out.extend_from_slice(&self.codes);
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 8 {
            return Err(Error::Truncated { path: path.into(), offset: 0 });
        }
        let n = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let m = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        if bytes.len() != 8 + n * m {
            return Err(Error::Truncated { path: path.into(), offset: 8 });
        }
        CodeMatrix::new(n, m, bytes[8..].to_vec())
    }
}

fn nearest_sub(cb: &Codebook, r: usize, x: &[f32]) -> u8 {
    let mut best = (f64::INFINITY, 0usize);
    for c in 0..cb.k_sub() {
        let dist = crate::data::sq_dist32(x, cb.centroid(r, c));
        if dist < best.0 {
            best = (dist, c);
        }
    }
    best.1 as u8
}

/// Nearest sub-centroid per sub-vector, ties to the lower index.
pub fn pq_encode(cb: &Codebook, ds: &Dataset) -> Result<CodeMatrix> {
    if ds.d() != cb.d() {
        return Err(Error::DimMismatch { expected: cb.d(), got: ds.d() });
    }
    let m = cb.m();
    let mut codes = vec![0u8; ds.n() * m];
    codes.par_chunks_mut(m).enumerate().for_each(|(i, out)| {
        let x = ds.row(i);
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = nearest_sub(cb, r, &x[cb.range(r)]);
        }
    });
    CodeMatrix::new(ds.n(), m, codes)
}

pub fn reconstruct(cb: &Codebook, code: &[u8]) -> Vec<f32> {
    code.iter().enumerate().flat_map(|(r, &c)| cb.centroid(r, c as usize).iter().copied()).collect()
}

/// Lookup tables: squared distance from each query sub-vector to each sub-centroid.
pub fn adc_tables(cb: &Codebook, query: &[f32]) -> Result<Vec<f64>> {
    if query.len() != cb.d() {
        return Err(Error::DimMismatch { expected: cb.d(), got: query.len() });
    }
    Ok((0..cb.m())
        .flat_map(|r| {
            let q = &query[cb.range(r)];
            (0..cb.k_sub()).map(move |c| crate::data::sq_dist32(q, cb.centroid(r, c)))
        })
        .collect())
}

pub fn adc_score(tables: &[f64], k_sub: usize, code: &[u8]) -> f64 {
    code.iter().enumerate().map(|(r, &c)| tables[r * k_sub + c as usize]).sum()
}

/// The `top_r` database ids with the smallest ADC score, ascending, ties to the lower id.
pub fn adc_search(cb: &Codebook, codes: &CodeMatrix, query: &[f32], top_r: usize) -> Result<Vec<usize>> {
    Ok(adc_search_scored(cb, codes, query, top_r)?.into_iter().map(|(i, _)| i).collect())
}

pub fn adc_search_scored(cb: &Codebook, codes: &CodeMatrix, query: &[f32], top_r: usize) -> Result<Vec<(usize, f64)>> {
    codes.check(cb)?;
    let tables = adc_tables(cb, query)?;
    let mut scored: Vec<(f64, usize)> =
        (0..codes.n()).map(|i| (adc_score(&tables, cb.k_sub(), codes.row(i)), i)).collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let top = top_r.min(scored.len());
    if top < scored.len() {
        scored.select_nth_unstable_by(top, cmp);
        scored.truncate(top);
    }
    scored.sort_by(cmp);
    Ok(scored.into_iter().map(|(s, i)| (i, s)).collect())
}

/// Runs `adc_search` for every query row concurrently.
pub fn adc_search_batch(cb: &Codebook, codes: &CodeMatrix, queries: &Dataset, top_r: usize) -> Result<Vec<Vec<usize>>> {
    (0..queries.n()).into_par_iter().map(|q| adc_search(cb, codes, queries.row(q), top_r)).collect()
}
