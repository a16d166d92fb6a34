//! Readers and writers for the benchmark vector formats and CSV side files.
//!
//! `.fvecs`, `.ivecs` and `.bvecs` files are sequences of records, each a
//! little-endian `i32` dimension followed by that many little-endian `f32`,
//! `i32` or `u8` values. Every record of a file has the same dimension.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::log::{IterationLog, PassRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecFormat {
    Fvecs,
    Bvecs,
    Csv,
}

impl FromStr for VecFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fvecs" => Ok(VecFormat::Fvecs),
            "bvecs" => Ok(VecFormat::Bvecs),
            "csv" => Ok(VecFormat::Csv),
            _ => Err(Error::Config(format!("unknown input format '{s}'"))),
        }
    }
}

/// Loads a dataset; unit-length normalization only when asked for.
pub fn load_dataset(path: &Path, format: VecFormat, normalize: bool) -> Result<Dataset> {
    let ds = match format {
        VecFormat::Fvecs => read_fvecs(path)?,
        VecFormat::Bvecs => read_bvecs(path)?,
        VecFormat::Csv => read_labeled_csv(path)?,
    };
    Ok(if normalize { ds.normalized() } else { ds })
}

/// Splits a framed file into `(dim, payload)` records.
fn read_records(path: &Path, elem: usize, limit: Option<usize>) -> Result<(usize, Vec<u8>, usize)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    let mut payload = Vec::new();
    let mut offset = 0usize;
    let mut dim: Option<usize> = None;
    let mut records = 0usize;
    while offset < bytes.len() && limit.is_none_or(|l| records < l) {
        if bytes.len() - offset < 4 {
            return Err(Error::Truncated { path: path.into(), offset: offset as u64 });
        }
        let d = i32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap());
        let expected = dim.map_or(d as i64, |x| x as i64);
        if d <= 0 || (dim.is_some() && d as i64 != expected) {
            let expected = if dim.is_some() { expected } else { 1 };
            return Err(Error::RecordDim { path: path.into(), record: records, dim: d as i64, expected });
        }
        let d = d as usize;
        dim = Some(d);
        let len = d * elem;
        if bytes.len() - offset - 4 < len {
            return Err(Error::Truncated { path: path.into(), offset: offset as u64 });
        }
        payload.extend_from_slice(&bytes[offset + 4..offset + 4 + len]);
        offset += 4 + len;
        records += 1;
    }
    Ok((dim.unwrap(), payload, records))
}

pub fn read_fvecs(path: &Path) -> Result<Dataset> {
    read_fvecs_limit(path, None)
}

/// Reads at most `limit` records.
pub fn read_fvecs_limit(path: &Path, limit: Option<usize>) -> Result<Dataset> {
    let (d, payload, _) = read_records(path, 4, limit)?;
    let rows = payload.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
    Dataset::new(rows, d)
}

/// Reads unsigned byte vectors, widened exactly to `f32`.
pub fn read_bvecs(path: &Path) -> Result<Dataset> {
    read_bvecs_limit(path, None)
}

pub fn read_bvecs_limit(path: &Path, limit: Option<usize>) -> Result<Dataset> {
    let (d, payload, _) = read_records(path, 1, limit)?;
    Dataset::new(payload.into_iter().map(f32::from).collect(), d)
}

pub fn read_ivecs(path: &Path) -> Result<Vec<Vec<i32>>> {
    let (d, payload, _) = read_records(path, 4, None)?;
    Ok(payload
        .chunks_exact(4 * d)
        .map(|rec| rec.chunks_exact(4).map(|b| i32::from_le_bytes(b.try_into().unwrap())).collect())
        .collect())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn framed<T>(rows: impl Iterator<Item = T>, d: usize, mut put: impl FnMut(&mut Vec<u8>, T)) -> Vec<u8> {
    let mut out = Vec::new();
    for r in rows {
        out.extend_from_slice(&(d as i32).to_le_bytes());
        put(&mut out, r);
    }
    out
}

pub fn write_fvecs(path: &Path, ds: &Dataset) -> Result<()> {
    let bytes = framed(ds.rows(), ds.d(), |out, r| r.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())));
    write_bytes(path, &bytes)
}

/// Writes raw `f32` rows of dimension `d` (used for codebooks).
pub fn write_fvecs_raw(path: &Path, rows: &[f32], d: usize) -> Result<()> {
    let bytes =
        framed(rows.chunks_exact(d), d, |out, r| r.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())));
    write_bytes(path, &bytes)
}

pub fn write_ivecs(path: &Path, lists: &[Vec<i32>]) -> Result<()> {
    let d = lists.first().map_or(0, Vec::len);
    if let Some(bad) = lists.iter().find(|l| l.len() != d) {
        return Err(Error::DimMismatch { expected: d, got: bad.len() });
    }
    let bytes = framed(lists.iter(), d, |out, r| r.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())));
    write_bytes(path, &bytes)
}

/// Writes byte vectors; every value must be an integer in `0..=255`.
pub fn write_bvecs(path: &Path, ds: &Dataset) -> Result<()> {
    if let Some(&v) = ds.as_slice().iter().find(|&&v| v.fract() != 0.0 || !(0.0..=255.0).contains(&v)) {
        return Err(Error::Unrepresentable { value: v as f64, format: "bvecs" });
    }
    let bytes = framed(ds.rows(), ds.d(), |out, r| out.extend(r.iter().map(|&v| v as u8)));
    write_bytes(path, &bytes)
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse { path: path.into(), line, message: e.to_string() }
}

/// Reads a CSV with a header row. A column named `class` (if present) holds
/// class ids; every other column is a feature.
///
/// Non-negative integer class values are used as ids directly; any other
/// class values are numbered densely in order of first appearance.
pub fn read_labeled_csv(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let class_col = headers.iter().position(|h| h.trim() == "class");
    let d = headers.len() - usize::from(class_col.is_some());
    let mut rows = Vec::new();
    let mut raw_classes: Vec<String> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (c, field) in rec.iter().enumerate() {
            if Some(c) == class_col {
                raw_classes.push(field.trim().to_string());
            } else {
                let v: f32 = field.trim().parse().map_err(|_| Error::Parse {
                    path: path.into(),
                    line,
                    message: format!("column '{}': '{field}' is not a number", &headers[c]),
                })?;
                rows.push(v);
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    let ds = Dataset::new(rows, d)?;
    if class_col.is_none() {
        return Ok(ds);
    }
    let ids: Option<Vec<usize>> = raw_classes.iter().map(|c| c.parse().ok()).collect();
    let ids = ids.unwrap_or_else(|| {
        let mut seen: Vec<&str> = Vec::new();
        raw_classes
            .iter()
            .map(|c| match seen.iter().position(|s| *s == c) {
                Some(p) => p,
                None => {
                    seen.push(c);
                    seen.len() - 1
                }
            })
            .collect()
    });
    ds.with_classes(ids)
}

/// Writes features (`f0..`) plus a `class` column when classes are attached.
pub fn write_labeled_csv(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header: Vec<String> = (0..ds.d()).map(|j| format!("f{j}")).collect();
    if ds.classes().is_some() {
        header.push("class".into());
    }
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (i, row) in ds.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(c) = ds.classes() {
            rec.push(c[i].to_string());
        }
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Label dump: `sample_index,cluster_id`, one row per sample.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 8 + 32);
    out.push_str("sample_index,cluster_id\n");
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    write_bytes(path, out.as_bytes())
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    read_index_column(path, "cluster_id")
}

/// Reads a two-column `sample_index,<value>` CSV into a dense vector.
pub fn read_index_column(path: &Path, column: &str) -> Result<Vec<usize>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let idx = headers.iter().position(|h| h == "sample_index");
    let val = headers.iter().position(|h| h == column);
    let (Some(idx), Some(val)) = (idx, val) else {
        return Err(Error::Parse { path: path.into(), line: 1, message: format!("expected columns sample_index,{column}") });
    };
    let mut pairs = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let parse = |c: usize| -> Result<usize> {
            rec[c].trim().parse().map_err(|_| Error::Parse {
                path: path.into(),
                line,
                message: format!("'{}' is not a non-negative integer", &rec[c]),
            })
        };
        pairs.push((parse(idx)?, parse(val)?, line));
    }
    let mut out = vec![usize::MAX; pairs.len()];
    for (i, v, line) in pairs {
        if i >= out.len() || out[i] != usize::MAX {
            return Err(Error::Parse { path: path.into(), line, message: format!("bad or repeated sample index {i}") });
        }
        out[i] = v;
    }
    Ok(out)
}

/// Per-pass log: `pass,distortion,moves,gain_evals,ms`.
pub fn write_log(path: &Path, log: &IterationLog) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "pass,distortion,moves,gain_evals,ms").unwrap();
    for e in &log.entries {
        writeln!(out, "{},{},{},{},{}", e.pass, e.distortion, e.moves, e.gain_evals, e.ms).unwrap();
    }
    write_bytes(path, &out)
}

pub fn read_log(path: &Path) -> Result<IterationLog> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut log = IterationLog::default();
    for rec in rdr.deserialize::<PassRecord>() {
        log.entries.push(rec.map_err(|e| csv_err(path, e))?);
    }
    Ok(log)
}
