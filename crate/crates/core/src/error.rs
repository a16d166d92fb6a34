use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset must have at least one sample and one dimension (n={n}, d={d})")]
    EmptyDataset { n: usize, d: usize },

    #[error("row buffer of length {len} is not a multiple of dimension {d}")]
    RaggedRows { len: usize, d: usize },

    #[error("cluster {cluster} has no members")]
    EmptyCluster { cluster: usize },

    #[error("label {label} of sample {sample} is outside [0, {k})")]
    BadLabel { sample: usize, label: usize, k: usize },

    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("cluster id {cluster} is outside [0, {k})")]
    ClusterOutOfRange { cluster: usize, k: usize },

    #[error("sample index {sample} is outside [0, {n})")]
    SampleOutOfRange { sample: usize, n: usize },

    #[error("moving sample {sample} would empty cluster {cluster}")]
    WouldEmptyCluster { sample: usize, cluster: usize },

    #[error("sample {sample} already belongs to cluster {cluster}")]
    SameCluster { sample: usize, cluster: usize },

    #[error("move gain computed at revision {gain_revision} but state is at revision {state_revision}")]
    StaleGain { gain_revision: u64, state_revision: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot split a cluster of {size} member(s)")]
    TooSmall { size: usize },

    #[error("only {available} splittable cluster(s) left while {wanted} clusters were requested")]
    InsufficientData { available: usize, wanted: usize },

    #[error("dataset has no class labels")]
    MissingLabels,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("{path}: record {record} declares dimension {dim}, expected {expected}")]
    RecordDim { path: PathBuf, record: usize, dim: i64, expected: i64 },

    #[error("{path}: truncated record at byte offset {offset}")]
    Truncated { path: PathBuf, offset: u64 },

    #[error("{path}: file contains no records")]
    EmptyFile { path: PathBuf },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("dimension {d} is not divisible into {m} sub-spaces")]
    BadSubdiv { d: usize, m: usize },

    #[error("value {value} cannot be stored as {format}")]
    Unrepresentable { value: f64, format: &'static str },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
