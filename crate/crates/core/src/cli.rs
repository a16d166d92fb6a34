//! The `bkm` command line: cluster, eval, pq and bench.
//!
//! Results go to the given writer as JSON (one object per command) or CSV
//! (bench); diagnostics go to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Algorithm, ClusterConfig, InitMode, DEFAULT_MAX_PASSES};
use crate::data::Dataset;
use crate::error::Error;
use crate::io::{self, VecFormat};
use crate::metrics;
use crate::pq::{self, CodeMatrix, Codebook};
use crate::run::cluster;
use crate::state::ClusterState;
use crate::synth;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("usage: {0}")]
    BadArgs(String),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::BadArgs(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bkm", version, about = "Incremental k-means clustering and PQ search benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a dataset and write labels and the per-pass log.
    Cluster(ClusterArgs),
    /// Distortion, entropy and cluster sizes of an existing labeling.
    Eval(EvalArgs),
    /// Product-quantizer training, encoding and ADC search.
    #[command(subcommand)]
    Pq(PqCommand),
    /// Sweep n or k and emit one CSV row per (algorithm, value).
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Fvecs,
    Bvecs,
    Csv,
}

impl From<FormatArg> for VecFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Fvecs => VecFormat::Fvecs,
            FormatArg::Bvecs => VecFormat::Bvecs,
            FormatArg::Csv => VecFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to the file extension.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Scale every vector to unit length after loading.
    #[arg(long)]
    pub normalize: bool,
    /// Read only the first N vectors (fvecs/bvecs).
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AlgoArgs {
    #[arg(long, default_value = "bkm", value_parser = parse_from_str::<Algorithm>)]
    pub algo: Algorithm,
    /// Defaults to `none` for bkm variants, `kpp` for kmeanspp, `rnd` otherwise.
    #[arg(long, value_parser = parse_from_str::<InitMode>)]
    pub init: Option<InitMode>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_PASSES)]
    pub max_passes: usize,
    #[arg(long)]
    pub k0: Option<usize>,
}

impl AlgoArgs {
    fn config(&self, k: usize) -> ClusterConfig {
        let mut cfg = ClusterConfig::new(self.algo, k).with_seed(self.seed).with_max_passes(self.max_passes);
        if let Some(init) = self.init {
            cfg = cfg.with_init(init);
        }
        cfg.k0 = self.k0;
        cfg
    }
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub bisect: bool,
    /// Polish the result with a full incremental run.
    #[arg(long)]
    pub refine: bool,
    /// Bisect disjoint clusters concurrently.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    #[arg(long)]
    pub out_log: Option<PathBuf>,
    /// Write 0 in the log's ms column so repeated runs compare byte for byte.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// `sample_index,cluster_id` CSV.
    #[arg(long)]
    pub labels: PathBuf,
    /// `sample_index,class` CSV; overrides classes stored in the input.
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Fail unless entropy can be computed.
    #[arg(long)]
    pub entropy: bool,
}

#[derive(Debug, Subcommand)]
pub enum PqCommand {
    Train(PqTrainArgs),
    Encode(PqEncodeArgs),
    Search(PqSearchArgs),
}

#[derive(Debug, Args)]
pub struct PqTrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = pq::DEFAULT_K_SUB)]
    pub ksub: usize,
    #[command(flatten)]
    pub algo: AlgoArgs,
    /// Codebook directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PqEncodeArgs {
    #[arg(long)]
    pub codebook: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PqSearchArgs {
    #[arg(long)]
    pub codebook: PathBuf,
    #[arg(long)]
    pub codes: PathBuf,
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// ivecs file; the first id of each row is the true nearest neighbor.
    #[arg(long)]
    pub groundtruth: PathBuf,
    #[arg(long = "topR", alias = "top-r", default_value_t = 100)]
    pub top_r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    N,
    K,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub sweep: SweepArg,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "bkm,lloyd", value_parser = parse_from_str::<Algorithm>)]
    pub algos: Vec<Algorithm>,
    /// Without an input, data comes from a seeded Gaussian mixture.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Fixed k when sweeping n.
    #[arg(long, default_value_t = 64)]
    pub k: usize,
    /// Fixed n when sweeping k (synthetic data only).
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 32)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_PASSES)]
    pub max_passes: usize,
    #[arg(long)]
    pub bisect: bool,
    /// Run sweep cells concurrently.
    #[arg(long)]
    pub parallel: bool,
}

fn resolve_format(path: &Path, given: Option<FormatArg>) -> Result<VecFormat, CliError> {
    if let Some(f) = given {
        return Ok(f.into());
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    ext.parse().map_err(|_| CliError::BadArgs(format!("cannot infer format of {}; pass --format", path.display())))
}

fn load(path: &Path, format: Option<FormatArg>, normalize: bool, limit: Option<usize>) -> Result<Dataset, CliError> {
    let format = resolve_format(path, format)?;
    let ds = match (format, limit) {
        (VecFormat::Fvecs, Some(l)) => io::read_fvecs_limit(path, Some(l))?,
        (VecFormat::Bvecs, Some(l)) => io::read_bvecs_limit(path, Some(l))?,
        (f, _) => io::load_dataset(path, f, false)?,
    };
    Ok(if normalize { ds.normalized() } else { ds })
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn emit(out: &mut dyn Write, v: &serde_json::Value) -> Result<(), CliError> {
    writeln!(out, "{v}")?;
    Ok(())
}

pub fn cmd_cluster(a: &ClusterArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ds = load(&a.input.input, a.input.format, a.input.normalize, a.input.limit)?;
    let mut cfg = a.algo.config(a.k);
    cfg.parallel_bisect = a.parallel;
    let t = Instant::now();
    let mut res = cluster(&ds, &cfg, a.bisect, a.refine)?;
    let wall_ms = ms_since(t);
    if a.no_timing {
        res.log.zero_timing();
    }
    if let Some(p) = &a.out_labels {
        io::write_labels(p, res.labels())?;
    }
    if let Some(p) = &a.out_log {
        io::write_log(p, &res.log)?;
    }
    emit(
        out,
        &json!({
            "algo": cfg.algorithm.name(),
            "init": cfg.init.name(),
            "n": ds.n(),
            "d": ds.d(),
            "k": a.k,
            "bisect": a.bisect,
            "refine": a.refine,
            "distortion": res.distortion(&ds),
            "passes": res.log.passes(),
            "gain_evals": res.log.total_gain_evals(),
            "stop": res.stop,
            "wall_ms": wall_ms,
        }),
    )
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut ds = load(&a.input.input, a.input.format, a.input.normalize, a.input.limit)?;
    let labels = io::read_labels(&a.labels)?;
    if let Some(p) = &a.classes {
        ds = ds.with_classes(io::read_index_column(p, "class")?)?;
    }
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let state = ClusterState::build(&ds, labels, k)?;
    let entropy = match metrics::dataset_entropy(&ds, &state) {
        Ok(h) => Some(h),
        Err(Error::MissingLabels) if !a.entropy => None,
        Err(e) => return Err(e.into()),
    };
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in state.sizes() {
        *histogram.entry(s).or_default() += 1;
    }
    emit(
        out,
        &json!({
            "n": ds.n(),
            "k": k,
            "distortion": metrics::average_distortion(&ds, &state),
            "entropy": entropy,
            "sizes": state.sizes(),
            "size_histogram": histogram,
        }),
    )
}

pub fn cmd_pq(c: &PqCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match c {
        PqCommand::Train(a) => {
            let ds = load(&a.train, a.format, false, a.limit)?;
            let inner = a.algo.config(2);
            let t = Instant::now();
            let cb = pq::pq_train(&ds, a.m, a.ksub, &inner, a.algo.seed)?;
            let wall_ms = ms_since(t);
            let dups = cb.duplicate_count();
            if dups > 0 {
                eprintln!("warning: {dups} duplicate sub-centroids in the trained codebook");
            }
            cb.save(&a.out)?;
            emit(out, &json!({ "m": cb.m(), "k_sub": cb.k_sub(), "d": cb.d(), "duplicates": dups, "wall_ms": wall_ms }))
        }
        PqCommand::Encode(a) => {
            let cb = Codebook::load(&a.codebook)?;
            let ds = load(&a.input.input, a.input.format, a.input.normalize, a.input.limit)?;
            let codes = pq::pq_encode(&cb, &ds)?;
            codes.save(&a.out)?;
            emit(out, &json!({ "n": codes.n(), "m": codes.m() }))
        }
        PqCommand::Search(a) => {
            let cb = Codebook::load(&a.codebook)?;
            let codes = CodeMatrix::load(&a.codes)?;
            let queries = load(&a.queries, a.format, false, None)?;
            let gt = io::read_ivecs(&a.groundtruth)?;
            if gt.len() < queries.n() {
                return Err(Error::InsufficientData { available: gt.len(), wanted: queries.n() }.into());
            }
            let nearest: Vec<usize> = gt.iter().take(queries.n()).map(|row| row[0] as usize).collect();
            let t = Instant::now();
            let results = pq::adc_search_batch(&cb, &codes, &queries, a.top_r)?;
            let wall_ms = ms_since(t);
            emit(
                out,
                &json!({
                    "queries": queries.n(),
                    "recall@1": metrics::recall_at(&results, &nearest, 1),
                    "recall@10": metrics::recall_at(&results, &nearest, 10),
                    "recall@100": metrics::recall_at(&results, &nearest, 100),
                    "wall_ms": wall_ms,
                }),
            )
        }
    }
}

/// One bench cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algo: Algorithm,
    pub value: usize,
    pub distortion: f64,
    pub wall_ms: f64,
    pub gain_evals: u64,
}

pub fn bench_rows(a: &BenchArgs) -> Result<Vec<BenchRow>, CliError> {
    if a.values.is_empty() {
        return Err(CliError::BadArgs("--values needs at least one value".into()));
    }
    let base = match &a.input {
        Some(p) => Some(load(p, a.format, false, None)?),
        None => None,
    };
    let data_for = |value: usize| -> Result<Dataset, CliError> {
        let n = match a.sweep {
            SweepArg::N => value,
            SweepArg::K => a.n,
        };
        Ok(match &base {
            Some(ds) if n > ds.n() => return Err(Error::InsufficientData { available: ds.n(), wanted: n }.into()),
            Some(ds) => ds.subset(&(0..n).collect::<Vec<_>>())?,
            None => synth::gaussian_mixture(n, a.d, 64, 10.0, 1.0, a.seed)?,
        })
    };
    let cells: Vec<(Algorithm, usize)> =
        a.values.iter().flat_map(|&v| a.algos.iter().map(move |&al| (al, v))).collect();
    let run_cell = |&(algo, value): &(Algorithm, usize)| -> Result<BenchRow, CliError> {
        let ds = data_for(value)?;
        let k = match a.sweep {
            SweepArg::N => a.k,
            SweepArg::K => value,
        };
        let cfg = ClusterConfig::new(algo, k).with_seed(a.seed).with_max_passes(a.max_passes);
        let t = Instant::now();
        let res = cluster(&ds, &cfg, a.bisect, false)?;
        let wall_ms = ms_since(t);
        Ok(BenchRow { algo, value, distortion: res.distortion(&ds), wall_ms, gain_evals: res.log.total_gain_evals() })
    };
    if a.parallel {
        cells.par_iter().map(run_cell).collect()
    } else {
        cells.iter().map(run_cell).collect()
    }
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = bench_rows(a)?;
    let sweep = match a.sweep {
        SweepArg::N => "n",
        SweepArg::K => "k",
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algo", "sweep", "value", "distortion", "wall_ms", "gain_evals"]).map_err(std::io::Error::from)?;
    for r in rows {
        w.write_record([
            r.algo.name().to_string(),
            sweep.to_string(),
            r.value.to_string(),
            r.distortion.to_string(),
            format!("{:.3}", r.wall_ms),
            r.gain_evals.to_string(),
        ])
        .map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    match &cli.command {
        Command::Cluster(a) => cmd_cluster(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Pq(c) => cmd_pq(c, out),
        Command::Bench(a) => cmd_bench(a, out),
    }
}

/// Runs against the real stdout and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(args, &mut lock) {
        Ok(()) => 0,
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("bkm: {e}");
            e.exit_code()
        }
    }
}
