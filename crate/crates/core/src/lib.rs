//! Objective-driven incremental k-means.
//!
//! Clusters are tracked by their composite (sum) vectors and sizes, and
//! samples are relocated one at a time whenever the move raises
//! `Σ_r D_r'D_r / n_r`. Direct k-way and bisecting drivers are provided,
//! along with Lloyd, k-means++, Mini-Batch and LVQ baselines, distortion
//! and entropy metrics, benchmark-format IO and a product-quantization
//! search harness.

pub mod baselines;
pub mod bisect;
pub mod boost;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod io;
pub mod log;
pub mod metrics;
pub mod objective;
pub mod pq;
pub mod run;
pub mod state;
pub mod synth;

pub use config::{Algorithm, ClusterConfig, InitMode, SplitPriority};
pub use data::Dataset;
pub use error::{Error, Result};
pub use log::{IterationLog, PassRecord};
pub use objective::{apply_move, move_gain, MoveGain};
pub use run::{cluster, cluster_direct, Clusterer, Clustering, StopReason};
pub use state::ClusterState;
