//! Cluster purity against known classes.
//!
//!     cargo run --release --example entropy

use bkmeans::metrics::dataset_entropy;
use bkmeans::synth::gaussian_mixture;
use bkmeans::{cluster_direct, Algorithm, ClusterConfig};

fn main() -> bkmeans::Result<()> {
    // class ids come attached to the synthetic samples
    let ds = gaussian_mixture(3_000, 16, 10, 10.0, 4.0, 5)?;
    for algo in [Algorithm::Bkm, Algorithm::Lloyd, Algorithm::KMeansPP, Algorithm::Lvq] {
        let out = cluster_direct(&ds, &ClusterConfig::new(algo, 10))?;
        println!("{:<9} entropy {:.4}  distortion {:.3}", algo.name(), dataset_entropy(&ds, &out.state)?, out.distortion(&ds));
    }
    Ok(())
}
