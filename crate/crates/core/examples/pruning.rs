//! Top-k0 candidate pruning: fewer gain evaluations, nearly the same result.
//!
//!     cargo run --release --example pruning

use bkmeans::synth::gaussian_mixture;
use bkmeans::{cluster_direct, Algorithm, ClusterConfig};

fn main() -> bkmeans::Result<()> {
    let ds = gaussian_mixture(10_000, 32, 64, 10.0, 5.0, 3)?;
    let full = cluster_direct(&ds, &ClusterConfig::new(Algorithm::Bkm, 64))?;
    println!("k0     distortion  passes  gain_evals");
    println!("all    {:10.3}  {:6}  {:10}", full.distortion(&ds), full.log.passes(), full.log.total_gain_evals());
    for k0 in [2, 4, 8, 16, 64] {
        let out = cluster_direct(&ds, &ClusterConfig::new(Algorithm::Bkm, 64).with_k0(k0))?;
        println!("{k0:<6} {:10.3}  {:6}  {:10}", out.distortion(&ds), out.log.passes(), out.log.total_gain_evals());
    }
    Ok(())
}
