//! Every clusterer on the same data, direct and bisecting.
//!
//!     cargo run --release --example baselines

use std::time::Instant;

use bkmeans::synth::gaussian_mixture;
use bkmeans::{cluster, Algorithm, ClusterConfig};

fn main() -> bkmeans::Result<()> {
    let ds = gaussian_mixture(8_000, 16, 100, 10.0, 3.0, 4)?;
    println!("{:<10} {:>10} {:>10} {:>8}", "algo", "direct", "bisecting", "ms");
    for algo in Algorithm::ALL {
        let cfg = ClusterConfig::new(algo, 50).with_seed(7);
        let t = Instant::now();
        let direct = cluster(&ds, &cfg, false, false)?;
        let split = cluster(&ds, &cfg, true, false)?;
        println!(
            "{:<10} {:>10.3} {:>10.3} {:>8.0}",
            algo.name(),
            direct.distortion(&ds),
            split.distortion(&ds),
            t.elapsed().as_secs_f64() * 1e3
        );
    }
    Ok(())
}
