//! Per-pass distortion of Boost k-means against Lloyd on the same data.
//!
//!     cargo run --release --example direct_kway

use bkmeans::synth::gaussian_mixture;
use bkmeans::{cluster_direct, Algorithm, ClusterConfig};

fn main() -> bkmeans::Result<()> {
    let ds = gaussian_mixture(10_000, 32, 64, 10.0, 5.0, 1)?;
    let bkm = cluster_direct(&ds, &ClusterConfig::new(Algorithm::Bkm, 64))?;
    let lloyd = cluster_direct(&ds, &ClusterConfig::new(Algorithm::Lloyd, 64))?;

    println!("pass,bkm,lloyd");
    let passes = bkm.log.entries.len().max(lloyd.log.entries.len());
    for p in 0..passes {
        let cell = |log: &bkmeans::IterationLog| log.entries.get(p).map_or(String::new(), |e| format!("{:.3}", e.distortion));
        println!("{p},{},{}", cell(&bkm.log), cell(&lloyd.log));
    }
    let level = lloyd.distortion(&ds);
    eprintln!(
        "lloyd converged at {level:.3} after {} passes; bkm got there at pass {:?} and finished at {:.3}",
        lloyd.log.passes(),
        bkm.log.first_pass_reaching(level),
        bkm.distortion(&ds)
    );
    Ok(())
}
