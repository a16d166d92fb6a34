//! Bisecting Boost k-means, then a global refinement pass.
//!
//!     cargo run --release --example bisecting

use bkmeans::bisect::{bisecting_cluster, refine, secting_cost};
use bkmeans::synth::gaussian_mixture;
use bkmeans::{Algorithm, ClusterConfig};

fn main() -> bkmeans::Result<()> {
    let ds = gaussian_mixture(20_000, 32, 256, 10.0, 4.0, 2)?;
    let cfg = ClusterConfig::new(Algorithm::Bkm, 256);

    let split = bisecting_cluster(&ds, &cfg)?;
    let before = split.distortion(&ds);
    println!("bisecting: {before:.3} after {} splits, {} gain evaluations", split.log.passes(), split.log.total_gain_evals());

    let refined = refine(split.state, &ds, &cfg)?;
    println!(
        "refined:   {:.3} after {} passes, {} gain evaluations",
        refined.distortion(&ds),
        refined.log.passes(),
        refined.log.total_gain_evals()
    );

    println!("\ncomparisons of an even s-way split, n = 1024, k = 1024");
    for s in [2, 3, 4, 8, 16] {
        println!("  s = {s:2}: {:.0}", secting_cost(1024, 1024, s));
    }
    Ok(())
}
