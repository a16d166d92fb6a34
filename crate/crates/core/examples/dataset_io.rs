//! Writing and reading the vector formats, label dumps and run logs.
//!
//!     cargo run --example dataset_io

use bkmeans::io::{read_fvecs, read_labeled_csv, read_labels, read_log, write_fvecs, write_labeled_csv, write_labels, write_log};
use bkmeans::synth::gaussian_mixture;
use bkmeans::{cluster_direct, Algorithm, ClusterConfig};

fn main() -> bkmeans::Result<()> {
    let dir = std::env::temp_dir().join("bkmeans-io-example");
    std::fs::create_dir_all(&dir).map_err(|e| bkmeans::Error::Io { path: dir.clone(), source: e })?;

    let ds = gaussian_mixture(1_000, 8, 5, 10.0, 1.0, 7)?;
    write_fvecs(&dir.join("data.fvecs"), &ds)?;
    write_labeled_csv(&dir.join("data.csv"), &ds)?;
    let from_fvecs = read_fvecs(&dir.join("data.fvecs"))?;
    let from_csv = read_labeled_csv(&dir.join("data.csv"))?;
    println!("fvecs: {} x {}; csv: {} x {} with classes: {}", from_fvecs.n(), from_fvecs.d(), from_csv.n(), from_csv.d(), from_csv.classes().is_some());

    let out = cluster_direct(&from_fvecs, &ClusterConfig::new(Algorithm::BkmFast, 5))?;
    write_labels(&dir.join("labels.csv"), out.labels())?;
    write_log(&dir.join("log.csv"), &out.log)?;
    assert_eq!(read_labels(&dir.join("labels.csv"))?, out.labels());
    assert_eq!(read_log(&dir.join("log.csv"))?, out.log);
    println!("wrote and re-read labels and a {}-pass log under {}", out.log.passes(), dir.display());
    Ok(())
}
