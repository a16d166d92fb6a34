//! Product-quantizer training with an injectable clusterer, then ADC search.
//!
//!     cargo run --release --example pq_search

use bkmeans::metrics::{exact_nearest, recall_at};
use bkmeans::pq::{adc_search_batch, pq_encode, pq_train};
use bkmeans::synth::GaussianMixture;
use bkmeans::{Algorithm, ClusterConfig};

fn main() -> bkmeans::Result<()> {
    let mix = GaussianMixture::new(1000, 64, 10.0, 10.0, 6);
    let learn = mix.sample(5_000, 1)?;
    let base = mix.sample(5_000, 2)?;
    let queries = mix.sample(200, 3)?;
    let truth: Vec<usize> = exact_nearest(&base, &queries, 1).into_iter().map(|r| r[0]).collect();

    for algo in [Algorithm::Bkm, Algorithm::Lloyd] {
        let inner = ClusterConfig::new(algo, 2).with_max_passes(20);
        for m in [4, 8] {
            let cb = pq_train(&learn, m, 256, &inner, 0)?;
            let codes = pq_encode(&cb, &base)?;
            let results = adc_search_batch(&cb, &codes, &queries, 100)?;
            let r: Vec<String> = [1, 10, 100].iter().map(|&r| format!("{:.3}", recall_at(&results, &truth, r))).collect();
            println!("{:<6} m={m}: recall@1/10/100 = {}", algo.name(), r.join(" / "));
        }
    }
    Ok(())
}
