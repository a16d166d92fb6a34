use std::fs;
use std::path::Path;

use bkmeans::cli::{bench_rows, run, BenchArgs, SweepArg};
use bkmeans::io::{read_labels, read_log, write_fvecs, write_ivecs, write_labeled_csv, write_labels};
use bkmeans::metrics::{average_distortion, entropy, exact_nearest, recall_at};
use bkmeans::synth::{gaussian_mixture, uniform};
use bkmeans::{Algorithm, ClusterState, Dataset};
use serde_json::Value;
use tempfile::{tempdir, TempDir};

fn bkm(args: &[&str]) -> Value {
    let mut out = Vec::new();
    let mut full = vec!["bkm"];
    full.extend_from_slice(args);
    run(full, &mut out).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    serde_json::from_slice(&out).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture() -> (TempDir, Dataset) {
    let dir = tempdir().unwrap();
    let ds = gaussian_mixture(600, 4, 6, 10.0, 1.5, 3).unwrap();
    write_fvecs(&dir.path().join("x.fvecs"), &ds).unwrap();
    write_labeled_csv(&dir.path().join("x.csv"), &ds).unwrap();
    (dir, ds)
}

#[test]
fn cluster_writes_labels_and_log() {
    let (dir, ds) = fixture();
    let p = dir.path();
    let v = bkm(&[
        "cluster", "--input", s(&p.join("x.fvecs")), "--algo", "bkm", "--k", "6", "--seed", "4",
        "--out-labels", s(&p.join("l.csv")), "--out-log", s(&p.join("log.csv")),
    ]);
    let labels = read_labels(&p.join("l.csv")).unwrap();
    let log = read_log(&p.join("log.csv")).unwrap();
    let state = ClusterState::build(&ds, labels, 6).unwrap();
    let d = v["distortion"].as_f64().unwrap();
    assert!((d - average_distortion(&ds, &state)).abs() <= 1e-9 * d);
    assert_eq!(log.final_distortion().unwrap(), d);
    assert_eq!(v["passes"].as_u64().unwrap() as usize, log.passes());
    for key in ["algo", "init", "n", "d", "k", "gain_evals", "stop", "wall_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["stop"], "converged");
}

#[test]
fn pruning_with_k0_equal_k_gives_an_identical_log() {
    let (dir, _) = fixture();
    let p = dir.path();
    let input = p.join("x.fvecs");
    let mut logs = Vec::new();
    for (i, extra) in [&[][..], &["--k0", "6"][..]].iter().enumerate() {
        let log = p.join(format!("log{i}.csv"));
        let labels = p.join(format!("l{i}.csv"));
        let mut args = vec![
            "cluster", "--input", s(&input), "--k", "6", "--seed", "9", "--no-timing", "--out-log", s(&log),
            "--out-labels", s(&labels),
        ];
        args.extend_from_slice(extra);
        bkm(&args);
        logs.push((fs::read(&log).unwrap(), fs::read(&labels).unwrap()));
    }
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn same_flags_same_outputs() {
    let (dir, _) = fixture();
    let p = dir.path();
    let mut outs = Vec::new();
    for i in 0..2 {
        let log = p.join(format!("log{i}.csv"));
        let labels = p.join(format!("l{i}.csv"));
        let mut v = bkm(&[
            "cluster", "--input", s(&p.join("x.csv")), "--algo", "minibatch", "--k", "5", "--seed", "2",
            "--bisect", "--no-timing", "--out-log", s(&log), "--out-labels", s(&labels),
        ]);
        v.as_object_mut().unwrap().remove("wall_ms");
        outs.push((v, fs::read(&log).unwrap(), fs::read(&labels).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn bisect_then_refine_pipeline() {
    let (dir, ds) = fixture();
    let input = dir.path().join("x.fvecs");
    let base = ["cluster", "--input", s(&input), "--algo", "bkm", "--init", "none", "--k", "12", "--bisect"];
    let bis = bkm(&base);
    let mut with_refine = base.to_vec();
    with_refine.push("--refine");
    let refined = bkm(&with_refine);
    assert!(refined["distortion"].as_f64().unwrap() <= bis["distortion"].as_f64().unwrap());
    let direct = bkmeans::cluster(
        &ds,
        &bkmeans::ClusterConfig::new(Algorithm::Bkm, 12),
        true,
        true,
    )
    .unwrap();
    assert_eq!(refined["distortion"].as_f64().unwrap(), direct.distortion(&ds));
}

#[test]
fn eval_reports_distortion_entropy_and_sizes() {
    let dir = tempdir().unwrap();
    let p = dir.path();
    let ds = Dataset::from_rows(&[[0.0f32, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]])
        .unwrap()
        .with_classes(vec![0, 0, 1, 1])
        .unwrap();
    write_labeled_csv(&p.join("d.csv"), &ds).unwrap();
    write_labels(&p.join("pure.csv"), &[0, 0, 1, 1]).unwrap();
    let v = bkm(&["eval", "--input", s(&p.join("d.csv")), "--labels", s(&p.join("pure.csv")), "--entropy"]);
    assert_eq!(v["entropy"].as_f64().unwrap(), 0.0);
    assert_eq!(v["distortion"].as_f64().unwrap(), 0.25);
    assert_eq!(v["size_histogram"]["2"], 2);

    write_labels(&p.join("single.csv"), &[0, 1, 2, 3]).unwrap();
    let v = bkm(&["eval", "--input", s(&p.join("d.csv")), "--labels", s(&p.join("single.csv"))]);
    assert_eq!(v["distortion"].as_f64().unwrap(), 0.0);

    // a fixed fixture against the metrics module
    let labels = vec![0, 1, 0, 1];
    write_labels(&p.join("mixed.csv"), &labels).unwrap();
    let v = bkm(&["eval", "--input", s(&p.join("d.csv")), "--labels", s(&p.join("mixed.csv"))]);
    let st = ClusterState::build(&ds, labels, 2).unwrap();
    assert_eq!(v["distortion"].as_f64().unwrap(), average_distortion(&ds, &st));
    assert_eq!(v["entropy"].as_f64().unwrap(), entropy(&st, &[0, 0, 1, 1], 2).unwrap());

    // classes from a side file override the input
    fs::write(p.join("classes.csv"), "sample_index,class\n0,0\n1,1\n2,0\n3,1\n").unwrap();
    let v = bkm(&[
        "eval", "--input", s(&p.join("d.csv")), "--labels", s(&p.join("mixed.csv")), "--classes",
        s(&p.join("classes.csv")),
    ]);
    assert_eq!(v["entropy"].as_f64().unwrap(), 0.0);
}

#[test]
fn eval_entropy_without_classes_fails() {
    let dir = tempdir().unwrap();
    let p = dir.path();
    let ds = uniform(10, 2, 0.0, 1.0, 0).unwrap();
    write_fvecs(&p.join("u.fvecs"), &ds).unwrap();
    write_labels(&p.join("l.csv"), &[0, 1, 0, 1, 0, 1, 0, 1, 0, 1]).unwrap();
    let mut out = Vec::new();
    let err = run(
        ["bkm", "eval", "--input", s(&p.join("u.fvecs")), "--labels", s(&p.join("l.csv")), "--entropy"],
        &mut out,
    )
    .unwrap_err();
    assert!(matches!(err, bkmeans::cli::CliError::Run(bkmeans::Error::MissingLabels)));
    assert_eq!(err.exit_code(), 1);
    let v = bkm(&["eval", "--input", s(&p.join("u.fvecs")), "--labels", s(&p.join("l.csv"))]);
    assert!(v["entropy"].is_null());
}

#[test]
fn missing_input_exits_nonzero() {
    let code = bkmeans::cli::main_with(["bkm", "cluster", "--input", "/nonexistent/x.fvecs", "--k", "2"]);
    assert_eq!(code, 1);
    assert_eq!(bkmeans::cli::main_with(["bkm", "cluster", "--k", "2"]), 2);
}

#[test]
fn pq_saturated_codebook_has_perfect_recall() {
    let dir = tempdir().unwrap();
    let p = dir.path();
    let ds = uniform(16, 4, -1.0, 1.0, 5).unwrap();
    write_fvecs(&p.join("base.fvecs"), &ds).unwrap();
    let gt: Vec<Vec<i32>> = (0..16).map(|i| vec![i]).collect();
    write_ivecs(&p.join("gt.ivecs"), &gt).unwrap();
    let cb = p.join("cb");
    let v = bkm(&["pq", "train", "--train", s(&p.join("base.fvecs")), "--m", "1", "--ksub", "16", "--out", s(&cb)]);
    assert_eq!(v["duplicates"], 0);
    bkm(&["pq", "encode", "--codebook", s(&cb), "--input", s(&p.join("base.fvecs")), "--out", s(&p.join("codes"))]);
    let v = bkm(&[
        "pq", "search", "--codebook", s(&cb), "--codes", s(&p.join("codes")), "--queries", s(&p.join("base.fvecs")),
        "--groundtruth", s(&p.join("gt.ivecs")), "--topR", "10",
    ]);
    assert_eq!(v["recall@1"], 1.0);
    assert_eq!(v["queries"], 16);
}

#[test]
fn pq_search_averages_over_queries() {
    let dir = tempdir().unwrap();
    let p = dir.path();
    let base = uniform(2000, 8, 0.0, 1.0, 1).unwrap();
    let queries = uniform(1000, 8, 0.0, 1.0, 2).unwrap();
    write_fvecs(&p.join("base.fvecs"), &base).unwrap();
    write_fvecs(&p.join("q.fvecs"), &queries).unwrap();
    let truth = exact_nearest(&base, &queries, 1);
    let gt: Vec<Vec<i32>> = truth.iter().map(|r| vec![r[0] as i32]).collect();
    write_ivecs(&p.join("gt.ivecs"), &gt).unwrap();
    let cb = p.join("cb");
    bkm(&[
        "pq", "train", "--train", s(&p.join("base.fvecs")), "--m", "2", "--ksub", "16", "--algo", "bkm-fast",
        "--max-passes", "10", "--out", s(&cb),
    ]);
    bkm(&["pq", "encode", "--codebook", s(&cb), "--input", s(&p.join("base.fvecs")), "--out", s(&p.join("codes"))]);
    let v = bkm(&[
        "pq", "search", "--codebook", s(&cb), "--codes", s(&p.join("codes")), "--queries", s(&p.join("q.fvecs")),
        "--groundtruth", s(&p.join("gt.ivecs")),
    ]);

    let book = bkmeans::pq::Codebook::load(&cb).unwrap();
    let codes = bkmeans::pq::CodeMatrix::load(&p.join("codes")).unwrap();
    let results = bkmeans::pq::adc_search_batch(&book, &codes, &queries, 100).unwrap();
    let nn: Vec<usize> = truth.iter().map(|r| r[0]).collect();
    for r in [1usize, 10, 100] {
        assert_eq!(v[format!("recall@{r}")].as_f64().unwrap(), recall_at(&results, &nn, r));
    }
    let r: Vec<f64> = [1, 10, 100].iter().map(|r| v[format!("recall@{r}")].as_f64().unwrap()).collect();
    assert!(r[0] <= r[1] && r[1] <= r[2]);
}

fn bench_args(sweep: SweepArg, values: Vec<usize>) -> BenchArgs {
    BenchArgs {
        sweep,
        values,
        algos: vec![Algorithm::Bkm],
        input: None,
        format: None,
        k: 32,
        n: 8192,
        d: 16,
        seed: 0,
        max_passes: 130,
        bisect: true,
        parallel: false,
    }
}

#[test]
fn bench_csv_rows() {
    let mut out = Vec::new();
    run(["bkm", "bench", "--sweep", "n", "--values", "500,1000", "--k", "8", "--algos", "bkm,lloyd,lvq"], &mut out)
        .unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "algo,sweep,value,distortion,wall_ms,gain_evals");
    assert_eq!(lines.len(), 1 + 6);
    assert!(lines[1].starts_with("bkm,n,500,"));

    let mut a = bench_args(SweepArg::K, vec![4, 8]);
    a.n = 1000;
    let serial = bench_rows(&a).unwrap();
    a.parallel = true;
    let parallel = bench_rows(&a).unwrap();
    for (x, y) in serial.iter().zip(&parallel) {
        assert_eq!((x.algo, x.value, x.distortion, x.gain_evals), (y.algo, y.value, y.distortion, y.gain_evals));
    }
}

fn median_ms(a: &BenchArgs) -> Vec<f64> {
    let mut runs: Vec<Vec<f64>> = (0..3).map(|_| bench_rows(a).unwrap().iter().map(|r| r.wall_ms).collect()).collect();
    (0..runs[0].len())
        .map(|i| {
            let mut v: Vec<f64> = runs.iter_mut().map(|r| r[i]).collect();
            v.sort_by(f64::total_cmp);
            v[1]
        })
        .collect()
}

#[test]
fn bisecting_time_grows_sublinearly_in_k() {
    let ks = vec![8, 16, 32, 64, 128];
    let t = median_ms(&bench_args(SweepArg::K, ks.clone()));
    // a 16x larger k costs far less than 16x the time
    let growth = t[4] / t[0];
    assert!(growth < 16.0 / 2.0, "time ratio {growth:.2} for k 8 -> 128: {t:?}");
}

#[test]
fn bisecting_time_is_near_linear_in_n() {
    let ns = vec![4096, 8192, 16384, 32768];
    let t = median_ms(&bench_args(SweepArg::N, ns.clone()));
    // least-squares line through the origin
    let slope = ns.iter().zip(&t).map(|(&n, &t)| n as f64 * t).sum::<f64>()
        / ns.iter().map(|&n| (n as f64).powi(2)).sum::<f64>();
    for (&n, &ms) in ns.iter().zip(&t) {
        let fit = slope * n as f64;
        assert!(ms <= 2.0 * fit && ms >= fit / 2.0, "n = {n}: {ms:.1} ms vs fit {fit:.1} ms ({t:?})");
    }
}
