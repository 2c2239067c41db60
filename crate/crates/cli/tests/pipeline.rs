//! Output of one subcommand fed to another, over seeded runs.

mod common;

use common::bornlab;

fn run_ok(args: &[&str]) -> Vec<u8> {
    let out = bornlab(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn pipelines_succeed_on_seeded_runs() {
    let dir = tempfile::tempdir().unwrap();
    for n in 2..=5 {
        let dim = n.to_string();
        for seed in 0..50 {
            let seed = seed.to_string();
            let uni = dir.path().join("uni.json");
            let haar = dir.path().join("haar.json");
            let table = dir.path().join("table.csv");
            let (uni, haar, table) = (
                uni.to_str().unwrap(),
                haar.to_str().unwrap(),
                table.to_str().unwrap(),
            );
            let sample = ["sample", "--dim", &dim, "--seed", &seed, "--kind"];
            run_ok(&[&sample[..], &["unistochastic", "--out", uni]].concat());
            run_ok(&[&sample[..], &["haar-unitary", "--out", haar]].concat());

            run_ok(&["check", uni, "--seed", &seed]);
            run_ok(&["recover", uni, "--seed", &seed]);
            run_ok(&["born", "--unitary", haar, "--out", table]);
            run_ok(&["check", table, "--seed", &seed]);
        }
    }
}

#[test]
fn sampled_bistochastic_sums_to_one() {
    for seed in 0..20 {
        let out = run_ok(&[
            "sample",
            "--kind",
            "bistochastic",
            "--dim",
            "3",
            "--seed",
            &seed.to_string(),
        ]);
        let doc: serde_json::Value = serde_json::from_slice(&out).unwrap();
        let rows: Vec<Vec<f64>> = serde_json::from_value(doc["data"].clone()).unwrap();
        for i in 0..3 {
            assert!((rows[i].iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!((rows.iter().map(|r| r[i]).sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn sampled_haar_is_unitary() {
    let out = run_ok(&["sample", "--kind", "haar-unitary", "--dim", "3", "--seed", "1"]);
    let text = String::from_utf8(out).unwrap();
    let u = bornlab::format::parse_complex_matrix(&text).unwrap();
    assert!(u.unitarity_deviation() <= 1e-12);
}
