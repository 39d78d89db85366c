use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qnnmut(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnnmut"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn exit_codes_separate_config_from_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&qnnmut(d, &["--help"])), 0);
    assert_eq!(code(&qnnmut(d, &["train", "--bogus"])), 1);
    assert_eq!(
        code(&qnnmut(
            d,
            &["train", "--dataset", "missing.json", "--out", "m.json"]
        )),
        1
    );
    assert_eq!(
        code(&qnnmut(
            d,
            &[
                "gen-mutants",
                "--model",
                "m.json",
                "--ref",
                "r.csv",
                "--operator",
                "XYZ",
                "--out",
                "o",
                "--mutants-dir",
                "x"
            ]
        )),
        1
    );

    // a well-formed file with invalid contents is a configuration error
    fs::write(
        d.join("bad.json"),
        r#"{"source":{"kind":"synthetic-blobs"},"train_fraction":1.5}"#,
    )
    .unwrap();
    assert_eq!(
        code(&qnnmut(
            d,
            &["train", "--dataset", "bad.json", "--out", "m.json"]
        )),
        1
    );
}

#[test]
fn pipeline_is_reproducible_from_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("ds.json"),
        r#"{"source":{"kind":"synthetic-blobs"},"size":160,"overlap":0.2,"seed":4}"#,
    )
    .unwrap();
    fs::write(d.join("cfg.json"), r#"{"search":{"shots":{"Finite":200}}}"#).unwrap();
    let train = [
        "train",
        "--dataset",
        "ds.json",
        "--qubits",
        "3",
        "--layers",
        "1",
        "--epochs",
        "6",
        "--lr",
        "0.3",
        "--seed",
        "2",
        "--out",
        "model.json",
        "--train-csv",
        "train.csv",
        "--pool-csv",
        "pool.csv",
    ];
    let out = qnnmut(d, &train);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let model = fs::read_to_string(d.join("model.json")).unwrap();
    assert_eq!(code(&qnnmut(d, &train)), 0);
    assert_eq!(fs::read_to_string(d.join("model.json")).unwrap(), model);

    let suite = [
        "suite-build",
        "--model",
        "model.json",
        "--pool",
        "pool.csv",
        "--kind",
        "ori",
        "--size",
        "15",
        "--seed",
        "2",
        "--out",
        "ori.csv",
    ];
    assert_eq!(code(&qnnmut(d, &suite)), 0);
    assert_eq!(
        fs::read_to_string(d.join("ori.csv"))
            .unwrap()
            .lines()
            .count(),
        31
    );

    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let report = format!("report-{run}.json");
        let muts = format!("muts-{run}");
        let gen = [
            "gen-mutants",
            "--model",
            "model.json",
            "--ref",
            "train.csv",
            "--operator",
            "PF",
            "--config",
            "cfg.json",
            "--seed",
            "9",
            "--out",
            &report,
            "--mutants-dir",
            &muts,
        ];
        let out = qnnmut(d, &gen);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let scores = format!("scores-{run}.csv");
        let score = [
            "score",
            "--model",
            "model.json",
            "--mutants-dir",
            &muts,
            "--suite",
            "ori.csv",
            "--config",
            "cfg.json",
            "--seed",
            "9",
            "--out",
            &scores,
        ];
        let out = qnnmut(d, &score);
        // an empty mutant directory is reported, not scored
        if fs::read_dir(d.join(&muts)).unwrap().next().is_none() {
            assert_eq!(code(&out), 1);
        } else {
            assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        }
        reports.push((
            fs::read_to_string(d.join(&report)).unwrap(),
            fs::read_to_string(d.join(&scores)).unwrap_or_default(),
        ));
    }
    assert_eq!(reports[0], reports[1]);
}
