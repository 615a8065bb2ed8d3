use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nntensor::io::write_tensor;
use nntensor::tensor::outer3;

fn nntensor(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nntensor")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn planted_rank_one_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let t = outer3(&[1.0, 2.0, 0.5, 3.0], &[0.2, 1.0, 4.0], &[1.0, 1.5, 2.0, 0.1, 0.7]).unwrap();
    write_tensor(dir.path().join("t.bin"), &t).unwrap();
    let o = nntensor(
        &["decompose", "--input", "t.bin", "--method", "nncpd", "--rank", "1", "--out-dir", "out"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("error "));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/result.json")).unwrap()).unwrap();
    assert_eq!(json["method"], "nncpd");
    assert_eq!(json["rank"], 1);
    assert!(json["error"].as_f64().unwrap() <= 1e-8 * t.frobenius_norm());
    for f in ["A.csv", "B.csv", "C.csv", "error_history.csv"] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    let history = fs::read_to_string(dir.path().join("out/error_history.csv")).unwrap();
    assert!(history.starts_with("iteration,error\n1,"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = nntensor(
        &["decompose", "--input", "missing.bin", "--method", "nncpd", "--rank", "1", "--out-dir", "o"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.bin"));

    write_tensor(dir.path().join("t.bin"), &outer3(&[1.0], &[1.0, 2.0], &[3.0]).unwrap()).unwrap();
    let o = nntensor(
        &["decompose", "--input", "t.bin", "--method", "fixed_nmf", "--rank", "1", "--out-dir", "o"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--slice-mode"));

    let o =
        nntensor(&["decompose", "--input", "t.bin", "--method", "tucker", "--rank", "1", "--out-dir", "o"], dir.path());
    assert_eq!(code(&o), 2);
    assert_eq!(code(&nntensor(&["transmogrify"], dir.path())), 2);
    assert_eq!(code(&nntensor(&["synth", "nosuch", "--out", "x.bin"], dir.path())), 2);
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.bin"), b"short").unwrap();
    let o = nntensor(
        &["decompose", "--input", "bad.bin", "--method", "nncpd", "--rank", "1", "--out-dir", "o"],
        dir.path(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn synth_decompose_heatmap_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = nntensor(&["synth", "shift", "--seed", "2", "--noise", "dense", "--sigma", "0.01", "--out", "s.bin"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = nntensor(
        &[
            "decompose",
            "--input",
            "s.bin",
            "--method",
            "direct_nmf",
            "--rank",
            "2",
            "--slice-mode",
            "3",
            "--max-iters",
            "50",
            "--out-dir",
            "d",
        ],
        p,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(p.join("d/A_19.csv").is_file() && p.join("d/S_0.csv").is_file());
    assert!(!p.join("d/error_history.csv").exists());
    assert_eq!(code(&nntensor(&["heatmap", "--input", "d/A_0.csv", "--out", "a.pgm"], p)), 0);
    assert!(fs::read(p.join("a.pgm")).unwrap().starts_with(b"P5\n2 14\n255\n"));
    let o = nntensor(&["synth", "correlated", "--out", "c", "--csv"], p);
    assert_eq!(code(&o), 0);
    assert!(p.join("c/slice_29.csv").is_file());
    let o = nntensor(
        &["decompose", "--input", "c", "--method", "fixed_nmf", "--rank", "3", "--slice-mode", "1", "--out-dir", "f"],
        p,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn ingest_and_keywords() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mut corpus = String::new();
    for (label, words) in [("cars", "engine wheel brake"), ("food", "bread cheese apple")] {
        for i in 0..4 {
            let text = format!("Subject: {label}\\n\\n{words} common uniq{label}{i}");
            corpus.push_str(&format!("{{\"id\":\"{label}{i}\",\"label\":\"{label}\",\"text\":\"{text}\"}}\n"));
        }
    }
    fs::write(p.join("c.jsonl"), corpus).unwrap();
    let schedule = r#"{"num_slices":2,"blocks":[{"slots":2,"members":[{"label":"cars","slices":[0,1]}]},
        {"slots":2,"members":[{"label":"food","slices":[0,1]}]}]}"#;
    fs::write(p.join("s.json"), schedule).unwrap();
    let args = [
        "ingest",
        "--corpus",
        "c.jsonl",
        "--schedule",
        "s.json",
        "--max-df",
        "0.9",
        "--out",
        "t.bin",
        "--vocab-out",
        "v.txt",
    ];
    let o = nntensor(&args, p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let vocab = fs::read_to_string(p.join("v.txt")).unwrap();
    assert_eq!(vocab, "apple\nbrake\nbread\ncheese\nengine\nwheel\n");
    let first = fs::read(p.join("t.bin")).unwrap();
    assert_eq!(code(&nntensor(&args, p)), 0);
    assert_eq!(fs::read(p.join("t.bin")).unwrap(), first);
    let t = nntensor::io::read_tensor(p.join("t.bin")).unwrap();
    assert_eq!(t.shape(), [4, 6, 2]);

    fs::write(p.join("b.csv"), "0,1\n0,0\n0,1\n0,1\n1,0\n1,0\n").unwrap();
    let o = nntensor(&["keywords", "--factor", "b.csv", "--vocab", "v.txt", "-k", "2"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stdout), "1: engine wheel\n2: apple bread\n");
    assert_eq!(code(&nntensor(&["keywords", "--factor", "b.csv", "--vocab", "v.txt", "-k", "9"], p)), 2);

    let short = r#"{"num_slices":2,"blocks":[{"slots":3,"members":[{"label":"cars","slices":[0,1]}]}]}"#;
    fs::write(p.join("short.json"), short).unwrap();
    let o = nntensor(
        &["ingest", "--corpus", "c.jsonl", "--schedule", "short.json", "--out", "t2.bin", "--vocab-out", "v2.txt"],
        p,
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cars"));
}

#[test]
fn robustness_with_config_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = "dataset = \"shift\"\nnoise = [\"lowrank1\", \"dense\"]\nsigmas = [0.01]\nruns = 2\nmethods = [\"nncpd\", \"direct_nmf\"]\n\n[solver]\nmax_iters = 30\n";
    fs::write(p.join("r.toml"), cfg).unwrap();
    let o = nntensor(&["robustness", "--config", "r.toml", "--r-max", "2", "--out-dir", "rep"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(p.join("rep/summary_dense_sigma0.01.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
    let runs = fs::read_to_string(p.join("rep/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 2 * 2 * 2 * 2);
    let again = nntensor(&["robustness", "--config", "r.toml", "--r-max", "2", "--out-dir", "rep2"], p);
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read_to_string(p.join("rep2/runs.csv")).unwrap(), runs);

    fs::write(p.join("bad.toml"), "runs = 0\n").unwrap();
    assert_eq!(code(&nntensor(&["robustness", "--config", "bad.toml", "--out-dir", "x"], p)), 2);
    fs::write(p.join("typo.toml"), "rnus = 3\n").unwrap();
    assert_eq!(code(&nntensor(&["robustness", "--config", "typo.toml", "--out-dir", "x"], p)), 2);
}
