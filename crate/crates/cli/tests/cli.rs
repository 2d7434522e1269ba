use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bsft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsft"))
        .args(args)
        .env_remove("BSFT_CHECKPOINT_DIR")
        .output()
        .expect("spawn bsft")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(bsft(&["--no-such-flag"]).status.code(), Some(2));
    assert_eq!(bsft(&["code", "info"]).status.code(), Some(2));
    assert_eq!(bsft(&["code", "info", "--n", "1"]).status.code(), Some(2));
    assert_eq!(
        bsft(&["analyze", "exact", "--n", "3", "--ec", "nope", "--order", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bsft(&[
            "analyze",
            "mc",
            "--n",
            "3",
            "--ec",
            "steane",
            "--order",
            "2",
            "--samples",
            "0"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(bsft(&["--help"]).status.code(), Some(0));
}

#[test]
fn code_info_reports_parameters() {
    let o = bsft(&["code", "info", "--n", "3"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("[[9,1,3]]"), "{s}");
    assert!(s.contains("stabilizer generators: 4"), "{s}");
    let s = stdout(&bsft(&["code", "info", "--n", "5"]));
    assert!(
        s.contains("[[25,1,5]]") && s.contains("stabilizer generators: 8"),
        "{s}"
    );
}

#[test]
fn single_faults_are_benign() {
    let dir = tempfile::tempdir().unwrap();
    for ec in ["steane", "knill", "gauge"] {
        let out = dir.path().join(format!("{ec}.json"));
        let o = bsft(&[
            "analyze",
            "exact",
            "--n",
            "3",
            "--ec",
            ec,
            "--order",
            "1",
            "--out",
            p(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(v["method"]["exact"]["malignant_count"], 0, "{ec}");
        assert!(dir.path().join(format!("{ec}.run.json")).exists());
    }
}

#[test]
fn emitted_circuits_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exrec.txt");
    let o = bsft(&[
        "gadget",
        "emit",
        "--n",
        "3",
        "--gadget",
        "exrec-cnot",
        "--ec",
        "steane",
        "--out",
        p(&file),
    ]);
    assert!(o.status.success());
    let o = bsft(&["simulate", "--circuit", p(&file), "--faults", "5:X"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("correct: true"));
    let o = bsft(&["gadget", "emit", "--n", "3", "--gadget", "prep+"]);
    assert!(o.status.success() && !o.stdout.is_empty());
}

#[test]
fn threshold_from_report_directory() {
    let dir = tempfile::tempdir().unwrap();
    let reports = dir.path().join("reports");
    let o = bsft(&[
        "analyze",
        "exact",
        "--n",
        "3",
        "--ec",
        "steane",
        "--order",
        "1,2",
        "--out",
        p(&reports),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("th.json");
    let o = bsft(&[
        "threshold",
        "--reports",
        p(&reports),
        "--t",
        "1",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let eps = v["epsilon_0"].as_f64().unwrap();
    assert!((eps - 6.898e-5).abs() < 1e-8, "{eps}");

    let o = bsft(&[
        "threshold",
        "--reports",
        p(&reports),
        "--t",
        "2",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mc_runs_resume_from_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "analyze".to_string(),
            "mc".into(),
            "--n".into(),
            "3".into(),
            "--ec".into(),
            "knill".into(),
            "--order".into(),
            "2".into(),
            "--samples".into(),
            "20000".into(),
            "--seed".into(),
            "9".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |out: &Path, env: Option<&Path>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_bsft"));
        c.args(args(out)).env_remove("BSFT_CHECKPOINT_DIR");
        if let Some(e) = env {
            c.env("BSFT_CHECKPOINT_DIR", e);
        }
        c.output().unwrap()
    };
    let plain = dir.path().join("plain.json");
    assert!(run(&plain, None).status.success());

    let root = dir.path().join("ckpt");
    let first = dir.path().join("first.json");
    assert!(run(&first, Some(&root)).status.success());
    assert!(
        fs::read_dir(&root).unwrap().next().is_some(),
        "no checkpoint written"
    );
    let second = dir.path().join("second.json");
    let o = run(&second, Some(&root));
    assert!(o.status.success());

    let read = |p: &Path| fs::read_to_string(p).unwrap();
    assert_eq!(read(&plain), read(&first));
    assert_eq!(read(&first), read(&second));
}
