use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spin1-cdd"));
    c.env_remove("SPIN1_CDD_SEED");
    c
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, data)
}

fn manifest(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn decay_noiseless_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["decay", "--var", "0", "--out", "d.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let (header, data) = rows(&dir.path().join("d.csv"));
    assert_eq!(header, ["t", "abs_coherence", "phase"]);
    let first = data[0][1];
    assert!(data.iter().all(|r| r[1] == first));
    assert!(dir.path().join("d.manifest.json").exists());
}

#[test]
fn decay_ratio_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "decay",
            "--var",
            "1",
            "--alpha",
            "1",
            "--m",
            "0",
            "--mp",
            "1",
            "--normalized",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let (_, data) = rows(&dir.path().join("decay.csv"));
    let row = data.iter().find(|r| (r[0] - 1.0).abs() < 1e-12).unwrap();
    assert!((row[1] - 0.692_2).abs() < 1e-4, "{}", row[1]);
    let text = fs::read_to_string(dir.path().join("decay.csv")).unwrap();
    let cell = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    // scientific notation, at least 12 significant digits
    assert!(
        cell.contains('e') && cell.split('e').next().unwrap().len() >= 13,
        "{cell}"
    );
}

#[test]
fn decay_mc_is_reproducible_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "decay",
        "--mc",
        "--trajectories",
        "300",
        "--points",
        "11",
        "--t-max",
        "2",
    ];
    let a = run(&[&args[..], &["--out", "a.csv"]].concat(), dir.path());
    let b = run(&[&args[..], &["--out", "b.csv"]].concat(), dir.path());
    assert!(a.status.success() && b.status.success());
    let ma = manifest(&dir.path().join("a.manifest.json"));
    let mb = manifest(&dir.path().join("b.manifest.json"));
    assert_eq!(ma["sha256"], mb["sha256"]);
    assert_eq!(ma["master_seed"], mb["master_seed"]);
    let (header, _) = rows(&dir.path().join("a.csv"));
    assert_eq!(header, ["t", "abs_coherence", "phase", "mc_abs", "mc_stderr"]);

    let c = bin()
        .args(args)
        .args(["--out", "c.csv"])
        .env("SPIN1_CDD_SEED", "12345")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(c.status.success());
    let mc = manifest(&dir.path().join("c.manifest.json"));
    assert_eq!(mc["master_seed"], 12345);
    assert_ne!(mc["sha256"], ma["sha256"]);
}

#[test]
fn cdd_figure_one_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["cdd", "--alpha", "0.1", "--omega-e", "1", "--t-max", "10", "--scaled"],
        dir.path(),
    );
    assert!(out.status.success());
    let (header, data) = rows(&dir.path().join("cdd.csv"));
    assert_eq!(header, ["t", "p_analytic", "validity_flag"]);
    assert_eq!(data[0][1], 0.0);
    let last = data.last().unwrap();
    assert!((last[1] - 4.5988).abs() < 5e-4, "{}", last[1]);
    assert_eq!(last[2], 1.0);
}

#[test]
fn cdd_figure_two_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let slope = |we: &str, name: &str| {
        let out = run(
            &[
                "cdd",
                "--alpha",
                "10",
                "--omega-e",
                we,
                "--t-max",
                "20",
                "--points",
                "21",
                "--scaled",
                "--out",
                name,
            ],
            dir.path(),
        );
        assert!(out.status.success());
        let (_, d) = rows(&dir.path().join(name));
        (d[20][1] - d[10][1]) / (d[20][0] - d[10][0])
    };
    let ratio = slope("1", "a.csv") / slope("2", "b.csv");
    assert!((ratio - 104.0 / 101.0).abs() < 1e-9);
}

#[test]
fn cdd_rejects_same_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["cdd", "--from", "x", "--to", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("distinct"));
}

#[test]
fn cdd_with_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["cdd", "--mc", "--trajectories", "50", "--t-max", "5", "--points", "6"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, data) = rows(&dir.path().join("cdd.csv"));
    assert_eq!(header.len(), 5);
    assert_eq!(data[0][3], 0.0);
    assert!(data[5][3] > 0.0);
}

#[test]
fn dressed_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["dressed", "--omega-d", "1", "--epsilon", "0"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["frequencies"]["x"], 0.0);
    assert_eq!(v["frequencies"]["y"], 1.0);
    assert_eq!(v["frequencies"]["z"], -1.0);

    let out = run(&["dressed", "--omega-d", "1", "--epsilon", "0.1"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["frequencies"]["y"].as_f64().unwrap() - 0.951_249_2).abs() < 1e-7);
    for xi in ["x", "y", "z"] {
        assert!(v["residuals"][xi].as_f64().unwrap() < 1e-10);
    }
    let out = run(&["dressed", "--omega-d", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["decay", "--var", "abc"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["decay", "--var", "-1"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["decay", "--m", "2"], dir.path()).status.code(), Some(2));
}

#[test]
fn validate_quick_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&["validate", "--quick", "--out", "a.json"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(&["validate", "--quick", "--out", "b.json"], dir.path());
    assert_eq!(b.status.code(), Some(0));
    let ra = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(ra, fs::read(dir.path().join("b.json")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn corrupted_spectrum_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["validate", "--quick", "--corrupt-spectrum", "1.05", "--out", "r.json"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("validation failed") && stderr.contains("sinc2_filter"),
        "{stderr}"
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}
