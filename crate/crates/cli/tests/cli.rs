use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tensormor"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tensormor-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

fn run(method: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg(method).arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn column(csv_path: &Path, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_path(csv_path).unwrap();
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

const DIFFUSION: &str = r#"{"generator": "diffusion-affine", "m": 64, "d": 4}"#;

#[test]
fn pod_errors_are_non_increasing() {
    let dir = scratch("pod");
    let cfg = write_config(
        &dir,
        &format!(r#"{{"problem": {DIFFUSION}, "seed": 1, "options": {{"train_size": 100, "m": 10}}}}"#),
    );
    let out = run("pod", &cfg, &dir.join("out"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let e = column(&dir.join("out/errors.csv"), "error");
    assert_eq!(e.len(), 10);
    assert!(e.windows(2).all(|w| w[1] <= w[0]), "{e:?}");
    let summary: Value = serde_json::from_slice(&fs::read(dir.join("out/summary.json")).unwrap()).unwrap();
    let hash = tensormor_cli::run::sha256_hex(&fs::read(&cfg).unwrap());
    assert_eq!(summary["config_sha256"], Value::String(hash));
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
    assert!(summary["timings"]["total_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn ttsvd_of_additive_grid_has_rank_two() {
    let dir = scratch("tt");
    let cfg = write_config(
        &dir,
        r#"{"problem": {"generator": "additive-fn", "d": 4}, "options": {"points": 8, "tol": 1e-10}}"#,
    );
    let out = run("ttsvd", &cfg, &dir.join("out"), &[]);
    assert!(out.status.success());
    let ranks = column(&dir.join("out/ranks.csv"), "rank");
    assert_eq!(ranks.len(), 3);
    assert!(ranks.iter().all(|&r| r <= 2.0), "{ranks:?}");
}

#[test]
fn malformed_config_exits_two_without_artifacts() {
    let dir = scratch("bad");
    for body in [
        "{not json",
        r#"{"problem": {"generator": "no-such-generator", "d": 2}}"#,
        &format!(r#"{{"problem": {DIFFUSION}, "seed": 1, "options": {{"train_size": 10, "m": 3, "typo": 1}}}}"#),
        &format!(r#"{{"problem": {DIFFUSION}, "options": {{"train_size": 10, "m": 3}}}}"#),
        &format!(r#"{{"problem": {DIFFUSION}, "seed": 1, "options": {{"train_size": 5, "m": 30}}}}"#),
        &format!(r#"{{"method": "rom", "problem": {DIFFUSION}, "seed": 1, "options": {{"train_size": 10, "m": 3}}}}"#),
    ] {
        let cfg = write_config(&dir, body);
        let out = run("pod", &cfg, &dir.join("out"), &[]);
        assert_eq!(out.status.code(), Some(2), "{body}: {}", String::from_utf8_lossy(&out.stderr));
        let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
        assert_eq!(err["exit_code"], 2);
        assert!(!dir.join("out").exists(), "{body} left artifacts");
    }
    let out = bin().args(["frobnicate", "--config", "x.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn function_method_rejects_operator_problem() {
    let dir = scratch("mismatch");
    let cfg = write_config(&dir, &format!(r#"{{"problem": {DIFFUSION}, "options": {{"points": 4, "tol": 1e-6}}}}"#));
    assert_eq!(run("ttsvd", &cfg, &dir.join("out"), &[]).status.code(), Some(2));
}

#[test]
fn divergence_exits_three_with_trace() {
    let dir = scratch("div");
    let cfg = write_config(
        &dir,
        r#"{"problem": {"generator": "diffusion-affine", "m": 16, "d": 2}, "options": {"grid": 4, "step": 10.0}}"#,
    );
    let out = run("richardson", &cfg, &dir.join("out"), &[]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "divergence");
    let resid = column(&dir.join("out/breakdown_trace.csv"), "resid");
    assert!(resid.len() > 2 && resid[resid.len() - 1] > resid[0]);
    assert!(!dir.join("out/summary.json").exists());
}

#[test]
fn capacity_error_is_a_usage_error() {
    let dir = scratch("cap");
    let cfg = write_config(
        &dir,
        r#"{"problem": {"generator": "rank-one-fn", "d": 4}, "options": {"points": 20, "tol": 1e-6}}"#,
    );
    let out = bin()
        .args(["ttsvd", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env("TENSORMOR_DENSE_CAP", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "capacity");
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = scratch("repro");
    let small = r#"{"generator": "diffusion-affine", "m": 24, "d": 2}"#;
    let cases = [
        ("pod", format!(r#"{{"problem": {small}, "seed": 4, "options": {{"train_size": 30, "m": 3}}}}"#)),
        ("strong-greedy", format!(r#"{{"problem": {small}, "seed": 4, "options": {{"train_size": 30, "m": 3}}}}"#)),
        ("weak-greedy", format!(r#"{{"problem": {small}, "seed": 4, "options": {{"train_size": 30, "m": 3}}}}"#)),
        (
            "rom",
            format!(r#"{{"problem": {small}, "seed": 4, "options": {{"train_size": 30, "m": 2, "test_size": 4}}}}"#),
        ),
        ("richardson", format!(r#"{{"problem": {small}, "options": {{"grid": 3, "max_iter": 50}}}}"#)),
        ("pgd", format!(r#"{{"problem": {small}, "seed": 4, "options": {{"grid": 3, "max_rank": 3}}}}"#)),
        (
            "regress",
            r#"{"problem": {"generator": "multiquadric-fn", "d": 2}, "seed": 4,
                "options": {"train_size": 80, "test_size": 20, "degree": 3, "rank": 2, "sweeps": 20}}"#
                .to_string(),
        ),
        (
            "ttsvd",
            r#"{"problem": {"generator": "rank-one-fn", "d": 3}, "options": {"points": 6, "tol": 1e-8}}"#.to_string(),
        ),
    ];
    for (method, body) in cases {
        let cfg = write_config(&dir, &body);
        let (a, b) = (dir.join(format!("{method}-a")), dir.join(format!("{method}-b")));
        assert!(run(method, &cfg, &a, &[]).status.success(), "{method}");
        assert!(run(method, &cfg, &b, &[]).status.success(), "{method}");
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        assert!(!fa.is_empty(), "{method} wrote no csv");
        assert_eq!(fa, fb, "{method} output differs between runs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = scratch("seed");
    let cfg = write_config(
        &dir,
        r#"{"problem": {"generator": "diffusion-affine", "m": 16, "d": 2}, "seed": 1, "options": {"train_size": 10, "m": 2}}"#,
    );
    assert!(run("strong-greedy", &cfg, &dir.join("a"), &[]).status.success());
    assert!(run("strong-greedy", &cfg, &dir.join("b"), &["--seed", "2"]).status.success());
    assert_ne!(fs::read(dir.join("a/selected.csv")).unwrap(), fs::read(dir.join("b/selected.csv")).unwrap());
    let summary: Value = serde_json::from_slice(&fs::read(dir.join("b/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 2);
}

#[test]
fn timings_are_opt_in() {
    let dir = scratch("timings");
    let cfg = write_config(
        &dir,
        r#"{"problem": {"generator": "diffusion-affine", "m": 32, "d": 2}, "seed": 1, "record_timings": true,
            "options": {"train_size": 40, "m": 4}}"#,
    );
    assert!(run("strong-greedy", &cfg, &dir.join("out"), &[]).status.success());
    assert!(column(&dir.join("out/errors.csv"), "seconds").iter().any(|&s| s > 0.0));
}

fn compare(a: &Path, b: &Path, extra: &[&str]) -> Output {
    bin().arg("compare").arg(a).arg(b).args(extra).output().unwrap()
}

#[test]
fn compare_reports() {
    let dir = scratch("compare");
    let cfg = write_config(
        &dir,
        &format!(r#"{{"problem": {DIFFUSION}, "seed": 2, "options": {{"train_size": 100, "m": 6}}}}"#),
    );
    assert!(run("pod", &cfg, &dir.join("pod"), &[]).status.success());
    assert!(run("strong-greedy", &cfg, &dir.join("greedy"), &[]).status.success());
    let (pod, greedy) = (dir.join("pod/errors.csv"), dir.join("greedy/errors.csv"));

    let same = compare(&pod, &pod, &[]);
    assert!(same.status.success());
    let text = String::from_utf8(same.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for r in rdr.records() {
        assert_eq!(r.unwrap()[3].parse::<f64>().unwrap(), 1.0);
    }

    // greedy maximum error dominates the POD mean-square error at every m
    let c = tensormor_cli::compare(&pod, &greedy, 1.0, None).unwrap();
    assert_eq!(c.rows.len(), 6);
    assert!(c.rows.iter().all(|r| r.b >= r.a), "{:?}", c.rows);
    assert_eq!(compare(&pod, &greedy, &["--strict"]).status.code(), Some(4));

    let empty = dir.join("empty.csv");
    fs::write(&empty, "m,error,p,seconds\n").unwrap();
    assert_eq!(compare(&pod, &empty, &[]).status.code(), Some(2));
    let other = dir.join("other.csv");
    fs::write(&other, "k,resid\n1,0.5\n").unwrap();
    assert_eq!(compare(&pod, &other, &[]).status.code(), Some(2));
}

#[test]
fn cross_method_ordering_on_diffusion() {
    use tensormor_core::generators::diffusion_affine;
    use tensormor_core::greedy::strong_greedy;
    use tensormor_core::order2::{pod, width_l2, SnapshotSet};
    use tensormor_core::Matrix;

    let model = diffusion_affine(64, 4).unwrap();
    let params = model.domain.sample(150, 8).unwrap();
    let cols: Vec<Vec<f64>> = params.iter().map(|xi| model.full_solve(xi).unwrap()).collect();
    let s = SnapshotSet::uniform(Matrix::from_cols(&cols).unwrap(), params).unwrap();
    let width = width_l2(&s, 6).unwrap();
    let (_, p) = pod(&s, 6).unwrap();
    let g = strong_greedy(&s, 6).unwrap();
    for m in 1..=6 {
        let (w, e, gm) = (width.get(m).unwrap().error, p.get(m).unwrap().error, g.report.get(m).unwrap().error);
        assert!(w <= e * (1.0 + 1e-12) && e <= gm * (1.0 + 1e-12), "m = {m}: {w} {e} {gm}");
    }
}
