use std::path::Path;
use std::process::{Command, Output};

fn kawlab(dir: &Path, args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kawlab"));
    cmd.current_dir(dir).args(args).env_remove("KAWLAB_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("kawlab runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_the_catalog() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kawlab(tmp.path(), &["list"], &[]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().count() >= 10);
    assert!(text.lines().any(|l| l.starts_with("tumor-demo ")));
    assert!(text.lines().any(|l| l.starts_with("thm-demo dl-vs-cs ")));
}

#[test]
fn transforms_check_without_run_word() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kawlab(tmp.path(), &["transforms-check"], &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let dir = tmp.path().join("kawlab-out/transforms-check");
    for f in ["report.txt", "MANIFEST", "transforms.csv", "transforms.gp"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("--- config\n[experiment]\nname = transforms-check"));
}

#[test]
fn walsh_coherence_csv_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kawlab(
        tmp.path(),
        &["coherence", "--kind", "walsh", "--r", "5", "--out", "c"],
        &[],
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("c/coherence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,l,mu,mu_times_level_size,profile"));
    let sizes = [1.0, 1.0, 2.0, 4.0, 8.0];
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (k, l) = (v[0] as usize, v[1] as usize);
        let expected = if k == l { 1.0 / sizes[k - 1] } else { 0.0 };
        assert!((v[2] - expected).abs() < 1e-12, "row {line}");
        rows += 1;
    }
    assert_eq!(rows, 25);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    assert_eq!(
        kawlab(p, &["no-such-experiment"], &[]).status.code(),
        Some(2)
    );
    std::fs::write(
        p.join("bad.ini"),
        "[experiment]\nname = coherence\n[operator]\nr = x\n",
    )
    .unwrap();
    let o = kawlab(p, &["run", "--config", "bad.ini"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    let o = kawlab(p, &["probe", "--set", "params.epsilon=-1"], &[]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = kawlab(
        p,
        &[
            "recovery",
            "--set",
            "solver.max_iter=1",
            "--set",
            "params.trials=1",
        ],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage"));
    let o = kawlab(
        p,
        &[
            "coherence",
            "--set",
            "params.tol=0",
            "--set",
            "params.max_constant=0",
            "--kind",
            "fourier",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn verify_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    assert!(kawlab(p, &["constructive", "--out", "run"], &[])
        .status
        .success());
    assert_eq!(kawlab(p, &["verify", "run"], &[]).status.code(), Some(0));
    std::fs::write(p.join("run/constructive.csv"), "tampered\n").unwrap();
    assert_eq!(kawlab(p, &["verify", "run"], &[]).status.code(), Some(4));
}

#[test]
fn manifest_ignores_thread_count_and_honours_source_date_epoch() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let mut manifests = Vec::new();
    for threads in ["1", "4"] {
        let o = kawlab(
            p,
            &["certify-ripl", "--seed", "3", "--out", "same"],
            &[("KAWLAB_THREADS", threads), ("SOURCE_DATE_EPOCH", "12345")],
        );
        assert!(o.status.success());
        manifests.push(std::fs::read_to_string(p.join("same/MANIFEST")).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
    assert!(manifests[0].contains("created = 12345\n"));
    let o = kawlab(p, &["certify-ripl"], &[("KAWLAB_THREADS", "many")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn show_round_trips_through_config() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let o = kawlab(p, &["show", "thm-demo", "lambda", "--seed", "9"], &[]);
    assert!(o.status.success());
    std::fs::write(p.join("l.ini"), &o.stdout).unwrap();
    let again = kawlab(p, &["show", "--config", "l.ini"], &[]);
    assert_eq!(stdout(&again), stdout(&o));
}
