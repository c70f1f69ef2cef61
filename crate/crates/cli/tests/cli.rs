use std::io::Write;
use std::process::{Command, Output, Stdio};

fn confseq(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_confseq"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn records(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn dkw_table() {
    let o = confseq(&["boundary", "--kind", "dkw", "--delta", "0.05", "--t", "1..1024"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,s,gamma,kappa");
    assert_eq!(lines.len(), 1025);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[1], "");
    let g: f64 = first[2].parse().unwrap();
    assert!((g - 7.05898963611).abs() < 1e-11, "{g}");
}

#[test]
fn mmd_as_stated() {
    let o = confseq(&["boundary", "--kind", "mmd", "--B", "1", "--t", "100", "--s", "100", "--mode", "as-stated"], "");
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let g: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((g - 2.4952).abs() < 1e-4, "{g}");
}

#[test]
fn twelve_significant_digits() {
    let o = confseq(&["boundary", "--kind", "dkw", "--t", "10000"], "");
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "10000,,0.100993317916,");
}

#[test]
fn cartesian_grid() {
    let o = confseq(&["boundary", "--kind", "ks", "--t", "1,2", "--s", "3..5"], "");
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn bad_config_exits_two_naming_the_flag() {
    let o = confseq(&["boundary", "--kind", "dkw", "--delta", "1.5", "--t", "1..4"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--delta"));

    let o = confseq(&["boundary", "--kind", "kl", "--t", "10"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--p"));

    let o = confseq(&["boundary", "--kind", "dkw", "--t", "0..3"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--t"));

    let o = confseq(&["boundary", "--kind", "dkw", "--t", "3", "--alpha", "1"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--alpha"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"delta": 0.1, "B": 4}}"#).unwrap();
    let path = f.path().to_str().unwrap();
    let from_file = confseq(&["boundary", "--kind", "dkw", "--t", "7", "--config", path], "");
    let flag = confseq(&["boundary", "--kind", "dkw", "--t", "7", "--delta", "0.1"], "");
    assert_eq!(stdout(&from_file), stdout(&flag));
    let overridden = confseq(&["boundary", "--kind", "dkw", "--t", "7", "--config", path, "--delta", "0.05"], "");
    let default = confseq(&["boundary", "--kind", "dkw", "--t", "7"], "");
    assert_eq!(stdout(&overridden), stdout(&default));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, r#"{{"delat": 0.1}}"#).unwrap();
    let o = confseq(&["boundary", "--kind", "dkw", "--t", "7", "--config", bad.path().to_str().unwrap()], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--config"));
}

fn alternating(n: usize) -> String {
    let mut s = String::new();
    for i in 0..n {
        let v = ((i * 7919) % 1000) as f64 / 1000.0;
        s.push_str(&format!("x,{v}\ny,{v}\n"));
    }
    s
}

#[test]
fn first_record_is_vacuous() {
    let o = confseq(&["monitor", "--kind", "ks"], "x,0.3\n");
    let r = records(&o);
    assert_eq!(r[0]["lower"], 0.0);
    assert_eq!(r[0]["upper"], 1.0);

    let o = confseq(&["monitor", "--kind", "mmd", "--B", "4", "--kernel", "linear"], "x,0.3\n");
    let r = records(&o);
    assert_eq!(r[0]["lower"], 0.0);
    assert_eq!(r[0]["upper"], 4.0);
}

#[test]
fn identical_streams_never_reject() {
    let o = confseq(&["monitor", "--kind", "ks"], &alternating(500));
    assert!(o.status.success());
    let r = records(&o);
    assert_eq!(r.len(), 1000);
    assert!(r.iter().all(|v| v["reject"] == false));
    let last = r.last().unwrap();
    assert_eq!(last["t"], 500);
    assert_eq!(last["s"], 500);
}

#[test]
fn replay_is_byte_identical() {
    let input = alternating(200);
    let a = confseq(&["monitor", "--kind", "mmd", "--bandwidth", "0.5"], &input);
    let b = confseq(&["monitor", "--kind", "mmd", "--bandwidth", "0.5"], &input);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_line_exits_three() {
    let o = confseq(&["monitor", "--kind", "ks"], "# header\nx,0.1\n\ny,zz\nx,0.2\n");
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
    assert_eq!(records(&o).len(), 1);

    let o = confseq(&["monitor", "--kind", "tv", "--p", "0.5,0.5"], "x,0\nx,2\n");
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 2"));

    let o = confseq(&["monitor", "--kind", "dkw"], "y,0.5\n");
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn categorical_and_mean_monitors() {
    let o = confseq(&["monitor", "--kind", "ot", "--cost-matrix", "0,1;1,0"], "x,0\ny,1\nx,1\ny,0\n");
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(records(&o).len(), 4);

    let mut shifted = String::new();
    for i in 0..400 {
        shifted.push_str(&format!("x,{},{}\n", 3.0 + (i % 5) as f64 * 0.1, -3.0));
    }
    let o = confseq(&["monitor", "--kind", "mean", "--d", "2", "--mu0", "0,0"], &shifted);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(records(&o).last().unwrap()["reject"], true);
}

#[test]
fn simulate_single_line_and_exit_codes() {
    let o = confseq(&["simulate", "--scenario", "dkw-uniform", "--R", "50", "--T", "500", "--seed", "7"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["scenario"], "dkw-uniform");
    assert!(v.get("wall_time_s").is_none());
    let again = confseq(&["simulate", "--scenario", "dkw-uniform", "--R", "50", "--T", "500", "--seed", "7"], "");
    assert_eq!(o.stdout, again.stdout);

    let o = confseq(&["simulate", "--scenario", "ks-null", "--R", "1", "--T", "50"], "");
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);

    let o = confseq(&["simulate", "--scenario", "nope"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--scenario"));
}

#[test]
fn replicate_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reps.csv");
    let o = confseq(
        &["simulate", "--scenario", "tv-finite", "--R", "20", "--T", "200", "--replicates-csv", path.to_str().unwrap()],
        "",
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(path).unwrap();
    assert_eq!(csv.lines().next(), Some("replicate,first_violation"));
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn loo_audit_exits_zero() {
    let o = confseq(&["simulate", "--scenario", "loo-audit"], "");
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn selftest_passes_and_detects_corruption() {
    let o = confseq(&["selftest"], "");
    assert!(o.status.success(), "{}", stdout(&o));
    let again = confseq(&["selftest"], "");
    assert_eq!(o.stdout, again.stdout);

    let o = confseq(&["selftest", "--corrupt-zeta"], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stitching-sum"));
}
