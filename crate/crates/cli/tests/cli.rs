use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn nbldpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbldpc"))
        .args(args)
        .env_remove("NBLDPC_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn example1(dir: &TempDir) -> std::path::PathBuf {
    let b = dir.path().join("ex1");
    let out = nbldpc(&["gen", "--example1", "--out", path(&b)]);
    assert_eq!(code(&out), 0, "{out:?}");
    b
}

#[test]
fn gen_reports_node_counts() {
    let dir = TempDir::new().unwrap();
    let b = dir.path().join("c4");
    let out = nbldpc(&[
        "gen", "--b", "2", "--n", "96", "--dl", "2", "--dr", "3", "--method", "random", "--seed", "7", "--out",
        path(&b),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("192 variable nodes, 128 check nodes"), "{text}");
    assert!(text.contains("288 variable nodes, 288 check nodes"), "{text}");
    for f in ["hq.nbalist", "hb.alist", "hpm.alist", "he.alist", "indexmap.json", "field.json"] {
        assert!(b.join(f).is_file(), "{f}");
    }
}

#[test]
fn example1_bundle_holds_the_reference_matrices() {
    let dir = TempDir::new().unwrap();
    let b = example1(&dir);
    let hb = fs::read_to_string(b.join("hb.alist")).unwrap();
    // 9 columns, 3 rows; rows list 1-based supports after the column lists.
    let lines: Vec<&str> = hb.lines().collect();
    assert_eq!(lines[0], "9 3");
    assert_eq!(&lines[lines.len() - 3..], ["2 3 5 7 0", "1 2 3 6 8", "1 3 4 5 9"]);
    let hpm = fs::read_to_string(b.join("hpm.alist")).unwrap();
    let lines: Vec<&str> = hpm.lines().collect();
    assert_eq!(lines[0], "21 7");
    assert_eq!(
        &lines[lines.len() - 7..],
        ["6 9 15", "7 11 16", "1 13 17", "5 10 18", "3 8 19", "2 14 20", "4 12 21"]
    );
}

#[test]
fn infeasible_degrees_exit_1() {
    let dir = TempDir::new().unwrap();
    let out = nbldpc(&["gen", "--n", "10", "--dl", "3", "--dr", "4", "--out", path(dir.path())]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_flags_and_configs_exit_1() {
    assert_eq!(code(&nbldpc(&["simulate", "--no-such-flag"])), 1);
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"channel": {"typo": 1}}"#).unwrap();
    assert_eq!(code(&nbldpc(&["--config", path(&cfg), "verify-paper"])), 1);
}

#[test]
fn missing_bundle_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = nbldpc(&["analyze", "--bundle", path(&dir.path().join("absent"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn analyze_example1_lists_the_stopping_set() {
    let dir = TempDir::new().unwrap();
    let b = example1(&dir);
    let out = nbldpc(&["analyze", "--bundle", path(&b), "--w-max", "3"]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(b.join("spectrum.json")).unwrap()).unwrap();
    let sets = json["sets"].as_array().unwrap();
    let hit = sets
        .iter()
        .find(|s| s["indices"] == serde_json::json!([1, 3, 5]))
        .expect("listed");
    assert_eq!(hit["in_extended"], false);
    assert_eq!(json["w_max"], 3);
    let csv = fs::read_to_string(b.join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("w,hb,extended,codewords"));
}

#[test]
fn analyze_with_zero_weight_is_empty() {
    let dir = TempDir::new().unwrap();
    let b = example1(&dir);
    let out = nbldpc(&["analyze", "--bundle", path(&b), "--w-max", "0"]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(b.join("spectrum.json")).unwrap()).unwrap();
    assert!(json["rows"].as_array().unwrap().is_empty());
    assert!(json["sets"].as_array().unwrap().is_empty());
}

#[test]
fn budget_exhaustion_exits_4_with_partial_report() {
    let dir = TempDir::new().unwrap();
    let b = dir.path().join("c4");
    assert_eq!(code(&nbldpc(&["gen", "--n", "48", "--seed", "1", "--out", path(&b)])), 0);
    let out = Command::new(env!("CARGO_BIN_EXE_nbldpc"))
        .args(["analyze", "--bundle", path(&b), "--w-max", "8"])
        .env("NBLDPC_BUDGET", "500")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(b.join("spectrum.partial.json")).unwrap()).unwrap();
    assert_eq!(json["partial"], true);
    assert_eq!(json["budget"], 500);
    // The flag beats the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_nbldpc"))
        .args(["analyze", "--bundle", path(&b), "--w-max", "4", "--budget", "100000000"])
        .env("NBLDPC_BUDGET", "500")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn enhance_example1_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let b = example1(&dir);
    let first = nbldpc(&["enhance", "--bundle", path(&b), "--w-max", "3"]);
    assert_eq!(code(&first), 0);
    assert!(stdout(&first).contains("2 redundant checks added"), "{}", stdout(&first));
    assert!(stdout(&first).contains("5 rows"));
    let alist = fs::read(b.join("hb_enhanced.alist")).unwrap();
    let ledger = fs::read_to_string(b.join("rpc_ledger.jsonl")).unwrap();
    assert_eq!(ledger.lines().count(), 2);
    assert!(ledger.lines().all(|l| l.contains("\"validated\":true")));

    let second = nbldpc(&["enhance", "--bundle", path(&b), "--w-max", "3"]);
    assert_eq!(code(&second), 0);
    assert!(stdout(&second).contains("0 redundant checks added"));
    assert_eq!(fs::read(b.join("hb_enhanced.alist")).unwrap(), alist);
    assert_eq!(fs::read_to_string(b.join("rpc_ledger.jsonl")).unwrap(), ledger);
}

#[test]
fn enhance_rejects_a_tampered_ledger() {
    let dir = TempDir::new().unwrap();
    let b = example1(&dir);
    assert_eq!(code(&nbldpc(&["enhance", "--bundle", path(&b), "--w-max", "3"])), 0);
    fs::write(b.join("rpc_ledger.jsonl"), "").unwrap();
    assert_eq!(code(&nbldpc(&["enhance", "--bundle", path(&b), "--w-max", "3"])), 1);
}

#[test]
fn simulate_grid_and_determinism() {
    let dir = TempDir::new().unwrap();
    let b = example1(&dir);
    assert_eq!(code(&nbldpc(&["enhance", "--bundle", path(&b), "--w-max", "3"])), 0);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = nbldpc(&[
            "--threads", threads, "--seed", "5", "simulate", "--bundle", path(&b), "--eps", "0.1,0.2,0.3,0.4,0.5",
            "--trials", "3000", "--out", path(&out),
        ]);
        assert_eq!(code(&o), 0, "{o:?}");
        fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a.lines().count(), 21);
    assert!(a.starts_with("epsilon,decoder,frames,frame_errors,bit_errors,bits_per_frame,fer,ber,seed\n"));
    assert_eq!(run("b.csv", "4"), a);
}

#[test]
fn simulate_reports_dominance_breach_with_exit_5() {
    let dir = TempDir::new().unwrap();
    let b = dir.path().join("s0");
    assert_eq!(code(&nbldpc(&["gen", "--n", "24", "--seed", "0", "--out", path(&b)])), 0);
    assert_eq!(code(&nbldpc(&["enhance", "--bundle", path(&b), "--w-max", "8"])), 0);
    let args = ["simulate", "--bundle", path(&b), "--eps", "0.4", "--trials", "2048"];
    assert_eq!(code(&nbldpc(&args)), 5);
    let mut report = args.to_vec();
    report.extend(["--dominance", "report"]);
    let out = nbldpc(&report);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("escaped the enhanced residual"));
}

#[test]
fn config_file_precedence() {
    let dir = TempDir::new().unwrap();
    let b = dir.path().join("cfg");
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        format!(
            r#"{{"construction": {{"n_q": 12, "d_l": 2, "d_r": 4, "seed": 3}}, "paths": {{"bundle": {:?}}}}}"#,
            path(&b)
        ),
    )
    .unwrap();
    let out = nbldpc(&["--config", path(&cfg), "gen"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("n_q = 12, m_q = 6"));
    let out = nbldpc(&["--config", path(&cfg), "gen", "--n", "16"]);
    assert!(stdout(&out).contains("n_q = 16, m_q = 8"));
}

#[test]
fn verify_paper_gate() {
    let out = nbldpc(&["verify-paper"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("PASS")).count(), 10);

    let out = nbldpc(&["verify-paper", "--corrupt", "phi-b-table"]);
    assert_eq!(code(&out), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi-b-table"));

    let out = nbldpc(&["verify-paper", "--basis", "default"]);
    assert_eq!(code(&out), 6);
    assert!(stdout(&out).contains("FAIL hb-rows"));
}
