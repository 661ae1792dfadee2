use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use modframe::io::FrameFile;
use modframe::module::{frame_correlation, gram_table};
use serde_json::Value;

fn modframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modframe")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let p = dir.join(name);
    let mut args = vec!["gen", "--out", path_str(&p)];
    args.extend_from_slice(extra);
    let o = modframe(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

fn json_stdout(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn gen_onb_has_identity_gram() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "onb.json", &["--kind", "onb", "--dim", "3", "--spectrum", "2"]);
    let f = FrameFile::read(&p).unwrap().to_frame().unwrap();
    let g = gram_table(&f);
    for j in 0..3 {
        for k in 0..3 {
            let want = if j == k { 1.0 } else { 0.0 };
            assert!(g.get(j, k).values().iter().all(|z| z.re == want && z.im == 0.0));
        }
    }
}

#[test]
fn gen_mercedes_has_quarter_coherence() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "mb.json", &["--kind", "mercedes"]);
    let f = FrameFile::read(&p).unwrap().to_frame().unwrap();
    assert!((frame_correlation(&f).unwrap().value.powi(2) - 0.25).abs() < 1e-15);
}

#[test]
fn gen_shape_conflicts_and_bad_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    for args in [
        vec!["gen", "--kind", "mercedes", "--dim", "3"],
        vec!["gen", "--kind", "sic-d2", "--count", "5"],
        vec!["gen", "--kind", "onb", "--dim", "3", "--count", "4"],
        vec!["gen", "--kind", "random", "--dim", "2"],
        vec!["gen", "--kind", "random", "--dim", "2", "--count", "3", "--spectrum", "0"],
        vec!["gen", "--kind", "hexagon"],
    ] {
        let mut a = args.clone();
        a.extend(["--out", path_str(&out)]);
        assert_eq!(modframe(&a).status.code(), Some(2), "{args:?}");
    }
    assert!(!out.exists());
    let o = modframe(&["gen", "--kind", "onb", "--dim", "2", "--out", path_str(&dir.path().join("no/such/dir.json"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--kind", "random", "--spectrum", "2", "--dim", "3", "--count", "4", "--seed", "7"];
    let a = std::fs::read(gen(dir.path(), "a.json", &args)).unwrap();
    let b = std::fs::read(gen(dir.path(), "b.json", &args)).unwrap();
    assert_eq!(a, b);
    let other = std::fs::read(gen(
        dir.path(),
        "c.json",
        &["--kind", "random", "--spectrum", "2", "--dim", "3", "--count", "4", "--seed", "8"],
    ))
    .unwrap();
    assert_ne!(a, other);
}

#[test]
fn analyze_onb_holds_with_equality() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "onb.json", &["--kind", "onb", "--dim", "3"]);
    let o = modframe(&["analyze", "--in", path_str(&p), "--max-order", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert_eq!(r["violations"], 0);
    assert_eq!(r["bounds"]["orders"][0]["equality"], true);
    assert_eq!(r["bounds"]["vacuous_orders"], serde_json::json!([2, 3]));
}

#[test]
fn analyze_sic_reports_equality_at_two_orders() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "sic.json", &["--kind", "sic-d2", "--spectrum", "2"]);
    let o = modframe(&["analyze", "--in", path_str(&p), "--max-order", "2", "--sym-check"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    let orders = r["bounds"]["orders"].as_array().unwrap();
    assert!((orders[0]["max_bound"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((orders[1]["max_bound"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-15);
    assert!(orders.iter().all(|o| o["equality"] == true));
    assert_eq!(r["certification"]["equality"], true);
    assert_eq!(r["tightness"]["tight"], true);
    assert_eq!(r["sym_check"].as_array().unwrap().len(), 2);

    let o = modframe(&["analyze", "--in", path_str(&p), "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("order 1: ") && text.contains("equality") && text.contains("violations: 0"));
}

#[test]
fn analyze_nonunit_needs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "mb.json", &["--kind", "mercedes"]);
    let text = std::fs::read_to_string(&p).unwrap().replacen("1.0", "2.0", 1);
    std::fs::write(&p, text).unwrap();
    assert_eq!(modframe(&["analyze", "--in", path_str(&p)]).status.code(), Some(2));
    let o = modframe(&["analyze", "--in", path_str(&p), "--allow-nonunit", "--max-order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json_stdout(&o);
    assert_eq!(r["unit"], false);
    assert_eq!(r["generalized"].as_array().unwrap().len(), 2);
}

#[test]
fn analyze_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "mb.json", &["--kind", "mercedes"]);
    assert_eq!(modframe(&["analyze", "--in", path_str(&p), "--max-order", "0"]).status.code(), Some(2));
    assert_eq!(modframe(&["analyze", "--in", path_str(&p), "--format", "xml"]).status.code(), Some(2));
    assert_eq!(modframe(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(modframe(&[]).status.code(), Some(2));
    assert_eq!(modframe(&["--help"]).status.code(), Some(0));
}

#[test]
fn analyze_exits_zero_on_generated_frames() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.json");
    for i in 0..100u64 {
        let (k, d) = (1 + i % 4, 2 + i % 3);
        let n = 2 + (i / 4) % (2 * d);
        let (k, d, n, seed) = (k.to_string(), d.to_string(), n.to_string(), i.to_string());
        let args =
            ["modframe", "gen", "--spectrum", &k, "--dim", &d, "--count", &n, "--seed", &seed, "--out", path_str(&p)];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(modframe::cli::run(args, &mut out, &mut err), 0);
        let args = ["modframe", "analyze", "--in", path_str(&p), "--max-order", "3"];
        let code = modframe::cli::run(args, &mut out, &mut err);
        assert_eq!(code, 0, "config {i}: {}", String::from_utf8_lossy(&err));
    }
}

#[test]
fn optimize_reaches_known_optima() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let frame = dir.path().join("f.json");
    let csv = dir.path().join("t.csv");
    let o = modframe(&[
        "optimize",
        "--dim",
        "2",
        "--count",
        "3",
        "--restarts",
        "4",
        "--out",
        path_str(&out),
        "--frame-out",
        path_str(&frame),
        "--trajectory",
        path_str(&csv),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let line = String::from_utf8(o.stdout).unwrap();
    assert_eq!(line.lines().count(), 1);
    assert!(line.contains("attained true"));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["attained"], true);
    assert!((r["best_coherence_squared"].as_f64().unwrap() - 0.25).abs() <= 1e-6);
    assert_eq!(r["restarts"].as_array().unwrap().len(), 4);
    assert_eq!(modframe(&["verify", "--in", path_str(&frame)]).status.code(), Some(0));
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("restart,iteration,smoothed,coherence\n0,0,"));

    let o = modframe(&["optimize", "--dim", "2", "--sic", "--restarts", "2", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r["equiangularity_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["conjecture_witness"], true);

    let o = modframe(&["optimize", "--dim", "2", "--count", "2", "--restarts", "1", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r["best_coherence"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn optimize_rejects_bad_shapes() {
    assert_eq!(modframe(&["optimize", "--dim", "3", "--count", "2"]).status.code(), Some(2));
    assert_eq!(modframe(&["optimize", "--dim", "2", "--count", "5", "--sic"]).status.code(), Some(2));
    assert_eq!(modframe(&["optimize", "--dim", "2", "--count", "3", "--restarts", "0"]).status.code(), Some(2));
    assert_eq!(modframe(&["optimize", "--dim", "2"]).status.code(), Some(2));
}

#[test]
fn verify_names_the_failing_check() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "sic.json", &["--kind", "sic-d2"]);
    let o = modframe(&["verify", "--in", path_str(&p)]);
    assert_eq!(o.status.code(), Some(0));

    let text = std::fs::read_to_string(&p).unwrap();
    std::fs::write(&p, text.replacen("\"d\": 2", "\"d\": 3", 1)).unwrap();
    let o = modframe(&["verify", "--in", path_str(&p)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coordinates"));

    let at = text.find("\"vectors\"").unwrap();
    let num = at + text[at..].find(|c: char| c.is_ascii_digit()).unwrap();
    let end = num + text[num..].find(',').unwrap();
    std::fs::write(&p, format!("{}NaN{}", &text[..num], &text[end..])).unwrap();
    let o = modframe(&["verify", "--in", path_str(&p)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());

    std::fs::write(&p, text.replacen("0.8", "0.9", 1)).unwrap();
    let o = modframe(&["verify", "--in", path_str(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("unit-diagonal"));
}

#[test]
fn malformed_corpus_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "mb.json", &["--kind", "mercedes", "--spectrum", "2"]);
    let good = std::fs::read_to_string(&p).unwrap();
    let corpus = [
        String::new(),
        "{".to_string(),
        "{\"version\": \"1\"}".to_string(),
        good.replacen("\"version\": \"1\"", "\"version\": \"0\"", 1),
        good.replacen("\"n\": 3", "\"n\": 2", 1),
        good.replacen("\"K\": 2", "\"K\": 3", 1),
        good.replacen("\"n\": 3", "\"n\": -3", 1),
        good.replacen("\"version\"", "\"colour\": \"red\", \"version\"", 1),
    ];
    let bad = dir.path().join("bad.json");
    for (i, body) in corpus.iter().enumerate() {
        std::fs::write(&bad, body).unwrap();
        for cmd in ["analyze", "verify"] {
            let o = modframe(&[cmd, "--in", path_str(&bad)]);
            assert_eq!(o.status.code(), Some(3), "{cmd} case {i}");
        }
    }
}
