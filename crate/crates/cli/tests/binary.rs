use std::path::PathBuf;
use std::process::{Command, Output};

fn sac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sac")).args(args).env_remove("MNIST_DIR").output().expect("spawn sac")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("binary");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Header row and data rows, after checking the config line and CRLF endings.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    assert!(text.starts_with("# config: {"), "{text}");
    assert!(text.ends_with("\r\n"));
    text.split("\r\n")
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn shape_columns_cover_every_family() {
    let rows = csv_rows(&stdout(&sac(&["shape", "--grid", "-2:2:9"])));
    let header = rows[0].join(",");
    assert_eq!(
        header,
        "x,h_rectifier,h_wi,h_si,h_ekv,h_rectifier_norm,h_wi_norm,h_si_norm,h_ekv_norm"
    );
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[1][0], "-2");
    assert_eq!(rows[9][0], "2");
}

#[test]
fn temperatures_get_their_own_columns() {
    let rows = csv_rows(&stdout(&sac(&["shape", "--families", "wi", "--temps", "-40,25,125", "--grid", "0:1:3"])));
    assert_eq!(rows[0][1..4], ["h_wi_-40C", "h_wi_25C", "h_wi_125C"]);
}

#[test]
fn mul_error_has_one_row_per_spline_count() {
    let rows = csv_rows(&stdout(&sac(&["mul-error", "--S", "1,2,3", "--grid-n", "41"])));
    assert_eq!(rows[0][0], "S");
    let s: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(s, ["1", "2", "3"]);
}

#[test]
fn output_is_byte_identical_across_runs_and_out_paths() {
    let args = ["mismatch", "--block", "sinh", "--trials", "100", "--grid", "-1:1:11", "--seed", "9"];
    let a = stdout(&sac(&args));
    let b = stdout(&sac(&args));
    assert_eq!(a, b);
    let path = scratch("mismatch.csv");
    let mut with_out = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    assert!(stdout(&sac(&with_out)).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    // The config line records the output path; the table itself is identical.
    assert_eq!(written.split_once("\r\n").unwrap().1, a.split_once("\r\n").unwrap().1);
}

#[test]
fn flags_override_the_config_file() {
    let path = scratch("config.json");
    std::fs::write(&path, r#"{"C": 2.0, "grid": "-1:1:3", "families": ["wi"]}"#).unwrap();
    let p = path.to_str().unwrap();
    let text = stdout(&sac(&["shape", "--config", p, "--C", "0.5"]));
    let config: serde_json::Value = serde_json::from_str(text.lines().next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(config["C"], 0.5);
    assert_eq!(config["grid"], "-1:1:3");
    assert_eq!(config["families"], serde_json::json!(["wi"]));
    assert_eq!(csv_rows(&text).len(), 4);
}

#[test]
fn json_format() {
    let text = stdout(&sac(&["wta", "--inputs", "5,4,3,2,1", "--budgets", "3:3:1", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["columns"][2], "M");
    assert_eq!(v["rows"][0][2], 2);
    assert_eq!(v["config"]["inputs"][0], 5.0);
}

#[test]
fn train_then_eval() {
    let net = scratch("xor.json");
    let log = scratch("xor_log.csv");
    let (n, l) = (net.to_str().unwrap(), log.to_str().unwrap());
    let out = sac(&[
        "train", "--dataset", "xor", "--jitter", "0.1", "--per-point", "25", "--net", "2-4-2", "--epochs", "60",
        "--S", "1", "--out", n, "--log", l,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("train accuracy"));
    let first = std::fs::read_to_string(&net).unwrap();
    let log_rows = csv_rows(&std::fs::read_to_string(&log).unwrap());
    assert_eq!(log_rows[0], ["epoch", "loss"]);
    assert_eq!(log_rows.len(), 61);

    let rows = csv_rows(&stdout(&sac(&["eval", "--net", n, "--dataset", "xor", "--oracle"])));
    assert_eq!(rows[0], ["label", "accuracy", "samples", "confusion"]);
    let labels: Vec<&str> = rows[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(labels, ["rectifier", "wi", "si", "ekv", "oracle"]);
    for r in &rows[1..] {
        let acc: f64 = r[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&acc));
        assert_eq!(r[2], "4");
    }
    // Evaluation leaves the document untouched.
    assert_eq!(std::fs::read_to_string(&net).unwrap(), first);
}

#[test]
fn exit_codes_are_distinct() {
    let missing = scratch("absent.json");
    let bad_config = scratch("bad_config.json");
    std::fs::write(&bad_config, r#"{"C": "wide"}"#).unwrap();
    let bad_net = scratch("bad_net.json");
    std::fs::write(&bad_net, r#"{"version": 2, "layers": []}"#).unwrap();
    let cases: [(&[&str], i32); 6] = [
        (&["shape", "--bogus"], 2),
        (&["shape", "--config", bad_config.to_str().unwrap()], 3),
        (&["eval", "--net", missing.to_str().unwrap(), "--dataset", "xor"], 4),
        (&["eval", "--net", bad_net.to_str().unwrap(), "--dataset", "xor"], 5),
        (&["block", "--block", "tanh"], 6),
        (&["shape", "--S", "0"], 6),
    ];
    for (args, code) in cases {
        let out = sac(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let out = sac(&["eval", "--net", missing.to_str().unwrap(), "--dataset", "xor"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}
