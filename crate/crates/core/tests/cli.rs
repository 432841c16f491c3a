use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn maxtensor(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxtensor"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", stdout(o)))
}

fn write(path: &Path, contents: &str) {
    fs::write(path, contents).unwrap();
}

#[test]
fn quantile_prints_twelve_significant_digits() {
    let o = maxtensor(&["quantile", "--m", "2", "--sided", "two", "--q", "0.95"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "2.71621907056");
    assert!(stderr(&o).contains("\"q\":0.95"));

    let o = maxtensor(&["quantile", "--m", "2", "--z", "0"]);
    assert_eq!(stdout(&o).trim(), "0.819163861376");
}

#[test]
fn quantile_errors_are_usage_errors() {
    let o = maxtensor(&["quantile", "--m", "2", "--q", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`q`"));
    let o = maxtensor(&["quantile", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = maxtensor(&["quantile", "--m", "2", "--q", "0.5", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn test_on_zero_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.csv");
    write(&path, &"0,0,0,0,0\n".repeat(10));
    let o = maxtensor(&["test", "--input", path.to_str().unwrap(), "--m", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["stat"]["w_abs"], 0.0);
    assert!(v["p_value"].as_f64().unwrap() > 0.95);
    assert!(v["decisions"].as_array().unwrap().iter().all(|d| d["reject"] == false));

    // constant columns cannot be studentized
    let o = maxtensor(&["test", "--input", path.to_str().unwrap(), "--studentize"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column"));
}

#[test]
fn test_detects_planted_dependence_and_accepts_several_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let mut rows = String::new();
    for k in 0..60 {
        let a = ((k * 7919) % 61) as f64 - 30.0;
        let b = ((k * 104_729) % 53) as f64 - 26.0;
        let c = ((k * 1_299_709) % 47) as f64 - 23.0;
        rows.push_str(&format!("{a},{a},{b},{c}\n"));
    }
    write(&path, &rows);
    let o = maxtensor(&["test", "--input", path.to_str().unwrap(), "--m", "2", "--studentize"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["stat"]["argmax_abs"], serde_json::json!([1, 2]));
    assert!(v["p_value"].as_f64().unwrap() < 1e-6);

    let o = maxtensor(&[
        "test", "--input", path.to_str().unwrap(), "--input", path.to_str().unwrap(), "--sided", "one",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["stat"]["m"], 2);
}

#[test]
fn missing_and_malformed_inputs_are_io_errors() {
    let o = maxtensor(&["test", "--input", "/nonexistent/m.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("/nonexistent/m.csv"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    write(&path, "1,2,3\n4,x,6\n");
    let o = maxtensor(&["test", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn simulate_rejects_zero_reps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, r#"{"grid":[{"n":10,"p":5,"m":2,"spec":{"family":"StandardNormal"}}],"reps":0}"#);
    let o = maxtensor(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`reps`"));
}

#[test]
fn simulate_over_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.json");
    write(&cfg, r#"{"grid":[{"n":1000,"p":2000,"m":4,"spec":{"family":"Rademacher"}}],"reps":1}"#);
    let o = maxtensor(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn simulate_is_idempotent_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"grid":[{"n":50,"p":12,"m":2,"spec":{"family":"UniformScaled"}},
                     {"n":30,"p":8,"m":3,"spec":{"family":"StudentTStandardized","df":6},"sided":"one_sided"}],
            "reps":40}"#,
    );
    let mut outputs = Vec::new();
    for (run, workers) in [(0, "1"), (1, "3"), (2, "3")] {
        let out = dir.path().join(format!("out{run}"));
        let o = maxtensor(&[
            "simulate", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "--workers", workers, "--seed", "11",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stderr(&o).contains("\"master_seed\":11"));
        let records = fs::read(out.join("records.csv")).unwrap();
        let summary = fs::read_to_string(out.join("summary.json")).unwrap().replace(out.to_str().unwrap(), "OUT");
        assert_eq!(String::from_utf8_lossy(&records).lines().count(), 81);
        let stdout = stdout(&o).replace(out.to_str().unwrap(), "OUT");
        outputs.push((stdout, records, summary));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn diagnose_reports_json() {
    let o = maxtensor(&["diagnose", "--what", "lambda", "--z=-1,0,1", "--p", "20", "--n", "100", "--reps", "20000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let lams: Vec<f64> = v.as_array().unwrap().iter().map(|e| e["lambda_hat"].as_f64().unwrap()).collect();
    assert!(lams[0] >= lams[1] && lams[1] >= lams[2]);
    assert_eq!(v[1]["lambda_limit"], 1.0);

    let o = maxtensor(&["diagnose", "--what", "b1", "--p", "20", "--reps", "1000"]);
    let v = json(&o);
    let tail = v[0]["lambda"]["single_tail"]["probability"].as_f64().unwrap();
    let b1 = v[0]["b1_bound"].as_f64().unwrap();
    assert!((b1 - 190.0 * 4.0 * 20.0 * tail * tail).abs() <= 1e-12 * b1.max(1e-300));

    let o = maxtensor(&["diagnose", "--what", "mdr", "--family", "rademacher", "--n", "400", "--x", "0", "--reps", "1000"]);
    assert!(json(&o)["gaussian_tail"] == 0.5);

    let o = maxtensor(&["diagnose", "--what", "pairtail", "--m", "3", "--s", "2", "--n", "50", "--p", "10", "--reps", "1000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)["estimate"]["reps"], 1000);

    let o = maxtensor(&[
        "diagnose", "--what", "stein-chen", "--n", "100", "--p", "15", "--m", "3", "--reps", "2000", "--threshold", "0.5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&o)[0]["psi_estimates"].as_object().unwrap().len(), 2);

    let o = maxtensor(&["diagnose", "--what", "pairtail", "--s", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`s`"));
}

#[test]
fn help_lists_flags_with_defaults() {
    for (sub, flags) in [
        ("simulate", &["--config", "--output", "--workers", "--seed"][..]),
        ("test", &["--input", "--m", "--sided", "--studentize"][..]),
        ("diagnose", &["--what", "--n", "--p", "--m", "--z", "--family", "--reps", "--threshold", "--s", "--x"][..]),
        ("quantile", &["--m", "--sided", "--q", "--z"][..]),
    ] {
        let o = maxtensor(&[sub, "--help"]);
        assert!(o.status.success());
        let text = stdout(&o);
        for flag in flags {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
        if sub != "simulate" {
            assert!(text.contains("[default:"), "{sub} --help shows no defaults");
        }
    }
}
