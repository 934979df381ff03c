use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn susyj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_susyj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn verify_rank2_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = susyj(&[
        "verify",
        "--model",
        "rank2",
        "--alpha",
        "1",
        "--x0",
        "0",
        "--z",
        "0+0.5i",
        "--suites",
        "intertwine,chains,binorms,index",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["model"]["params"]["z"]["im"], 0.5);
    let suites = r["suites"].as_object().unwrap();
    assert_eq!(suites.len(), 4);
    let level = &r["suites"]["index"]["details"]["levels"][0];
    assert_eq!(level["index_theorem"], "holds");
    assert_eq!(level["corollary4"], "holds");
    assert_eq!(level["census"]["nu_minus"], 2);
    for s in suites.values() {
        for c in s["checks"].as_array().unwrap() {
            assert!(c["error"].is_number() && c["measured"].is_number());
        }
    }
}

#[test]
fn real_z_is_a_model_error() {
    let o = susyj(&["verify", "--model", "rank2", "--z", "0.3+0i"]);
    assert_eq!(code(&o), 2);
    let o = susyj(&["verify", "--model", "rank2", "--alpha", "0+1i"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_input_is_a_config_error() {
    let cases: [&[&str]; 8] = [
        &["verify", "--suites", "intertwine,bogus"],
        &["verify", "--tol", "chains=-1"],
        &["verify", "--tol", "nonsense=1e-3"],
        &["verify", "--grid", "0:1"],
        &["verify", "--z", "0.5i"],
        &["verify", "--model", "rank2", "--beta", "0.3"],
        &["verify", "--model", "nope"],
        &["frobnicate"],
    ];
    for args in cases {
        assert_eq!(code(&susyj(args)), 3, "{args:?}");
    }
}

#[test]
fn grid_dump_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pot.csv");
    let o = susyj(&[
        "grid", "--model", "rank2", "--alpha", "1", "--x0", "0", "--z", "0+0.5i", "--grid", "-2:2:5", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,re_V2,im_V2,re_phi0_plus,im_phi0_plus,re_phi1_plus,im_phi1_plus"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    // V₂(0) = -32α² for x₀ = 0, z = i/2
    assert!((rows[2][1] + 32.0).abs() < 1e-9 && rows[2][2].abs() < 1e-9);
    // PT symmetry: V₂(-x) = V₂(x)*
    assert!((rows[0][1] - rows[4][1]).abs() < 1e-12 && (rows[0][2] + rows[4][2]).abs() < 1e-12);
}

#[test]
fn sweep_beta_binorms_shrink() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    let o = susyj(&[
        "sweep",
        "--model",
        "two_level",
        "--axis",
        "beta=0.5,0.2,0.1,0.05",
        "--suites",
        "binorms",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    let rows = r["summary"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let mut prev = f64::INFINITY;
    for row in rows {
        let beta = row["value"].as_f64().unwrap();
        let m = &row["metrics"];
        let measured = m["binorm_plus_measured_re"].as_f64().unwrap();
        let expected = -beta / (2.0 * (1.0 + beta));
        assert!((measured - expected).abs() < 1e-6);
        assert!(measured.abs() < prev);
        prev = measured.abs();
    }
    assert_eq!(r["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn empty_sweep_axis_rejected() {
    assert_eq!(code(&susyj(&["sweep", "--model", "two_level", "--axis", "beta="])), 3);
    assert_eq!(code(&susyj(&["sweep", "--model", "rank2", "--axis", "beta=0.1"])), 3);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = susyj(&[
            "verify",
            "--model",
            "two_level",
            "--suites",
            "chains,binorms,jordan",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn exit_status_follows_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = susyj(&[
        "verify",
        "--model",
        "single",
        "--suites",
        "chains",
        "--tol",
        "chains=1e-300",
        "--out",
        out.to_str().unwrap(),
    ]);
    let r = read_json(&out);
    assert_eq!(r["passed"], false);
    assert_eq!(r["suites"]["chains"]["status"], "fail");
    assert_eq!(code(&o), 1);
}

#[test]
fn custom_model_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let config = r#"{
        "model": "custom",
        "custom": {
            "source_potential": {"kind": "const", "payload": {"re": 0.0, "im": 0.0}},
            "kernel": [{
                "expr": {"kind": "cosh", "children": [{"kind": "var"}]},
                "lambda": {"re": -1.0, "im": 0.0},
                "chain_position": 0
            }]
        },
        "suites": ["intertwine", "chains", "jordan", "symmetry"],
        "tolerances": {"intertwine": 1e-9}
    }"#;
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join("r.json");
    let o = susyj(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["provenance"]["tolerances"]["intertwine"], 1e-9);
    assert_eq!(r["suites"]["symmetry"]["status"], "skipped");
    std::fs::write(&cfg, r#"{"model": "custom"}"#).unwrap();
    assert_eq!(code(&susyj(&["verify", "--config", cfg.to_str().unwrap()])), 3);
    std::fs::write(&cfg, r#"{"modle": "rank2"}"#).unwrap();
    assert_eq!(code(&susyj(&["verify", "--config", cfg.to_str().unwrap()])), 3);
}

#[test]
fn csv_check_table_and_thread_cap() {
    let o = Command::new(env!("CARGO_BIN_EXE_susyj"))
        .args(["verify", "--model", "single", "--suites", "intertwine", "--format", "csv"])
        .env("SUSYJ_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("suite,check,measured,error,tolerance,passed\n"));
    assert!(text.lines().skip(1).all(|l| l.starts_with("intertwine,") && l.ends_with(",true")));
    let o = Command::new(env!("CARGO_BIN_EXE_susyj"))
        .args(["list-models"])
        .env("SUSYJ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn list_models_names_every_builtin() {
    let o = susyj(&["list-models"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for m in ["rank2", "two_level", "single", "inverse_square", "custom"] {
        assert!(text.contains(m));
    }
}
