use std::fs;
use std::process::{Command, Output};

use esym::sampling::{parse_corpus, PairConstraint};
use esym::verify::VerificationReport;
use serde_json::Value;

fn esym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn esym_prints_signature() {
    let out = esym(&["esym", "1", "2", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        r#"{"n":3,"e":[6,11,6]}"#
    );

    let out = esym(&["esym", "1", "1", "1", "1"]);
    assert_eq!(stdout_json(&out)["e"], serde_json::json!([4, 6, 4, 1]));
}

#[test]
fn esym_rejects_domain_errors() {
    for args in [
        &["esym", "-1", "2"][..],
        &["esym", "0", "2"],
        &["esym", "abc"],
        &["esym"],
    ] {
        let out = esym(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn dominance_verdicts() {
    let out = esym(&["dominance", "2", "0.5", "--", "4", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["kind"], "StrictOrder");
    assert_eq!(v["direction"], "LeftBelowRight");
    assert_eq!(v["margins"].as_array().unwrap().len(), 2);

    let v = stdout_json(&esym(&["dominance", "1", "2", "3", "--", "3", "2", "1"]));
    assert_eq!(v["kind"], "Equal");

    // Incomparable is data, not an error.
    let out = esym(&["dominance", "1", "1", "--", "3", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["kind"], "Incomparable");

    assert_eq!(
        esym(&["dominance", "1", "2", "--", "1", "2", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        esym(&["dominance", "1", "2", "--", "1", "2", "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = esym(&[
        "verify",
        "--property",
        "SSLI",
        "--n",
        "5",
        "--trials",
        "1000",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.starts_with("PASS SSLI"), "{summary}");
    assert_eq!(summary.lines().count(), 1);

    let report = VerificationReport::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.passes, 1000);
    assert_eq!(report.evaluated(), 1000);
    assert!(report.worst_margin.unwrap() >= -1e-8);
    assert_eq!(report.seed, 7);
}

#[test]
fn verify_identity_without_out_prints_report() {
    let out = esym(&["verify", "--property", "EQ10_IDENTITY"]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    let deviation: f64 = report.findings["max_abs_deviation"].parse().unwrap();
    assert!(deviation <= 1e-6);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("PASS"));
}

#[test]
fn verify_configuration_errors() {
    for args in [
        &[
            "verify",
            "--property",
            "RENYI",
            "--n",
            "2",
            "--trials",
            "10",
        ][..],
        &["verify", "--property", "NOT_A_PROPERTY"],
        &["verify", "--property", "SSLI", "--constraint", "WeakOnly"],
        &["verify", "--property", "DIVDIFF_POWER", "--alpha", "1.5"],
        &["verify", "--property", "SSLI", "--alpha", "0.5"],
    ] {
        assert_eq!(esym(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_alpha_override() {
    let out = esym(&[
        "verify",
        "--property",
        "DIVDIFF_POWER",
        "--n",
        "3",
        "--trials",
        "50",
        "--alpha",
        "0.3,0.6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: VerificationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.findings["alphas"], "0.3,0.6");
    assert!(report.findings.contains_key("direction_alpha_0.3"));
}

#[test]
fn pairs_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let out = esym(&[
        "pairs",
        "--n",
        "3",
        "--count",
        "0",
        "--constraint",
        "WeakOnly",
        "--out",
        &p("empty.csv"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(p("empty.csv")).unwrap(),
        "n,constraint,seed,index,x_1,x_2,x_3,y_1,y_2,y_3\n"
    );

    for name in ["a.csv", "b.csv"] {
        let out = esym(&[
            "pairs",
            "--n",
            "4",
            "--count",
            "25",
            "--constraint",
            "FullStrict",
            "--seed",
            "5",
            "--out",
            &p(name),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = fs::read_to_string(p("a.csv")).unwrap();
    assert_eq!(text.as_bytes(), fs::read(p("b.csv")).unwrap().as_slice());

    let rows = parse_corpus(&text).unwrap();
    assert_eq!(rows.len(), 25);
    for row in rows {
        assert_eq!(row.constraint, PairConstraint::FullStrict);
        let mut args: Vec<String> = vec!["dominance".into()];
        args.extend(row.x.iter().map(|v| format!("{v:e}")));
        args.push("--".into());
        args.extend(row.y.iter().map(|v| format!("{v:e}")));
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let v = stdout_json(&esym(&argv));
        assert!(
            v["kind"] == "StrictOrder" || v["kind"] == "Equal",
            "row {}: {v}",
            row.index
        );
        if v["kind"] == "StrictOrder" {
            assert_eq!(v["direction"], "LeftBelowRight");
        }
    }

    assert_eq!(
        esym(&[
            "pairs",
            "--n",
            "2",
            "--count",
            "5",
            "--constraint",
            "SimplexStrict"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn matrix_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(
        &path,
        "dim,2\n2,0\n0,0.5\ndim,2\n4,0\n0,0.25\ndim,2\n1,0\n0,1\n",
    )
    .unwrap();
    let out = esym(&["matrix", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["kind"], "StrictOrder");
    assert_eq!(v["relative_verdict"]["kind"], "StrictOrder");
    let r = v["riemannian"].as_array().unwrap();
    assert!(r[0].as_f64().unwrap() <= r[1].as_f64().unwrap());
    let s = v["s_divergence"].as_array().unwrap();
    assert!(s[0].as_f64().unwrap() <= s[1].as_f64().unwrap());

    fs::write(&path, "dim,2\n1,2\n0,1\ndim,2\n1,0\n0,1\n").unwrap();
    assert_eq!(
        esym(&["matrix", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
}
