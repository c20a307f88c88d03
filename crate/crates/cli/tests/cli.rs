use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pgrad(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgrad")).args(args).current_dir(dir).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn constants_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = pgrad(&["constants", "--n", "3", "--p", "2", "--q", "1.3333333333"], dir.path());
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert!((v["beta_q"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert!((v["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert_eq!(v["regime"]["tag"], "SubcriticalAbsorption");
}

#[test]
fn q_equals_p_equals_q_c() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&pgrad(&["constants", "--n", "2", "--p", "2", "--q", "2"], dir.path()));
    assert_eq!(v["q_c"], 2.0);
    assert_eq!(v["regime"]["tag"], "QEqualsP");
    assert_eq!(v["regime"]["critical"], true);
}

#[test]
fn invalid_q_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pgrad(&["constants", "--n", "3", "--p", "2", "--q", "0.9"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("q = 0.9"));
}

#[test]
fn family_csv_and_classification_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = pgrad(&["family", "--family", "StrongSingular", "--out", "ss.csv"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ss.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "# family=StrongSingular n=3 p=2 q=1.3333333333333333");
    assert_eq!(lines.next().unwrap(), "# domain=0,1");
    assert_eq!(lines.next().unwrap(), "r,u,du");
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ss.json")).unwrap()).unwrap();
    assert_eq!(meta["family"]["kind"], "StrongSingular");

    let out = pgrad(&["classify", "ss.csv"], dir.path());
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["classification"]["verdict"], "StrongSingular");
    assert!((v["classification"]["lambda_hat"].as_f64().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn weak_family_classified_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = pgrad(&["family", "--family", "RegularFluxK", "--k", "2", "--out", "w.csv"], dir.path());
    assert_eq!(code(&out), 0);
    let v = json(&pgrad(&["classify", "w.csv"], dir.path()));
    assert_eq!(v["classification"]["verdict"], "WeakSingular");
    assert!((v["classification"]["k_hat"].as_f64().unwrap() - 2.0).abs() < 1e-2);
}

#[test]
fn blowup_grid_touching_eps_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pgrad(&["family", "--family", "BlowupEps", "--eps", "0.01", "--grid-lo", "0.01"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain"));
}

#[test]
fn classify_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "r,u,du\n1,2,3\n0.5,x,1\n").unwrap();
    let out = pgrad(&["classify", "bad.csv"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    pgrad(&["family", "--grid-lo", "0.01", "--out", "short.csv"], dir.path());
    let out = pgrad(&["classify", "short.csv"], dir.path());
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient samples"));

    let mut csv = String::from("r,u,du\n");
    for i in 0..=512 {
        let r = 10f64.powf(-8.0 + 8.0 * f64::from(i) / 512.0);
        csv.push_str(&format!("{r:e},{:e},{:e}\n", r.powf(-0.7), -0.7 * r.powf(-1.7)));
    }
    std::fs::write(dir.path().join("odd.csv"), csv).unwrap();
    let out = pgrad(&["classify", "odd.csv", "--n", "3", "--p", "2", "--q", "1.3333333333333333"], dir.path());
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["classification"]["verdict"], "Unclassified");
}

#[test]
fn verifications_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["verify", "supersolution", "--R", "1"],
        &["verify", "sphere-constant", "--n", "4", "--p", "2", "--q", "1.5"],
        &["verify", "gradient-bound"],
        &["verify", "supersolution-manifold", "--B", "1", "--Btilde", "1", "--R", "2"],
        &["verify", "harnack", "--B", "1"],
        &["verify", "liouville"],
    ];
    for args in cases {
        let out = pgrad(args, dir.path());
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["passed"], true);
        assert_eq!(v["failures"].as_array().unwrap().len(), 0);
    }
    let v = json(&pgrad(&["verify", "gradient-bound"], dir.path()));
    assert!((v["report"]["sup_product"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["report"]["saturation_constant"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sphere_constant_outside_its_regime_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&pgrad(&["verify", "sphere-constant", "--n", "3", "--p", "2", "--q", "1.4"], dir.path())), 2);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        assert_eq!(code(&pgrad(&["family", "--family", "RegularFluxK", "--k", "3", "--out", name], dir.path())), 0);
    }
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    let x = pgrad(&["verify", "supersolution", "--R", "2"], dir.path()).stdout;
    let y = pgrad(&["verify", "supersolution", "--R", "2"], dir.path()).stdout;
    assert_eq!(x, y);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# run\nparams.n = 4\nparams.p = 2\nparams.q = 1.5\noutput.path = c.json\n",
    )
    .unwrap();
    let out = pgrad(&["constants", "--config", "run.cfg"], dir.path());
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(v["params"]["n"], 4);
    assert_eq!(v["lambda_tilde"], 1.0);

    // Flags override the file.
    let out = pgrad(&["constants", "--config", "run.cfg", "--n", "5", "--out", "d.json"], dir.path());
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d.json")).unwrap()).unwrap();
    assert_eq!(v["params"]["n"], 5);

    std::fs::write(dir.path().join("bad.cfg"), "params.n = 4\nplot.color = red\n").unwrap();
    let out = pgrad(&["constants", "--config", "bad.cfg"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}
