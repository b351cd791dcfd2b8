use std::io::Write;
use std::process::{Command, Output};

fn homlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homlab")).args(args).output().expect("spawn homlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn classify_gallery_type_eps() {
    let o = homlab(&["classify", "--gallery", "st_2d", "--resolution", "32", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "TypeEps");
    let c111 = v["tensor"]["c"][0][0][0].as_f64().unwrap();
    assert!((c111 + 1.0 / (128.0 * std::f64::consts::PI)).abs() < 1e-8, "{c111}");
}

#[test]
fn classify_separable_is_type_eps2() {
    let o = homlab(&["classify", "--gallery", "separable_diag", "--resolution", "16", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "TypeEps2");
}

#[test]
fn classify_input_file() {
    let doc = r#"{"dimension": 2, "entries": {
        "11": [{"k": [0, 0], "phase": "cos", "amp": 2.0}, {"k": [1, 1], "phase": "sin", "amp": 0.4}],
        "12": [{"k": [1, 0], "phase": "cos", "amp": 0.2}],
        "22": [{"k": [0, 0], "phase": "cos", "amp": 1.5}, {"k": [0, 1], "phase": "cos", "amp": 0.3}]}}"#;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(doc.as_bytes()).unwrap();
    let path = f.path().to_str().unwrap();
    let o = homlab(&["classify", "--input", path, "--resolution", "32", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("verdict,max_c,threshold,gap,coarse,fine\n"));
    assert!(text.lines().nth(1).unwrap().starts_with("TypeEps,"), "{text}");
}

#[test]
fn tensor_csv_lists_every_entry() {
    let o = homlab(&["tensor", "--gallery", "st_2d", "--resolution", "16", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("j,k,l,c,c_sym"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn invariant_measure_has_unit_mean() {
    let o = homlab(&["invariant", "--gallery", "st_2d", "--resolution", "16", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["mean"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["values"].as_array().unwrap().len(), 256);
}

#[test]
fn verify_echoes_seed() {
    let o = homlab(&["verify", "thm13", "--trials", "3", "--seed", "77", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["seed"], 77);
    assert_eq!(v["trials"], 3);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn rate_constant_preset_is_degenerate() {
    let csv = homlab(&["rate", "--preset", "constant_2d", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    assert_eq!(stdout(&csv).lines().next(), Some("epsilon,error_u,error_z"));
    let v = json(&homlab(&["rate", "--preset", "constant_2d", "--format", "json"]));
    let flags = v["flags"].as_array().unwrap();
    assert!(flags.iter().any(|f| f == "degenerate"));
    assert!(!flags.iter().any(|f| f == "non_monotone"));
}

#[test]
fn gallery_listing_and_unknown_name() {
    let o = homlab(&["gallery"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("st_2d"));
    assert_eq!(homlab(&["classify", "--gallery", "no_such_field"]).status.code(), Some(1));
}

#[test]
fn bad_inputs_exit_one() {
    assert_eq!(homlab(&["classify", "--input", "/nonexistent/field.json"]).status.code(), Some(1));
    assert_eq!(homlab(&["classify", "--gallery", "st_2d", "--resolution", "8"]).status.code(), Some(1));
    assert_eq!(homlab(&["classify", "--gallery", "st_2d", "--tolerance", "0.5"]).status.code(), Some(1));
    assert_eq!(homlab(&["verify", "nope"]).status.code(), Some(1));
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(br#"{"dimension": 2, "entries": {"21": []}}"#).unwrap();
    assert_eq!(homlab(&["tensor", "--input", f.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn output_file_and_deterministic_json() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = homlab(&["tensor", "--gallery", "const_trace_typeeps_2d", "--resolution", "32", "--format", "json", "--output", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(p).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
}
