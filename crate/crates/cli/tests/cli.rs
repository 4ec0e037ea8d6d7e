use std::path::PathBuf;

use floer_cli::dispatch;

fn data(rel: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../data");
    p.push(rel);
    p.to_string_lossy().into_owned()
}

fn run_with(args: &[&str], stdin: &str) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("floer").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = dispatch(&argv, &mut stdin.as_bytes(), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run(args: &[&str]) -> (i32, String, String) {
    run_with(args, "")
}

/// `(grading, dim)` rows of the table following `title`.
fn table(report: &str, title: &str) -> Vec<(String, usize)> {
    report
        .lines()
        .skip_while(|l| *l != title)
        .skip(1)
        .take_while(|l| l.starts_with("  ") && !l.trim_start().starts_with("total"))
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.next().unwrap().parse().unwrap())
        })
        .collect()
}

fn rows(list: &[(&str, usize)]) -> Vec<(String, usize)> {
    list.iter().map(|&(g, d)| (g.to_string(), d)).collect()
}

#[test]
fn s3_model_pipes_into_homology() {
    let (code, model, _) = run(&["model", "s3", "--levels", "3"]);
    assert_eq!(code, 0);
    let (code, out, _) = run_with(&["homology", "--flavor", "to", "-"], &model);
    assert_eq!(code, 0);
    assert_eq!(table(&out, "homology to:"), rows(&[("0", 1), ("2", 1), ("4", 1)]));
    assert!(out.starts_with("command: floer homology --flavor to -\ninput: sha256:"));
}

#[test]
fn rho_of_minus_e8() {
    let (code, out, _) = run(&["rho", &data("forms/minus_e8.json")]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "rho = 1"), "{out}");
    let (_, seq, _) = run(&["rho", &data("forms/minus_e8.json"), "--sequential"]);
    assert_eq!(seq.lines().skip(1).collect::<Vec<_>>(), out.lines().skip(1).collect::<Vec<_>>());
}

#[test]
fn rho_rejects_small_box_and_indefinite_forms() {
    let (code, _, err) = run(&["rho", &data("forms/minus_i4.json"), "--box", "0"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, err) = run_with(&["rho", "-"], "[[1, 0], [0, -1]]");
    assert_eq!(code, 2);
    assert!(err.contains("not negative definite"), "{err}");
}

#[test]
fn corrupt_file_reports_pointer() {
    let (code, out, err) = run(&["validate", &data("corrupt.json")]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("/ops/d_us/0/0"), "{err}");
}

#[test]
fn malformed_json_reports_position() {
    let (code, _, err) = run_with(&["validate", "-"], "{\n  \"name\": \"x\",\n  \"points\": [,]\n}");
    assert_eq!(code, 2);
    assert!(err.contains("malformed JSON at line 3, column 14"), "{err}");
    let (code, _, err) = run_with(&["validate", "-"], r#"{"name": "x", "points": [], "extra": 1}"#);
    assert_eq!(code, 2);
    assert!(err.contains("schema violation at /"), "{err}");
    let (code, _, err) = run_with(&["validate", "-"], r#"{"name": "x", "points": [{"id": "a", "kind": "o", "grading": 1.5}]}"#);
    assert_eq!(code, 2);
    assert!(err.contains("/points/0/grading"), "{err}");
}

#[test]
fn missing_file_and_bad_flags_are_input_errors() {
    assert_eq!(run(&["validate", "/nonexistent/flow.json"]).0, 2);
    assert_eq!(run(&["homology", "--flavor", "sideways", "-"]).0, 2);
    assert_eq!(run(&["model", "hermitian", "--eigs", "0,1"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn shipped_flows_match_generators_and_round_trip() {
    let cases: [(&str, &[&str]); 5] = [
        ("flows/interval.json", &["model", "interval"]),
        ("flows/hemisphere.json", &["model", "hemisphere"]),
        ("flows/disk4.json", &["model", "disk4"]),
        ("flows/s3_3.json", &["model", "s3", "--levels", "3"]),
        ("flows/hermitian4.json", &["model", "hermitian", "--eigs", "-2,-1,1,3"]),
    ];
    for (file, gen) in cases {
        let (code, generated, _) = run(gen);
        assert_eq!(code, 0);
        assert_eq!(generated, std::fs::read_to_string(data(file)).unwrap(), "{file}");
        let (code, out, _) = run_with(&["validate", "-"], &generated);
        assert_eq!(code, 0, "{out}");
        for flavor in ["to", "from", "bar"] {
            let (_, from_file, _) = run(&["homology", "--flavor", flavor, &data(file)]);
            let (_, from_pipe, _) = run_with(&["homology", "--flavor", flavor, "-"], &generated);
            let title = format!("homology {flavor}:");
            assert_eq!(table(&from_file, &title), table(&from_pipe, &title), "{file} {flavor}");
        }
    }
}

#[test]
fn singular_homology_oracles() {
    let expect = [
        ("flows/interval.json", [vec![("0", 1)], vec![("1", 1)], vec![("0", 2)]]),
        ("flows/hemisphere.json", [vec![("0", 1)], vec![("2", 1)], vec![("0", 1), ("1", 1)]]),
        ("flows/disk4.json", [vec![("0", 1)], vec![("2", 1)], vec![("0", 1), ("1", 1)]]),
    ];
    for (file, dims) in expect {
        let (code, out, _) = run(&["triangle", &data(file)]);
        assert_eq!(code, 0, "{out}");
        for (flavor, d) in ["to", "from", "bar"].iter().zip(&dims) {
            assert_eq!(table(&out, &format!("homology {flavor}:")), rows(d), "{file} {flavor}");
        }
        assert!(out.ends_with("verdict: pass\n"));
    }
}

#[test]
fn dual_exchanges_flavors() {
    let (_, dual, _) = run(&["dual", &data("flows/interval.json")]);
    let (_, out, _) = run_with(&["homology", "--flavor", "from", "-"], &dual);
    assert_eq!(table(&out, "homology from:"), rows(&[("-1", 1)]));
    let (_, twice, _) = run_with(&["dual", "-"], &dual);
    let strip = |text: &str| {
        let mut v: serde_json::Value = serde_json::from_str(text).unwrap();
        v.as_object_mut().unwrap().remove("name");
        v
    };
    assert_eq!(strip(&twice), strip(&std::fs::read_to_string(data("flows/interval.json")).unwrap()));
}

#[test]
fn failed_validation_exits_one() {
    let text = std::fs::read_to_string(data("flows/disk4.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["ops"]["d_os"] = serde_json::json!([["c", "s"]]);
    let (code, out, _) = run_with(&["validate", "-"], &v.to_string());
    assert_eq!(code, 1);
    assert!(out.contains("identity os fails"), "{out}");
    assert!(out.ends_with("verdict: fail\n"));
    let (code, _, err) = run_with(&["homology", "--flavor", "to", "-"], &v.to_string());
    assert_eq!(code, 1, "{err}");
}

#[test]
fn froyshov_from_flow_and_module() {
    let (code, out, _) = run(&["froyshov", &data("flows/s3_3.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("\nh = 0\n"), "{out}");
    let (code, out, _) = run(&["froyshov", &data("modules/s3_u3.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("\nh = 0\n"), "{out}");
    let shifted = r#"{"gradings": [-2, 0], "dims": [1, 1], "U": [{"from": 0, "matrix": [[1]]}],
        "i_image": [{"grading": -2, "basis": [[1]]}, {"grading": 0, "basis": [[1]]}]}"#;
    let (_, out, _) = run_with(&["froyshov", "-"], shifted);
    assert!(out.contains("\nh = 1\n"), "{out}");
    let broken = r#"{"gradings": [0, 2], "dims": [1, 1], "i_image": [{"grading": 0, "basis": [[1]]}, {"grading": 2, "basis": [[1]]}]}"#;
    let (code, out, _) = run_with(&["froyshov", "-"], broken);
    assert_eq!(code, 1, "{out}");
}

#[test]
fn pin2_pipeline() {
    let (_, module, _) = run(&["model", "pin2-s3", "--levels", "3", "--module"]);
    let (code, out, _) = run_with(&["correction-terms", "-", "--rokhlin", "0"], &module);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("towers (a, b, c) = (0, 1, 2)\nalpha = 0\nbeta = 0\ngamma = 0\n"), "{out}");
    let (code, _, _) = run_with(&["correction-terms", "-", "--rokhlin", "1"], &module);
    assert_eq!(code, 1);
    let (_, levels, _) = run(&["model", "pin2-s3", "--levels", "2"]);
    let (code, out, _) = run_with(&["bott", "collapse", "-"], &levels);
    assert_eq!(code, 0);
    assert_eq!(table(&out, "homology:").len(), 6);
}

#[test]
fn spectral_flow_paths() {
    let (code, out, _) = run(&["spectral-flow", &data("paths/diag_t.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("  t = 0  +1\nspectral flow = 1\n"), "{out}");
    let (_, out, _) = run(&["spectral-flow", &data("paths/avoided_crossing.json")]);
    assert!(out.contains("spectral flow = 0"));
    let (code, out, _) = run(&["spectral-flow", &data("paths/complex_loop.json"), "--mod", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("closed: yes\nverdict: pass"), "{out}");
    let (code, _, err) = run_with(&["spectral-flow", "-"], r#"[{"t": 0, "matrix": [[0]]}, {"t": 1, "matrix": [[1]]}]"#);
    assert_eq!(code, 2);
    assert!(err.contains("within tolerance of zero"), "{err}");
}

#[test]
fn grading_calculators() {
    let line = |args: &[&str]| run(args).1.lines().nth(2).unwrap().to_string();
    assert_eq!(line(&["grading", "closed", "--c1sq", "0", "--chi", "2", "--sigma", "0"]), "closed dimension = -1");
    assert_eq!(line(&["grading", "closed", "--c1sq", "0", "--chi", "24", "--sigma", "-16"]), "closed dimension = 0");
    assert_eq!(line(&["grading", "closed", "--c1sq", "9", "--chi", "3", "--sigma", "1"]), "closed dimension = 0");
    assert_eq!(line(&["grading", "degree", "--chi", "8", "--sigma", "-8"]), "degree = 2");
    assert_eq!(line(&["grading", "iota", "--chi", "2", "--sigma", "0", "--b1-in", "1", "--b1-out", "1"]), "iota = 1");
    assert_eq!(line(&["grading", "degree", "--c1sq", "-1/2", "--chi", "1", "--sigma", "-1"]), "degree = 1/8");
    assert_eq!(run(&["grading", "iota", "--chi", "1", "--sigma", "0"]).0, 2);
}

#[test]
fn bott_commands() {
    let (_, out, _) = run(&["bott", "collapse", &data("bott/cp2.json")]);
    assert_eq!(table(&out, "homology:"), rows(&[("0", 1), ("2", 1), ("4", 1)]));
    assert_eq!(run(&["bott", "collapse", &data("bott/adjacent.json")]).0, 1);
    assert_eq!(run(&["bott", "collapse", &data("bott/adjacent.json"), "--degree", "-3"]).0, 0);
    let (code, out, _) = run(&["bott", "gysin", &data("bott/s2_antipodal.json")]);
    assert_eq!(code, 0);
    assert_eq!(table(&out, "invariant homology:"), rows(&[("0", 1), ("1", 1), ("2", 1)]));
}

#[test]
fn reports_are_deterministic() {
    let commands: [&[&str]; 4] = [
        &["triangle", &data("flows/disk4.json")],
        &["rho", &data("forms/minus_i4.json")],
        &["spectral-flow", &data("paths/complex_loop.json")],
        &["umodule", &data("flows/s3_3.json")],
    ];
    for args in commands {
        assert_eq!(run(args), run(args));
    }
}
