use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

const MESH: &str = r#"{"vertices": 5, "tetrahedra": [[1,2,3,4],[0,2,3,4],[0,1,3,4],[0,1,2,4],[0,1,2,3]]}"#;

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("spherepack-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_spherepack")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let doc = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc, String::from_utf8(out.stderr).unwrap())
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn validate_reports_closedness() {
    let s = Scratch::new("validate");
    let (code, doc, _) = run(&["validate", &s.file("m.json", MESH)]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["is_closed"], true);
    let (code, doc, _) = run(&["validate", &s.file("t.json", r#"{"vertices": 4, "tetrahedra": [[0,1,2,3]]}"#)]);
    assert_eq!(code, 2);
    assert_eq!(doc["result"]["is_closed"], false);
}

#[test]
fn boundary_of_unit_triple() {
    let (code, doc, _) = run(&["boundary", "1", "1", "1", "--geometry", "euclidean"]);
    assert_eq!(code, 0);
    let f = doc["result"]["boundary"].as_f64().unwrap();
    assert!((f - (2.0 / 3f64.sqrt() - 1.0)).abs() <= 1e-15);
    let (code, doc, _) = run(&["boundary", "1", "1", "1", "--geometry", "hyperbolic"]);
    assert_eq!(code, 0);
    let g = doc["result"]["boundary"].as_f64().unwrap();
    let k = [1.0 / g.tanh(), 1.0 / 1f64.tanh()];
    let q = (k[0] + 3.0 * k[1]).powi(2) - 2.0 * (k[0] * k[0] + 3.0 * k[1] * k[1]) + 4.0;
    assert!(q.abs() <= 1e-9, "{q}");
}

#[test]
fn curvature_of_regular_metric() {
    let s = Scratch::new("curvature");
    let mesh = s.file("m.json", MESH);
    let radii = s.file("r.json", r#"{"radii": [1, 1, 1, 1, 1]}"#);
    let (code, doc, _) = run(&["curvature", &mesh, &radii, "--geometry", "euclidean"]);
    assert_eq!(code, 0);
    let k = floats(&doc["result"]["K"]);
    let expected = 8.0 * PI - 12.0 * (1.0f64 / 3.0).acos();
    assert_eq!(k.len(), 5);
    assert!(k.iter().all(|x| (x - expected).abs() <= 1e-9));
    let ev = floats(&doc["result"]["eigenvalues"]);
    assert!(ev[0].abs() <= 1e-7 && ev[1] > 0.0);
    assert!(doc["result"]["kernel_residual"].as_f64().unwrap() <= 1e-7);

    let (code, doc, _) = run(&["curvature", &mesh, &radii, "--alpha", "-2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["alpha"].as_f64(), Some(-2.0));
    assert_eq!(floats(&doc["result"]["R_alpha"]), k);
}

#[test]
fn inadmissible_metric_is_a_domain_failure() {
    let s = Scratch::new("inadmissible");
    let mesh = s.file("m.json", MESH);
    let radii = s.file("r.json", r#"{"radii": [0.001, 1, 1, 1, 1]}"#);
    let (code, doc, err) = run(&["curvature", &mesh, &radii]);
    assert_eq!(code, 2);
    assert!(err.contains("inadmissible"), "{err}");
    let ext = floats(&doc["result"]["detail"]["K_extended"]);
    assert!((ext[0] + 4.0 * PI).abs() <= 1e-12);
    let (code, doc, _) = run(&["admissible", &mesh, &radii]);
    assert_eq!(code, 2);
    assert_eq!(doc["result"]["admissible"], false);
}

#[test]
fn input_errors_exit_one() {
    let s = Scratch::new("input");
    let mesh = s.file("m.json", MESH);
    assert_eq!(run(&["validate", "/nonexistent/mesh.json"]).0, 1);
    assert_eq!(run(&["validate", &s.file("bad.json", "{not json")]).0, 1);
    assert_eq!(run(&["curvature", &mesh, &s.file("short.json", r#"{"radii": [1, 1]}"#)]).0, 1);
    assert_eq!(run(&["curvature", &mesh, &s.file("neg.json", r#"{"radii": [1, -1, 1, 1, 1]}"#)]).0, 1);
    assert_eq!(run(&["solve", &mesh]).0, 1);
    assert_eq!(run(&["classify", "1", "1", "1"]).0, 1);
    assert_eq!(run(&["classify", "1", "1", "1", "0"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["validate", &mesh, "--geometry", "spherical"]).0, 1);
}

#[test]
fn solve_recovers_prescribed_metric() {
    let s = Scratch::new("solve");
    let mesh = s.file("m.json", MESH);
    let star = s.file("star.json", r#"{"radii": [1, 1.1, 0.9, 1.05, 0.95]}"#);
    let (_, doc, _) = run(&["curvature", &mesh, &star, "--geometry", "hyperbolic"]);
    let k = doc["result"]["K"].clone();
    let target = s.file("target.json", &serde_json::json!({ "target": k }).to_string());
    let init = s.file("init.json", r#"{"radii": [1.2, 0.8, 1, 1.3, 0.9]}"#);
    let (code, doc, _) = run(&["solve", &mesh, "--geometry", "hyperbolic", "--target", &target, "--init", &init, "--tol", "1e-10"]);
    assert_eq!(code, 0);
    let sol = &doc["result"]["solution"];
    assert_eq!(sol["converged"], true);
    let r = floats(&sol["radii"]);
    for (x, y) in r.iter().zip([1.0, 1.1, 0.9, 1.05, 0.95]) {
        assert!((x - y).abs() <= 1e-6);
    }
    assert_eq!(doc["result"]["options"]["gradient_tolerance"].as_f64(), Some(1e-10));
    assert_eq!(doc["header"]["inputs"].as_array().unwrap().len(), 3);

    let (code, doc, _) = run(&["rigidity", &mesh, &star, "--geometry", "hyperbolic", "--target", &target]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["certificate"]["certified"], true);
}

#[test]
fn rigidity_outside_hypotheses_fails() {
    let s = Scratch::new("rigidity");
    let mesh = s.file("m.json", MESH);
    let radii = s.file("r.json", r#"{"radii": [1, 1, 1, 1, 1]}"#);
    let (code, doc, _) = run(&["rigidity", &mesh, &radii]);
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["certificate"]["regime"], "scale_kernel");
    let (code, doc, _) = run(&["rigidity", &mesh, &radii, "--alpha", "2"]);
    assert_eq!(code, 2);
    assert_eq!(doc["result"]["certificate"]["regime"], "outside_hypotheses");
}

#[test]
fn header_is_reproducible() {
    let s = Scratch::new("header");
    let mesh = s.file("m.json", MESH);
    let (_, doc, _) = run(&["validate", &mesh]);
    let h = &doc["header"];
    assert_eq!(h["tool"], "spherepack");
    assert_eq!(h["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(h["command"], "validate");
    let digest = h["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert!(h["seed"].is_null());

    let out = s.0.join("exp.json");
    let out = out.to_str().unwrap();
    let (code, stdout, _) = run(&["experiment", "--trials", "3", "--seed", "11", "--out", out]);
    assert_eq!((code, stdout), (0, Value::Null));
    let text = std::fs::read_to_string(out).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["header"]["seed"].as_u64(), Some(11));
    assert_eq!(doc["result"]["trials"].as_u64(), Some(3));
    assert_eq!(doc["result"]["passed"], true);
    // Every float carries 17 significant digits.
    let r = doc["result"]["ground_truth"][0].as_f64().unwrap();
    assert!(text.contains(&format!("{r:.16e}")));
}

#[test]
fn selftest_passes() {
    let out = Command::new(env!("CARGO_BIN_EXE_spherepack")).arg("selftest").output().unwrap();
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert!(table.contains("5/5 suites passed"));
    assert!(!table.contains("FAIL"));
}
