use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quatorbit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quatorbit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Writes the frame produced by `generate` to a scratch file.
fn generated(name: &str, spec: &str, n: usize, extra: &[&str]) -> PathBuf {
    let n = n.to_string();
    let mut args = vec!["generate", spec, "--n", &n];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = scratch(name);
    std::fs::write(&path, &o.stdout).unwrap();
    path
}

const COMPLEX4: &str = r#"{"class":"Complex4","structure":[1,2,2],"theta":0.7}"#;

#[test]
fn analyze_complex4_reports_theta() {
    let u = generated("c4.json", COMPLEX4, 3, &["--scramble"]);
    let o = run(&["analyze", u.to_str().unwrap(), "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "pure-complex");
    let data = &v["invariant"]["data"];
    assert!((data["multiangle"][0].as_f64().unwrap() - 0.7).abs() < 1e-9);
    let s: Vec<f64> = data["structure"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (a, b) in s.iter().zip([1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn text_mode_prints_degrees() {
    let u = generated("c4text.json", COMPLEX4, 3, &[]);
    let o = run(&["analyze", u.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(&format!("[{:.6}] deg", 0.7f64.to_degrees())), "{}", stdout(&o));
}

#[test]
fn analyze_rhps_is_totally_real() {
    let u = generated("rhps.json", r#"{"class":"TotallyRealRhps","dim":3}"#, 3, &[]);
    let o = run(&["analyze", u.to_str().unwrap(), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "totally-real");
    assert_eq!(v["invariant"]["class"], "rhps");
}

#[test]
fn malformed_json_exits_with_usage_code() {
    let path = scratch("bad.json");
    std::fs::write(&path, "{\"n\": 1,\n \"columns\": [[1, 0,").unwrap();
    let o = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn decompose_mixed_and_quaternionic() {
    let spec = r#"{"class":"SigmaComplex","parts":[{"structure":[1,0,0],"multiangle":[0.4]},{"structure":[0,1,1],"multiangle":[1.1],"trailing_plane":true}]}"#;
    let u = generated("sigma.json", spec, 5, &["--scramble", "--seed", "3"]);
    let o = run(&["decompose", u.to_str().unwrap(), "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["U_Q_dim"], 0);
    assert_eq!(v["U_R_dim"], 0);
    let sigma = v["sigma"].as_array().unwrap();
    assert_eq!(sigma.len(), 2);
    assert_eq!(sigma[0]["dim"], 6);
    assert!((sigma[0]["multiangle"][0].as_f64().unwrap() - 1.1).abs() < 1e-9);
    assert!((sigma[1]["multiangle"][0].as_f64().unwrap() - 0.4).abs() < 1e-9);

    let q = generated("quat.json", r#"{"class":"Quaternionic","dim":8}"#, 3, &[]);
    let v: Value = serde_json::from_str(&stdout(&run(&["decompose", q.to_str().unwrap(), "--json"]))).unwrap();
    assert_eq!(v["U_Q_dim"], 8);
    assert_eq!(v["sigma"].as_array().unwrap().len(), 0);

    let empty = scratch("empty.json");
    std::fs::write(&empty, r#"{"n": 2, "columns": []}"#).unwrap();
    let o = run(&["decompose", empty.to_str().unwrap(), "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((v["U_Q_dim"].as_u64(), v["U_R_dim"].as_u64()), (Some(0), Some(0)));
}

#[test]
fn same_orbit_and_witness() {
    let u = generated("u.json", COMPLEX4, 3, &[]);
    let gu = generated("gu.json", COMPLEX4, 3, &["--scramble", "--seed", "11"]);
    let other = generated("v.json", r#"{"class":"Complex4","structure":[1,2,2],"theta":0.8}"#, 3, &[]);
    let (u, gu, other) = (u.to_str().unwrap(), gu.to_str().unwrap(), other.to_str().unwrap());

    let v: Value = serde_json::from_str(&stdout(&run(&["same-orbit", u, gu, "--json"]))).unwrap();
    assert_eq!(v["same_orbit"], true);
    let v: Value = serde_json::from_str(&stdout(&run(&["same-orbit", u, other, "--json"]))).unwrap();
    assert_eq!(v["same_orbit"], false);

    let o = run(&["witness", u, gu, "--json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["matrix"].as_array().unwrap().len(), 12);
    assert!(v["verification"]["max_principal_angle"].as_f64().unwrap() < 1e-7);

    let o = run(&["witness", u, other]);
    assert!(!o.status.success());
}

#[test]
fn ambient_dimension_mismatch_is_an_error() {
    let a = generated("a3.json", COMPLEX4, 3, &[]);
    let b = generated("b4.json", COMPLEX4, 4, &[]);
    let o = run(&["same-orbit", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn basis_flag_changes_reported_coordinates() {
    let u = generated("basis.json", COMPLEX4, 3, &[]);
    // I' = J, J' = K, K' = I.
    let o = run(&["analyze", u.to_str().unwrap(), "--json", "--basis", "0", "1", "0", "0", "0", "1", "1", "0", "0"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let s: Vec<f64> =
        v["invariant"]["data"]["structure"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (a, b) in s.iter().zip([2.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0]) {
        assert!((a - b).abs() < 1e-9, "{s:?}");
    }
    let o = run(&["analyze", u.to_str().unwrap(), "--basis", "1", "1", "0", "0", "0", "1", "1", "0", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes_and_reports_injected_failures() {
    let o = run(&["selftest", "--scale", "0.05", "--only", "1,2,3,5,11,12"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 6);

    let o = run(&["selftest", "--scale", "0.05", "--only", "1,2", "--inject-tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL]"));

    let o = run(&["selftest", "--scale", "0.05", "--only", "1,3", "--seed", "7"]);
    assert!(o.status.success());
}

#[test]
fn usage_errors_exit_with_code_2() {
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["generate", r#"{"class":"Quaternionic","dim":6}"#]).status.code(), Some(2));
}

#[test]
fn oriented_two_planes_distinguish_reversed_bases() {
    let u = generated("plane.json", r#"{"class":"TwoPlane","im":[0.3,0.4,0.0]}"#, 2, &[]);
    let text = std::fs::read_to_string(&u).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["columns"].as_array_mut().unwrap().reverse();
    let rev = scratch("plane_rev.json");
    std::fs::write(&rev, v.to_string()).unwrap();
    let (u, rev) = (u.to_str().unwrap(), rev.to_str().unwrap());
    let plain: Value = serde_json::from_str(&stdout(&run(&["same-orbit", u, rev, "--json"]))).unwrap();
    assert_eq!(plain["same_orbit"], true);
    let oriented: Value = serde_json::from_str(&stdout(&run(&["same-orbit", u, rev, "--json", "--oriented"]))).unwrap();
    assert_eq!(oriented["same_orbit"], false);
}
