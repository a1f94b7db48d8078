use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sig(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sig"));
    cmd.args(args).env_remove("SIG_OUT_DIR");
    if let Some(d) = env_out {
        cmd.env("SIG_OUT_DIR", d);
    }
    cmd.output().expect("spawn sig")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn q(v: f64) -> Value {
    json!({ "value": v, "unit": "natural" })
}

fn particle(center: f64) -> Value {
    json!({
        "mass": q(1.0),
        "grid": { "center": q(center), "spacing": q(0.05), "points": 41 },
        "packet": { "center": q(center), "width": q(0.2), "momentum": q(0.0) }
    })
}

fn trajectories() -> Value {
    json!({
        "kind": "trajectories",
        "name": "traj",
        "seed": 3,
        "numerics": { "records": 10 },
        "model": {
            "v": q(0.5), "sigma": q(0.2), "g_newton": q(1.0),
            "potential": { "type": "newtonian" },
            "hamiltonian": "none",
            "particles": [particle(0.0)],
            "t_final": q(1.0),
            "trajectories": 20
        }
    })
}

fn interferometry(distance: f64) -> Value {
    json!({
        "kind": "interferometry",
        "name": "ifm",
        "numerics": { "records": 10 },
        "model": {
            "source_mass": q(1.0), "atom_mass": q(1.0), "arm_separation": q(1.0),
            "distance": q(distance), "source_width": q(0.1), "omega": q(0.0), "nbar": q(0.0),
            "beta": { "re": q(0.0), "im": q(0.0) },
            "v": q(0.5), "sigma": q(0.5), "g_newton": q(1.0),
            "kick": "dipole", "initial": "product", "atom_dephasing": true, "t_final": q(2.0)
        }
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_file_and_bad_json_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = sig(&["run", path_str(&dir.path().join("absent.json"))], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let p = dir.path().join("broken.json");
    std::fs::write(&p, "{ \"kind\": ").unwrap();
    let o = sig(&["run", path_str(&p)], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("\"error\":\"parse\""));
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = trajectories();
    v["model"]["extra"] = json!(1);
    let p = write(dir.path(), "s.json", &v);
    let o = sig(&["run", path_str(&p)], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("extra"));
}

#[test]
fn unknown_unit_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = trajectories();
    v["model"]["sigma"] = json!({ "value": 0.2, "unit": "furlong" });
    let p = write(dir.path(), "s.json", &v);
    let o = sig(&["validate", path_str(&p)], None);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(err["error"], "validation");
    assert_eq!(err["field"], "model.sigma.unit");
}

#[test]
fn wrong_dimension_unit_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = trajectories();
    v["model"]["t_final"] = json!({ "value": 1.0, "unit": "kg" });
    let p = write(dir.path(), "s.json", &v);
    let o = sig(&["validate", path_str(&p)], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("model.t_final.unit"));
}

#[test]
fn validate_reports_calibration_and_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = trajectories();
    v["model"]["particles"] = json!([particle(-5.0), particle(5.0)]);
    v["model"]["particles"][0]["grid"]["spacing"] = q(0.2);
    let p = write(dir.path(), "s.json", &v);
    let o = sig(&["validate", path_str(&p)], None);
    let out = stdout(&o);
    assert!(out.contains("check calibration: PASS"), "{out}");
    assert!(out.contains("check grid-resolution[0]: FAIL"), "{out}");
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("grid-resolution[0]"));

    let o = sig(&["run", path_str(&p), "--out-dir", path_str(dir.path())], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(!dir.path().join("traj_series.csv").exists());
}

#[test]
fn validate_flags_multipole_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "near.json", &interferometry(1.5));
    let o = sig(&["validate", path_str(&p)], None);
    assert!(stdout(&o).contains("check multipole-validity: FAIL"), "{}", stdout(&o));
    assert_eq!(o.status.code(), Some(3));

    let p = write(dir.path(), "far.json", &interferometry(10.0));
    let o = sig(&["validate", path_str(&p)], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("value theta ="));
}

#[test]
fn bounds_command_requires_bounds_kind() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "ifm.json", &interferometry(10.0));
    let o = sig(&["bounds", path_str(&p)], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("\"field\":\"kind\""));
}

#[test]
fn reruns_are_byte_identical_and_seed_matters() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.json", &trajectories());
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for d in [&a, &b] {
        let o = sig(&["run", path_str(&p), "--out-dir", path_str(d), "--threads", "2"], None);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let o = sig(&["run", path_str(&p), "--out-dir", path_str(&c), "--seed", "4"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for table in ["traj_series.csv", "traj_jumps.csv"] {
        let x = std::fs::read(a.join(table)).unwrap();
        assert_eq!(x, std::fs::read(b.join(table)).unwrap(), "{table}");
        assert_ne!(x, std::fs::read(c.join(table)).unwrap(), "{table}");
    }
    let sa: Value = serde_json::from_slice(&std::fs::read(a.join("traj_summary.json")).unwrap()).unwrap();
    let sc: Value = serde_json::from_slice(&std::fs::read(c.join("traj_summary.json")).unwrap()).unwrap();
    assert_eq!(sa["seed"], 3);
    assert_eq!(sc["seed"], 4);
    assert_eq!(sa["config_hash"], sc["config_hash"]);
    assert_eq!(sa["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn csv_is_crlf_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "ifm.json", &interferometry(10.0));
    let o = sig(&["run", path_str(&p), "--out-dir", path_str(dir.path())], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("ifm_series.csv")).unwrap();
    assert!(text.starts_with("t,re_sigma_minus,im_sigma_minus,visibility\r\n"));
    assert!(text.ends_with("\r\n"));
    let rows: Vec<&str> = text.trim_end().split("\r\n").collect();
    assert_eq!(rows.len(), 12);
    let first: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.5, 0.0, 0.5]);
}

#[test]
fn output_directory_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let flag_dir = dir.path().join("from_flag");
    let mut v = interferometry(10.0);
    let p = write(dir.path(), "ifm.json", &v);
    let o = sig(&["run", path_str(&p)], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(env_dir.join("ifm_summary.json").exists());

    v["output"] = json!({ "dir": "from_file" });
    let p = write(dir.path(), "ifm.json", &v);
    let o = sig(&["run", path_str(&p)], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("from_file").join("ifm_summary.json").exists());

    let o = sig(&["run", path_str(&p), "--out-dir", path_str(&flag_dir)], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.join("ifm_summary.json").exists());
}

#[test]
fn bounds_scenario_in_si_units() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "kind": "bounds",
        "name": "b",
        "model": {
            "v_axis": { "min": q(1e-30), "max": q(1e-5), "points": 20 },
            "sigma_axis": { "min": { "value": 1.0, "unit": "pm" }, "max": { "value": 0.1, "unit": "m" }, "points": 20 },
            "points": [{ "v": q(1e-20), "sigma": { "value": 1.0, "unit": "um" } }]
        }
    });
    let p = write(dir.path(), "b.json", &v);
    let o = sig(&["bounds", path_str(&p), "--out-dir", path_str(dir.path())], None);
    assert_eq!(o.status.code(), Some(3), "pm is not a length unit: {}", stderr(&o));

    let mut v = v;
    v["model"]["sigma_axis"]["min"] = json!({ "value": 1e-12, "unit": "m" });
    let p = write(dir.path(), "b.json", &v);
    let o = sig(&["bounds", path_str(&p), "--out-dir", path_str(dir.path())], None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("b_exclusion.csv")).unwrap();
    assert_eq!(text.trim_end().split("\r\n").count(), 401);
    let s: Value = serde_json::from_slice(&std::fs::read(dir.path().join("b_summary.json")).unwrap()).unwrap();
    assert_eq!(s["summary"]["total_cells"], 400.0);
    let heating = s["summary"]["points"][0]["backaction_heating_k_per_s"].as_f64().unwrap();
    assert!(heating > 0.0);
}

#[test]
fn shipped_scenarios_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(&root).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        seen += 1;
        let expected = if p.file_stem().unwrap().to_str().unwrap().starts_with("validate_") { 3 } else { 0 };
        let o = sig(&["validate", path_str(&p)], None);
        assert_eq!(o.status.code(), Some(expected), "{}: {}", p.display(), stderr(&o));
    }
    assert!(seen >= 5);
}
