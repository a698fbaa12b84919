use std::path::Path;
use std::process::{Command, Output};

use radwave::catalog::{Shape, Slot};
use radwave::io::{load_cauchy, save_cauchy};
use radwave::radial_transform::{make_grid, DimensionParams};
use serde_json::Value;
use tempfile::TempDir;

fn radwave(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radwave")).args(args).current_dir(cwd).output().unwrap()
}

fn summary(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("out/{name}.json"))).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn predict_splits_pure_velocity_data_in_half() {
    let tmp = TempDir::new().unwrap();
    let o = radwave(tmp.path(), &["predict", "--dim", "3", "--f", "none", "--g", "bump"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(tmp.path(), "predict");
    let rows = s["result"]["breakdowns"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let ratio = r["physical_prediction"].as_f64().unwrap() / r["e_total"].as_f64().unwrap();
        assert!((ratio - 0.5).abs() < 1e-10, "{ratio}");
    }
    assert!(tmp.path().join("out/predict.csv").exists());
}

#[test]
fn counterexample_ratio_falls_with_the_band() {
    let tmp = TempDir::new().unwrap();
    let ratio = |b: &str| {
        let o = radwave(tmp.path(), &["counterexample", "--b", b]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        summary(tmp.path(), "counterexample")["result"]["ratio"].as_f64().unwrap()
    };
    assert!(ratio("1000") < ratio("10"));
}

#[test]
fn selftest_passes() {
    let tmp = TempDir::new().unwrap();
    let o = radwave(tmp.path(), &["selftest", "--out", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = summary(tmp.path(), "selftest");
    let checks = s["result"]["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"].as_bool() == Some(true)));
}

#[test]
fn bad_input_exits_2_naming_the_flag() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("bad.cfg"), "dim = 3\nbogus = 1\n").unwrap();
    let cases: [(&[&str], &str); 5] = [
        (&["predict", "--dim", "9"], "--dim"),
        (&["predict", "--band", "4:1"], "--band"),
        (&["predict", "--data", "sawtooth"], "--data"),
        (&["energy", "--grid-n", "101", "--t-list", "500"], "--grid-n"),
        (&["predict", "--config", "bad.cfg"], "--config"),
    ];
    for (args, flag) in cases {
        let o = radwave(tmp.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn flag_beats_config_beats_default() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("run.cfg"), "# study settings\ndim = 4\ndirection = +\n").unwrap();
    let dim_of = |args: &[&str]| {
        let o = radwave(tmp.path(), args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let s = summary(tmp.path(), "predict");
        (s["config"]["dim"].as_str().unwrap().to_string(), s["config"]["direction"].as_str().unwrap().to_string())
    };
    assert_eq!(dim_of(&["predict"]), ("3".into(), "both".into()));
    assert_eq!(dim_of(&["predict", "--config", "run.cfg"]), ("4".into(), "+".into()));
    assert_eq!(dim_of(&["predict", "--config", "run.cfg", "--dim", "2"]), ("2".into(), "+".into()));
}

#[test]
fn verify_flags_a_missed_tolerance() {
    let tmp = TempDir::new().unwrap();
    let ok = radwave(tmp.path(), &["verify", "--t-list", "25,100"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let tight = radwave(tmp.path(), &["verify", "--t-list", "25,100", "--tol", "1e-9"]);
    assert_eq!(tight.status.code(), Some(3), "{}", stderr(&tight));
}

#[test]
fn profiles_survive_a_file_round_trip() {
    let tmp = TempDir::new().unwrap();
    let grid = make_grid(1.0, 4.0, 10.0, 10.0, 8.0).unwrap();
    let data = Shape::PolyBump.data(Slot::Both, DimensionParams::new(5).unwrap(), grid).unwrap();
    save_cauchy(tmp.path(), "pb", &data).unwrap();
    let back = load_cauchy(tmp.path(), "pb").unwrap();
    assert_eq!(back.dim.d, 5);
    assert_eq!(back.grid().nodes(), data.grid().nodes());
    assert_eq!(back.fhat.values(), data.fhat.values());
    assert_eq!(back.ghat.values(), data.ghat.values());
}

#[test]
fn mismatched_profile_file_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let grid = make_grid(1.0, 4.0, 10.0, 10.0, 8.0).unwrap();
    let data = Shape::Bump.data(Slot::F, DimensionParams::new(3).unwrap(), grid).unwrap();
    save_cauchy(tmp.path(), "b", &data).unwrap();
    let json = tmp.path().join("b.json");
    let text = std::fs::read_to_string(&json).unwrap().replace("\"rho_hi\": 4.0", "\"rho_hi\": 5.0");
    std::fs::write(&json, text).unwrap();
    assert!(load_cauchy(tmp.path(), "b").is_err());
}
