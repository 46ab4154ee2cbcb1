use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cfbmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfbmc")).args(args).output().expect("binary runs")
}

fn run_preset(preset: &str, out: &Path) -> Output {
    cfbmc(&["run", "--preset", preset, "--out", out.to_str().unwrap()])
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn files_with_prefix(dir: &Path, prefix: &str) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with(prefix))
        .collect();
    names.sort();
    names
}

fn preset_config(name: &str) -> Value {
    let out = cfbmc(&["config", "--preset", name]);
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn is_c_scientific(field: &str) -> bool {
    let (mantissa, exp) = match field.split_once('e') {
        Some(parts) => parts,
        None => return false,
    };
    let mantissa = mantissa.strip_prefix('-').unwrap_or(mantissa);
    let digits_ok = mantissa.len() == 14
        && mantissa.as_bytes()[1] == b'.'
        && mantissa.chars().filter(|c| *c != '.').all(|c| c.is_ascii_digit());
    let exp_ok = exp.len() >= 3
        && (exp.starts_with('+') || exp.starts_with('-'))
        && exp[1..].chars().all(|c| c.is_ascii_digit());
    digits_ok && exp_ok
}

#[test]
fn fig2_writes_six_pulses_and_six_spectra() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("fig2");
    let status = run_preset("fig2", &out);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    assert_eq!(files_with_prefix(&out, "pulse_").len(), 6);
    assert_eq!(files_with_prefix(&out, "esd_").len(), 6);
    assert!(out.join("window_tx.csv").exists() && out.join("window_rx.csv").exists());

    let manifest = read_json(&out.join("manifest.json"));
    let mut echoed = preset_config("fig2");
    echoed["output_dir"] = Value::String(out.to_str().unwrap().into());
    assert_eq!(manifest["config"], echoed);
    assert_eq!(manifest["prototype"]["M"], 3);
    assert_eq!(manifest["curves"].as_array().unwrap().len(), 6);

    let esd = fs::read_to_string(out.join("esd_k2_l1.csv")).unwrap();
    let mut lines = esd.lines();
    assert_eq!(lines.next(), Some("omega,esd_db"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4096);
    assert!(rows.iter().flat_map(|r| r.split(',')).all(is_c_scientific));

    let pulse = fs::read_to_string(out.join("pulse_k2_l3.csv")).unwrap();
    let rows: Vec<&str> = pulse.lines().skip(1).collect();
    assert_eq!(rows.len(), 58);
    assert!(rows[0].starts_with("-10,"));
    assert!(rows.iter().all(|r| r.split(',').skip(1).all(is_c_scientific)));
}

#[test]
fn raised_cosine_lowers_oob() {
    let tmp = TempDir::new().unwrap();
    let (rect_dir, rc_dir) = (tmp.path().join("fig2"), tmp.path().join("fig3"));
    assert!(run_preset("fig2", &rect_dir).status.success());
    assert!(run_preset("fig3", &rc_dir).status.success());
    assert_eq!(files_with_prefix(&rect_dir, ""), files_with_prefix(&rc_dir, ""));

    let rect = read_json(&rect_dir.join("manifest.json"));
    let rc = read_json(&rc_dir.join("manifest.json"));
    assert!(rc["packet_oob_db"].as_f64().unwrap() < rect["packet_oob_db"].as_f64().unwrap());

    let per_slot = |m: &Value| -> Vec<f64> {
        m["curves"].as_array().unwrap().iter().map(|c| c["oob_db"].as_f64().unwrap()).collect()
    };
    let worst = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = |v: &[f64]| worst(v) - v.iter().copied().fold(f64::INFINITY, f64::min);
    let (a, b) = (per_slot(&rect), per_slot(&rc));
    assert!(worst(&b) < worst(&a));
    assert!(spread(&b) < spread(&a));
}

#[test]
fn empty_slot_list_writes_no_pulses() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_config("fig2");
    cfg["spectrum"]["symbols"] = Value::Array(vec![]);
    cfg["output_dir"] = Value::String(tmp.path().join("empty").to_str().unwrap().into());
    let path = write_config(tmp.path(), &cfg);
    let out = cfbmc(&["spectrum", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
    let dir = tmp.path().join("empty");
    assert!(files_with_prefix(&dir, "pulse_").is_empty());
    assert!(files_with_prefix(&dir, "esd_").is_empty());
}

#[test]
fn fig5_maps_and_metadata() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("fig5");
    assert!(run_preset("fig5", &out).status.success());
    assert_eq!(files_with_prefix(&out, "leakage_").iter().filter(|n| n.ends_with(".csv")).count(), 9);
    assert_eq!(files_with_prefix(&out, "leakage_").iter().filter(|n| n.ends_with(".json")).count(), 9);

    let meta = read_json(&out.join("leakage_k8_l1_off0.json"));
    assert_eq!(meta["source"]["k"], 8);
    assert_eq!(meta["offsets"]["delta_n"], 4);
    assert_eq!(meta["windows"]["tx"], "rectangular");
    assert_eq!(meta["clamp_db"], -60.0);
    assert_eq!(meta["flat_coverage"], true);
    assert_eq!(meta["config"]["packet"]["num_complex_slots"], 8);
    assert_eq!(read_json(&out.join("leakage_k8_l1_off1.json"))["flat_coverage"], false);

    // The flat-coverage offset only reaches the neighbouring subcarriers.
    let csv = fs::read_to_string(out.join("leakage_k8_l1_off0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p,m,gain,gain_db"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 16 * 16);
    for row in &rows {
        let p: usize = row[0].parse().unwrap();
        let db: f64 = row[3].parse().unwrap();
        assert!(is_c_scientific(row[2]) && is_c_scientific(row[3]));
        if !(7..=9).contains(&p) {
            assert!(db < -200.0, "{row:?}");
        }
    }
    let source = rows.iter().find(|r| r[0] == "8" && r[1] == "1").unwrap();
    assert!(source[3].parse::<f64>().unwrap().abs() < 3.0);
}

#[test]
fn single_source_single_offset() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_config("fig6");
    cfg["leakage"]["sources"] = serde_json::json!([[3, 5]]);
    cfg["leakage"]["offsets"] = serde_json::json!([{ "delta_n": -2, "delta_f": 0.001 }]);
    cfg["output_dir"] = Value::String(tmp.path().join("one").to_str().unwrap().into());
    let path = write_config(tmp.path(), &cfg);
    let out = cfbmc(&["leakage", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = read_json(&tmp.path().join("one/manifest.json"));
    assert_eq!(manifest["maps"].as_array().unwrap().len(), 1);
    assert_eq!(manifest["maps"][0]["csv"], "leakage_k3_l5_off0.csv");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    for preset in ["fig3", "fig6"] {
        let (a, b) = (tmp.path().join(format!("{preset}a")), tmp.path().join(format!("{preset}b")));
        assert!(run_preset(preset, &a).status.success());
        assert!(run_preset(preset, &b).status.success());
        for name in files_with_prefix(&a, "").into_iter().filter(|n| n.ends_with(".csv")) {
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{preset}/{name}");
        }
    }
}

#[test]
fn validate_default_passes() {
    let tmp = TempDir::new().unwrap();
    let out = cfbmc(&["validate", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&tmp.path().join("validate_report.json"));
    assert_eq!(report["passed"], true);
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["nyquist_pairs", "dual_path_equivalence", "perfect_reconstruction", "synchronized_orthogonality"] {
        assert!(names.contains(&want), "{names:?}");
    }
    assert_eq!(report["config"]["experiment"], "validate");
}

#[test]
fn injected_coefficient_error_fails_validation() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_config("fig5");
    cfg["validate"] = serde_json::json!({ "trials": 20, "seed": 3, "inject_coefficient_error": 0.01 });
    cfg["output_dir"] = Value::String(tmp.path().join("broken").to_str().unwrap().into());
    let path = write_config(tmp.path(), &cfg);
    let out = cfbmc(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nyquist_pairs"));
    let report = read_json(&tmp.path().join("broken/validate_report.json"));
    assert_eq!(report["passed"], false);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"nyquist_pairs"), "{failed:?}");
    assert!(failed.contains(&"energy_equals_overlap"), "{failed:?}");
}

#[test]
fn single_overlap_skips_pair_identities() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = preset_config("fig5");
    cfg["packet"]["num_complex_slots"] = 1.into();
    cfg["packet"]["rx_rolloff"] = 4.into();
    cfg["validate"] = serde_json::json!({ "trials": 20, "seed": 9 });
    cfg["output_dir"] = Value::String(tmp.path().join("m1").to_str().unwrap().into());
    let path = write_config(tmp.path(), &cfg);
    let out = cfbmc(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = read_json(&tmp.path().join("m1/validate_report.json"));
    let status =
        |name: &str| report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()["status"].clone();
    assert_eq!(status("nyquist_pairs"), "skipped");
    assert_eq!(status("odd_series_cancellation"), "skipped");
    assert_eq!(status("energy_equals_overlap"), "pass");
    assert_eq!(status("perfect_reconstruction"), "pass");
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(cfbmc(&["run", "--preset", "fig4"]).status.code(), Some(1));
    assert_eq!(cfbmc(&["run", "--config", tmp.path().join("missing.json").to_str().unwrap()]).status.code(), Some(1));

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{ \"packet\": 3 }").unwrap();
    assert_eq!(cfbmc(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(1));

    let out = tmp.path().join("g");
    let res = cfbmc(&["spectrum", "--preset", "fig2", "--grid", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("grid"));
}

#[test]
fn grid_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("g");
    let res = cfbmc(&["spectrum", "--preset", "fig2", "--grid", "64", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    assert_eq!(fs::read_to_string(out.join("esd_k2_l2.csv")).unwrap().lines().count(), 65);
    assert_eq!(read_json(&out.join("manifest.json"))["config"]["spectrum"]["grid_size"], 64);
}

#[test]
fn printed_config_round_trips() {
    let tmp = TempDir::new().unwrap();
    for preset in ["fig2", "fig3", "fig5", "fig6"] {
        let first = cfbmc(&["config", "--preset", preset]).stdout;
        let path = tmp.path().join(format!("{preset}.json"));
        fs::write(&path, &first).unwrap();
        let second = cfbmc(&["config", "--config", path.to_str().unwrap()]).stdout;
        assert_eq!(first, second, "{preset}");
    }
}
