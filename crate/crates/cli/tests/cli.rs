use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn nrwa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrwa")).args(args).env_remove("PULSE_OUT_DIR").output().unwrap()
}

fn run_into(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    nrwa(&args)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("scenario.json");
    fs::write(&p, body).unwrap();
    p
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn list_names_every_scenario() {
    let o = nrwa(&["list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for s in ["cd_allen_eberly", "invariant_few", "invariant_many", "propagate_custom"] {
        assert!(text.contains(s), "{s} missing from\n{text}");
    }
    assert!(text.contains("fig1.json"));
}

#[test]
fn few_oscillation_run_writes_documented_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_into(&config("fig3.json"), dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let headers = [
        ("theta_alpha.csv", "t_ns,theta_rad,alpha_rad,beta_rad"),
        ("rabi_detuning.csv", "t_ns,rabi_over_2pi_GHz,detuning_over_2pi_GHz,field_over_2pi_GHz"),
        ("populations.csv", "t_ns,p_g,p_e"),
        ("omega0.csv", "t_ns,omega0_over_2pi_GHz"),
    ];
    for (file, header) in headers {
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{file}");
    }
    let m = manifest(dir.path());
    assert_eq!(m["scenario"], "invariant_few");
    assert!(m["comment"].as_str().unwrap().contains("500 MHz"));
    for f in m["files"].as_array().unwrap() {
        let len = fs::metadata(dir.path().join(f.as_str().unwrap())).unwrap().len();
        assert!(len > 0, "{f} empty");
    }
    assert!(m["files"].as_array().unwrap().iter().any(|f| f == "design.json"));
    assert!(m["acceptance"].as_array().unwrap().iter().all(|c| c["passed"] == true), "{m:#}");
    // parameters echo the converted values
    assert_eq!(m["parameters"]["omega_l"].as_f64().unwrap(), std::f64::consts::TAU * 0.5);
}

#[test]
fn csv_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(run_into(&config("fig1.json"), d.path(), &["--steps", "20000"]).status.success());
    }
    for f in ["phases.csv", "populations.csv", "omega0_tilde.csv", "field.csv"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between identical runs");
    }
    assert_eq!(manifest(a.path())["grid"]["n_steps"], 20000);
    let header = fs::read_to_string(a.path().join("field.csv")).unwrap();
    assert!(header.starts_with("t_ns,field_over_2pi_GHz,rabi_tilde_over_2pi_GHz,singular\n"));
}

#[test]
fn unknown_scenario_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"scenario": "adiabatic_passage", "parameters": {}}"#);
    let o = run_into(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("invariant_few") && err.contains("propagate_custom"), "{err}");
}

#[test]
fn missing_parameter_and_coarse_grid_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"scenario": "cd_allen_eberly", "parameters": {"omega_m": "2pi*3MHz", "delta": "2pi*200MHz", "omega_l": "2pi*10GHz", "tf": "0.4ns"}}"#,
    );
    let o = run_into(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("t0"));

    let o = run_into(&config("fig1.json"), &dir.path().join("out"), &["--steps", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("resolution"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn numerical_failure_exits_with_code_three() {
    // the literal sinh envelope makes the CD term undefined at the centre sample
    let dir = tempfile::tempdir().unwrap();
    let body = fs::read_to_string(config("fig1.json")).unwrap().replace("\"sech\"", "\"sinh_literal\"");
    let cfg = write_config(dir.path(), &body);
    let o = run_into(&cfg, &dir.path().join("out"), &["--steps", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("counterdiabatic term"));
}

#[test]
fn output_directory_defaults_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("env_out");
    let o = Command::new(env!("CARGO_BIN_EXE_nrwa"))
        .args(["run", config("custom.json").to_str().unwrap()])
        .env("PULSE_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(target.join("populations.csv")).unwrap();
    assert!(text.starts_with("t_ns,p_g,p_e\n"));
    // resonant constant drive: P_e(t) = sin²(Ω_R t / 2), half a cycle over 5 ns
    let last = text.lines().last().unwrap();
    let p_e: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    let expected = (0.5 * std::f64::consts::TAU * 0.1 * 5.0).sin().powi(2);
    assert!((p_e - expected).abs() < 1e-8, "{p_e} vs {expected}");
}

#[test]
fn many_oscillation_contrast_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_into(&config("fig4_seed.json"), dir.path(), &[]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("populations.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t_ns,p_g_exact,p_g_rwa,p_e_exact,p_e_rwa");
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["start"]["p_e_final_exact"].as_f64().unwrap() < 0.9);
    assert!(summary["start"]["p_e_final_rwa"].as_f64().unwrap() < 0.9);
}
